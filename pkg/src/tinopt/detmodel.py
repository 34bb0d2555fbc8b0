"""Truncated deterministic channel with signed fixed-point inputs.

All truncations are exact: a binary64 gain is an integer over a power of
two, and a B-bit input is an integer over 2**B, so every product is
truncated with integer division and no rounding can leak into a verdict.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConsistencyError, InvalidInstanceError, ResourceLimitError, ShapeError
from .model import ensure_strengths

LEMMA2_DEPTH_CAP = 8


def truncate(x) -> int:
    """Integer part of x, rounding toward zero."""
    if isinstance(x, float) and not math.isfinite(x):
        raise ValueError(f"cannot truncate non-finite value {x!r}")
    return math.trunc(x)


def bit_depth(h: float) -> int:
    """floor(log2 |h|) for |h| >= 1, else 0 (no bit reaches above the noise)."""
    h = abs(float(h))
    if not math.isfinite(h):
        raise InvalidInstanceError(f"non-finite gain {h!r}")
    if h < 1:
        return 0
    return math.frexp(h)[1] - 1


@dataclass(frozen=True)
class FixedPointSample:
    """Signed B-bit fractional input; ``bits_*[b-1]`` is the weight-2**-b digit."""

    sign_r: int
    sign_i: int
    bits_r: Tuple[int, ...]
    bits_i: Tuple[int, ...]

    def __post_init__(self):
        if self.sign_r not in (-1, 1) or self.sign_i not in (-1, 1):
            raise ValueError("signs must be +1 or -1")
        br = tuple(int(b) for b in self.bits_r)
        bi = tuple(int(b) for b in self.bits_i)
        if len(br) != len(bi):
            raise ShapeError("real and imaginary parts need the same bit depth")
        if any(b not in (0, 1) for b in br + bi):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits_r", br)
        object.__setattr__(self, "bits_i", bi)

    @property
    def B(self) -> int:
        return len(self.bits_r)

    @staticmethod
    def _int(bits):
        n = 0
        for b in bits:
            n = (n << 1) | b
        return n

    @cached_property
    def int_r(self) -> int:
        return self._int(self.bits_r)

    @cached_property
    def int_i(self) -> int:
        return self._int(self.bits_i)

    @classmethod
    def from_ints(cls, sign_r, n_r, sign_i, n_i, B):
        def bits(n):
            if not 0 <= n < 2**B:
                raise ValueError(f"{n} does not fit in {B} fractional bits")
            return tuple((n >> (B - 1 - k)) & 1 for k in range(B))

        return cls(sign_r, sign_i, bits(n_r), bits(n_i))

    @classmethod
    def random(cls, B, rng=None):
        rng = rng or random.Random()
        return cls.from_ints(
            rng.choice((-1, 1)), rng.getrandbits(B) if B else 0,
            rng.choice((-1, 1)), rng.getrandbits(B) if B else 0, B,
        )

    def value(self) -> complex:
        scale = 2.0**-self.B if self.B else 0.0
        return complex(self.sign_r * self.int_r * scale, self.sign_i * self.int_i * scale)


@dataclass(frozen=True)
class DetChannelSpec:
    """Complex link gains (receivers x transmitters) with their bit depths."""

    gains: Tuple[Tuple[complex, ...], ...]

    def __init__(self, gains):
        rows = tuple(tuple(complex(h) for h in row) for row in gains)
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise ShapeError("gain matrix must be rectangular and nonempty")
        object.__setattr__(self, "gains", rows)

    @property
    def n_receivers(self):
        return len(self.gains)

    @property
    def n_transmitters(self):
        return len(self.gains[0])

    @property
    def depths_r(self):
        return tuple(tuple(bit_depth(h.real) for h in row) for row in self.gains)

    @property
    def depths_i(self):
        return tuple(tuple(bit_depth(h.imag) for h in row) for row in self.gains)

    def max_depth(self):
        return max(max(max(r) for r in self.depths_r), max(max(r) for r in self.depths_i))


def _scaled_trunc(h: float, sign: int, n: int, B: int, lo: int, hi: int) -> int:
    """trunc(sign * h * sum_{b=lo..hi} bit_b 2**-b) for the B-bit integer n."""
    if hi < lo:
        return 0
    part = (n >> (B - hi)) & ((1 << (hi - lo + 1)) - 1)
    if not part or not h:
        return 0
    p, q = float(h).as_integer_ratio()
    s = sign if p > 0 else -sign
    return s * ((abs(p) * part) // (q << hi))


def _link_terms(h: complex, x: FixedPointSample):
    """The four truncated products of one link, as (re_r, re_i, im_r, im_i)."""
    mr, mi = bit_depth(h.real), bit_depth(h.imag)
    if x.B < max(mr, mi):
        raise InvalidInstanceError(f"input has {x.B} bits but the link needs {max(mr, mi)}")
    nr, ni, B = x.int_r, x.int_i, x.B
    return (
        _scaled_trunc(h.real, x.sign_r, nr, B, 1, mr),
        _scaled_trunc(h.imag, x.sign_i, ni, B, 1, mi),
        _scaled_trunc(h.imag, x.sign_r, nr, B, 1, mi),
        _scaled_trunc(h.real, x.sign_i, ni, B, 1, mr),
    )


def _check_inputs(spec, inputs, receiver):
    if len(inputs) != spec.n_transmitters:
        raise ShapeError(f"need {spec.n_transmitters} inputs, got {len(inputs)}")
    if not 0 <= receiver < spec.n_receivers:
        raise ShapeError(f"receiver {receiver} out of range")


def det_output(spec: DetChannelSpec, inputs: Sequence[FixedPointSample], receiver: int):
    """(real, imag) integer output of one receiver."""
    _check_inputs(spec, inputs, receiver)
    re = im = 0
    for h, x in zip(spec.gains[receiver], inputs):
        rr, ri, ir, ii = _link_terms(h, x)
        re += rr - ri
        im += ir + ii
    return re, im


@dataclass(frozen=True)
class SplitOutput:
    upper: Tuple[int, int]
    lower: Tuple[int, int]
    carry: Tuple[int, int]
    full: Tuple[int, int]


def split_output(spec, inputs, receiver, split_depth, transmitter=None) -> SplitOutput:
    """Decompose a receiver output into upper levels, lower levels and a carry.

    The upper part holds bits 1..split_depth of the intended transmitter
    seen through the real part of its gain; the lower part holds the
    remaining bits of those terms, the imaginary-gain terms of the intended
    link and every interfering link. The carry is what truncating the two
    pieces separately loses.
    """
    _check_inputs(spec, inputs, receiver)
    t = receiver if transmitter is None else transmitter
    h = spec.gains[receiver][t]
    mr, mi = bit_depth(h.real), bit_depth(h.imag)
    if not 0 <= split_depth <= mr:
        raise InvalidInstanceError(f"split depth {split_depth} outside 0..{mr}")
    x = inputs[t]
    if x.B < max(mr, mi):
        raise InvalidInstanceError(f"input has {x.B} bits but the link needs {max(mr, mi)}")
    B, nr, ni = x.B, x.int_r, x.int_i
    upper = (
        _scaled_trunc(h.real, x.sign_r, nr, B, 1, split_depth),
        _scaled_trunc(h.real, x.sign_i, ni, B, 1, split_depth),
    )
    low_re = _scaled_trunc(h.real, x.sign_r, nr, B, split_depth + 1, mr)
    low_im = _scaled_trunc(h.real, x.sign_i, ni, B, split_depth + 1, mr)
    low_re -= _scaled_trunc(h.imag, x.sign_i, ni, B, 1, mi)
    low_im += _scaled_trunc(h.imag, x.sign_r, nr, B, 1, mi)
    for k, (g, xk) in enumerate(zip(spec.gains[receiver], inputs)):
        if k == t:
            continue
        rr, ri, ir, ii = _link_terms(g, xk)
        low_re += rr - ri
        low_im += ir + ii
    full = det_output(spec, inputs, receiver)
    carry = (full[0] - upper[0] - low_re, full[1] - upper[1] - low_im)
    if carry[0] not in (-1, 0, 1) or carry[1] not in (-1, 0, 1):
        raise ConsistencyError(f"carry {carry} outside {{-1, 0, 1}}")
    return SplitOutput(upper, (low_re, low_im), carry, full)


@dataclass(frozen=True)
class Lemma2Result:
    gain: complex
    depth_r: int
    depth_i: int
    domain_size: int
    image_size: int
    witness: Optional[tuple] = None

    @property
    def passed(self) -> bool:
        return self.domain_size == self.image_size


def _trunc_table(h: float, signed: np.ndarray, M: int, m: int) -> np.ndarray:
    # trunc(sign(n) * h * (top m of the M bits of |n|) / 2**m) for each signed n
    if m == 0 or h == 0:
        return np.zeros_like(signed)
    q = Fraction(h)
    mag = np.abs(signed) >> (M - m)
    num = abs(q.numerator) * mag
    den = q.denominator << m
    if abs(q.numerator) * (2**m) >= 2**62 or den >= 2**62:
        raise ResourceLimitError("gain precision bits", q.denominator.bit_length(), 62)
    s = np.sign(signed) * (1 if q > 0 else -1)
    return s * (num // den)


def lemma2_bijectivity(h: complex, cap: int = LEMMA2_DEPTH_CAP) -> Lemma2Result:
    """Exhaustively check that the truncated rotation of a complex gain is injective.

    The domain is every distinct signed input pair whose magnitudes use the
    first max(mR, mI) fractional bits; each input maps to
    (trunc(hR xR) - trunc(hI xI), trunc(hI xR) + trunc(hR xI)) with the real
    gain part seeing mR bits and the imaginary part mI bits.
    """
    h = complex(h)
    mr, mi = bit_depth(h.real), bit_depth(h.imag)
    M = max(mr, mi)
    if M > cap:
        raise ResourceLimitError("bit depth", M, cap)
    top = (1 << M) - 1
    n = np.arange(-top, top + 1, dtype=np.int64)
    a_rr = _trunc_table(h.real, n, M, mr)
    a_ii = _trunc_table(h.imag, n, M, mi)
    a_ir = _trunc_table(h.imag, n, M, mi)
    a_ri = _trunc_table(h.real, n, M, mr)
    s_re = a_rr[:, None] - a_ii[None, :]
    s_im = a_ir[:, None] + a_ri[None, :]
    keys = np.stack([s_re.ravel(), s_im.ravel()], axis=1)
    uniq, first, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    witness = None
    if len(uniq) != keys.shape[0]:
        dup = uniq[np.argmax(counts > 1)]
        hits = np.nonzero((keys == dup).all(axis=1))[0][:2]
        size = len(n)
        pair = tuple(
            (Fraction(int(n[k // size]), 1 << M), Fraction(int(n[k % size]), 1 << M)) for k in hits
        )
        witness = (pair, (int(dup[0]), int(dup[1])))
    return Lemma2Result(h, mr, mi, keys.shape[0], len(uniq), witness)


@dataclass(frozen=True)
class TailCheck:
    gain: float
    depth: int
    worst: float
    cases: int

    @property
    def passed(self) -> bool:
        return self.worst <= 2


def tail_bound_check(h: float, B_tail: int, rng=None, n_random: int = 32) -> TailCheck:
    """Largest |h * sum_{b > m} x_b 2**-b| over the all-ones tail and random tails."""
    if not abs(h) >= 1:
        raise InvalidInstanceError(f"tail check needs |h| >= 1, got {h}")
    m = bit_depth(h)
    if B_tail < m:
        raise InvalidInstanceError(f"tail depth {B_tail} below the signal depth {m}")
    hq = abs(Fraction(h))
    width = B_tail - m
    worst = hq * (Fraction(1, 2**m) - Fraction(1, 2**B_tail))
    rng = rng or random.Random(0)
    cases = 1
    for _ in range(n_random if width else 0):
        tail = rng.getrandbits(width)
        worst = max(worst, hq * Fraction(tail, 2**B_tail))
        cases += 1
    return TailCheck(float(h), m, float(worst), cases)


@dataclass(frozen=True)
class LevelMatrix:
    levels: Tuple[Tuple[int, ...], ...]
    violations: Tuple[Tuple[int, int, int], ...] = ()

    @property
    def superadditive(self) -> bool:
        return not self.violations


def _half_log2_floor(a: Fraction, P) -> int:
    mant, exp = math.frexp(P)
    if mant == 0.5:
        return math.floor(a * (exp - 1) / 2)
    return math.floor(float(a) * math.log2(P) / 2)


def level_matrix(alpha, P) -> LevelMatrix:
    """m_ij = floor(log2(P**alpha_ij) / 2) and the triples where m_ii < m_ij + m_ki."""
    if not P > 1:
        raise InvalidInstanceError(f"P must exceed 1, got {P}")
    alpha = ensure_strengths(alpha)
    m = tuple(tuple(_half_log2_floor(a, P) for a in row) for row in alpha.alpha)
    bad = []
    n = min(alpha.n_receivers, alpha.n_transmitters)
    for i in range(n):
        for j in range(alpha.n_transmitters):
            for k in range(alpha.n_receivers):
                if i in (j, k):
                    continue
                if m[i][i] < m[i][j] + m[k][i]:
                    bad.append((i, j, k))
    return LevelMatrix(m, tuple(bad))


# --- sweeps used by the CLI and the acceptance suite ---------------------------------


def random_gain(rng, max_depth=5, min_depth=1, same_sign=None) -> complex:
    """Complex gain whose real and imaginary bit depths lie in [min_depth, max_depth]."""
    mr = rng.randint(min_depth, max_depth)
    mi = rng.randint(min_depth, max_depth)
    re = rng.uniform(2**mr, 2 ** (mr + 1))
    im = rng.uniform(2**mi, 2 ** (mi + 1))
    sr = rng.choice((-1, 1))
    if same_sign is None:
        si = rng.choice((-1, 1))
    else:
        si = sr if same_sign else -sr
    return complex(sr * min(re, math.nextafter(2 ** (mr + 1), 0)), si * min(im, math.nextafter(2 ** (mi + 1), 0)))


def random_spec(rng, max_depth, n_tx=None, n_rx=None) -> DetChannelSpec:
    n_tx = n_tx or rng.randint(1, 3)
    n_rx = n_rx or n_tx
    gains = []
    for _ in range(n_rx):
        row = []
        for _ in range(n_tx):
            if rng.random() < 0.2:
                row.append(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))
            else:
                row.append(random_gain(rng, max_depth, 0))
        gains.append(row)
    return DetChannelSpec(gains)


@dataclass
class CarrySweep:
    cases: int = 0
    carries: set = None
    witness: Optional[dict] = None

    @property
    def passed(self):
        return self.witness is None and self.carries <= {-1, 0, 1}


def carry_sweep(n_samples, rng=None, max_depth=16) -> CarrySweep:
    """Random split_output evaluations over random specs, inputs and split depths."""
    rng = rng or random.Random(0)
    out = CarrySweep(0, set())
    spec = None
    for s in range(n_samples):
        if s % 50 == 0:
            spec = random_spec(rng, max_depth)
        B = max(spec.max_depth(), rng.randint(0, max_depth))
        inputs = [FixedPointSample.random(B, rng) for _ in range(spec.n_transmitters)]
        rx = rng.randrange(spec.n_receivers)
        tx = rx if rx < spec.n_transmitters else 0
        depth = rng.randint(0, bit_depth(spec.gains[rx][tx].real))
        try:
            res = split_output(spec, inputs, rx, depth, tx)
        except ConsistencyError as exc:
            out.witness = {"gains": [[str(h) for h in r] for r in spec.gains], "error": str(exc)}
            break
        out.carries.update(res.carry)
        out.cases += 1
    return out


def carry_exhaustive(h: complex, B: int, split_depth: int) -> CarrySweep:
    """Every signed B-bit input on a single link, split at ``split_depth``."""
    spec = DetChannelSpec([[h]])
    out = CarrySweep(0, set())
    for sr in (-1, 1):
        for si in (-1, 1):
            for nr in range(2**B):
                for ni in range(2**B):
                    x = FixedPointSample.from_ints(sr, nr, si, ni, B)
                    res = split_output(spec, [x], 0, split_depth)
                    out.carries.update(res.carry)
                    out.cases += 1
    return out


def carry_samples(h: complex, n_samples: int, rng=None, extra_bits: int = 4) -> CarrySweep:
    """Random signed inputs on a single link of gain h, split at random depths."""
    rng = rng or random.Random(0)
    spec = DetChannelSpec([[h]])
    top = bit_depth(complex(h).real)
    B = spec.max_depth() + extra_bits
    out = CarrySweep(0, set())
    for _ in range(n_samples):
        x = FixedPointSample.random(B, rng)
        try:
            res = split_output(spec, [x], 0, rng.randint(0, top))
        except ConsistencyError as exc:
            out.witness = {"gain": str(h), "input": [str(v) for v in (x.value().real, x.value().imag)], "error": str(exc)}
            break
        out.carries.update(res.carry)
        out.cases += 1
    return out
