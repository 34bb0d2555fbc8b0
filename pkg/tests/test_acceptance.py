"""Acceptance criteria, one test each, every one printing a single PASS/FAIL line.

Run as ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import math
import os
import random
import sys
import time
from functools import lru_cache

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import oracles  # noqa: E402
from tinopt.converse import gap_certificate, outer_sum  # noqa: E402
from tinopt.detmodel import bit_depth, carry_sweep, lemma2_bijectivity, random_gain, tail_bound_check  # noqa: E402
from tinopt.model import (  # noqa: E402
    StrengthMatrix,
    check_tin_condition,
    find_tin_matching,
    random_alpha,
    random_tin_alpha,
    reduce_to_ic,
)
from tinopt.region import build_region, contains, oracle_sum_gdof, sum_gdof, x_sum_gdof  # noqa: E402
from tinopt.tin import gdof_slope, power_control_feasible  # noqa: E402

# strengths on a 1/1000 grid; see the notes on exact ties in test_converse
DENOMINATOR = 1000
SEED = 20240601


@lru_cache(maxsize=None)
def criterion1_instances():
    rng = random.Random(SEED)
    return tuple(random_tin_alpha((2, 3, 4)[k % 3], rng, denominator=DENOMINATOR) for k in range(200))


def _line(n, passed, detail):
    return f"criterion {n}: {'PASS' if passed else 'FAIL'} ({detail})"


def _emit(request, text):
    capman = request.config.pluginmanager.getplugin("capturemanager") if request else None
    if capman:
        with capman.global_and_fixture_disabled():
            print("\n" + text)
    else:
        print(text)


def criterion_1():
    t0 = time.perf_counter()
    mismatches = []
    for idx, a in enumerate(criterion1_instances()):
        lp = sum_gdof(a).value
        ref = oracle_sum_gdof(a)
        if lp != ref:
            mismatches.append((idx, lp, ref))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 60
    return ok, f"200 instances K in 2..4, {len(mismatches)} mismatches, {elapsed:.1f} s of 60 s"


def criterion_2():
    bad, not_identical = [], 0
    for idx, a in enumerate(criterion1_instances()):
        cert = x_sum_gdof(a)
        if cert.value != sum_gdof(a).value:
            bad.append(idx)
        if not cert.identical_constraints:
            not_identical += 1
    ok = not bad and not_identical == 0
    return ok, f"{len(bad)} value mismatches, {not_identical} certificates without identical constraint sets"


def criterion_3():
    rng = random.Random(SEED + 3)
    grid = (1e2, 1e4, 1e6, 1e8)
    fails, worst_ratio = 0, 0.0
    for k in range(100):
        a = random_tin_alpha(2 + k % 2, rng, denominator=DENOMINATOR)
        for P in grid:
            c = gap_certificate(a, P)
            fails += not c.passed
            worst_ratio = max(worst_ratio, c.gap / c.gap_bound)
    worked = gap_certificate([[1, 0.4], [0.4, 1]], 1e6)
    worked_ok = (
        worked.passed
        and abs(worked.gap - 2.16) < 0.01
        and abs(worked.gap_bound - 2 * math.log2(6)) < 1e-12
        and abs(worked.gap_bound - 5.17) < 0.01
    )
    ok = fails == 0 and worked_ok
    detail = (
        f"400 certificates, {fails} failures, worst gap/bound {worst_ratio:.3f}; "
        f"worked gap {worked.gap:.4f} vs bound {worked.gap_bound:.4f}"
    )
    return ok, detail


def criterion_4():
    worst_slope = worst_outer = 0.0
    log2P = math.log2(1e12)
    for a in criterion1_instances():
        target = float(sum_gdof(a).value)
        worst_slope = max(worst_slope, abs(gdof_slope(a, 1e10, 1e12) - target))
        worst_outer = max(worst_outer, abs(outer_sum(a, 1e12) / log2P - target))
    ok = worst_slope <= 0.05 and worst_outer <= 0.05
    return ok, f"max slope deviation {worst_slope:.4f}, max outer/log2P deviation {worst_outer:.4f}, tolerance 0.05"


def criterion_5():
    rng = random.Random(SEED + 5)
    disagreements = exceptions = feasible = 0
    for k in range(500):
        K = rng.randint(1, 4)
        a = random_tin_alpha(K, rng, denominator=20) if k % 2 else random_alpha(K, K, rng, denominator=20, high=2)
        region = build_region(a)
        # targets drawn up to each user's own strength, so both verdicts occur
        d = [a.alpha[i][i] * rng.randint(0, 20) / 20 for i in range(K)]
        try:
            got = bool(power_control_feasible(a, d))
            inside = contains(region, d)[0]
        except Exception:  # the criterion counts exceptions instead of stopping
            exceptions += 1
            continue
        feasible += got
        disagreements += got != inside
    ok = disagreements == 0 and exceptions == 0
    return ok, f"500 pairs ({feasible} feasible), {disagreements} disagreements, {exceptions} exceptions"


def criterion_6():
    rng = random.Random(SEED + 6)
    t0 = time.perf_counter()
    collisions = 0
    signs = {True: 0, False: 0}
    depths = set()
    for k in range(100):
        same = bool(k % 2)
        h = random_gain(rng, max_depth=5, min_depth=1, same_sign=same)
        res = lemma2_bijectivity(h)
        signs[same] += 1
        depths.update((res.depth_r, res.depth_i))
        collisions += res.domain_size - res.image_size
    elapsed = time.perf_counter() - t0
    ok = collisions == 0 and elapsed < 30 and all(signs.values()) and depths <= set(range(1, 6))
    return ok, (
        f"100 gains, depths {min(depths)}..{max(depths)}, {signs[True]} same-sign / {signs[False]} "
        f"opposite-sign, {collisions} collisions, {elapsed:.1f} s of 30 s"
    )


def _tail_grid():
    # log-spaced magnitudes over 12 octaves plus the extremal point just below each power of two
    n_log = 1000 - 12
    grid = [2 ** (12 * k / (n_log - 1)) for k in range(n_log)]
    grid += [math.nextafter(2.0 ** (m + 1), 0) for m in range(12)]
    return grid


def criterion_7():
    sweep = carry_sweep(100_000, random.Random(SEED + 7))
    grid = _tail_grid()
    rng = random.Random(SEED + 77)
    worst = 0.0
    over = 0
    for h in grid:
        tc = tail_bound_check(h, bit_depth(h) + 40, rng, n_random=8)
        worst = max(worst, tc.worst)
        over += not tc.passed
    ok = sweep.passed and sweep.cases == 100_000 and over == 0 and len(grid) == 1000
    return ok, (
        f"{sweep.cases} split_output samples, carries {sorted(sweep.carries)}; "
        f"{len(grid)} tail gains, worst tail {worst!r} (bound 2)"
    )


def criterion_8():
    rng = random.Random(SEED + 8)
    shapes = [(2, 4), (3, 4), (4, 3)]
    disagreements = found = reduced_bad = 0
    for k in range(100):
        M, N = shapes[k % 3]
        a = random_alpha(M, N, rng, denominator=10, high=1)
        if rng.random() < 0.5:
            # plant strong links on a random injective pairing
            rows = [list(r) for r in a.alpha]
            kappa = min(M, N)
            for r, t in zip(rng.sample(range(M), kappa), rng.sample(range(N), kappa)):
                rows[r][t] += 2
            a = StrengthMatrix(rows)
        expected = oracles.matchings(a.alpha)
        got = find_tin_matching(a)
        if (got is None) != (not expected) or (got is not None and got.pairs not in expected):
            disagreements += 1
        if got is not None:
            found += 1
            reduced_bad += not check_tin_condition(reduce_to_ic(a, got)).holds
    ok = disagreements == 0 and reduced_bad == 0
    return ok, f"100 instances ({found} with a matching), {disagreements} disagreements, {reduced_bad} reduced instances failing"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n, request):
    ok, detail = CRITERIA[n - 1]()
    _emit(request, _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        print(_line(n, ok, detail), flush=True)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
