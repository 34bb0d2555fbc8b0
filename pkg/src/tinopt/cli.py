"""Command-line entry point: ``tinopt <command> --input instance.json``."""

from __future__ import annotations

import argparse
import json
import math
import random
import sys

import numpy as np

from . import io
from .converse import gap_certificate, outer_sum
from .detmodel import (
    LEMMA2_DEPTH_CAP,
    bit_depth,
    carry_samples,
    carry_sweep,
    lemma2_bijectivity,
    random_gain,
    tail_bound_check,
)
from .errors import InfeasibleError, ResourceLimitError, TinOptError
from .model import check_tin_condition, find_tin_matching, fraction_str, reduce_to_ic
from .region import build_region, lp_max_sum, x_sum_gdof
from .tin import achievable_sum

DEFAULT_P_GRID = (1e2, 1e4, 1e6, 1e8)
CARRY_SAMPLES_PER_GAIN = 200
TAIL_EXTRA_BITS = 16


class UsageError(Exception):
    pass


def _num(x):
    """Float rounded to 12 significant digits; NaN becomes null."""
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _dec(x) -> str:
    return "" if not math.isfinite(float(x)) else io.fmt_decimal(x)


def _instance(args):
    if args.input in (None, "-"):
        return io.parse_instance(sys.stdin.read())
    return io.load_instance(args.input)


# --- commands ------------------------------------------------------------------------


def cmd_check(args):
    inst = _instance(args)
    rep = check_tin_condition(inst.alpha)
    viol = [
        {"user": v.user + 1, "lhs": fraction_str(v.lhs), "rhs": fraction_str(v.rhs)}
        for v in rep.violations
    ]
    results = {"holds": rep.holds, "violations": viol}
    rows = [[v["user"], v["lhs"], v["rhs"]] for v in viol]
    return inst.label, 0 if rep.holds else 1, results, (["user", "lhs", "rhs"], rows)


def cmd_sumgdof(args):
    inst = _instance(args)
    region = build_region(inst.alpha)
    opt = lp_max_sum(region)
    xcert = x_sum_gdof(inst.alpha)
    results = {
        "sum_gdof": fraction_str(opt.value),
        "sum_gdof_decimal": _num(opt.value),
        "argmax": [fraction_str(v) for v in opt.argmax],
        "x_channel_equal": xcert.value == opt.value,
        "x_channel_constraints_identical": xcert.identical_constraints,
        "tin_optimal": region.exact,
    }
    if args.region:
        results["region"] = region.to_json()
    rows = [[i + 1, fraction_str(v), _dec(v)] for i, v in enumerate(opt.argmax)]
    # a non-TIN instance still gets its polytope optimum, but the verdict is fail
    return inst.label, 0 if region.exact else 1, results, (["user", "argmax", "argmax_decimal"], rows)


def _parse_grid(text):
    try:
        grid = [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"bad --P-grid: {exc}") from exc
    if not grid or any(not p > 1 for p in grid):
        raise UsageError("every P in --P-grid must exceed 1")
    return grid


def cmd_gap(args):
    inst = _instance(args)
    if args.P_grid:
        grid = _parse_grid(args.P_grid)
    elif inst.P is not None:
        grid = [inst.P]
    else:
        grid = list(DEFAULT_P_GRID)
    certs = [gap_certificate(inst.alpha, P) for P in grid]
    applicable = all(c.applicable for c in certs)
    passed = all(c.passed for c in certs)
    cert_json = []
    for c in certs:
        d = c.to_json()
        for key in ("P", "achievable", "outer", "gap", "bound"):
            d[key] = _num(d[key])
        cert_json.append(d)
    results = {
        "applicable": applicable,
        "pass": passed,
        "max_gap": _num(max(c.gap for c in certs)),
        "certificates": cert_json,
        "note": certs[0].note if applicable else "TIN condition fails: certificate not applicable",
    }
    header = ["P", "achievable", "outer", "gap", "bound", "pass", "applicable"]
    rows = [
        [_dec(c.P), _dec(c.achievable_sum), _dec(c.outer_sum), _dec(c.gap), _dec(c.gap_bound),
         str(c.passed).lower(), str(c.applicable).lower()]
        for c in certs
    ]
    return inst.label, 0 if passed else 1, results, (header, rows)


def cmd_xmatch(args):
    inst = _instance(args)
    m = find_tin_matching(inst.alpha)
    if m is None:
        return inst.label, 1, {"matching": "none"}, (["receiver", "transmitter"], [])
    reduced = reduce_to_ic(inst.alpha, m)
    opt = lp_max_sum(build_region(reduced))
    pairs = [[r + 1, t + 1] for r, t in m]
    results = {
        "matching": pairs,
        "reduced_alpha": [list(row) for row in reduced.to_strings()],
        "reduced_tin_holds": check_tin_condition(reduced).holds,
        "sum_gdof": fraction_str(opt.value),
        "argmax": [fraction_str(v) for v in opt.argmax],
    }
    return inst.label, 0, results, (["receiver", "transmitter"], pairs)


def _parse_gain(text):
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError as exc:
        raise UsageError(f"cannot parse gain {text!r}") from exc


def _load_gains(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read gains file {path}: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("gains")
    if not isinstance(doc, list) or not doc:
        raise UsageError("gains file must hold a non-empty list of gains")
    return [_parse_gain(g) for g in doc]


def _verification(check, parameters, cases, passed, witness=None):
    return {
        "check": check,
        "parameters": parameters,
        "cases_tested": int(cases),
        "pass": bool(passed),
        "witness": witness,
    }


def cmd_detverify(args):
    if args.depth is not None and args.depth > LEMMA2_DEPTH_CAP:
        raise ResourceLimitError("depth", args.depth, LEMMA2_DEPTH_CAP)
    if args.depth is not None and args.depth < 1:
        raise UsageError("--depth must be at least 1")
    rng = random.Random(args.seed)
    sources = [args.gains is not None, bool(args.gain), args.random is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --gains, --gain or --random")
    if args.random is not None:
        if args.random < 1:
            raise UsageError("--random needs a positive count")
        depth = args.depth or 5
        gains = [random_gain(rng, depth, 1) for _ in range(args.random)]
    else:
        gains = _load_gains(args.gains) if args.gains else [_parse_gain(g) for g in args.gain]
        depth = max(max(bit_depth(h.real), bit_depth(h.imag)) for h in gains)
        if args.depth is not None and depth > args.depth:
            raise ResourceLimitError("gain bit depth", depth, args.depth)

    checks = []
    bad = None
    cases = 0
    for h in gains:
        res = lemma2_bijectivity(h)
        cases += res.domain_size
        if not res.passed and bad is None:
            pair, image = res.witness
            bad = {"gain": str(h), "inputs": [[str(a), str(b)] for a, b in pair], "image": list(image)}
    checks.append(_verification("lemma2_bijectivity", {"gains": len(gains), "depth": depth},
                                cases, bad is None, bad))

    carries, cases, bad = set(), 0, None
    for h in gains:
        sweep = carry_samples(h, CARRY_SAMPLES_PER_GAIN, rng)
        carries |= sweep.carries
        cases += sweep.cases
        if not sweep.passed and bad is None:
            bad = sweep.witness or {"gain": str(h), "carries": sorted(sweep.carries)}
    if args.random is not None:
        sweep = carry_sweep(args.random * 10, rng, max_depth=depth)
        carries |= sweep.carries
        cases += sweep.cases
        if not sweep.passed and bad is None:
            bad = sweep.witness or {"carries": sorted(sweep.carries)}
    checks.append(_verification(
        "split_output_carry",
        {"samples_per_gain": CARRY_SAMPLES_PER_GAIN, "carries_seen": sorted(carries)},
        cases, bad is None and carries <= {-1, 0, 1}, bad,
    ))

    worst, cases, bad = 0.0, 0, None
    for h in gains:
        for part in (h.real, h.imag):
            if abs(part) < 1:
                continue
            tc = tail_bound_check(part, bit_depth(part) + TAIL_EXTRA_BITS, rng)
            worst = max(worst, tc.worst)
            cases += tc.cases
            if not tc.passed and bad is None:
                bad = {"gain": repr(part), "worst": tc.worst}
    checks.append(_verification("tail_bound", {"extra_bits": TAIL_EXTRA_BITS, "worst": _num(worst)},
                                cases, bad is None, bad))

    ok = all(c["pass"] for c in checks)
    rows = [[c["check"], c["cases_tested"], str(c["pass"]).lower()] for c in checks]
    return None, 0 if ok else 1, checks, (["check", "cases_tested", "pass"], rows)


def cmd_sweep(args):
    inst = _instance(args)
    if args.points < 1:
        raise UsageError("--points must be positive")
    if not (1 < args.P_from < args.P_to):
        raise UsageError("need 1 < --P-from < --P-to")
    grid = [args.P_from] if args.points == 1 else list(np.geomspace(args.P_from, args.P_to, args.points))
    K = inst.alpha.n_receivers
    header = ["P", "log2P"] + [f"R_{i + 1}" for i in range(K)] + ["sum", "outer_sum", "gap"]
    rows, json_rows = [], []
    for P in grid:
        P = float(P)
        try:
            rep = achievable_sum(inst.alpha, P)
            per_user, total = rep.per_user, rep.sum
        except InfeasibleError:
            per_user, total = (math.nan,) * K, math.nan
        try:
            out = outer_sum(inst.alpha, P)
        except InfeasibleError:
            out = math.nan
        vals = [P, math.log2(P), *per_user, total, out, out - total]
        rows.append([_dec(v) for v in vals])
        json_rows.append(dict(zip(header, (_num(v) for v in vals))))
    ok = all(math.isfinite(r["sum"] or math.nan) for r in json_rows)
    return inst.label, 0 if ok else 1, {"rows": json_rows}, (header, rows)


COMMANDS = {
    "check": cmd_check,
    "sumgdof": cmd_sumgdof,
    "gap": cmd_gap,
    "xmatch": cmd_xmatch,
    "detverify": cmd_detverify,
    "sweep": cmd_sweep,
}


def _global_flags(parser, default):
    parser.add_argument("--input", "-i", default=default, help="instance JSON file, '-' for stdin")
    parser.add_argument("--output", "-o", default=default, help="report file, '-' for stdout")
    parser.add_argument("--format", "-f", choices=("json", "csv"), default=default)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tinopt",
        description="TIN optimality, sum-GDoF and constant-gap checks for interference channels.",
    )
    _global_flags(parser, None)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("check", parents=[common], help="test the TIN condition")
    p = sub.add_parser("sumgdof", parents=[common], help="exact sum-GDoF by linear programming")
    p.add_argument("--region", action="store_true", help="include the constraint list")
    p = sub.add_parser("gap", parents=[common], help="finite-SNR constant-gap certificates")
    p.add_argument("--P-grid", dest="P_grid", help="comma or space separated P values")
    sub.add_parser("xmatch", parents=[common], help="TIN-optimal matching of an X channel")
    p = sub.add_parser("detverify", parents=[common], help="deterministic-model checks")
    p.add_argument("--gains", help="JSON list of gains, e.g. [\"5+0j\", [3, 2]]")
    p.add_argument("--gain", action="append", help="one complex gain, e.g. 3+2j (repeatable)")
    p.add_argument("--random", type=int, help="number of random gains")
    p.add_argument("--depth", type=int, help=f"maximum bit depth (at most {LEMMA2_DEPTH_CAP})")
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("sweep", parents=[common], help="TIN rates and outer bound over a P grid")
    p.add_argument("--P-from", dest="P_from", type=float, required=True)
    p.add_argument("--P-to", dest="P_to", type=float, required=True)
    p.add_argument("--points", type=int, default=5)
    return parser


def _render(args, command, label, code, results, table):
    fmt = args.format or ("csv" if command == "sweep" else "json")
    if fmt == "csv":
        header, rows = table
        return io.to_csv(header, rows)
    report = io.make_report(command, label, code, results)
    io.validate_report(report)
    return json.dumps(report, indent=2) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        label, code, results, table = COMMANDS[args.command](args)
        text = _render(args, args.command, label, code, results, table)
        io.write_atomic(args.output, text)
    except (TinOptError, UsageError, ValueError, OSError) as exc:
        print(f"tinopt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
