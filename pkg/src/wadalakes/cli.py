"""Command-line interface.

One JSON document per invocation on stdout (schema "wada-dim/1");
human-readable progress and timings go to stderr so identical runs give
byte-identical stdout.  Exit codes: 0 success / verification passed,
1 verification failed, 2 usage or sequence-spec errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

from . import counting
from . import raster_oracle as ro
from . import tiling_automaton as ta
from .sequence_params import (
    SequenceSpecError,
    analytic_dimension,
    design,
    validate_sequence,
)

SCHEMA = "wada-dim/1"
EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(doc: dict, compact: bool) -> None:
    if compact:
        print(json.dumps(doc, separators=(",", ":")))
    else:
        print(json.dumps(doc, indent=2))


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def cmd_dim(args) -> int:
    seq = validate_sequence(args.seq)
    report = analytic_dimension(seq, n_max=max(args.days, 2))
    doc = {
        "schema": SCHEMA,
        "command": "dim",
        "sequence": seq.to_spec(),
        "analytic": report.to_json(),
    }
    try:
        pairs = counting.recurrence_count_pairs(seq, args.days)
        doc["regression"] = counting.dimension_from_counts(pairs).to_json()
    except counting.NonIntegerSequenceError as exc:
        doc["regression"] = None
        doc["regression_skipped"] = str(exc)
    _emit(doc, args.json)
    return EXIT_OK


def cmd_counts(args) -> int:
    seq = validate_sequence(args.seq)
    table = counting.count_table(seq, args.days)
    _emit(
        {
            "schema": SCHEMA,
            "command": "counts",
            "sequence": seq.to_spec(),
            "rows": table.to_json(),
        },
        args.json,
    )
    return EXIT_OK


def cmd_design(args) -> int:
    outcome = design(args.target)
    _emit(
        {
            "schema": SCHEMA,
            "command": "design",
            "target": args.target,
            "sequence": outcome.sequence.to_spec(),
            "achieved": outcome.achieved,
            "deviation": abs(outcome.achieved - args.target),
            "note": outcome.note,
        },
        args.json,
    )
    return EXIT_OK


def cmd_render(args) -> int:
    seq = validate_sequence(args.seq)
    level = args.level if args.level is not None else args.days
    t0 = time.perf_counter()
    raster = ro.rasterize(seq, args.days, level=level, raster_cap=args.raster_cap)
    ro.render(raster, args.out)
    _log(f"rendered {raster.side}x{raster.side} in {time.perf_counter() - t0:.2f}s")
    digest = hashlib.sha256(open(args.out, "rb").read()).hexdigest()
    _emit(
        {
            "schema": SCHEMA,
            "command": "render",
            "sequence": seq.to_spec(),
            "day": args.days,
            "level": raster.level,
            "side": raster.side,
            "out": str(args.out),
            "sha256": digest,
        },
        args.json,
    )
    return EXIT_OK


def _verify_rows(seq, days, cell_cap, raster, timings):
    integer_ok = seq.integer_only and all(seq.term(i) >= 3 for i in range(1, days + 1))
    rows = []
    bounds = counting.area_bounds_check(seq, days)

    censuses = {}
    if integer_ok:
        t0 = time.perf_counter()
        tiling = ta.root_tiling()
        censuses[0] = tiling.census
        feasible = True
        for level in range(1, days):
            if counting.box_count_general(seq, level) > cell_cap:
                feasible = False
                break
            tiling = ta.subdivide(tiling, int(seq.term(level)))
            censuses[level] = tiling.census
        timings["tiling"] = time.perf_counter() - t0
        if not feasible:
            censuses = {}

    for day in range(1, days + 1):
        row = {"n": day}
        level = day - 1
        if integer_ok:
            row["N_recurrence"] = str(counting.box_count_general(seq, level))
        else:
            row["N_recurrence"] = None
        if level in censuses:
            c = censuses[level]
            row["N_tiling"] = str(sum(c.values()))
            row["T_census"] = c[ta.SquareType.TURNING]
        else:
            row["N_tiling"] = None
            row["T_census"] = None
            row["tiling_skipped"] = "non-integer" if not integer_ok else "cell-cap"
        row["T_closed"] = counting.turning_count(day)
        row["A_exact"] = _frac(counting.island_area(seq, day))
        if raster is not None and raster.level >= day + 1:
            t_prev = Fraction(1)
            for i in range(1, day):
                t_prev /= seq.term(i)
            sample = ro.empirical_box_count(raster, day, t_prev)
            row["N_raster"] = str(sample.count)
            row["A_raster"] = _frac(raster.island_fraction(after_day=day))
        else:
            row["N_raster"] = None
            row["A_raster"] = None
            row["raster_skipped"] = "non-integer" if not integer_ok else "raster-cap"
        brow = bounds.rows[day - 1]
        row["bounds_ok"] = brow.ok
        rows.append(row)
    return rows


def cmd_verify(args) -> int:
    seq = validate_sequence(args.seq)
    days = args.days
    timings: dict[str, float] = {}
    integer_ok = seq.integer_only and all(seq.term(i) >= 3 for i in range(1, days + 1))

    raster = None
    if integer_ok:
        level = days + 1
        side = 1
        for i in range(1, level + 1):
            side *= int(seq.term(i))
        while level > days and side > args.raster_cap:
            side //= int(seq.term(level))
            level -= 1
        if level > days:
            t0 = time.perf_counter()
            raster = ro.rasterize(seq, days, level=level, raster_cap=args.raster_cap)
            timings["raster"] = time.perf_counter() - t0
            _log(f"raster {raster.side}x{raster.side} in {timings['raster']:.2f}s")

    rows = _verify_rows(seq, days, args.cell_cap, raster, timings)

    wada_rows = []
    topo_rows = []
    if raster is not None:
        t0 = time.perf_counter()
        for day in range(1, days + 1):
            rep = ro.wada_distance_check(raster, day)
            wada_rows.append(
                {
                    "n": day,
                    "ok": rep.ok,
                    "max_dist2_px": rep.max_dist2_px,
                    "bound2_px": rep.bound2_px,
                }
            )
            topo = ro.connectivity_check(raster, day)
            topo_rows.append({"n": day, "ok": topo.ok})
        timings["checks"] = time.perf_counter() - t0

    def _pair_ok(row):
        vals = [v for v in (row["N_recurrence"], row["N_tiling"], row["N_raster"]) if v is not None]
        if len(set(vals)) > 1:
            return False
        if row["T_census"] is not None and row["T_census"] != row["T_closed"]:
            return False
        if row["A_raster"] is not None and row["A_raster"] != row["A_exact"]:
            return False
        return row["bounds_ok"]

    passed = (
        all(_pair_ok(r) for r in rows)
        and all(w["ok"] for w in wada_rows)
        and all(t["ok"] for t in topo_rows)
    )
    doc = {
        "schema": SCHEMA,
        "command": "verify",
        "sequence": seq.to_spec(),
        "days": days,
        "raster_level": raster.level if raster is not None else None,
        "rows": rows,
        "wada": wada_rows,
        "topology": topo_rows,
        "pass": passed,
    }
    _emit(doc, args.json)
    for stage, dt in timings.items():
        _log(f"timing {stage}: {dt:.3f}s")
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wada",
        description="Iterated canal constructions: exact counts, dimension estimates, raster verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seq=True, days=None):
        if seq:
            p.add_argument("--seq", required=True, help="sequence spec, e.g. const:3 or list:3,4,5;cycle")
        if days is not None:
            p.add_argument("--days", type=int, default=days)
        p.add_argument("--json", action="store_true", help="compact single-line JSON")

    p_dim = sub.add_parser("dim", help="analytic and regression dimension estimates")
    add_common(p_dim, days=20)
    p_dim.set_defaults(func=cmd_dim)

    p_counts = sub.add_parser("counts", help="exact N/T/A table")
    add_common(p_counts, days=6)
    p_counts.set_defaults(func=cmd_counts)

    p_verify = sub.add_parser("verify", help="cross-check recurrences, tiling and raster")
    add_common(p_verify, days=6)
    p_verify.add_argument("--raster-cap", type=int, default=ro.DEFAULT_RASTER_CAP)
    p_verify.add_argument("--cell-cap", type=int, default=ta.DEFAULT_CELL_CAP)
    p_verify.set_defaults(func=cmd_verify)

    p_design = sub.add_parser("design", help="sequence achieving a target dimension")
    p_design.add_argument("--target", type=float, required=True)
    p_design.add_argument("--json", action="store_true")
    p_design.set_defaults(func=cmd_design)

    p_render = sub.add_parser("render", help="write a portable pixmap of the construction")
    add_common(p_render, days=5)
    p_render.add_argument("--level", type=int, default=None)
    p_render.add_argument("--out", required=True)
    p_render.add_argument("--raster-cap", type=int, default=ro.DEFAULT_RASTER_CAP)
    p_render.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (SequenceSpecError, counting.NonIntegerSequenceError, ValueError) as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE
    except (ta.ResourceCapError, ro.RasterCapError, ro.ResolutionError) as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
