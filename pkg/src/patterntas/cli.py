"""Command-line entry point: ``patterntas <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .atam import AssemblyError, assemble, labels
from .formats import default_palette, export_xgrow, render_ppm, write_report
from .ktam import SimParams, medians, sweep, write_csv
from .pattern import PatternError, PatternOracle, load_spec
from .tileset import ER, KL, ConstructionError, construct_er, construct_kl, dump_tileset, load_tileset, pattern_of
from .verify import (
    VerificationError,
    check_bijection,
    check_error_forcing,
    check_lemma_equalities,
    epsilon_slope,
)

log = logging.getLogger("patterntas")

CHECKS = ("lemma2", "forcing", "bijection", "slope")


class CheckFailed(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def parse_range(text: str) -> list[float]:
    """``a:b:step`` inclusive of ``b`` (up to rounding), or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        a, b, step = map(float, parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return [round(a + i * step, 10) for i in range(n)]


# -- commands -----------------------------------------------------------------

def cmd_generate(args) -> None:
    spec = load_spec(args.pattern)
    ts = construct_kl(spec, mode=args.mode)
    dump_tileset(ts, args.output)
    print(f"{len(ts)} tile types ({len(ts.interior)} interior) -> {args.output}")


def cmd_transform(args) -> None:
    ts = load_tileset(args.tiles)
    er = construct_er(ts)
    dump_tileset(er, args.output)
    print(f"{len(er)} tile types -> {args.output}")


def cmd_assemble(args) -> None:
    ts = load_tileset(args.tiles)
    a = assemble(ts, args.size - 1, args.size - 1)
    grid = labels(a)
    if args.output:
        Path(args.output).write_bytes(render_ppm(grid, default_palette(ts.alphabet), args.cell_px))
    print(f"assembled {a.tiles_placed} tiles, {a.mismatch_edges} mismatched edges")
    if args.verify_oracle:
        spec = load_spec(args.pattern) if args.pattern else pattern_of(ts)
        if spec is None:
            raise PatternError(f"{args.tiles}: no recorded pattern; pass --pattern")
        want = PatternOracle(spec).region(args.size, args.size)
        diff = np.argwhere(want != grid)
        if len(diff):
            y, x = diff[0]
            raise CheckFailed(f"{len(diff)} cells differ from the oracle, first at ({x},{y}): "
                              f"assembled {grid[y, x]!r}, expected {want[y, x]!r}")
        print(f"matches the pattern oracle on [0,{args.size - 1}]^2")


def cmd_simulate(args) -> None:
    ts = load_tileset(args.tiles)
    base = SimParams(gse=args.gse[0], width=args.target, height=args.target, stop_fraction=args.stop_fraction,
                     max_events=args.max_events, two_stage=args.two_stage, rng_seed=args.seed)
    records = sweep(ts, args.gse, args.runs, base, gmc_override=args.gmc, workers=args.workers)
    write_csv(records, args.output)
    for g, m in medians(records).items():
        print(f"gse={g:g} median N={m:g}")
    flagged = [r for r in records if r.flag]
    if flagged:
        log.warning("%d runs flagged (%s)", len(flagged), ", ".join(sorted({r.flag for r in flagged})))


def cmd_verify(args) -> None:
    systems = [load_tileset(args.tiles)]
    if args.er_tiles:
        systems.append(load_tileset(args.er_tiles))
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise VerificationError(f"unknown check(s): {', '.join(sorted(unknown))}")
    target = systems[-1]
    pair = None
    if len(systems) == 2:
        pair = tuple(systems)
    elif target.provenance == KL and {"bijection", "slope"} & set(checks):
        pair = (target, construct_er(target))
    results = []
    for c in checks:
        if c == "lemma2":
            er = target if target.provenance == ER else None
            if er is None:
                raise VerificationError("lemma2 needs a construction2 tile set")
            results.append(check_lemma_equalities(er).to_dict())
        elif c == "forcing":
            rep = check_error_forcing(target, budget=args.budget, sampled=args.sampled, samples=args.samples,
                                      seed=args.seed)
            results.append(rep.to_dict())
        elif c == "bijection":
            if pair is None:
                raise VerificationError("bijection needs a construction1 tile set (and optionally its transform)")
            results.append(check_bijection(*pair).to_dict())
        elif c == "slope":
            if pair is None:
                raise VerificationError("slope needs a construction1 tile set (and optionally its transform)")
            rep = epsilon_slope(pair, args.eps, (args.region, args.region), args.runs, seed=args.seed)
            d = rep.to_dict()
            s = rep.slopes
            d["passed"] = rep.passed and s.get("R") is not None and s.get("T") is not None and s["R"] > s["T"]
            results.append(d)
    text = write_report(results, args.output)
    if not args.output:
        sys.stdout.write(text)
    for r in results:
        print(f"{r['check']}: {'pass' if r['passed'] else 'FAIL'}", file=sys.stderr)
    if not all(r["passed"] for r in results):
        raise CheckFailed("verification failed" + (f"; see {args.output}" if args.output else ""))


def cmd_export_xgrow(args) -> None:
    text = export_xgrow(load_tileset(args.tiles))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="patterntas", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="pattern -> rectilinear tile set")
    p.add_argument("pattern", help="builtin name (S, C, W) or pattern JSON file")
    p.add_argument("--mode", choices=("reachable", "exhaustive"), default="reachable")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("transform", help="tile set -> error-resilient tile set")
    p.add_argument("tiles")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("assemble", help="error-free assembly on an N x N square")
    p.add_argument("tiles")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--cell-px", type=int, default=1)
    p.add_argument("--verify-oracle", action="store_true", help="compare with the direct pattern recursion")
    p.add_argument("--pattern", help="pattern to compare against (default: the one recorded in the tile set)")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("simulate", help="kinetic sweep over bond energies")
    p.add_argument("tiles")
    p.add_argument("--gse-range", dest="gse", type=parse_range, required=True, metavar="A:B:STEP")
    p.add_argument("--runs", type=int, default=25)
    p.add_argument("--target", type=int, default=128)
    p.add_argument("--stop-fraction", type=float, default=0.75)
    p.add_argument("--gmc", type=float, default=None, help="fixed monomer energy (default 2*gse-0.1)")
    p.add_argument("--two-stage", action="store_true")
    p.add_argument("--max-events", type=int, default=SimParams.max_events)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="check glue equalities, error forcing, bijection and error-rate slope")
    p.add_argument("tiles")
    p.add_argument("er_tiles", nargs="?")
    p.add_argument("--checks", default="lemma2,forcing,bijection")
    p.add_argument("--budget", type=float, default=1e9)
    p.add_argument("--sampled", action="store_true")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--eps", type=_floats, default=[0.02, 0.05, 0.1])
    p.add_argument("--region", type=int, default=96)
    p.add_argument("--runs", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export-xgrow", help="write an Xgrow .tiles file")
    p.add_argument("tiles")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_xgrow)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except (PatternError, ConstructionError, VerificationError, AssemblyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
