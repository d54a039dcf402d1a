"""Command-line front end: ``strongmono <subcommand>``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import convex_roof as cr
from .errors import MonogamyError
from .families import SUBCLASSES, ClassSpec, load_generator_definitions
from .harness import (DEFAULT_AXES, ScanConfig, axis_values, default_edges, histogram, read_residuals, run_scan,
                      selftest, sweep_grid)
from .monogamy import VariantSpec, residual
from .qstate import read_state, reduced

DEFAULT_EXP = {"natural": 2.0, "mu": 3.0, "q": 4.0}


def _variant(args) -> VariantSpec:
    exp = DEFAULT_EXP[args.variant] if args.exp is None else args.exp
    return VariantSpec(args.variant, exp)


def _add_variant(p):
    p.add_argument("--variant", choices=("natural", "mu", "q"), default="natural",
                   help="residual variant (default: natural)")
    p.add_argument("--exp", type=float, default=None,
                   help="mu or q exponent (default: 3 for mu, 4 for q)")


def _parse_axis(text: str):
    try:
        name, rng = text.split("=", 1)
        lo, hi, step = (float(v) for v in rng.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"axis must look like a=0:1.2:0.02, got {text!r}")
    return name.strip(), axis_values(lo, hi, step)


def cmd_residual(args) -> int:
    k = read_state(args.state)
    opts = cr.RoofOptions(seed=args.seed)
    foci = [1, 2, 3, 4] if args.focus == "all" else [int(args.focus)]
    reps = [residual(k, f, _variant(args), opts) for f in foci]
    if args.json:
        out = [r.to_dict() for r in reps]
        print(json.dumps(out[0] if len(out) == 1 else out, indent=1))
    else:
        for r in reps:
            tag = "exact" if r.exact else "lower bound"
            print(f"focus {r.focus}: residual {r.residual:.12g} ({tag})")
    return 0


def cmd_sweep(args) -> int:
    axes = {k: axis_values(*v) for k, v in DEFAULT_AXES[args.family].items()}
    axes.update(args.axis or [])
    grid = sweep_grid(args.family, axes, _variant(args), args.focus)
    grid.write_csv(args.out)
    print(f"{grid.values.size} points, min {grid.values.min():.6g} at {grid.argmin()}")
    return 0


def cmd_scan(args) -> int:
    registry = load_generator_definitions(args.defs) if args.defs else None
    if args.source in ("haar", "rho1"):
        source = args.source
    else:
        source = ClassSpec(args.source, args.subclass)
        source.resolve(registry)
    cfg = ScanConfig(source=source, n_samples=args.samples, master_seed=args.seed,
                     variant=_variant(args), focus="all" if args.focus == "all" else int(args.focus),
                     out_dir=args.out, n_workers=args.workers, registry=registry)
    s = run_scan(cfg)
    print(json.dumps({k: v for k, v in s.to_dict().items() if k != "worst_amplitudes"}))
    return 0


def cmd_hist(args) -> int:
    vals = read_residuals(args.inp)
    h = histogram(vals, default_edges(args.bins, args.min, args.max))
    h.write_csv(args.out)
    print(f"{h.total} values in {len(h.counts)} bins")
    return 0


def cmd_roots(args) -> int:
    k = read_state(args.state)
    keep = [int(v) for v in args.marginal.split(",")]
    if len(keep) != 3:
        raise SystemExit("--marginal needs three qubit indices, e.g. 1,2,3")
    rho = reduced(k, keep)
    rb = cr.range_basis(rho)
    print("quartic coefficients c0..c4:")
    for i, c in enumerate(rb.quartic):
        print(f"  c{i} = {c.real:+.12e} {c.imag:+.12e}i")
    if rb.rank == 1:
        print("rank 1 (pure marginal): one-root certificate trivially holds")
        return 0
    try:
        cl = cr.tangle_zeros(rb.quartic, scale=rb.scale)
    except MonogamyError:
        print("quartic vanishes identically: every range state is tangle-free")
        return 0
    for t, mult in zip(cl.roots, cl.multiplicities):
        print(f"  root t = {t:.12g}  multiplicity {mult}")
    verdict = "one-root" if cl.n_distinct == 1 else f"not one-root ({cl.n_distinct} distinct)"
    print(f"certificate: {verdict}; fit residual {cl.fit_residual:.2e}")
    return 0


def cmd_selftest(args) -> int:
    rep = selftest()
    print(rep.text())
    return 0 if rep.ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="strongmono", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("residual", help="residual of a state file")
    p.add_argument("--state", required=True, help="JSON state file")
    p.add_argument("--focus", default="1", choices=("1", "2", "3", "4", "all"),
                   help="focus qubit (default: 1)")
    _add_variant(p)
    p.add_argument("--seed", type=int, default=0, help="roof optimizer seed")
    p.add_argument("--json", action="store_true", help="print the full report as JSON")
    p.set_defaults(fn=cmd_residual)

    p = sub.add_parser("sweep", help="residual on a parameter grid")
    p.add_argument("--family", choices=("rho1", "rho2"), required=True)
    p.add_argument("--axis", action="append", type=_parse_axis,
                   help="name=min:max:step, name one of a, x (repeatable); "
                        "defaults a=0:1.2:0.02, x=-2:2:0.05 (rho1) and x=-10:10:0.05 (rho2)")
    p.add_argument("--focus", type=int, default=1)
    _add_variant(p)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("scan", help="Monte Carlo scan of random states")
    p.add_argument("--source", required=True,
                   help="g2, g4, haar, rho1 or def:<key> (with --defs)")
    p.add_argument("--subclass", choices=SUBCLASSES, default="none")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    p.add_argument("--focus", default="1", choices=("1", "2", "3", "4", "all"))
    _add_variant(p)
    p.add_argument("--defs", help="generator definition file (JSON)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_scan)

    p = sub.add_parser("hist", help="histogram of scan records")
    p.add_argument("--in", dest="inp", required=True, help="records.jsonl")
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--min", type=float, default=-0.12)
    p.add_argument("--max", type=float, default=1.0)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(fn=cmd_hist)

    p = sub.add_parser("roots", help="tangle quartic roots of a three-qubit marginal")
    p.add_argument("--state", required=True)
    p.add_argument("--marginal", required=True, help="three qubits, e.g. 1,2,3")
    p.set_defaults(fn=cmd_roots)

    p = sub.add_parser("selftest", help="run the built-in invariant suites")
    p.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (MonogamyError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
