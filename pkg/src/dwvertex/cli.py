"""Command line: ``dwvertex {verify,exact,sample,curve,render}``.

Exit codes: 0 on success, 1 when a verification fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .model import DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _scenario(args):
    from .scenario import load_scenario

    if not args.scenario:
        raise UsageError("--scenario PATH is required")
    try:
        return load_scenario(args.scenario)
    except OSError as e:
        raise UsageError(f"cannot read scenario: {e}") from None


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_opts(args, s):
    r = s.run
    sweeps = r.sweeps if args.sweeps is None else args.sweeps
    burn_in = r.burn_in if args.burnin is None else args.burnin
    seed = r.seed if args.seed is None else args.seed
    if sweeps < 0 or burn_in < 0:
        raise UsageError("--sweeps and --burnin must be >= 0")
    return sweeps, burn_in, seed


def _curves(s, args):
    from .arctic import assemble_arctic

    q = s.macro_q
    return assemble_arctic(
        s.profile, None if q == 1.0 else q, points=args.branch_points, conjectural=args.conjectural_segments
    )


# ---------------------------------------------------------------- subcommands


def cmd_verify(args) -> int:
    from .checks import DEFAULT_CHECKS, run_check

    numbers = list(DEFAULT_CHECKS) + ([11] if args.full else [])
    if args.only:
        numbers = args.only
    failed = 0
    for k in numbers:
        r = run_check(k)
        print(r.line(), flush=True)
        failed += not r.passed
    print(f"{len(numbers) - failed}/{len(numbers)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_exact(args) -> int:
    from . import exact as E
    from .arctic import find_tstar, limit_point

    s = _scenario(args)
    b, p = s.boundary, s.params
    out: dict = {"n": b.n, "m": b.m, "exits": [list(e) for e in b.exits], "endpoints": list(b.endpoints())}
    dwbc = b.exits == tuple((c, 1) for c in range(1, b.n + 1))
    uniform_x = all(v == 1 for v in p.x)
    if dwbc and p.t == 0:
        out["Z_t0"] = float(E.Z_t0(p.x))
    if dwbc and p.t == 1:
        out["Z_t1_free"] = float(E.Z_t1_free(p.x))
    if p.t == 0 and uniform_x and p.q == 1:
        out["touching_count"] = int(E.Z_endpoints_t0(b.endpoints()))
    if b.n <= E.DEFAULT_CAP and E.colored_state_estimate(b) <= 10**5:
        out["Z_brute_force"] = float(E.brute_force_Z(b, p))
    alpha = s.profile
    q = s.macro_q
    out["limit_point"] = list(limit_point(alpha, q))
    gaps = alpha.gaps()
    if gaps:
        out["tstar"] = {f"{g.kappa:g}": find_tstar(alpha, g, None if q == 1.0 else q) for g in gaps}
    text = json.dumps(out, indent=2, sort_keys=True)
    print(text)
    if args.out:
        (_outdir(args) / "exact.json").write_text(text + "\n")
    return EXIT_OK


def cmd_sample(args) -> int:
    from .render import write_occupancy_csv, write_snapshot_csv
    from .sampler import run

    s = _scenario(args)
    sweeps, burn_in, seed = _run_opts(args, s)
    every = 0 if s.run.snapshots <= 0 or sweeps == 0 else max(1, sweeps // s.run.snapshots)
    res = run(s.boundary, s.params, sweeps, burn_in, seed, snapshot_every=every)
    out = _outdir(args)
    snaps = res.snapshots or [res.state.config()]
    with open(out / "snapshots.csv", "w", encoding="utf-8") as f:
        write_snapshot_csv(snaps, f)
    if res.samples:
        v, h = res.occupancy()
        with open(out / "occupancy.csv", "w", encoding="utf-8") as f:
            write_occupancy_csv(v, h, f)
    st = res.stats
    stats = {
        "seed": seed,
        "sweeps": sweeps,
        "burn_in": burn_in,
        "steps": st.steps,
        "flip_acceptance": st.flip_acceptance,
        "swap_acceptance": st.swap_acceptance,
        "snapshots": len(snaps),
    }
    (out / "run.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    print(json.dumps(stats, sort_keys=True))
    return EXIT_OK


def cmd_curve(args) -> int:
    import numpy as np

    from .diagnostics import branch_residuals
    from .render import write_curves_csv

    s = _scenario(args)
    curves = _curves(s, args)
    out = _outdir(args)
    with open(out / "curves.csv", "w", encoding="utf-8") as f:
        write_curves_csv(curves, f)
    report: dict = {"formula": branch_residuals(s.profile, curves)}
    alpha = s.profile
    if s.macro_q == 1.0 and len(alpha.segments) == 1 and alpha.segments[0].affine:
        p = alpha.total
        res = {}
        for b in curves:
            x, y = b.X, b.Y
            if p == 1.0:
                r = (y - 2 * x + 2) ** 2 - 4 * (y + 1) if b.label == "SW" else (y + 2 * x) ** 2 - 4 * (y + 1)
                res[b.label] = float(np.abs(r).max())
        if res:
            report["parabola"] = res
    text = json.dumps(report, indent=2, sort_keys=True)
    (out / "residuals.json").write_text(text + "\n")
    print(text)
    worst = max(report["formula"].values(), default=0.0)
    return EXIT_OK if worst < 1e-9 else EXIT_FAIL


def cmd_render(args) -> int:
    from .render import read_snapshot_csv, render_svg

    s = _scenario(args)
    out = _outdir(args)
    snap_path = Path(args.snapshots) if args.snapshots else out / "snapshots.csv"
    cfg = None
    if snap_path.exists():
        b = s.boundary
        with open(snap_path, encoding="utf-8") as f:
            cfg = read_snapshot_csv(f, b.n, b.m)[-1]
    elif args.snapshots:
        raise UsageError(f"no such snapshot file: {snap_path}")
    curves = [] if args.no_curves else _curves(s, args)
    svg = render_svg(cfg, curves, scale=s.scale)
    (out / "figure.svg").write_text(svg)
    print(out / "figure.svg")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dwvertex", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_default="out"):
        p.add_argument("--scenario", metavar="PATH", help="scenario TOML file")
        p.add_argument("--out", metavar="DIR", default=out_default, help="output directory")

    def chain(p):
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("--sweeps", type=int, help="override run.sweeps")
        p.add_argument("--burnin", type=int, help="override run.burn_in")

    def curve(p):
        p.add_argument("--branch-points", type=int, default=256, metavar="N", help="samples per branch")
        p.add_argument(
            "--conjectural-segments",
            action="store_true",
            help="also draw the conjectured vertical segments below plateaus",
        )

    p = sub.add_parser("verify", help="run the oracle suite and print a pass/fail table")
    p.add_argument("--full", action="store_true", help="include the long simulation check")
    p.add_argument("--only", type=int, nargs="+", metavar="K", help="run only these check numbers")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("exact", help="closed forms and brute force for a scenario")
    common(p, out_default=None)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("sample", help="run the chain; write snapshots and occupancy CSV")
    common(p)
    chain(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("curve", help="write arctic branches as CSV with a residual report")
    common(p)
    curve(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("render", help="compose an SVG of a snapshot and the predicted curve")
    common(p)
    curve(p)
    p.add_argument("--snapshots", metavar="CSV", help="snapshot CSV (default: OUT/snapshots.csv)")
    p.add_argument("--no-curves", action="store_true", help="draw paths only")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "branch_points", 2) < 2:
        ap.error("--branch-points must be >= 2")
    if args.command == "verify" and args.only and any(k not in range(1, 12) for k in args.only):
        ap.error("check numbers run from 1 to 11")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"dwvertex {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as e:
        print(f"dwvertex {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
