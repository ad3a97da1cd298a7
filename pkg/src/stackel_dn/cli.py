"""Command-line entry point ``stackel-dn``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, StackelError
from .scenario import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, run_scenario, run_suites, write_artifacts
from .suites import SUITES, SuiteConfig


def _common(suppress: bool) -> argparse.ArgumentParser:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--grid", type=int, default=d(None), help="grid points per axis")
    p.add_argument("--harmonics", type=int, default=d(None), help="number of joint eigenpairs")
    p.add_argument("--tol", type=float, default=d(None), help="tolerance override")
    p.add_argument("--out", default=d(None), help="output directory")
    p.add_argument("--parallel", action="store_true", default=d(False), help="run suites in parallel")
    p.add_argument("--seed", type=int, default=d(None), help="random seed (default 0)")
    p.add_argument("--no-plots", action="store_true", default=d(False), help="skip figures")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stackel-dn", parents=[_common(False)],
                                     description="Separated DN maps of conformally Stäckel cylinders.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(True)

    p = sub.add_parser("validate", parents=[common], help="check a fixture")
    p.add_argument("fixture")

    p = sub.add_parser("spectrum", parents=[common], help="joint spectrum of the angular operators")
    p.add_argument("fixture")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--method", choices=("shooting", "oracle", "dense"), default="shooting")
    p.add_argument("--mu2-max", type=float, default=250.0, help="range for --method dense")

    p = sub.add_parser("wt", parents=[common], help="characteristic and Weyl-Titchmarsh table")
    p.add_argument("fixture")
    p.add_argument("--mu", type=complex, nargs="*", help="µ values (default 0.5..20 on the real axis)")
    p.add_argument("--nu", type=complex, default=0j)

    p = sub.add_parser("dn", parents=[common], help="assemble and export the separated DN operator")
    p.add_argument("fixture")

    p = sub.add_parser("oracle", parents=[common], help="separated DN against the finite-difference oracle")
    p.add_argument("fixture")

    p = sub.add_parser("suite", parents=[common], help="run one suite (or all)")
    p.add_argument("name", choices=SUITES + ("all",))
    p.add_argument("fixture")
    p.add_argument("fixture2", nargs="?")

    p = sub.add_parser("run", parents=[common], help="run a scenario JSON file")
    p.add_argument("scenario")
    return parser


def _outdir(args, default="out") -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(ref):
    from .fixtures import load_fixture, validate_fixture

    fx = load_fixture(ref)
    validate_fixture(fx)
    return fx


def cmd_validate(args) -> int:
    from .fixtures import load_fixture
    from .geometry import validate_stackel

    fx = load_fixture(args.fixture)
    rep = validate_stackel(fx.S)
    print(f"{fx.name}: {'valid' if rep.valid else 'INVALID'}")
    print(rep)
    return EXIT_PASS if rep.valid else EXIT_FAIL


def cmd_spectrum(args) -> int:
    from .angular import joint_spectrum_dense, joint_spectrum_oracle, joint_spectrum_shooting
    from .export import export_spectrum

    fx = _load(args.fixture)
    ops = fx.angular()
    if args.method == "shooting":
        pairs = joint_spectrum_shooting(ops, target_count=args.count)
    elif args.method == "oracle":
        pairs = joint_spectrum_oracle(ops, args.grid or 64, args.count)
    else:
        pairs = joint_spectrum_dense(ops, args.mu2_max, args.grid or 48)
    out = _outdir(args)
    path = export_spectrum(pairs, out / "spectrum.csv")
    if not args.no_plots:
        from .export import SPECTRUM_HEADER, spectrum_rows
        from .plotting import plot_spectrum

        plot_spectrum(SPECTRUM_HEADER, spectrum_rows(pairs), out / "spectrum.png")
    for p in pairs[:10]:
        print(f"{p.mu2:14.8f} {p.nu2:14.8f}  x{p.multiplicity}")
    print(f"{len(pairs)} pairs written to {path}")
    return EXIT_PASS


def cmd_wt(args) -> int:
    from .export import export_wt
    from .radial import wt_batch

    fx = _load(args.fixture)
    mu = np.array(args.mu if args.mu else np.linspace(0.5, 20.0, 40), dtype=complex)
    nu = np.full(mu.shape, complex(args.nu))
    table = wt_batch(fx.radial_row(), mu**2, nu**2)
    path = export_wt(mu, nu, table, _outdir(args) / "wt.csv")
    print(f"{len(table)} rows written to {path}")
    return EXIT_PASS


def cmd_dn(args) -> int:
    from .dn import assemble_dn, export_dn

    fx = _load(args.fixture)
    n = args.grid or 32
    op = assemble_dn(fx.metric, M_max=args.harmonics or 64, N2=n, N3=n)
    out = _outdir(args)
    export_dn(op, out / "dn_blocks.csv", out / "dn.json")
    print(f"{op.truncation} blocks written to {out / 'dn_blocks.csv'}")
    return EXIT_PASS


def cmd_oracle(args) -> int:
    from .suites import suite_dn_oracle

    fx = _load(args.fixture)
    cfg = SuiteConfig(grid=args.grid, harmonics=args.harmonics or 64, tol=args.tol)
    rep = suite_dn_oracle(fx, cfg)
    return _report([rep], args)


def _report(reports, args) -> int:
    doc = write_artifacts(reports, _outdir(args), plots=not args.no_plots)
    for rep in reports:
        print(f"[{rep.suite}] {'PASS' if rep.passed else 'FAIL'} ({rep.elapsed:.1f} s)")
        if rep.error:
            print(f"  error: {rep.error}")
        for c in rep.checks:
            print(f"  {c.status}  {c.name}: {float(c.value):.3e} (tol {c.tolerance}, margin {c.margin:.3e})")
    return EXIT_PASS if doc["passed"] else EXIT_FAIL


def cmd_suite(args) -> int:
    fxs = [_load(args.fixture)]
    if args.fixture2:
        fxs.append(_load(args.fixture2))
    for f, ref in zip(fxs, [args.fixture, args.fixture2]):
        f.source_ref = ref
    cfg = SuiteConfig(grid=args.grid, harmonics=args.harmonics or 64, tol=args.tol,
                      seed=args.seed or 0)
    names = list(SUITES) if args.name == "all" else [args.name]
    return _report(run_suites(names, fxs, cfg, args.parallel), args)


def cmd_run(args) -> int:
    overrides = {"grid": args.grid, "harmonics": args.harmonics, "tol": args.tol,
                 "seed": args.seed, "out": args.out}
    code, doc = run_scenario(args.scenario, args.parallel, not args.no_plots, overrides)
    if code == EXIT_CONFIG:
        print(f"config error: {doc}", file=sys.stderr)
        return code
    for s in doc["suites"]:
        print(f"[{s['suite']}] {'PASS' if s['passed'] else 'FAIL'} ({s['elapsed']:.1f} s)")
        for r in s["rows"]:
            print(f"  {r['status']}  {r['name']}: margin {r['worst_margin']}")
        if s["error"]:
            print(f"  error: {s['error']}")
    print(json.dumps({"passed": doc["passed"]}))
    return code


COMMANDS = {"validate": cmd_validate, "spectrum": cmd_spectrum, "wt": cmd_wt, "dn": cmd_dn,
            "oracle": cmd_oracle, "suite": cmd_suite, "run": cmd_run}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StackelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
