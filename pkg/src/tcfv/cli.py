"""Command-line entry point: run cases, convergence studies and energy
tables from plain-text configuration files."""

import argparse
import sys

from .config import CASES, CaseConfig, parse_config
from .errors import TCFVError
from .runner import convergence_study, energy_error_table, run_case

_CASE_NOTES = {
    "rp1": "gas shock tube (left rarefaction, contact, right shock)",
    "rp1s": "shock tube with a sonic rarefaction",
    "rp2": "strong double-shock gas Riemann problem",
    "rp3": "continuum-mechanics Riemann problem, fluid limit",
    "rp4": "continuum-mechanics Riemann problem, solid limit",
    "vortex": "stationary isentropic vortex (2D, exact solution)",
    "shear": "impulsive shear flow (fluid: erf profile; solid: two waves)",
    "rotor": "rotating disc in a hyperelastic solid (2D, periodic)",
    "dsl": "double shear layer (2D, periodic)",
    "cavity": "lid-driven cavity at Re=100 (2D, walls)",
    "vshock": "stationary viscous shock at Ms=2 (profile oracle)",
}


def _load_config(path: str) -> CaseConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    report = run_case(cfg)
    for line in report.summary_lines():
        print(line)
    return 0 if report.passed else 1


def _cmd_convergence(args) -> int:
    cfg = _load_config(args.config)
    meshes = [int(s) for s in args.meshes.split(",")]
    rows = convergence_study(cfg, meshes)
    keys = sorted(rows[0][1])
    print("n " + " ".join(f"{k:>12} {'O(' + k[3:] + ')':>8}" for k in keys))
    for n, errors, orders in rows:
        cells = []
        for k in keys:
            cells.append(f"{errors[k]:12.4e}")
            cells.append(f"{orders.get(k, float('nan')):8.2f}")
        print(f"{n:<4d} " + " ".join(cells))
    return 0


def _cmd_energy_table(args) -> int:
    cfg = _load_config(args.config)
    cfls = (0.5, 0.4, 0.3, 0.2, 0.1)
    rows = energy_error_table(cfg, cfls=cfls)
    print("scheme            n_gp " + " ".join(f"cfl={c:<8}" for c in cfls))
    for label, n_gp, drifts in rows:
        print(f"{label:<17} {n_gp:<4d} "
              + " ".join(f"{drifts[c]:12.3e}" for c in cfls))
    return 0


def _cmd_list_cases(_args) -> int:
    for name in CASES:
        print(f"{name:<8} {_CASE_NOTES[name]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcfv",
        description="Thermodynamically compatible finite volume schemes "
                    "for gas dynamics and continuum mechanics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured case")
    p_run.add_argument("config", help="path to a key = value config file")
    p_run.set_defaults(func=_cmd_run)

    p_conv = sub.add_parser("convergence",
                            help="mesh-refinement study with observed orders")
    p_conv.add_argument("config")
    p_conv.add_argument("--meshes", default="32,64,128",
                        help="comma-separated mesh sizes")
    p_conv.set_defaults(func=_cmd_convergence)

    p_tab = sub.add_parser("energy-table",
                           help="energy conservation error vs CFL and "
                                "quadrature order")
    p_tab.add_argument("config")
    p_tab.set_defaults(func=_cmd_energy_table)

    p_list = sub.add_parser("list-cases", help="list available cases")
    p_list.set_defaults(func=_cmd_list_cases)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TCFVError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
