"""Command-line entry point ``qent``.

Exit codes: 0 success, 1 self-check failure, 2 domain error,
3 convergence error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

import numpy as np

from . import acceptance
from .csvio import write_csv
from .disentangle import HeatbathScenario, disentangling_time, kick_oracle, r_of_t, dq_single
from .dynamics import accumulate_emission
from .errors import ConvergenceError, DomainError
from .metrics import entanglement_report
from .physics import CONSTANTS, ScenarioParams, load_scenario, validate
from .presets import FIG2, PRESET_IDS, SWEEP_OUTPUTS, SweepSpec, run_preset, run_sweep
from .spectrum import ZERO_RATE, spectrum_for
from .wavefunction import GridConfig, build_grid

EXIT_OK, EXIT_FAIL, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3, 4


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise DomainError("values", detail=str(exc)) from exc


def _scenario(args) -> ScenarioParams:
    base = load_scenario(args.config) if args.config else FIG2
    changes = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise DomainError(item, detail="expected key=value")
        key = key.strip()
        if key not in ScenarioParams.field_names():
            raise DomainError(key, detail="unknown scenario key")
        try:
            changes[key] = None if value.strip().lower() == "none" else float(value)
        except ValueError:
            raise DomainError(key, detail=f"not a number: {value!r}") from None
    return base.replace(**changes) if changes else base


def _grid(args) -> GridConfig | None:
    return GridConfig.parse(args.grid) if args.grid else None


def cmd_eigen(args) -> int:
    p = validate(_scenario(args))
    spec = spectrum_for(p)
    a = abs(spec.lambda1.real)
    dt = 1.0 / a if a > ZERO_RATE else math.inf
    order = [spec.dominant_index] + [j for j in range(3) if j != spec.dominant_index]
    rows = []
    for label, j in enumerate(order, start=1):
        lam, pj, v = spec.lambdas[j], spec.weights[j], spec.vectors[:, j]
        rows.append([label, lam.real, lam.imag, pj.real, pj.imag, v[0], v[1], v[2], spec.theta, dt])
    cols = ("j", "re_lambda", "im_lambda", "re_p", "im_p", "alpha", "beta", "zeta", "theta", "dt_ent")
    write_csv(args.out, cols, rows)
    return EXIT_OK


def cmd_wavefunction(args) -> int:
    p = validate(_scenario(args))
    p.require("eta")
    grid = build_grid(spectrum_for(p), p.eta, _grid(args), form=args.form)
    rows = []
    for i, u in enumerate(grid.u_axis):
        for k, s in enumerate(grid.s_axis):
            c = grid.amps[i, k]
            rows.append([u, s, u, s - u, c.real, c.imag, abs(c) ** 2])
    write_csv(args.out, ("u", "s", "dq", "dk", "re_amp", "im_amp", "abs2"), rows)
    return EXIT_OK


def cmd_metrics(args) -> int:
    p = validate(_scenario(args))
    p.require("eta")
    rep = entanglement_report(spectrum_for(p), p.eta, _grid(args), form=args.form, k0=args.k0)
    write_csv(args.out, rep.COLUMNS, [rep.row()])
    return EXIT_OK


def cmd_dynamics(args) -> int:
    p = validate(_scenario(args))
    p.require("eta")
    spec = spectrum_for(p)
    rec = accumulate_emission(spec, p.eta, _grid(args), t_max=args.t_max, dt=args.dt, n_record=args.n_record)
    cols = ("t", "mass_internal", "mass_emitted", "l2_error_vs_analytic")
    write_csv(args.out, cols, rec.history().tolist())
    return EXIT_OK


def cmd_disentangle(args) -> int:
    k_a = args.omega_a / CONSTANTS.c
    scn = HeatbathScenario.thermal(args.T, args.omega_a, args.gamma_a, args.r0, args.dq0_ka2 * k_a**2)
    t_max = args.t_max
    if t_max is None:
        t_max = 3.0 * disentangling_time(scn).exact if scn.D > 0 and scn.r0 > 2 else 1.0
    t = np.linspace(0.0, t_max, args.n_times)
    closed = r_of_t(scn, t)
    if args.seed is not None:
        est = kick_oracle(scn, t, n_traj=args.n_traj, seed=args.seed)
        r_mc, r_err = est.r_values, est.r_err
    else:
        r_mc = r_err = np.full(t.shape, math.nan)
    rows = [[t[i], closed[i], r_mc[i], r_err[i], dq_single(scn, t[i])] for i in range(t.size)]
    write_csv(args.out, ("t", "r_closed", "r_mc", "r_mc_err", "dq_single"), rows)
    return EXIT_OK


def cmd_sweep(args) -> int:
    outputs = tuple(o.strip() for o in args.outputs.split(",") if o.strip())
    spec = SweepSpec(args.axis, tuple(_floats(args.values)), _scenario(args), outputs, _grid(args))
    rows = run_sweep(spec)
    write_csv(args.out, spec.columns, [[r[c] for c in spec.columns] for r in rows])
    return EXIT_OK


def cmd_preset(args) -> int:
    for table in run_preset(args.id):
        write_csv(args.out, table.columns, table.rows)
    return EXIT_OK


def cmd_self_check(args) -> int:
    seed = 42 if args.seed is None else args.seed
    results = acceptance.run_all(seed=seed, grid_cfg=_grid(args))
    text = acceptance.render(results)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="scenario file (key = value per line)")
    parser.add_argument("--out", default=d, help="output path (default: standard output)")
    parser.add_argument("--seed", type=int, default=d, help="seed for Monte-Carlo steps")
    parser.add_argument("--grid", default=d, help="grid as n_u,n_s,W_u,W_s")
    parser.add_argument(
        "--set", action="append", default=d, metavar="KEY=VALUE", help="override a scenario field"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qent", description="Atom-photon momentum entanglement toolkit.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("eigen", parents=[common], help="dressed spectrum as CSV")
    sp.set_defaults(func=cmd_eigen)

    sp = sub.add_parser("wavefunction", parents=[common], help="joint amplitude grid as CSV")
    sp.add_argument("--form", choices=("full", "peak"), default="full")
    sp.set_defaults(func=cmd_wavefunction)

    sp = sub.add_parser("metrics", parents=[common], help="Schmidt number, variances and R")
    sp.add_argument("--form", choices=("full", "peak"), default="full")
    sp.add_argument("--k0", type=float, default=None, help="photon momentum of the conditional slice")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("dynamics", parents=[common], help="time-domain emission history")
    sp.add_argument("--t-max", type=float, default=None, help="default: ten entanglement times")
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--n-record", type=int, default=20)
    sp.set_defaults(func=cmd_dynamics)

    sp = sub.add_parser("disentangle", parents=[common], help="thermal decay of R(t)")
    sp.add_argument("--T", type=float, default=300.0, help="bath temperature (K)")
    sp.add_argument("--omega-a", type=float, default=5e14, help="bath transition (rad/s)")
    sp.add_argument("--gamma-a", type=float, default=1e7, help="bath linewidth (1/s)")
    sp.add_argument("--r0", type=float, default=3000.0)
    sp.add_argument("--dq0-ka2", type=float, default=16.0, help="initial variance in units of k_a^2")
    sp.add_argument("--t-max", type=float, default=None, help="seconds; default three half-times")
    sp.add_argument("--n-times", type=int, default=20)
    sp.add_argument("--n-traj", type=int, default=100_000)
    sp.set_defaults(func=cmd_disentangle)

    sp = sub.add_parser("sweep", parents=[common], help="metrics along one parameter axis")
    sp.add_argument("--axis", required=True, choices=ScenarioParams.field_names())
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.add_argument("--outputs", default="re_lambda1,theta,K_analytic", help=",".join(SWEEP_OUTPUTS))
    sp.set_defaults(func=cmd_sweep)

    for name in ("fig", "preset"):
        sp = sub.add_parser(name, parents=[common], help=f"figure or scenario preset ({', '.join(PRESET_IDS)})")
        sp.add_argument("id")
        sp.set_defaults(func=cmd_preset)

    sp = sub.add_parser("self-check", parents=[common], help="run the acceptance criteria")
    sp.set_defaults(func=cmd_self_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except DomainError as exc:
        print(f"qent: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"qent: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"qent: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
