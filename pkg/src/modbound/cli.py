"""
Command-line front end: ``modbound simulate | sweep | respond | verify``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 degenerate request, 5 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import csvio, pauli
from .bounds import pauli_arc_bound, schwartz_bound
from .config import ConfigError, ScenarioConfig, format_defaults, load_config, parse_grid, set_value
from .errors import ConsistencyError, DegenerateError, EvaluationError, InvalidInputError
from .evolution import PerturbedHamiltonian, default_steps, propagate, tabulated_profile
from .responsivity import (
    ModulatorSetup,
    infidelity_expansion_check,
    optimal_polarizer,
    overlap_probability,
    responsivity_derivative,
    responsivity_report,
)
from .scenarios import (
    DEFAULT_FD_H,
    DEFAULT_LAMBDA_GRID,
    FIGURE1_SAMPLES,
    Z_HAT,
    LinearBirefringenceScenario,
    ZenerScenario,
    random_hamiltonian,
    random_ket,
    workers_from_env,
    zener_derivative,
    zener_report,
    zener_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_DEGENERATE = 4
EXIT_VERIFY = 5

DEFAULT_OUT = {"simulate": "trajectory.csv", "sweep": "sweep.csv", "respond": "report.csv"}
VERIFY_EPS = 0.01
RESPOND_LAMBDA = 0.695
EXPANSION_WINDOW = (0.98, 1.02)
UNITARITY_LIMIT = 1e-10
BOUND_TOL = 1e-6

TABLE_COLUMNS = ("s", "base_k0", "base_k1", "base_k2", "base_k3",
                 "pert_k0", "pert_k1", "pert_k2", "pert_k3")


class VerificationFailed(Exception):
    pass


def _param(cfg, key, default):
    return cfg.parameters.get(key, default)


def _load_table(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    except OSError as exc:
        raise ConfigError(f"cannot read table {path}: {exc}") from None
    if not rows or tuple(c.strip() for c in rows[0]) != TABLE_COLUMNS:
        raise ConfigError(f"table header must be {','.join(TABLE_COLUMNS)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"table {path}: {exc}") from None
    if data.ndim != 2 or data.shape[0] < 2 or not np.all(np.isfinite(data)):
        raise ConfigError(f"table {path} needs at least two finite rows")
    base = tabulated_profile(data[:, 0], data[:, 2:5], data[:, 1])
    pert = tabulated_profile(data[:, 0], data[:, 6:9], data[:, 5])
    return PerturbedHamiltonian(base, pert)


def custom_setup(cfg: ScenarioConfig) -> ModulatorSetup:
    p = cfg.parameters
    rng = None
    if "table" in p:
        H = _load_table(p["table"])
    elif "seed" in p:
        rng = np.random.default_rng(p["seed"])
        H = random_hamiltonian(rng, s0=p.get("s0", 0.0), s1=p.get("s1", 1.0))
    else:
        raise ConfigError("custom_tabulated needs either table or seed")
    if "psi_i" in p:
        psi_i = pauli.eigenket(p["psi_i"], +1)
    else:
        psi_i = random_ket(rng) if rng is not None else pauli.eigenket(Z_HAT, +1)
    if "psi_p" in p:
        psi_p = pauli.eigenket(p["psi_p"], +1)
    else:
        psi_p = random_ket(rng) if rng is not None else pauli.eigenket([1.0, 0.0, 0.0], +1)
    return ModulatorSetup(H, psi_i, psi_p)


def linear_scenario(cfg) -> LinearBirefringenceScenario:
    return LinearBirefringenceScenario(_param(cfg, "k1", 1.0), _param(cfg, "s0", 0.0),
                                       _param(cfg, "s1", 2.0))


def zener_scenario(cfg, default_lambda=5.0) -> ZenerScenario:
    return ZenerScenario(_param(cfg, "gamma", 1.0), _param(cfg, "lambda", default_lambda))


def eps_setup(cfg, eps):
    """(ModulatorSetup, eps) for the eps-parametrized scenarios."""
    if cfg.scenario == "linear_birefringence":
        return linear_scenario(cfg).setup(eps), eps
    return custom_setup(cfg), eps


def _numerics(cfg):
    return cfg.numerics.get("steps"), cfg.numerics.get("grid")


def _out(cfg, command):
    return cfg.out if cfg.out is not None else DEFAULT_OUT[command]


def cmd_simulate(cfg: ScenarioConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    steps, _ = _numerics(cfg)
    samples = cfg.numerics.get("samples", FIGURE1_SAMPLES)
    if cfg.scenario == "zener":
        sc = zener_scenario(cfg)
        H, psi_i, psi_p = sc.profile(), sc.psi_i, sc.psi_p
        steps = sc.default_steps() if steps is None else steps
    else:
        eps = _param(cfg, "eps", 0.0)
        if cfg.scenario == "linear_birefringence":
            sc = linear_scenario(cfg)
            psi_i, psi_p = sc.initial_state(eps), pauli.eigenket(Z_HAT, +1)
            H = sc.hamiltonian(eps).total()
        else:
            setup = custom_setup(cfg)
            H, psi_i, psi_p = setup.hamiltonian.total(eps), setup.psi_i, setup.psi_p
        steps = default_steps(H) if steps is None else steps
    steps = max(steps, samples - 1)
    result = propagate(H, psi_i, steps, record=samples)
    traj = result.trajectory
    _, kappa = H.evaluate(traj.s)
    norm = np.linalg.norm(kappa, axis=1, keepdims=True)
    khat = np.divide(kappa, norm, out=np.zeros_like(kappa), where=norm > 0)
    out = _out(cfg, "simulate")
    csvio.write("trajectory", csvio.trajectory_rows(traj.s, traj.bloch, khat), out)
    T = overlap_probability(psi_p, result.state)
    print(f"T = {csvio.fmt(T)}", file=sys.stderr if out == "-" else stdout)
    return EXIT_OK


def cmd_sweep(cfg: ScenarioConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    if cfg.scenario != "zener":
        raise ConfigError("sweep runs the zener scenario; set scenario = zener")
    steps, _ = _numerics(cfg)
    grid = _param(cfg, "lambda_grid", DEFAULT_LAMBDA_GRID)
    fd_h = cfg.numerics.get("fd_h", DEFAULT_FD_H)
    records = zener_sweep(_param(cfg, "gamma", 1.0), grid, steps, fd_h, workers=workers_from_env())
    out = _out(cfg, "sweep")
    csvio.write("sweep", csvio.sweep_rows(records), out)
    best = max(records, key=lambda r: r.saturation_ratio)
    print(f"points = {len(records)}  max ratio = {csvio.fmt(best.saturation_ratio)} "
          f"at lambda = {csvio.fmt(best.lam)}", file=sys.stderr if out == "-" else stdout)
    return EXIT_OK


def cmd_respond(cfg: ScenarioConfig, optimal=False, stdout=None) -> int:
    stdout = stdout or sys.stdout
    steps, grid = _numerics(cfg)
    fd_h = cfg.numerics.get("fd_h")
    if cfg.scenario == "zener":
        if optimal:
            raise ConfigError("--optimal-polarizer applies to eps-parametrized scenarios only")
        sc = zener_scenario(cfg, RESPOND_LAMBDA)
        report = zener_report(sc.lam, sc.gamma, steps, fd_h or DEFAULT_FD_H, grid)
    else:
        setup, eps = eps_setup(cfg, _param(cfg, "eps", 0.0))
        if optimal and eps == 0:
            raise DegenerateError("the optimal polarizer needs eps != 0")
        kw = {} if fd_h is None else {"h_eps": fd_h}
        report = responsivity_report(setup, eps, steps, grid=grid, **kw)
    out = _out(cfg, "respond")
    csvio.write("report", csvio.report_rows(report), out)
    stream = sys.stderr if out == "-" else stdout
    for name in csvio.columns("report"):
        print(f"{name} = {csvio.fmt(getattr(report, name))}", file=stream)
    if optimal:
        choice = optimal_polarizer(setup.hamiltonian, setup.psi_i, eps, steps)
        a0, a1 = choice.psi_p
        print(f"optimal psi_p = ({csvio.fmt(a0.real)}{a0.imag:+.17g}j, "
              f"{csvio.fmt(a1.real)}{a1.imag:+.17g}j)", file=stream)
        print(f"optimal |dT/deps| = {csvio.fmt(choice.responsivity)}", file=stream)
    return EXIT_OK


def _check(lines, name, value, ok, detail):
    lines.append((name, value, ok, detail))


def cmd_verify(cfg: ScenarioConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    steps, grid = _numerics(cfg)
    quad = {} if grid is None else {"grid": grid}
    checks = []
    if cfg.scenario == "zener":
        sc = zener_scenario(cfg, RESPOND_LAMBDA)
        steps = sc.default_steps() if steps is None else steps
        K1 = sc.lambda_derivative()
        U = propagate(sc.profile(), sc.psi_i, steps).propagator
        residuals = [pauli.unitarity_residual(U)]
        d = zener_derivative(sc.lam, sc.gamma, steps, cfg.numerics.get("fd_h", DEFAULT_FD_H))
        sb = schwartz_bound(sc.profile(), K1, sc.psi_i, steps=steps, **quad)
        _check(checks, "expansion_ratio", float("nan"), True, "n/a for the lambda-parametrized scenario")
    else:
        eps = _param(cfg, "eps", VERIFY_EPS)
        setup, eps = eps_setup(cfg, eps)
        H = setup.hamiltonian
        steps = default_steps(H.total(eps)) if steps is None else steps
        residuals = [pauli.unitarity_residual(propagate(H.total(e), setup.psi_i, steps).propagator)
                     for e in (0.0, eps)]
        lhs, rhs = infidelity_expansion_check(setup, eps, steps,
                                              cfg.numerics.get("expansion_grid", 128))
        if rhs == 0 and lhs == 0:
            ratio, ok = 1.0, True
        else:
            ratio = lhs / rhs if rhs > 0 else float("inf")
            ok = EXPANSION_WINDOW[0] <= ratio <= EXPANSION_WINDOW[1]
        _check(checks, "expansion_ratio", ratio, ok,
               f"lhs={csvio.fmt(lhs)} rhs={csvio.fmt(rhs)} window={EXPANSION_WINDOW}")
        kw = {} if "fd_h" not in cfg.numerics else {"h_eps": cfg.numerics["fd_h"]}
        d = responsivity_derivative(setup, eps, steps=steps, **kw)
        K1 = H.perturbation
        sb = schwartz_bound(H.total(eps), K1, setup.psi_i, steps=steps, **quad)
    pb = pauli_arc_bound(K1, **quad)
    tol = BOUND_TOL + d.error + sb.quadrature_error_estimate
    _check(checks, "responsivity_le_schwartz", abs(d.value), abs(d.value) <= sb.value + tol,
           f"|dT|={csvio.fmt(abs(d.value))} schwartz={csvio.fmt(sb.value)}")
    tol_b = BOUND_TOL + sb.quadrature_error_estimate + pb.quadrature_error_estimate
    _check(checks, "schwartz_le_pauli", sb.value, sb.value <= pb.value + tol_b,
           f"schwartz={csvio.fmt(sb.value)} pauli={csvio.fmt(pb.value)}")
    worst = max(residuals)
    _check(checks, "unitarity_residual", worst, worst < UNITARITY_LIMIT, f"limit={UNITARITY_LIMIT:g}")
    failed = []
    for name, value, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name} = {csvio.fmt(value)}  ({detail})", file=stdout)
        if not ok:
            failed.append(name)
    if failed:
        raise VerificationFailed(", ".join(failed))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value scenario file")
    common.add_argument("--scenario", choices=("linear_birefringence", "zener", "custom_tabulated"))
    common.add_argument("--out", metavar="PATH", help="output CSV ('-' for stdout)")
    common.add_argument("--steps", metavar="N", help="integrator steps")
    common.add_argument("--fd-h", metavar="X", help="finite-difference step")
    common.add_argument("--lambda", dest="lam", metavar="X", help="Zener parameter")
    common.add_argument("--lambda-grid", metavar="a:b:n", help="sweep grid")
    common.add_argument("--eps", metavar="X", help="perturbation parameter")
    # SUPPRESS keeps a subcommand's default from masking the top-level flag
    common.add_argument("--show-defaults", action="store_true", default=argparse.SUPPRESS,
                        help="print the defaults table and exit")

    parser = argparse.ArgumentParser(prog="modbound",
                                     description="Two-mode optical modulator responsivity bounds.")
    parser.add_argument("--show-defaults", action="store_true", default=argparse.SUPPRESS,
                        help="print the defaults table and exit")
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("simulate", parents=[common], help="trajectory CSV for one parameter point")
    sub.add_parser("sweep", parents=[common], help="Zener lambda sweep CSV")
    respond = sub.add_parser("respond", parents=[common], help="responsivity report CSV")
    respond.add_argument("--optimal-polarizer", action="store_true",
                         help="also print the optimal polarizer state")
    sub.add_parser("verify", parents=[common], help="expansion and bound consistency checks")
    return parser


def config_from_args(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {
        "scenario": args.scenario, "out": args.out, "steps": args.steps, "fd_h": args.fd_h,
        "lambda": args.lam, "eps": args.eps,
    }
    for key, value in overrides.items():
        if value is not None:
            set_value(cfg, key, value)
    if args.lambda_grid is not None:
        cfg.parameters["lambda_grid"] = parse_grid(args.lambda_grid)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "show_defaults", False):
        print(format_defaults())
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = config_from_args(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "respond":
            return cmd_respond(cfg, optimal=args.optimal_polarizer)
        return cmd_verify(cfg)
    except VerificationFailed as exc:
        print(f"modbound: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DegenerateError as exc:
        print(f"modbound: degenerate request: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except EvaluationError as exc:
        print(f"modbound: numerical failure at s = {exc.s!r}: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except (ConsistencyError, FloatingPointError, ArithmeticError) as exc:
        print(f"modbound: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except InvalidInputError as exc:
        print(f"modbound: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
