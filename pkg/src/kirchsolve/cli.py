"""Command-line front end.

Exit codes: 0 success, 1 invalid configuration, 2 solver failure,
3 a verified property failed.
"""

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .analysis import (
    RenormTestFunction,
    fit_boundary,
    fit_rate,
    theoretical_exponents,
)
from .calculus import Grid, energy
from .exceptions import ConvergenceError, KirchsolveError, LinAlgError, PreconditionError
from .problem import ProblemSpec, validate_spec
from .properties import comparison_experiment
from .solver import SolverOptions, continuation_sweep, solve_truncated
from .suite import run_property_suite

logger = logging.getLogger("kirchsolve")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PROPERTY = 0, 1, 2, 3

DEFAULT_SCHEDULE = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
_CONFIG_KEYS = {
    "problem", "grid", "eps", "eps_schedule", "alpha_f", "solver", "boundary",
    "test_function", "rate_points", "errors_csv", "compare", "verify", "workers",
}


class ConfigError(KirchsolveError):
    pass


class RunConfig:
    """Parsed and validated run configuration."""

    def __init__(self, data, out_dir, grid_override=None):
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        self.raw = data
        try:
            self.spec = ProblemSpec.from_dict(data.get("problem", {}))
            self.options = SolverOptions.from_dict(data.get("solver", {}))
            self.grid = Grid(grid_override if grid_override is not None else data.get("grid", 400))
        except (KirchsolveError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        report = validate_spec(self.spec)
        if not report.valid:
            msgs = "; ".join(m for _, m in report.violations)
            raise ConfigError(f"invalid problem: {msgs}")
        self.validation = report
        self.eps = float(data.get("eps", 1e-3))
        if not self.eps > 0:
            raise ConfigError("eps must be > 0")
        self.eps_schedule = [float(e) for e in data.get("eps_schedule", DEFAULT_SCHEDULE)]
        if not self.eps_schedule or any(e <= 0 for e in self.eps_schedule) or any(
                b >= a for a, b in zip(self.eps_schedule, self.eps_schedule[1:])):
            raise ConfigError(f"eps_schedule must be positive and strictly decreasing, "
                              f"got {self.eps_schedule}")
        self.alpha_f = float(data.get("alpha_f", 1.0))
        boundary = data.get("boundary", {})
        self.boundary_side = boundary.get("side", "left")
        self.boundary_window = float(boundary.get("window", 0.05))
        tf = data.get("test_function")
        try:
            self.test_function = RenormTestFunction.from_dict(tf) if tf else None
        except (KirchsolveError, KeyError) as exc:
            raise ConfigError(f"bad test_function: {exc}") from exc
        self.workers = int(data.get("workers") or os.cpu_count() or 1)
        self.out = Path(out_dir)
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {self.out}: {exc}") from exc
        if not os.access(self.out, os.W_OK):
            raise ConfigError(f"output directory {self.out} is not writable")

    @classmethod
    def load(cls, path, out_dir, grid_override=None):
        data = {}
        if path is not None:
            try:
                with open(path, encoding="utf-8") as fh:
                    data = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls(data, out_dir, grid_override)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, allow_nan=True)


def cmd_solve(cfg):
    prof = solve_truncated(cfg.spec, cfg.eps, cfg.grid, options=cfg.options)
    prof.save(cfg.out / "solution.csv", cfg.out / "solution.json", cfg.options)
    logger.info("solved eps=%g: K_p=%.10g, max u=%.6g, %d Picard iterations",
                prof.eps, prof.K_p, prof.u.values.max(), prof.picard_iters)
    return EXIT_OK


def _sweep(cfg):
    result = continuation_sweep(cfg.spec, cfg.eps_schedule, cfg.grid, cfg.options)
    for k, prof in enumerate(result.profiles):
        stem = f"profile_{k:02d}"
        prof.save(cfg.out / f"{stem}.csv", cfg.out / f"{stem}.json", cfg.options)
    return result


def _energy_rows(cfg, result):
    if cfg.spec.alpha == 1.0:
        logger.warning("energy is undefined for alpha = 1; energies.csv left empty")
        return []
    values = [energy(p.u, cfg.spec, p.eps) for p in result.profiles]
    if not values:
        return []
    return [(p.eps, e, abs(e - values[-1])) for p, e in zip(result.profiles, values)]


def cmd_sweep(cfg):
    result = _sweep(cfg)
    _write_csv(cfg.out / "errors.csv", ["eps", "l2_error", "h1_error"], result.errors_to_reference)
    _write_csv(cfg.out / "energies.csv", ["eps", "energy", "gap"], _energy_rows(cfg, result))
    rate = {"slope": None, "intercept": None, "r_squared": None, "n_points": 0}
    if len(result.errors_to_reference) >= 2:
        rate = fit_rate([(e, l2) for e, l2, _ in result.errors_to_reference]).to_dict()
    rate["theoretical_gamma"] = theoretical_exponents(cfg.spec, cfg.alpha_f).gamma_rate
    _write_json(cfg.out / "rate.json", rate)
    if not result.complete:
        logger.error("sweep stopped at eps=%g: %s", result.failed_eps, result.failure)
        return EXIT_SOLVER
    logger.info("sweep over %d eps values done; rate slope %s", len(result.profiles), rate["slope"])
    return EXIT_OK


def cmd_rate(cfg):
    points = cfg.raw.get("rate_points")
    if points is None:
        src = Path(cfg.raw.get("errors_csv", cfg.out / "errors.csv"))
        try:
            with open(src, newline="", encoding="utf-8") as fh:
                points = [(float(r["eps"]), float(r["l2_error"])) for r in csv.DictReader(fh)]
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read error table {src}: {exc}") from exc
    try:
        fit = fit_rate(points)
    except KirchsolveError as exc:
        raise ConfigError(str(exc)) from exc
    _write_json(cfg.out / "rate.json", fit.to_dict())
    _write_csv(cfg.out / "rate.csv", ["slope", "intercept", "r_squared", "n_points"],
               [(fit.slope, fit.intercept, fit.r_squared, fit.n_points)])
    logger.info("rate slope %.6g (r^2 = %.6g)", fit.slope, fit.r_squared)
    return EXIT_OK


def cmd_bounds(cfg):
    prof = solve_truncated(cfg.spec, cfg.eps, cfg.grid, options=cfg.options)
    prof.save(cfg.out / "solution.csv", cfg.out / "solution.json", cfg.options)
    try:
        fit = fit_boundary(prof.u, cfg.boundary_side, cfg.boundary_window)
    except KirchsolveError as exc:
        raise ConfigError(str(exc)) from exc
    report = fit.to_dict()
    report["mu1"] = theoretical_exponents(cfg.spec, cfg.alpha_f).mu1
    _write_json(cfg.out / "boundary.json", report)
    _write_csv(cfg.out / "boundary.csv",
               ["side", "window", "linear_slope", "power_exponent", "r_squared_linear"],
               [(fit.side, fit.window, fit.linear_slope, fit.power_exponent, fit.r_squared_linear)])
    logger.info("boundary fit (%s): slope %.6g, power %.6g", fit.side, fit.linear_slope,
                fit.power_exponent)
    return EXIT_OK


def cmd_energy(cfg):
    result = _sweep(cfg)
    _write_csv(cfg.out / "energies.csv", ["eps", "energy", "gap"], _energy_rows(cfg, result))
    return EXIT_OK if result.complete else EXIT_SOLVER


def cmd_exponents(cfg):
    report = theoretical_exponents(cfg.spec, cfg.alpha_f)
    _write_json(cfg.out / "exponents.json", report.to_dict())
    logger.info("mu1=%.10g mu2=%s gamma_rate=%s gamma_holder=%.6g", report.mu1,
                "blow-up" if report.blow_up else f"{report.mu2:.10g}",
                "n/a" if report.gamma_rate is None else f"{report.gamma_rate:.10g}",
                report.gamma_holder)
    return EXIT_OK


def cmd_compare(cfg):
    overrides = (cfg.raw.get("compare") or {}).get("problem", {})
    try:
        spec2 = ProblemSpec.from_dict({**cfg.spec.to_dict(), **overrides})
    except KirchsolveError as exc:
        raise ConfigError(f"bad compare.problem: {exc}") from exc
    try:
        rep = comparison_experiment(cfg.spec, spec2, cfg.eps, cfg.grid, cfg.options)
    except PreconditionError as exc:
        raise ConfigError(str(exc)) from exc
    _write_json(cfg.out / "compare.json", rep.to_dict())
    print(f"comparison: {'pass' if rep.holds else 'FAIL'} (max violation {rep.max_violation:.3e})")
    return EXIT_OK if rep.holds else EXIT_PROPERTY


def cmd_verify(cfg):
    vcfg = cfg.raw.get("verify") or {}
    results = run_property_suite(
        cfg.spec, cfg.grid, cfg.eps, cfg.options,
        swap_lambdas=bool(vcfg.get("swap_comparison_lambdas", False)),
        test_function=cfg.test_function, workers=cfg.workers,
    )
    passed = all(r.passed for r in results)
    _write_json(cfg.out / "verify.json",
                {"passed": passed, "checks": [r.to_dict() for r in results]})
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{r.name:<{width}}  {r.status.upper():<4}  {r.metric:.4e}  {r.detail}")
    print(f"{'overall':<{width}}  {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_PROPERTY


COMMANDS = {
    "solve": (cmd_solve, "solve the truncated problem at one eps"),
    "sweep": (cmd_sweep, "continuation over an eps schedule: profiles, errors, energies, rate"),
    "rate": (cmd_rate, "fit the empirical convergence rate from an error table"),
    "bounds": (cmd_bounds, "solve and fit the boundary behaviour"),
    "energy": (cmd_energy, "energy decay along an eps schedule"),
    "exponents": (cmd_exponents, "theoretical exponents of the configured problem"),
    "compare": (cmd_compare, "comparison experiment between two ordered problems"),
    "verify": (cmd_verify, "run the property suite and print a pass/fail table"),
}


def _add_globals(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON configuration document")
    parser.add_argument("--out", default=argparse.SUPPRESS if suppress else "out",
                        help="output directory (default: ./out)")
    parser.add_argument("--grid", type=int, default=default, help="number of grid cells")
    parser.add_argument("--quiet", action="store_true",
                        default=argparse.SUPPRESS if suppress else False)


def build_parser():
    parser = argparse.ArgumentParser(prog="kirchsolve", description=__doc__.splitlines()[0])
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        _add_globals(sp, suppress=True)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config, args.out, args.grid)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    func, _ = COMMANDS[args.command]
    try:
        return func(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
