"""The property suite behind ``kirchsolve verify``."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
import logging

from .analysis import RenormTestFunction, renormalized_residual
from .calculus import Grid
from .exceptions import KirchsolveError
from .problem import ExponentField, default_spec
from .properties import (
    comparison_experiment,
    epsilon_monotonicity,
    manufactured_errors,
    stability_experiment,
    symmetry_defect,
)
from .solver import SolverOptions, solve_truncated

logger = logging.getLogger(__name__)

__all__ = ["CheckResult", "run_property_suite", "SUITE_CHECKS"]

SUITE_CHECKS = (
    "comparison",
    "epsilon_monotonicity",
    "stability",
    "symmetry",
    "manufactured_solution",
    "renormalized_residual",
)

STABILITY_FACTOR = 3.0
SYMMETRY_TOL = 1e-8
ORDER_BAND = (3.2, 4.8)
RENORM_REL_TOL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    metric: float
    detail: str

    @property
    def status(self):
        return "pass" if self.passed else "fail"

    def to_dict(self):
        out = asdict(self)
        out["status"] = self.status
        return out


def _comparison(spec, grid, eps, options, swap_lambdas):
    lam_lo, lam_hi = 0.5 * spec.lam, spec.lam
    if lam_lo == lam_hi:
        lam_hi = lam_lo + 0.05
    if swap_lambdas:
        lam_lo, lam_hi = lam_hi, lam_lo
    rep = comparison_experiment(spec.replace(lam=lam_lo), spec.replace(lam=lam_hi),
                                eps, grid, options)
    return rep.holds, rep.max_violation, f"lambda {lam_lo:g} vs {lam_hi:g}, worst node {rep.worst_node}"


def _monotonicity(spec, grid, eps, options, swap_lambdas):
    rep = epsilon_monotonicity(spec, [1e-1, 1e-2, 1e-3], grid, options)
    return rep.holds, rep.max_violation, "schedule [1e-1, 1e-2, 1e-3]"


def _stability(spec, grid, eps, options, swap_lambdas):
    ratios = []
    for c in (1e-1, 1e-2, 1e-3):
        shifted = _shift_forcing(spec.f, c)
        rep = stability_experiment(spec, spec.replace(f=shifted), 1e-2, grid, options)
        ratios.append(rep.ratio)
    spread = max(ratios) / min(ratios)
    return spread <= STABILITY_FACTOR, spread, "ratios " + ", ".join(f"{r:.4g}" for r in ratios)


def _shift_forcing(f, c):
    if f.kind == "constant":
        return ExponentField.constant(f.params[0] + c)
    if f.kind == "polynomial":
        return ExponentField.polynomial((f.params[0] + c,) + tuple(f.params[1:]))
    if f.kind == "affine":
        return ExponentField.affine(f.params[0] + c, f.params[1])
    if f.kind == "sinusoidal":
        return ExponentField.sinusoidal(f.params[0] + c, f.params[1])
    return ExponentField.tabulated(f.nodes, [v + c for v in f.values])


def _symmetry(spec, grid, eps, options, swap_lambdas):
    sym = spec.replace(p=ExponentField.constant(2.0),
                       f=ExponentField.polynomial([1.0, 1.0, -1.0]))
    defect = symmetry_defect(sym, eps, grid, options)
    return defect <= SYMMETRY_TOL, defect, "p = 2, f = 1 + x(1 - x)"


def _manufactured(spec, grid, eps, options, swap_lambdas):
    e100, e200 = manufactured_errors((100, 200), eps=0.01, options=options)
    ratio = e100 / e200
    lo, hi = ORDER_BAND
    return lo <= ratio <= hi, ratio, f"errors {e100:.3e} (N=100), {e200:.3e} (N=200)"


def _renormalized(spec, grid, eps, options, swap_lambdas, test_function=None):
    h = test_function or RenormTestFunction.bump(0.05, 0.15)
    prof = solve_truncated(spec, eps, grid, options=options)
    chk = renormalized_residual(prof, spec, h, options)
    bound = RENORM_REL_TOL * (1.0 + abs(chk.rhs))
    return chk.residual <= bound, chk.residual, f"rhs {chk.rhs:.6g}, bound {bound:.3e}"


def _run(name, func, *args, **kwargs):
    try:
        passed, metric, detail = func(*args, **kwargs)
    except (KirchsolveError, RuntimeError, ValueError) as exc:
        logger.info("check %s raised: %s", name, exc)
        return CheckResult(name, False, float("nan"), f"{type(exc).__name__}: {exc}")
    return CheckResult(name, bool(passed), float(metric), detail)


def run_property_suite(spec=None, grid=400, eps=1e-3, options=None, *,
                       swap_lambdas=False, test_function=None, workers=1):
    """Run every suite check and return a list of :class:`CheckResult` in fixed order.

    ``swap_lambdas`` deliberately violates the comparison hypothesis (used to
    check that failures surface).
    """
    spec = spec or default_spec()
    grid = grid if isinstance(grid, Grid) else Grid(grid)
    options = options or SolverOptions()
    funcs = {
        "comparison": _comparison,
        "epsilon_monotonicity": _monotonicity,
        "stability": _stability,
        "symmetry": _symmetry,
        "manufactured_solution": _manufactured,
        "renormalized_residual": _renormalized,
    }
    jobs = []
    for name in SUITE_CHECKS:
        kwargs = {"test_function": test_function} if name == "renormalized_residual" else {}
        jobs.append((name, funcs[name], (spec, grid, eps, options, swap_lambdas), kwargs))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_run, n, f, *a, **k) for n, f, a, k in jobs]
            return [fut.result() for fut in futs]
    return [_run(n, f, *a, **k) for n, f, a, k in jobs]
