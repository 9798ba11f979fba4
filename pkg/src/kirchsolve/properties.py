"""Executable checks of the qualitative results: ordering, stability, sensitivity."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from .calculus import DiscreteFunction, Grid, h1_norm
from .exceptions import DomainError, PreconditionError
from .problem import ExponentField, KirchhoffFunction, ProblemSpec
from .solver import SolverOptions, continuation_sweep, solve_inner, solve_truncated
from .validation import check_scalar

__all__ = [
    "OrderReport",
    "StabilityReport",
    "ORDER_TOL",
    "check_order",
    "comparison_experiment",
    "stability_experiment",
    "epsilon_monotonicity",
    "alpha_sensitivity",
    "manufactured_problem",
    "manufactured_errors",
    "symmetry_defect",
]

# Newton tolerance 1e-10 plus accumulation stays below this
ORDER_TOL = 1e-8


@dataclass(frozen=True)
class OrderReport:
    holds: bool
    max_violation: float
    worst_node: int
    tolerance: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class StabilityReport:
    data_distance: float
    solution_distance: float
    ratio: float

    def to_dict(self):
        return asdict(self)


def check_order(u1, u2, tol=ORDER_TOL):
    """Report whether u1 <= u2 + tol at every node."""
    if u1.grid != u2.grid:
        raise DomainError("cannot compare functions on different grids")
    excess = np.maximum(u1.values - u2.values, 0.0)
    worst = int(np.argmax(excess))
    viol = float(excess[worst])
    return OrderReport(holds=viol <= tol, max_violation=viol, worst_node=worst, tolerance=tol)


def _solve_pair(spec1, spec2, eps, grid, options, workers=1):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futs = [pool.submit(solve_truncated, s, eps, grid, None, options) for s in (spec1, spec2)]
            return [fut.result() for fut in futs]
    return [solve_truncated(s, eps, grid, None, options) for s in (spec1, spec2)]


def _only_differ_in(spec1, spec2, allowed):
    d1, d2 = spec1.to_dict(), spec2.to_dict()
    keys = set(d1) | set(d2)
    return all(d1.get(k) == d2.get(k) for k in keys - set(allowed))


def comparison_experiment(spec1, spec2, eps, grid, options=None, workers=1):
    """Solve two problems with ordered data and check the solutions are ordered.

    Requires lambda_1 <= lambda_2 and f_1 <= f_2 at every node, all other
    data identical; otherwise PreconditionError.
    """
    grid = grid if isinstance(grid, Grid) else Grid(grid)
    options = options or SolverOptions()
    if not _only_differ_in(spec1, spec2, ("lambda", "f")):
        raise PreconditionError("specs may differ only in lambda and f")
    if spec1.lam > spec2.lam:
        raise PreconditionError(f"need lambda_1 <= lambda_2, got {spec1.lam} > {spec2.lam}")
    x = grid.nodes
    if np.any(spec1.f(x) > spec2.f(x)):
        raise PreconditionError("need f_1 <= f_2 at every node")
    p1, p2 = _solve_pair(spec1, spec2, eps, grid, options, workers)
    return check_order(p1.u, p2.u, ORDER_TOL)


def stability_experiment(spec1, spec2, eps, grid, options=None, workers=1):
    """Empirical Lipschitz ratio ||u_1 - u_2||_H1 / (||f_1 - f_2||_inf + |lambda_1 - lambda_2|)."""
    grid = grid if isinstance(grid, Grid) else Grid(grid)
    options = options or SolverOptions()
    if not _only_differ_in(spec1, spec2, ("lambda", "f")):
        raise PreconditionError("specs may differ only in lambda and f")
    x = grid.nodes
    data_distance = float(np.max(np.abs(spec1.f(x) - spec2.f(x))) + abs(spec1.lam - spec2.lam))
    if data_distance == 0.0:
        raise DomainError("data distance is zero; the specs are identical on this grid")
    p1, p2 = _solve_pair(spec1, spec2, eps, grid, options, workers)
    sol = h1_norm(DiscreteFunction(grid, p1.u.values - p2.u.values))
    return StabilityReport(data_distance=data_distance, solution_distance=sol,
                           ratio=sol / data_distance)


def epsilon_monotonicity(spec, eps_schedule, grid, options=None):
    """Worst ordering violation u_{eps_k} <= u_{eps_{k+1}} over consecutive schedule pairs."""
    sched = [check_scalar(e, "eps", lower=0.0, strict_lower=True) for e in eps_schedule]
    if not sched:
        raise PreconditionError("eps schedule is empty")
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise PreconditionError(f"eps schedule must be strictly decreasing, got {sched}")
    grid = grid if isinstance(grid, Grid) else Grid(grid)
    result = continuation_sweep(spec, sched, grid, options)
    if not result.complete:
        raise RuntimeError(f"solve failed at eps={result.failed_eps}: {result.failure}")
    worst = OrderReport(holds=True, max_violation=0.0, worst_node=0, tolerance=ORDER_TOL)
    for lo, hi in zip(result.profiles, result.profiles[1:]):
        rep = check_order(lo.u, hi.u, ORDER_TOL)
        if rep.max_violation > worst.max_violation:
            worst = rep
    return worst


def alpha_sensitivity(spec, alpha1, alpha2, eps, grid, options=None):
    """Difference quotient ||u_{alpha1} - u_{alpha2}||_H1 / |alpha1 - alpha2|."""
    a1 = check_scalar(alpha1, "alpha1", lower=0.0, strict_lower=True)
    a2 = check_scalar(alpha2, "alpha2", lower=0.0, strict_lower=True)
    if a1 == a2:
        raise DomainError("alpha1 and alpha2 must differ")
    grid = grid if isinstance(grid, Grid) else Grid(grid)
    p1, p2 = _solve_pair(spec.replace(alpha=a1), spec.replace(alpha=a2), eps, grid,
                         options or SolverOptions())
    diff = DiscreteFunction(grid, p1.u.values - p2.u.values)
    return h1_norm(diff) / abs(a1 - a2)


def manufactured_problem(grid, eps=0.01, lam=0.1, alpha=1.5, beta=4.0):
    """Problem with exact solution sin(pi x) for p = 2 and M = 1 (so K = 1).

    The forcing is (pi^2 s - lam s^3)(s + eps)^alpha with s = sin(pi x),
    tabulated at the grid nodes.  Returns ``(spec, exact_values)``.
    """
    x = grid.nodes
    s = np.sin(np.pi * x)
    forcing = (np.pi**2 * s - lam * s**3) * (s + eps) ** alpha
    spec = ProblemSpec(p=ExponentField.constant(2.0), alpha=alpha, beta=beta, lam=lam,
                       f=ExponentField.tabulated(x, forcing),
                       M=KirchhoffFunction.constant(1.0))
    return spec, s


def manufactured_errors(n_cells=(100, 200), eps=0.01, lam=0.1, alpha=1.5, beta=4.0,
                        options=None):
    """Max-norm errors of the inner solve against sin(pi x) on each grid."""
    errors = []
    for n in n_cells:
        grid = Grid(n)
        spec, exact = manufactured_problem(grid, eps, lam, alpha, beta)
        u = solve_inner(1.0, spec, eps, grid, DiscreteFunction(grid, np.zeros(grid.n_nodes)),
                        options or SolverOptions())
        errors.append(float(np.max(np.abs(u.values - exact))))
    return errors


def symmetry_defect(spec, eps, grid, options=None):
    """max |u(x) - u(1 - x)| of the solved profile."""
    grid = grid if isinstance(grid, Grid) else Grid(grid)
    prof = solve_truncated(spec, eps, grid, options=options or SolverOptions())
    vals = prof.u.values
    return float(np.max(np.abs(vals - vals[::-1])))
