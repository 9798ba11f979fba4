"""Finite-difference solver for the truncated problem.

For fixed Kirchhoff constant(s) the discrete equation at interior node i is

    R_i = -K (F_{i+1/2} - F_{i-1/2}) / h + theta-terms
          - f_i / (u_i + eps)^alpha - lambda |u_i|^{beta-2} u_i = 0,

with fluxes F_{i+1/2} = phi((u_{i+1} - u_i) / h; p(x_{i+1/2})) and the
regularised flux phi(s; p) = (s^2 + delta^2)^{(p-2)/2} s.  The Jacobian is
tridiagonal and each Newton system is solved by banded elimination.  An
outer relaxed Picard loop updates K = M(modular(u)).
"""

from dataclasses import dataclass, field, asdict, replace
import json
import logging

import numpy as np
from scipy.linalg import solve_banded

from .calculus import DiscreteFunction, Grid, l2_norm, h1_norm
from .exceptions import ConvergenceError, DomainError, LinAlgError
from .problem import require_valid
from .validation import check_decreasing_schedule, check_scalar

logger = logging.getLogger(__name__)

__all__ = [
    "SolverOptions",
    "SolutionProfile",
    "ContinuationResult",
    "assemble_residual",
    "solve_inner",
    "solve_truncated",
    "continuation_sweep",
    "default_initial_guess",
]


@dataclass(frozen=True)
class SolverOptions:
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    newton_min_step: float = 1.0 / 64.0
    picard_tol: float = 1e-8
    picard_max_iter: int = 100
    picard_relaxation: float = 0.5
    flux_regularization: float = 1e-8
    positivity_floor: float = 0.0

    def __post_init__(self):
        for name in ("newton_tol", "picard_tol", "newton_min_step"):
            check_scalar(getattr(self, name), name, lower=0.0, strict_lower=True)
        check_scalar(self.picard_relaxation, "picard_relaxation",
                     lower=0.0, upper=1.0, strict_lower=True)
        check_scalar(self.flux_regularization, "flux_regularization", lower=0.0)
        check_scalar(self.positivity_floor, "positivity_floor", lower=0.0)
        for name in ("newton_max_iter", "picard_max_iter"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown solver options: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class SolutionProfile:
    """A solved truncated problem at one value of eps."""

    u: DiscreteFunction
    eps: float
    K_p: float
    K_q: float = None
    picard_iters: int = 0
    newton_iters: int = 0
    final_residual_norm: float = np.nan
    converged: bool = False
    K_history: tuple = ()

    @property
    def grid(self):
        return self.u.grid

    def metadata(self, options=None):
        meta = {
            "eps": self.eps,
            "K_p": self.K_p,
            "K_q": self.K_q,
            "picard_iters": self.picard_iters,
            "newton_iters": self.newton_iters,
            "final_residual_norm": self.final_residual_norm,
            "converged": self.converged,
            "n_cells": self.grid.n_cells,
        }
        if options is not None:
            meta["options"] = options.to_dict()
        return meta

    def save(self, csv_path, json_path, options=None):
        """Write the profile as ``x,u`` CSV plus a JSON metadata sidecar."""
        self.u.to_csv(csv_path)
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(self.metadata(options), fh, indent=2)


@dataclass
class ContinuationResult:
    """Profiles along a decreasing eps schedule and their distance to the last one.

    ``failed_eps`` / ``failure`` record the first member that did not solve;
    the profiles before it are kept.
    """

    profiles: list
    errors_to_reference: list = field(default_factory=list)
    failed_eps: float = None
    failure: str = None

    @property
    def complete(self):
        return self.failed_eps is None

    @property
    def eps(self):
        return [prof.eps for prof in self.profiles]

    @property
    def reference(self):
        return self.profiles[-1]


def regularized_flux(s, p, delta):
    """phi(s; p) and its derivative in s."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if delta > 0:
            r2 = s * s + delta * delta
            flux = r2 ** (0.5 * (p - 2.0)) * s
            dflux = r2 ** (0.5 * (p - 4.0)) * ((p - 1.0) * s * s + delta * delta)
        else:
            a = np.abs(s)
            flux = a ** (p - 2.0) * s
            dflux = (p - 1.0) * a ** (p - 2.0)
    if np.any(~np.isfinite(dflux)):
        raise LinAlgError("flux derivative is unbounded; set a positive flux_regularization")
    return flux, dflux


class _Discretization:
    """Grid-sampled data for one (spec, eps, grid) triple."""

    def __init__(self, spec, eps, grid, delta):
        self.spec = spec
        self.eps = float(eps)
        self.grid = grid
        self.delta = float(delta)
        x = grid.nodes
        xm = grid.midpoints
        self.h = grid.h
        self.f = spec.f(x)
        self.p_mid = spec.p(xm)
        self.q_mid = None if spec.q is None else spec.q(xm)
        self.p_node = spec.p(x)
        self.q_node = None if spec.q is None else spec.q(x)
        self.M_q = None
        if spec.q is not None:
            self.M_q = spec.M_q if spec.M_q is not None else spec.M

    def modular(self, u, exponent_mid):
        # same midpoint rule as calculus.modular, on raw nodal arrays
        slope = np.abs(np.diff(u)) / self.h
        return float(np.sum(self.h * slope**exponent_mid / exponent_mid))

    def kirchhoff(self, u):
        K_p = float(self.spec.M(self.modular(u, self.p_mid)))
        K_q = None
        if self.spec.q is not None:
            K_q = float(self.M_q(self.modular(u, self.q_mid)))
        return K_p, K_q

    def residual(self, u, K_p, K_q=None, jacobian=False):
        """Residual vector (zeros at the boundary) and, optionally, tridiagonal bands."""
        spec, h = self.spec, self.h
        slope = np.diff(u) / h
        F, dF = regularized_flux(slope, self.p_mid, self.delta)
        coef = K_p * dF
        res = np.zeros_like(u)
        res[1:-1] = -K_p * (F[1:] - F[:-1]) / h
        if K_q is not None:
            G, dG = regularized_flux(slope, self.q_mid, self.delta)
            res[1:-1] += -K_q * (G[1:] - G[:-1]) / h
            coef = coef + K_q * dG

        ui = u[1:-1]
        shifted = ui + self.eps
        src = self.f[1:-1] * shifted ** (-spec.alpha)
        res[1:-1] -= src
        diag_extra = spec.alpha * self.f[1:-1] * shifted ** (-spec.alpha - 1.0)
        if spec.lam != 0.0:
            au = np.abs(ui)
            res[1:-1] -= spec.lam * np.sign(ui) * au ** (spec.beta - 1.0)
            with np.errstate(divide="ignore"):
                dreac = au ** (spec.beta - 2.0)
            diag_extra = diag_extra - spec.lam * (spec.beta - 1.0) * dreac
        if spec.theta != 0.0:
            t, dt = regularized_flux(ui, self.p_node[1:-1], self.delta)
            if self.q_node is not None:
                tq, dtq = regularized_flux(ui, self.q_node[1:-1], self.delta)
                t, dt = t + tq, dt + dtq
            res[1:-1] += spec.theta * t
            diag_extra = diag_extra + spec.theta * dt

        if not jacobian:
            return res
        # interior unknowns 1..N-1; band layout for scipy.linalg.solve_banded
        h2 = h * h
        n = u.shape[0] - 2
        ab = np.zeros((3, n))
        ab[1] = (coef[:-1] + coef[1:]) / h2 + diag_extra
        ab[0, 1:] = -coef[1:-1] / h2
        ab[2, :-1] = -coef[1:-1] / h2
        return res, ab


def _as_values(u, grid):
    if isinstance(u, DiscreteFunction):
        if u.grid != grid:
            raise DomainError("initial guess lives on a different grid")
        return np.array(u.values, dtype=float)
    return np.array(u, dtype=float)


def assemble_residual(u, K, spec, eps, options=None, K_q=None):
    """Discrete residual of the truncated equation for fixed Kirchhoff constant ``K``.

    Returns a DiscreteFunction that is zero at the two boundary nodes.
    """
    K = check_scalar(K, "K", lower=0.0, strict_lower=True)
    eps = check_scalar(eps, "eps", lower=0.0, strict_lower=True)
    options = options or SolverOptions()
    vals = u.values
    if vals[0] != 0.0 or vals[-1] != 0.0:
        raise DomainError("u must vanish at both boundary nodes")
    disc = _Discretization(spec, eps, u.grid, options.flux_regularization)
    if spec.q is not None and K_q is None:
        K_q = disc.kirchhoff(vals)[1]
    return DiscreteFunction(u.grid, disc.residual(vals, K, K_q))


_STALL_STEP = 1e-12


def _newton(disc, u0, K_p, K_q, options):
    """Damped Newton from ``u0``; returns (u, residual_norm, iterations, history)."""
    floor = options.positivity_floor
    u = u0.copy()
    u[0] = u[-1] = 0.0
    res, ab = disc.residual(u, K_p, K_q, jacobian=True)
    norm = float(np.max(np.abs(res)))
    history = [norm]
    best_u, best_norm = u.copy(), norm
    it = 0
    while norm > options.newton_tol:
        if it >= options.newton_max_iter:
            raise ConvergenceError(
                f"Newton did not reach {options.newton_tol:g} in {options.newton_max_iter} "
                f"iterations (residual {best_norm:.3e})", best=best_u, history=history)
        it += 1
        try:
            step = solve_banded((1, 1), ab, -res[1:-1], check_finite=True)
        except (LinAlgError, ValueError) as exc:
            raise LinAlgError(f"singular Newton system at iteration {it}: {exc}") from exc
        t = 1.0
        while True:
            trial = u.copy()
            trial[1:-1] = np.maximum(u[1:-1] + t * step, floor)
            trial_res, trial_ab = disc.residual(trial, K_p, K_q, jacobian=True)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < norm or t <= options.newton_min_step:
                break
            t *= 0.5
        if trial_norm >= norm and np.max(np.abs(step)) <= _STALL_STEP * max(1.0, np.max(np.abs(u))):
            # no descent from a roundoff-sized step: the residual is at its floating-point floor
            logger.debug("newton stalled at residual %.3e", norm)
            break
        u, res, ab, norm = trial, trial_res, trial_ab, trial_norm
        history.append(norm)
        if norm < best_norm:
            best_u, best_norm = u.copy(), norm
    return u, norm, it, history


def default_initial_guess(grid, eps):
    """eps + sin(pi x) in the interior, zero on the boundary."""
    u = eps + np.sin(np.pi * grid.nodes)
    u[0] = u[-1] = 0.0
    return DiscreteFunction(grid, u)


def solve_inner(K, spec, eps, grid, init, options=None, K_q=None):
    """Solve the discrete equation for fixed Kirchhoff constant(s) by damped Newton."""
    K = check_scalar(K, "K", lower=0.0, strict_lower=True)
    eps = check_scalar(eps, "eps", lower=0.0, strict_lower=True)
    options = options or SolverOptions()
    disc = _Discretization(spec, eps, grid, options.flux_regularization)
    u0 = _as_values(init, grid)
    if u0[0] != 0.0 or u0[-1] != 0.0:
        raise DomainError("initial guess must satisfy the boundary conditions")
    if spec.q is not None and K_q is None:
        K_q = disc.kirchhoff(u0)[1]
    u, _, _, _ = _newton(disc, u0, K, K_q, options)
    return DiscreteFunction(grid, u)


def solve_truncated(spec, eps, grid, init=None, options=None, raise_on_failure=True):
    """Solve the truncated problem at ``eps``: relaxed Picard on K around Newton.

    On outer non-convergence a ConvergenceError carrying the K history is
    raised, unless ``raise_on_failure`` is False, in which case the last
    iterate is returned with ``converged=False``.
    """
    eps = check_scalar(eps, "eps", lower=0.0, strict_lower=True)
    options = options or SolverOptions()
    require_valid(spec)
    if not isinstance(grid, Grid):
        grid = Grid(grid)
    disc = _Discretization(spec, eps, grid, options.flux_regularization)
    u = _as_values(init if init is not None else default_initial_guess(grid, eps), grid)
    u[0] = u[-1] = 0.0

    omega = options.picard_relaxation
    K_p, K_q = disc.kirchhoff(u)
    K_hist = [K_p]
    newton_total = 0
    norm = np.nan
    for it in range(1, options.picard_max_iter + 1):
        u_new, norm, n_it, _ = _newton(disc, u, K_p, K_q, options)
        newton_total += n_it
        target_p, target_q = disc.kirchhoff(u_new)
        next_p = (1.0 - omega) * K_p + omega * target_p
        change_K = abs(next_p - K_p) / (1.0 + K_p)
        next_q = None
        if K_q is not None:
            next_q = (1.0 - omega) * K_q + omega * target_q
            change_K = max(change_K, abs(next_q - K_q) / (1.0 + K_q))
        change_u = float(np.max(np.abs(u_new - u)))
        u = u_new
        logger.debug("picard %d: K=%.12g dK=%.3e du=%.3e", it, K_p, change_K, change_u)
        if change_K <= options.picard_tol and change_u <= options.picard_tol:
            return SolutionProfile(
                u=DiscreteFunction(grid, u), eps=eps, K_p=K_p, K_q=K_q,
                picard_iters=it, newton_iters=newton_total,
                final_residual_norm=norm, converged=True, K_history=tuple(K_hist))
        K_p, K_q = next_p, next_q
        K_hist.append(K_p)

    msg = (f"Picard iteration on the Kirchhoff constant did not converge in "
           f"{options.picard_max_iter} iterations at eps={eps:g}")
    if raise_on_failure:
        raise ConvergenceError(msg, best=u, history=K_hist)
    logger.warning(msg)
    return SolutionProfile(
        u=DiscreteFunction(grid, u), eps=eps, K_p=K_hist[-2] if len(K_hist) > 1 else K_p,
        K_q=K_q, picard_iters=options.picard_max_iter, newton_iters=newton_total,
        final_residual_norm=norm, converged=False, K_history=tuple(K_hist))


def _errors_against(profiles, reference):
    out = []
    for prof in profiles:
        diff = DiscreteFunction(reference.grid, prof.u.values - reference.u.values)
        out.append((prof.eps, l2_norm(diff), h1_norm(diff)))
    return out


def continuation_sweep(spec, eps_schedule, grid, options=None, init=None):
    """Solve along a strictly decreasing eps schedule, warm-starting each member.

    Errors (L2 and discrete H1) are measured against the last, smallest-eps
    profile.  A failing member stops the sweep; the partial result records it.
    """
    schedule = check_decreasing_schedule(eps_schedule)
    options = options or SolverOptions()
    if not isinstance(grid, Grid):
        grid = Grid(grid)
    profiles = []
    warm = init
    failed_eps = failure = None
    for eps in schedule:
        try:
            prof = solve_truncated(spec, eps, grid, init=warm, options=options)
        except (ConvergenceError, LinAlgError) as exc:
            failed_eps, failure = eps, str(exc)
            logger.warning("continuation stopped at eps=%g: %s", eps, exc)
            break
        profiles.append(prof)
        warm = prof.u
    errors = []
    if profiles:
        errors = _errors_against(profiles[:-1], profiles[-1])
    return ContinuationResult(profiles=profiles, errors_to_reference=errors,
                              failed_eps=failed_eps, failure=failure)


def with_options(options, **changes):
    """Copy of ``options`` with fields replaced (validated)."""
    return replace(options or SolverOptions(), **changes)
