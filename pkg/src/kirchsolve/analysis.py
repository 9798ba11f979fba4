"""Theoretical exponents, rate and boundary fits, energy tracking, renormalized checks."""

from dataclasses import dataclass, asdict
import math

import numpy as np

from .calculus import energy
from .exceptions import DegenerateFitError, DomainError
from .problem import field_bounds
from .solver import SolverOptions, regularized_flux
from .validation import check_scalar

__all__ = [
    "ExponentReport",
    "RateFit",
    "RenormTestFunction",
    "RenormalizedCheck",
    "BoundaryFit",
    "theoretical_exponents",
    "fit_rate",
    "fit_boundary",
    "energy_decay",
    "renormalized_residual",
]


@dataclass(frozen=True)
class ExponentReport:
    """Boundary-growth, convergence-rate and Hoelder exponents for a problem.

    ``mu2`` is None (and ``blow_up`` True) when p_min - 1 - alpha <= 0;
    ``gamma_rate`` is None in the weak regime alpha < 1.
    """

    mu1: float
    mu2: float
    blow_up: bool
    gamma_rate: float
    gamma_holder: float
    p_min: float
    p_max: float
    alpha: float
    alpha_f: float
    q_min: float = None
    q_max: float = None

    @property
    def gamma_rate_applicable(self):
        return self.gamma_rate is not None

    def to_dict(self):
        out = asdict(self)
        out["gamma_rate_applicable"] = self.gamma_rate_applicable
        return out


def theoretical_exponents(spec, alpha_f=1.0, n_samples=1001):
    """Evaluate the closed-form exponents for ``spec``.

    p_min/p_max (and q_min/q_max) are sampled on ``n_samples`` points.
    ``alpha_f`` is the Hoelder exponent of the forcing.
    """
    alpha_f = check_scalar(alpha_f, "alpha_f", lower=0.0, upper=1.0, strict_lower=True)
    alpha = spec.alpha
    p_min, p_max = field_bounds(spec.p, n_samples)
    q_min = q_max = None

    mu1_den = p_max - 1.0 + alpha
    mu1 = 2.0 / mu1_den if mu1_den > 0 else math.inf
    mu2_den = p_min - 1.0 - alpha
    blow_up = mu2_den <= 0
    mu2 = None if blow_up else 2.0 / mu2_den

    gamma_rate = None
    if alpha >= 1.0:
        gamma_rate = min((alpha - 1.0) / (2.0 * alpha), 1.0 / p_max)

    holder = [alpha_f, (p_min - 1.0) / p_max, 0.5]
    if spec.q is not None:
        q_min, q_max = field_bounds(spec.q, n_samples)
        holder.append((q_min - 1.0) / q_max)
    return ExponentReport(
        mu1=mu1, mu2=mu2, blow_up=blow_up, gamma_rate=gamma_rate,
        gamma_holder=min(holder), p_min=p_min, p_max=p_max, alpha=alpha,
        alpha_f=alpha_f, q_min=q_min, q_max=q_max,
    )


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def predict(self, eps):
        """Fitted error at ``eps``: 10**intercept * eps**slope."""
        return 10.0**self.intercept * np.asarray(eps, dtype=float) ** self.slope

    def to_dict(self):
        return asdict(self)


def _least_squares(x, y):
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    ss_res = np.sum((y - intercept - slope * x) ** 2)
    ss_tot = np.sum((y - ym) ** 2)
    # variance at rounding level means a flat line; r^2 is then 1 iff the fit is exact too
    noise = 1e-24 * max(1.0, float(np.sum(y * y)))
    if ss_tot <= noise:
        r2 = 1.0 if ss_res <= noise else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(min(max(r2, 0.0), 1.0))


def fit_rate(points):
    """Least-squares line through (log10 eps, log10 err); the slope is the empirical rate."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DomainError("fit_rate needs at least two (eps, err) pairs")
    if np.any(~np.isfinite(pts)) or np.any(pts <= 0):
        raise DomainError("fit_rate needs finite positive eps and err values")
    if np.unique(pts[:, 0]).size < 2:
        raise DomainError("fit_rate needs at least two distinct eps values")
    slope, intercept, r2 = _least_squares(np.log10(pts[:, 0]), np.log10(pts[:, 1]))
    return RateFit(slope=slope, intercept=intercept, r_squared=r2, n_points=int(pts.shape[0]))


@dataclass(frozen=True)
class BoundaryFit:
    linear_slope: float
    power_exponent: float
    r_squared_linear: float
    side: str
    window: float
    n_points: int

    def to_dict(self):
        return asdict(self)


def fit_boundary(u, side="left", window=0.05):
    """Fit u against distance to one boundary over ``[0, window]``.

    ``linear_slope`` is the least-squares slope through the origin;
    ``power_exponent`` is the log-log slope over the window nodes with u > 0
    (the boundary node itself is excluded).
    """
    window = check_scalar(window, "window", lower=0.0, upper=0.5,
                          strict_lower=True, strict_upper=True)
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    x = u.grid.nodes
    vals = u.values
    dist = x if side == "left" else 1.0 - x
    if side == "right":
        dist = dist[::-1]
        vals = vals[::-1]
    mask = dist <= window + 1e-12
    if mask.sum() < 4:
        raise DomainError(f"window {window} holds fewer than 4 nodes")
    d, v = dist[mask], vals[mask]
    if np.all(v == 0):
        raise DegenerateFitError("u vanishes on the whole fitting window")

    slope = float(np.dot(d, v) / np.dot(d, d))
    ss_res = np.sum((v - slope * d) ** 2)
    ss_tot = np.sum((v - v.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else float(1.0 - ss_res / ss_tot)

    pos = (d > 0) & (v > 0)
    if pos.sum() < 2:
        raise DegenerateFitError("fewer than two positive values for the log-log fit")
    power, _, _ = _least_squares(np.log(d[pos]), np.log(v[pos]))
    return BoundaryFit(linear_slope=slope, power_exponent=power, r_squared_linear=r2,
                       side=side, window=window, n_points=int(mask.sum()))


def energy_decay(result, spec):
    """Energy of each profile at its own eps and its gap to the smallest-eps energy.

    Returns a list of ``(eps, energy, gap)``.
    """
    profiles = result.profiles if hasattr(result, "profiles") else list(result)
    if len(profiles) < 2:
        raise DomainError("energy_decay needs at least two profiles")
    values = [energy(prof.u, spec, prof.eps) for prof in profiles]
    ref = values[-1]
    return [(prof.eps, e, abs(e - ref)) for prof, e in zip(profiles, values)]


@dataclass(frozen=True)
class RenormTestFunction:
    """Test function h on (0, inf) for the renormalized identity.

    kinds: ``bump(a, b)`` is exp(-1/((s-a)(b-s))) on (a, b), scaled to peak 1;
    ``log_truncated(k)`` is log(k * min(s, k)) for s >= 1/k and 0 below, a
    shifted, clipped logarithm that vanishes near 0; ``zero``.
    """

    __test__ = False  # keep pytest from collecting this class

    kind: str
    a: float = 0.0
    b: float = 0.0

    @classmethod
    def bump(cls, a, b):
        a = check_scalar(a, "a")
        b = check_scalar(b, "b")
        if not b > a:
            raise DomainError("bump needs a < b")
        return cls("bump", a, b)

    @classmethod
    def log_truncated(cls, k):
        k = check_scalar(k, "k", lower=1.0, strict_lower=True)
        return cls("log_truncated", 1.0 / k, k)

    @classmethod
    def zero(cls):
        return cls("zero")

    @property
    def support(self):
        if self.kind == "zero":
            return None
        if self.kind == "bump":
            return (self.a, self.b)
        return (self.a, math.inf)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(s)
        if self.kind == "bump":
            a, b = self.a, self.b
            inside = (s > a) & (s < b)
            prod = np.where(inside, (s - a) * (b - s), 1.0)
            peak = ((b - a) / 2.0) ** 2
            # scaling by the peak value keeps max h = 1 without underflow
            return np.where(inside, np.exp(-1.0 / prod + 1.0 / peak), 0.0)
        k = self.b
        return np.where(s >= self.a, np.log(k * np.clip(s, self.a, k)), 0.0)

    def to_dict(self):
        if self.kind == "bump":
            return {"kind": "bump", "a": self.a, "b": self.b}
        if self.kind == "log_truncated":
            return {"kind": "log_truncated", "k": self.b}
        return {"kind": "zero"}

    @classmethod
    def from_dict(cls, data):
        kind = data.get("kind")
        if kind == "bump":
            return cls.bump(data["a"], data["b"])
        if kind == "log_truncated":
            return cls.log_truncated(data["k"])
        if kind == "zero":
            return cls.zero()
        raise DomainError(f"unknown test-function kind {kind!r}")


@dataclass(frozen=True)
class RenormalizedCheck:
    """Discrete renormalized identity tested against h(u).

    ``residual`` = |lhs - rhs| with the truncated source f/(u+eps)^alpha;
    ``residual_unregularized`` uses f/u^alpha instead (diagnostic only).
    ``h_mass`` is sum_i h_grid |h(u_i)|.
    """

    residual: float
    lhs: float
    rhs: float
    residual_unregularized: float
    h_mass: float

    def __float__(self):
        return self.residual


def renormalized_residual(profile, spec, h, options=None):
    """Evaluate the renormalized identity for a solved profile against ``h(u)``."""
    if h.support is not None and h.support[0] <= 0:
        raise DomainError("test function support must stay away from 0")
    options = options or SolverOptions()
    u = profile.u.values
    grid = profile.u.grid
    dx = grid.h
    x = grid.nodes
    hu = h(u)
    h_mass = float(np.sum(dx * np.abs(hu)))

    slope = np.diff(u) / dx
    F, _ = regularized_flux(slope, spec.p(grid.midpoints), options.flux_regularization)
    dh = np.diff(hu) / dx
    lhs = profile.K_p * float(np.sum(dx * F * dh))
    if spec.q is not None:
        G, _ = regularized_flux(slope, spec.q(grid.midpoints), options.flux_regularization)
        lhs += profile.K_q * float(np.sum(dx * G * dh))
    if spec.theta != 0.0:
        zero_order, _ = regularized_flux(u, spec.p(x), options.flux_regularization)
        if spec.q is not None:
            zq, _ = regularized_flux(u, spec.q(x), options.flux_regularization)
            zero_order = zero_order + zq
        lhs += spec.theta * float(np.sum(dx * zero_order * hu))

    fv = spec.f(x)
    reaction = spec.lam * np.sign(u) * np.abs(u) ** (spec.beta - 1.0)
    rhs = float(np.sum(dx * (fv * (u + profile.eps) ** (-spec.alpha) + reaction) * hu))
    active = hu != 0
    with np.errstate(divide="ignore"):
        pure = np.where(active, fv * np.where(active, u, 1.0) ** (-spec.alpha), 0.0)
    rhs_pure = float(np.sum(dx * (pure + reaction) * hu))
    return RenormalizedCheck(residual=abs(lhs - rhs), lhs=lhs, rhs=rhs,
                             residual_unregularized=abs(lhs - rhs_pure), h_mass=h_mass)
