"""Uniform grids, nodal functions, truncation operators and quadratures.

Gradients live on cell midpoints, so gradient modulars use the midpoint rule;
zero-order integrals use the trapezoid rule on the nodes.
"""

from dataclasses import dataclass
import io

import numpy as np

from .exceptions import DomainError
from .problem import field_bounds
from .validation import check_nodal_values, check_scalar

__all__ = [
    "Grid",
    "DiscreteFunction",
    "truncate_lower",
    "truncate_double",
    "modular",
    "energy",
    "singular_mass",
    "trapezoid_weights",
    "l2_norm",
    "h1_norm",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid x_i = i h on [0, 1] with ``n_cells`` cells."""

    n_cells: int

    def __post_init__(self):
        if isinstance(self.n_cells, bool) or int(self.n_cells) != self.n_cells or self.n_cells < 4:
            raise DomainError(f"n_cells must be an integer >= 4, got {self.n_cells!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def h(self):
        return 1.0 / self.n_cells

    @property
    def n_nodes(self):
        return self.n_cells + 1

    @property
    def nodes(self):
        # i * h rather than linspace so x_i = i/N exactly as specified
        return np.arange(self.n_nodes) / self.n_cells

    @property
    def midpoints(self):
        return (np.arange(self.n_cells) + 0.5) / self.n_cells


class DiscreteFunction:
    """Nodal values on a :class:`Grid`; the value array is read-only."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        vals = check_nodal_values(values, grid.n_nodes).copy()
        vals.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteFunction is immutable")

    def __repr__(self):
        return f"DiscreteFunction(n_cells={self.grid.n_cells}, max={self.values.max():.6g})"

    def __len__(self):
        return self.values.shape[0]

    @classmethod
    def from_callable(cls, grid, func):
        return cls(grid, func(grid.nodes))

    @property
    def x(self):
        return self.grid.nodes

    def to_csv(self, path_or_buf=None):
        """Write ``x,u`` rows at 17 significant digits; returns the text if no target."""
        buf = io.StringIO()
        buf.write("x,u\n")
        for xi, ui in zip(self.grid.nodes, self.values):
            buf.write(f"{xi:.17g},{ui:.17g}\n")
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", encoding="utf-8") as fh:
                fh.write(text)
        return None

    @classmethod
    def from_csv(cls, path_or_buf):
        """Read a file written by :meth:`to_csv`; the grid is inferred from the row count."""
        if hasattr(path_or_buf, "read"):
            text = path_or_buf.read()
        else:
            with open(path_or_buf, encoding="utf-8") as fh:
                text = fh.read()
        lines = text.strip().splitlines()
        if not lines or lines[0].strip() != "x,u":
            raise DomainError("expected a CSV with header 'x,u'")
        rows = [tuple(float(v) for v in line.split(",")) for line in lines[1:]]
        x = np.array([r[0] for r in rows])
        u = np.array([r[1] for r in rows])
        grid = Grid(len(rows) - 1)
        if not np.allclose(x, grid.nodes, rtol=0, atol=1e-14):
            raise DomainError("CSV abscissae are not a uniform grid on [0, 1]")
        return cls(grid, u)


def truncate_lower(eps, s):
    """max{eps, s}, the lower truncation at level ``eps`` > 0."""
    eps = check_scalar(eps, "eps", lower=0.0, strict_lower=True)
    out = np.maximum(eps, np.asarray(s, dtype=float))
    return float(out) if out.ndim == 0 else out


def truncate_double(eps, delta, s):
    """max{delta, min{s, 1/eps}}; requires 0 < delta <= 1/eps."""
    eps = check_scalar(eps, "eps", lower=0.0, strict_lower=True)
    delta = check_scalar(delta, "delta", lower=0.0, strict_lower=True)
    if delta > 1.0 / eps:
        raise DomainError(f"inconsistent bounds: delta = {delta} exceeds 1/eps = {1.0 / eps}")
    out = np.maximum(delta, np.minimum(np.asarray(s, dtype=float), 1.0 / eps))
    return float(out) if out.ndim == 0 else out


def trapezoid_weights(grid):
    w = np.full(grid.n_nodes, grid.h)
    w[0] = w[-1] = 0.5 * grid.h
    return w


def modular(u, p):
    """Midpoint-rule value of the integral of |u'|^p / p over (0, 1)."""
    grid = u.grid
    slope = np.diff(u.values) / grid.h
    pm = p(grid.midpoints)
    return float(np.sum(grid.h * np.abs(slope) ** pm / pm))


def l2_norm(u):
    """Trapezoid-rule L2 norm of nodal values."""
    w = trapezoid_weights(u.grid)
    return float(np.sqrt(np.sum(w * u.values**2)))


def h1_norm(u):
    """Discrete H1 norm: trapezoid L2 part plus midpoint gradient part."""
    grid = u.grid
    grad = np.diff(u.values) / grid.h
    w = trapezoid_weights(grid)
    return float(np.sqrt(np.sum(w * u.values**2) + np.sum(grid.h * grad**2)))


def energy(u, spec, eps):
    """Truncated energy of a nonnegative nodal function.

    The Kirchhoff antiderivative of each gradient modular, plus the theta
    terms, minus the truncated singular potential and the reaction potential.
    Not defined for alpha = 1, where the singular antiderivative is a logarithm.
    """
    eps = check_scalar(eps, "eps", lower=0.0, strict_lower=True)
    alpha = spec.alpha
    if alpha == 1.0:
        raise NotImplementedError("energy is not defined for alpha = 1 (logarithmic potential)")
    vals = u.values
    if np.any(vals < 0):
        raise DomainError("energy requires u >= 0 at every node")
    grid = u.grid
    x = grid.nodes
    w = trapezoid_weights(grid)

    total = float(spec.M.antiderivative(modular(u, spec.p)))
    if spec.q is not None:
        M_q = spec.M_q if spec.M_q is not None else spec.M
        total += float(M_q.antiderivative(modular(u, spec.q)))
    if spec.theta != 0.0:
        pv = spec.p(x)
        zero_order = vals**pv / pv
        if spec.q is not None:
            qv = spec.q(x)
            zero_order = zero_order + vals**qv / qv
        total += spec.theta * float(np.sum(w * zero_order))

    lifted = np.where(vals >= eps, vals, eps)
    s_eps = float(np.sum(w * spec.f(x) * lifted ** (1.0 - alpha) / (1.0 - alpha)))
    reaction = spec.lam * float(np.sum(w * vals**spec.beta / spec.beta))
    return total - s_eps - reaction


def singular_mass(u, spec, eps, floor=1e-12):
    """Mass of f / u^alpha on the sublevel set {u < eps}, and its reference scale.

    Returns ``(lhs, bound_scale)`` where ``bound_scale`` is
    ``eps^(1 - alpha) * max f * |Omega|^(1/p_max)`` (|Omega| = 1), so callers
    can track ``lhs / bound_scale`` as eps shrinks.  Only interior nodes
    enter the sum: the boundary nodes carry the Dirichlet value, not the
    integrand.
    """
    eps = check_scalar(eps, "eps", lower=0.0, strict_lower=True)
    floor = check_scalar(floor, "floor", lower=0.0, strict_lower=True)
    vals = u.values
    if np.any(vals < 0):
        raise DomainError("singular_mass requires u >= 0 at every node")
    grid = u.grid
    x = grid.nodes
    fv = spec.f(x)
    inner = slice(1, grid.n_cells)
    mask = vals[inner] < eps
    lhs = float(np.sum(grid.h * fv[inner][mask] / np.maximum(vals[inner][mask], floor) ** spec.alpha))
    _, p_max = field_bounds(spec.p)
    f_sup = float(np.max(np.abs(fv)))
    bound_scale = eps ** (1.0 - spec.alpha) * f_sup * 1.0 ** (1.0 / p_max)
    return lhs, bound_scale
