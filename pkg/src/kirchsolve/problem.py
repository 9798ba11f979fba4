"""Problem instances: exponent/coefficient fields, Kirchhoff functions, parameters.

The model problem on (0, 1) is

    -(K_p (|u'|^{p-2} u')' + K_q (|u'|^{q-2} u')') + theta (u^{p-1} + u^{q-1})
        = f / u^alpha + lambda u^{beta-1},     u(0) = u(1) = 0,

with K_p = M_p(int |u'|^p / p) and K_q = M_q(int |u'|^q / q).  The q terms and
theta default to absent/zero.
"""

from dataclasses import dataclass, field, replace
import json
import math

import numpy as np

from .exceptions import DomainError, InvalidSpecError
from .validation import check_scalar, check_unit_interval

__all__ = [
    "ExponentField",
    "KirchhoffFunction",
    "ProblemSpec",
    "ValidationReport",
    "eval_field",
    "field_bounds",
    "eval_kirchhoff",
    "eval_kirchhoff_antiderivative",
    "validate_spec",
    "default_spec",
]

_FIELD_KINDS = ("constant", "sinusoidal", "affine", "polynomial", "tabulated")
_KIRCHHOFF_KINDS = ("constant", "affine_sqrt", "polynomial")


@dataclass(frozen=True)
class ExponentField:
    """A scalar function on [0, 1] used for exponents, coefficients and forcing.

    Use the classmethod constructors rather than building one directly.
    """

    kind: str
    params: tuple = ()
    nodes: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in _FIELD_KINDS:
            raise DomainError(f"unknown field kind {self.kind!r}")
        if self.kind == "tabulated":
            nodes = np.asarray(self.nodes, dtype=float)
            vals = np.asarray(self.values, dtype=float)
            if nodes.ndim != 1 or nodes.size < 2 or nodes.shape != vals.shape:
                raise DomainError("tabulated field needs >= 2 nodes and matching values")
            if np.any(np.diff(nodes) <= 0):
                raise DomainError("tabulated nodes must be strictly increasing")
            if nodes[0] > 0.0 or nodes[-1] < 1.0:
                raise DomainError("tabulated nodes must cover [0, 1]")
            if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(vals))):
                raise DomainError("tabulated data must be finite")

    @classmethod
    def constant(cls, c):
        return cls("constant", (check_scalar(c, "c"),))

    @classmethod
    def sinusoidal(cls, base, amplitude):
        """``base + amplitude * sin(pi x)``."""
        return cls("sinusoidal", (check_scalar(base, "base"),
                                  check_scalar(amplitude, "amplitude")))

    @classmethod
    def affine(cls, a, b):
        """``a + b x``."""
        return cls("affine", (check_scalar(a, "a"), check_scalar(b, "b")))

    @classmethod
    def polynomial(cls, coefficients):
        """``sum_k coefficients[k] * x**k``."""
        coeffs = tuple(check_scalar(c, "coefficient") for c in coefficients)
        if not coeffs:
            raise DomainError("polynomial field needs at least one coefficient")
        return cls("polynomial", coeffs)

    @classmethod
    def tabulated(cls, nodes, values):
        """Piecewise-linear interpolant of ``values`` at ``nodes``."""
        return cls("tabulated", (), tuple(float(v) for v in nodes),
                   tuple(float(v) for v in values))

    def __call__(self, x):
        """Vectorised evaluation; no domain check (see :func:`eval_field`)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.params[0])
        if self.kind == "sinusoidal":
            base, amp = self.params
            return base + amp * np.sin(np.pi * x)
        if self.kind == "affine":
            a, b = self.params
            return a + b * x
        if self.kind == "polynomial":
            out = np.zeros_like(x)
            for c in reversed(self.params):
                out = out * x + c
            return out
        return np.interp(x, self.nodes, self.values)

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.params[0]}
        if self.kind == "sinusoidal":
            return {"kind": "sinusoidal", "base": self.params[0],
                    "amplitude": self.params[1]}
        if self.kind == "affine":
            return {"kind": "affine", "a": self.params[0], "b": self.params[1]}
        if self.kind == "polynomial":
            return {"kind": "polynomial", "coefficients": list(self.params)}
        return {"kind": "tabulated", "nodes": list(self.nodes),
                "values": list(self.values)}

    @classmethod
    def from_dict(cls, data):
        """Inverse of :meth:`to_dict`; a bare number means a constant field."""
        if isinstance(data, (int, float)) and not isinstance(data, bool):
            return cls.constant(data)
        if not isinstance(data, dict) or "kind" not in data:
            raise DomainError(f"cannot build a field from {data!r}")
        kind = data["kind"]
        try:
            if kind == "constant":
                return cls.constant(data["value"])
            if kind == "sinusoidal":
                return cls.sinusoidal(data["base"], data["amplitude"])
            if kind == "affine":
                return cls.affine(data["a"], data["b"])
            if kind == "polynomial":
                return cls.polynomial(data["coefficients"])
            if kind == "tabulated":
                return cls.tabulated(data["nodes"], data["values"])
        except KeyError as exc:
            raise DomainError(f"field of kind {kind!r} is missing key {exc}") from None
        raise DomainError(f"unknown field kind {kind!r}")


def eval_field(field, x):
    """Evaluate ``field`` at a point (or array of points) of [0, 1].

    Raises DomainError for points outside [0, 1].
    """
    arr = check_unit_interval(x)
    out = field(arr)
    return float(out) if out.ndim == 0 else out


def field_bounds(field, n_samples=1001):
    """Min and max of ``field`` over ``n_samples`` uniform points including endpoints."""
    if int(n_samples) < 2:
        raise DomainError("n_samples must be >= 2")
    vals = field(np.linspace(0.0, 1.0, int(n_samples)))
    return float(vals.min()), float(vals.max())


@dataclass(frozen=True)
class KirchhoffFunction:
    """Kirchhoff coefficient M(t) = sum_k c_k t^{k/2}, together with its antiderivative.

    ``constant(m)`` and ``affine_sqrt(c)`` are the one- and two-term special
    cases.  ``kind`` is kept so the function serialises back to the form it
    was given in.
    """

    kind: str
    coefficients: tuple

    def __post_init__(self):
        if self.kind not in _KIRCHHOFF_KINDS:
            raise DomainError(f"unknown Kirchhoff kind {self.kind!r}")
        if len(self.coefficients) == 0:
            raise DomainError("Kirchhoff function needs at least one coefficient")

    @classmethod
    def constant(cls, m):
        return cls("constant", (check_scalar(m, "m"),))

    @classmethod
    def affine_sqrt(cls, c):
        """M(t) = 1 + c sqrt(t)."""
        return cls("affine_sqrt", (1.0, check_scalar(c, "c")))

    @classmethod
    def polynomial(cls, coefficients):
        """M(t) = sum_k coefficients[k] * t^(k/2)."""
        return cls("polynomial", tuple(check_scalar(c, "coefficient") for c in coefficients))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        root = np.sqrt(t)
        out = np.zeros_like(t)
        for k, c in enumerate(self.coefficients):
            out = out + c * root**k
        return out

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for k, c in enumerate(self.coefficients):
            e = 0.5 * k + 1.0
            out = out + c * t**e / e
        return out

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "m": self.coefficients[0]}
        if self.kind == "affine_sqrt":
            return {"kind": "affine_sqrt", "c": self.coefficients[1]}
        return {"kind": "polynomial", "coefficients": list(self.coefficients)}

    @classmethod
    def from_dict(cls, data):
        if isinstance(data, (int, float)) and not isinstance(data, bool):
            return cls.constant(data)
        if not isinstance(data, dict) or "kind" not in data:
            raise DomainError(f"cannot build a Kirchhoff function from {data!r}")
        kind = data["kind"]
        try:
            if kind == "constant":
                return cls.constant(data["m"])
            if kind == "affine_sqrt":
                return cls.affine_sqrt(data["c"])
            if kind == "polynomial":
                return cls.polynomial(data["coefficients"])
        except KeyError as exc:
            raise DomainError(f"Kirchhoff function of kind {kind!r} is missing key {exc}") from None
        raise DomainError(f"unknown Kirchhoff kind {kind!r}")


def _check_t(t):
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("Kirchhoff argument t must be finite and >= 0")
    return arr


def eval_kirchhoff(M, t):
    """M(t) for t >= 0."""
    out = M(_check_t(t))
    return float(out) if out.ndim == 0 else out


def eval_kirchhoff_antiderivative(M, t):
    """Closed-form integral of M from 0 to t, t >= 0."""
    out = M.antiderivative(_check_t(t))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ProblemSpec:
    """A complete problem instance on the unit interval.

    ``lam`` is the reaction parameter (``"lambda"`` in JSON documents).
    When ``q`` is given without ``M_q``, the q-modular uses ``M`` as well.
    """

    p: ExponentField
    alpha: float
    beta: float
    lam: float
    f: ExponentField
    M: KirchhoffFunction
    q: ExponentField = None
    M_q: KirchhoffFunction = None
    theta: float = 0.0

    @property
    def regime(self):
        return "strong" if self.alpha >= 1.0 else "weak"

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        out = {
            "p": self.p.to_dict(),
            "alpha": self.alpha,
            "beta": self.beta,
            "lambda": self.lam,
            "theta": self.theta,
            "f": self.f.to_dict(),
            "M": self.M.to_dict(),
        }
        if self.q is not None:
            out["q"] = self.q.to_dict()
        if self.M_q is not None:
            out["M_q"] = self.M_q.to_dict()
        return out

    @classmethod
    def from_dict(cls, data):
        """Build from a JSON-style mapping; missing keys fall back to the model defaults."""
        base = default_spec().to_dict()
        unknown = set(data) - {"p", "q", "alpha", "beta", "lambda", "theta", "f", "M", "M_q"}
        if unknown:
            raise DomainError(f"unknown problem keys: {sorted(unknown)}")
        merged = {**base, **data}
        q = merged.get("q")
        M_q = merged.get("M_q")
        return cls(
            p=ExponentField.from_dict(merged["p"]),
            alpha=check_scalar(merged["alpha"], "alpha"),
            beta=check_scalar(merged["beta"], "beta"),
            lam=check_scalar(merged["lambda"], "lambda"),
            f=ExponentField.from_dict(merged["f"]),
            M=KirchhoffFunction.from_dict(merged["M"]),
            q=None if q is None else ExponentField.from_dict(q),
            M_q=None if M_q is None else KirchhoffFunction.from_dict(M_q),
            theta=check_scalar(merged.get("theta", 0.0), "theta"),
        )

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def default_spec():
    """The one-dimensional model instance used throughout the numerical experiments."""
    return ProblemSpec(
        p=ExponentField.sinusoidal(2.0, 1.0),
        alpha=1.5,
        beta=4.0,
        lam=0.1,
        f=ExponentField.polynomial([1.0, 1.0, -1.0]),
        M=KirchhoffFunction.affine_sqrt(0.5),
    )



@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    regime: str
    violations: list = field(default_factory=list)
    p_min: float = math.nan
    p_max: float = math.nan
    q_min: float = None
    q_max: float = None

    def to_dict(self):
        return {
            "valid": self.valid,
            "regime": self.regime,
            "violations": [{"condition": c, "message": m} for c, m in self.violations],
            "p_min": self.p_min,
            "p_max": self.p_max,
            "q_min": self.q_min,
            "q_max": self.q_max,
        }


def _kirchhoff_violations(M, name, t_max=1e3, n=2001):
    t = np.linspace(0.0, t_max, n)
    vals = M(t)
    out = []
    if np.any(vals <= 0):
        out.append((f"{name}_positive", f"{name}(t) must be > 0 for t >= 0"))
    if np.any(np.diff(vals) < -1e-12 * np.maximum(1.0, np.abs(vals[:-1]))):
        out.append((f"{name}_nondecreasing", f"{name} must be nondecreasing on [0, inf)"))
    return out


def validate_spec(spec, n_samples=1001):
    """Check ``spec`` against the structural conditions on an ``n_samples`` grid.

    Violations are collected, never raised.
    """
    x = np.linspace(0.0, 1.0, int(max(n_samples, 2)))
    violations = []

    if not spec.alpha > 0:
        violations.append(("alpha_positive", f"singular exponent alpha must be > 0, got {spec.alpha}"))
    if spec.lam < 0:
        violations.append(("lambda_nonnegative", f"lambda must be >= 0, got {spec.lam}"))
    if spec.theta < 0:
        violations.append(("theta_nonnegative", f"theta must be >= 0, got {spec.theta}"))

    pv = spec.p(x)
    p_min, p_max = float(pv.min()), float(pv.max())
    if p_min <= 1.0:
        violations.append(("p_exceeds_one", f"exponent must exceed 1 (p_min = {p_min})"))
    if spec.lam > 0 and spec.beta <= 1.0:
        violations.append(("beta_exceeds_one", f"reaction exponent must exceed 1 (beta = {spec.beta})"))

    fv = spec.f(x)
    if np.any(fv < 0):
        violations.append(("f_nonnegative", f"forcing must be >= 0 (min = {fv.min()})"))
    if spec.alpha >= 1.0 and np.all(fv == 0):
        violations.append(("f_nonzero", "forcing must not vanish identically when alpha >= 1"))

    violations.extend(_kirchhoff_violations(spec.M, "M"))

    q_min = q_max = None
    if spec.q is not None:
        qv = spec.q(x)
        q_min, q_max = float(qv.min()), float(qv.max())
        if q_min <= 1.0:
            violations.append(("q_exceeds_one", f"exponent must exceed 1 (q_min = {q_min})"))
        if not (q_max < p_min and p_max < spec.beta):
            violations.append(("exponent_ordering",
                               f"need q- <= q+ < p- <= p+ < beta, got q+ = {q_max}, "
                               f"p- = {p_min}, p+ = {p_max}, beta = {spec.beta}"))
        if spec.M_q is not None:
            violations.extend(_kirchhoff_violations(spec.M_q, "M_q"))

    return ValidationReport(
        valid=not violations,
        regime=spec.regime,
        violations=violations,
        p_min=p_min,
        p_max=p_max,
        q_min=q_min,
        q_max=q_max,
    )


def require_valid(spec, n_samples=1001):
    """Raise InvalidSpecError unless :func:`validate_spec` passes."""
    report = validate_spec(spec, n_samples)
    if not report.valid:
        msg = "; ".join(m for _, m in report.violations)
        raise InvalidSpecError(f"invalid problem: {msg}", report.violations)
    return report
