"""scikit-learn style wrappers so solves and rate fits compose with the ecosystem.

``TruncatedKirchhoffSolver`` holds the problem and discretisation as
hyperparameters (so ``get_params``/``set_params``/``clone`` work), solves on
``fit`` and interpolates the profile on ``predict``.  ``PowerLawRate`` is a
regressor for err ~ C eps^gamma.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analysis import fit_rate
from .calculus import Grid
from .problem import default_spec
from .solver import SolverOptions, continuation_sweep, solve_truncated
from .validation import check_unit_interval

__all__ = ["TruncatedKirchhoffSolver", "PowerLawRate"]


def _as_points(X):
    arr = check_array(X, ensure_2d=False, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected one feature (x), got {arr.shape[1]}")
        arr = arr[:, 0]
    return check_unit_interval(arr, "X")


class TruncatedKirchhoffSolver(BaseEstimator):
    """Solve the truncated problem and expose the profile as a fitted model.

    Parameters
    ----------
    problem : ProblemSpec, optional
        Defaults to the model instance of :func:`default_spec`.
    eps : float or sequence of float
        Truncation level.  A decreasing sequence runs a warm-started
        continuation and keeps the last profile.
    n_cells : int
    options : SolverOptions, optional

    Attributes
    ----------
    profile_ : SolutionProfile
    kirchhoff_constant_ : float
    n_iter_ : int
        Outer (Picard) iterations of the final solve.
    continuation_ : ContinuationResult or None
    """

    def __init__(self, problem=None, eps=1e-3, n_cells=400, options=None):
        self.problem = problem
        self.eps = eps
        self.n_cells = n_cells
        self.options = options

    def fit(self, X=None, y=None):
        """Run the solve; ``X`` and ``y`` are ignored and exist for API compatibility."""
        spec = self.problem if self.problem is not None else default_spec()
        options = self.options if self.options is not None else SolverOptions()
        grid = Grid(self.n_cells)
        if np.ndim(self.eps) == 0:
            self.continuation_ = None
            self.profile_ = solve_truncated(spec, float(self.eps), grid, options=options)
        else:
            result = continuation_sweep(spec, list(self.eps), grid, options)
            if not result.complete:
                raise RuntimeError(f"continuation failed at eps={result.failed_eps}: {result.failure}")
            self.continuation_ = result
            self.profile_ = result.reference
        self.kirchhoff_constant_ = self.profile_.K_p
        self.n_iter_ = self.profile_.picard_iters
        return self

    def predict(self, X):
        """Piecewise-linear interpolation of the solution at points of [0, 1]."""
        check_is_fitted(self, "profile_")
        x = _as_points(X)
        u = self.profile_.u
        return np.interp(x, u.grid.nodes, u.values)

    def transform(self, X):
        return self.predict(X).reshape(-1, 1)


class PowerLawRate(RegressorMixin, BaseEstimator):
    """Fit err = C * eps**gamma by least squares in log10-log10 coordinates.

    Attributes
    ----------
    rate_ : float
        Fitted exponent gamma.
    intercept_ : float
        log10 C.
    r_squared_ : float
    """

    def fit(self, X, y):
        eps = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
        err = check_array(y, ensure_2d=False, dtype=float).reshape(-1)
        if eps.shape != err.shape:
            raise ValueError("X and y must have the same number of samples")
        fit = fit_rate(np.column_stack([eps, err]))
        self.fit_ = fit
        self.rate_ = fit.slope
        self.intercept_ = fit.intercept
        self.r_squared_ = fit.r_squared
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        eps = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
        return self.fit_.predict(eps)
