"""Exception hierarchy shared by every module of the package."""

import numpy as np


class KirchsolveError(Exception):
    """Base class for all errors raised by kirchsolve."""


class DomainError(KirchsolveError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class InvalidSpecError(KirchsolveError, ValueError):
    """A problem instance violates its structural conditions."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class PreconditionError(KirchsolveError, ValueError):
    """The hypotheses of a paired experiment are not met."""


class DegenerateFitError(KirchsolveError, ValueError):
    """A regression has no information to work with (e.g. an all-zero window)."""


class ConvergenceError(KirchsolveError, RuntimeError):
    """An iterative solver stopped without meeting its tolerance.

    Attributes
    ----------
    best : numpy.ndarray or None
        Best iterate seen (smallest residual), nodal values.
    history : list of float
        Residual norms (Newton) or Kirchhoff constants (Picard) per iteration.
    """

    def __init__(self, message, best=None, history=()):
        super().__init__(message)
        self.best = None if best is None else np.array(best, copy=True)
        self.history = list(history)


# re-exported so callers can catch solver linear-algebra failures from one place
LinAlgError = np.linalg.LinAlgError
