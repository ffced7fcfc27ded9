"""Exception hierarchy shared by all modules."""


class VskError(Exception):
    """Base class for every error raised by :mod:`vskextrap`."""


class DomainError(VskError, ValueError):
    """An argument lies outside the domain of a function."""


class ShapeError(VskError, ValueError):
    """Array dimensions do not agree."""


class DegenerateInputError(VskError, ValueError):
    """Input data make the problem ill-posed (e.g. duplicate nodes)."""


class SingularSystemError(VskError, ArithmeticError):
    """A pivot fell below the singularity threshold during factorization."""

    def __init__(self, message, *, pivot=None, index=None, threshold=None):
        super().__init__(message)
        self.pivot = pivot
        self.index = index
        self.threshold = threshold


class ScalingEvaluationError(VskError, ArithmeticError):
    """The scaling function returned a non-finite value."""


class PoleError(DomainError):
    """A rational scaling model was evaluated too close to a pole."""


class FitDegenerateError(VskError, ArithmeticError):
    """The Jacobian of a nonlinear fit lost rank."""


class SelectionError(VskError):
    """Neither scaling model class could be fitted.

    ``diagnostics`` maps each class name to the error that stopped its fit.
    """

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = dict(diagnostics)


class ConfigError(VskError, ValueError):
    """An experiment or CLI configuration is invalid."""


class ExperimentError(VskError):
    """A harness run failed; wraps the underlying error with its configuration.

    ``config`` is the :class:`~vskextrap.harness.ExperimentConfig` and
    ``method`` the method that was running (or None).
    """

    def __init__(self, message, *, config=None, method=None):
        super().__init__(message)
        self.config = config
        self.method = method
