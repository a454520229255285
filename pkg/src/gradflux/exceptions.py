"""Error types. Every error carries a short machine-readable ``category``."""


class GradfluxError(Exception):
    category = "error"


class InvalidParameters(GradfluxError, ValueError):
    category = "invalid-parameters"


class InvalidDimension(GradfluxError, ValueError):
    category = "invalid-dimension"


class InvalidValue(GradfluxError, ValueError):
    category = "invalid-value"


class SchemaError(GradfluxError, ValueError):
    category = "schema-violation"


class NoConvergence(GradfluxError, RuntimeError):
    """Raised when the basis cap is hit. ``best`` holds the last result."""

    category = "no-convergence"

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class GridTooSmall(GradfluxError, RuntimeError):
    category = "grid-too-small"


class AmbiguousCooldownFlux(GradfluxError, ValueError):
    category = "ambiguous-cooldown-flux"

    def __init__(self, message, n_flux=None):
        super().__init__(message)
        self.n_flux = n_flux


class UnsolvableTarget(GradfluxError, ValueError):
    category = "unsolvable-target"


class NoPeak(GradfluxError, RuntimeError):
    category = "no-peak"


class CannotSeed(GradfluxError, ValueError):
    category = "cannot-seed"


class FitFailed(GradfluxError, RuntimeError):
    category = "fit-failed"

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class NoDecay(GradfluxError, RuntimeError):
    category = "no-decay"


class UndefinedT2E(GradfluxError, ValueError):
    category = "undefined-t2e"
