"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside the parameter domain."""


class DimensionError(ValueError):
    """An operation was called with an unsupported base/fiber dimension."""


class InsufficientStencilError(ValueError):
    """Derivatives were requested where no stencil fits (grid boundary, no analytic provider)."""


class RegularityError(ValueError):
    """A regular point was required but the point is singular (or vice versa)."""


class RankError(ValueError):
    """A rank assumption (corank one, nondegenerate Gram matrix, ...) failed."""


class ClassificationError(ValueError):
    """A singular point does not have the classification required by the operation."""


class DegeneratePlaneError(ValueError):
    """The two tangent vectors passed to a curvature operator are linearly dependent."""


class PreconditionError(ValueError):
    """An operation-specific precondition was violated."""


class DivergenceError(RuntimeError):
    """Numerical integration drifted too far from the structure group."""


class ConsistencyError(RuntimeError):
    """A cross-check that should hold for valid input data failed."""


class NonconvergenceError(RuntimeError):
    """An iterative solver failed to converge.  ``last`` holds the final iterate."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class ConfigError(ValueError):
    """A scene configuration failed schema validation."""
