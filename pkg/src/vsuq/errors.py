"""Exception hierarchy shared across the package."""


class VsuqError(Exception):
    """Base class for all package-specific errors."""


class DomainError(VsuqError, ValueError):
    """A parameter lies outside the admissible domain of its family."""


class RangeError(VsuqError, ValueError):
    """A requested target (e.g. a Kendall tau) is not attainable."""


class ConvergenceError(VsuqError, RuntimeError):
    """An iterative numerical routine failed to converge."""


class ConfigError(VsuqError, ValueError):
    """Invalid or inconsistent configuration input."""


class MeshError(VsuqError, ValueError):
    """Degenerate element geometry or a non-conforming mesh."""


class BoundaryConditionError(VsuqError, RuntimeError):
    """The constrained stiffness matrix is singular."""


class SolveError(VsuqError, RuntimeError):
    """Factorization or solve failure in the linear solver."""


class DeviationError(VsuqError, ValueError):
    """A fiber-angle deviation exceeds the configured cap."""


class SelectionError(VsuqError, RuntimeError):
    """Candidate scoring produced no usable evidence."""


class TrainingError(VsuqError, RuntimeError):
    """Surrogate training diverged."""


class DependencyError(VsuqError, RuntimeError):
    """A required upstream artifact (file) is missing."""
