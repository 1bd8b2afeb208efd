"""Exception hierarchy shared by all caustica modules."""


class CausticaError(Exception):
    """Base class for every error raised by the library."""


class ConstructionError(CausticaError, ValueError):
    """Invalid surface, curve or conic specification."""


class DomainError(CausticaError, ValueError):
    """A point or parameter falls outside the region where an operation is defined."""


class ConvergenceError(CausticaError, RuntimeError):
    """An iterative solver (Newton, shooting, bracketing) did not converge."""


class IllConditionedError(CausticaError, ValueError):
    """Inputs are too close to a degenerate configuration for reliable numerics."""


class ConvexityError(CausticaError, ValueError):
    """Geodesic curvature vanished or changed sign on the working arc."""


class UnsupportedKindError(CausticaError, ValueError):
    """The operation has no meaning for the given surface kind."""


class RangeError(CausticaError, ValueError):
    """A requested level (string length, area) has no admissible solution."""
