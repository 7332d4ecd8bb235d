"""Exception hierarchy shared by all modules."""


class FracWeakError(Exception):
    """Base class for every error raised by the package."""


class DomainError(FracWeakError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ShapeError(FracWeakError, ValueError):
    """Array or grid sizes are inconsistent."""


class ValidationError(FracWeakError, ValueError):
    """Input data violate a documented invariant."""


class SolverError(FracWeakError, RuntimeError):
    """A linear solve failed; carries the offending contour point."""

    def __init__(self, message, p=None):
        super().__init__(message if p is None else f"{message} (p = {p!r})")
        self.p = p


class ContourError(FracWeakError, RuntimeError):
    """Integrand evaluation failed at a contour node."""

    def __init__(self, message, index=None, node=None):
        super().__init__(f"{message} at node {index} (p = {node!r})")
        self.index = index
        self.node = node


class ConfigError(FracWeakError, ValueError):
    """Invalid run configuration; the message names the key path."""
