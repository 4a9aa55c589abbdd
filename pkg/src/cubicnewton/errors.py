"""Exception types shared across the package."""


class CubicNewtonError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(CubicNewtonError):
    """Operands have incompatible shapes."""


class NonFinite(CubicNewtonError):
    """A value that must be finite is NaN or infinite."""


class UnsupportedOrder(CubicNewtonError):
    """A derivative order outside what the problem/oracle supports."""


class ZeroDirection(CubicNewtonError):
    """A directional quantity was requested along a zero vector."""


class MonotonicityViolation(CubicNewtonError):
    """A coefficient sequence that must be nondecreasing decreased."""


class Degenerate(CubicNewtonError):
    """All regularization coefficients vanish while the linear term does not."""


class NoConvergence(CubicNewtonError):
    """An iterative solve hit its iteration cap before certifying."""


class ParseError(CubicNewtonError):
    """Malformed input file; carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonAscendingIndex(ParseError):
    """Feature indices within a row are not strictly ascending."""


class EmptyDataset(CubicNewtonError):
    """A dataset with zero rows where at least one is required."""


class SizeExceeded(CubicNewtonError):
    """A requested split/sample exceeds the available rows."""


class ConfigError(CubicNewtonError):
    """Invalid experiment configuration (unknown key, bad value)."""
