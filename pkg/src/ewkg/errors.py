"""Exception types shared across the evolution and diagnostics modules."""


class EwkgError(Exception):
    """Base class for all package errors."""


class ConfigError(EwkgError):
    """Bad run configuration or malformed config file."""


class BlowupError(EwkgError):
    """Constraint solve left the small-data regime (metric exponent ran away)."""


class CFLError(EwkgError):
    """Requested time step violates the stability bound."""


class NonFiniteError(EwkgError):
    """A NaN or Inf appeared in evolved data."""


class DegenerateConeError(EwkgError):
    """Null expansion degenerated: the radius stopped decreasing outward in u."""


class ConeOutOfRangeError(EwkgError):
    """A cone mantle left the computational domain."""


class QuadratureError(EwkgError):
    """Adaptive quadrature failed to meet its tolerance within the depth bound."""
