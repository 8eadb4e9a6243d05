"""Exception types shared across the package."""


class TCFVError(Exception):
    """Base class for all solver errors."""


class InvalidStateError(TCFVError):
    """A cell state violates physical admissibility (rho > 0, T > 0, det A > 0)."""


class PathInversionError(TCFVError):
    """Dual-variable inversion failed somewhere along a phase-space path."""


class PicardConvergenceError(TCFVError):
    """Picard iteration of the implicit step did not reach its tolerance."""


class ConfigError(TCFVError):
    """Malformed or inconsistent run configuration."""
