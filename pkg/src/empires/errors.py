"""Exception types shared across the package."""


class EmpiresError(Exception):
    """Base class for all package errors."""


class ConfigurationError(EmpiresError):
    """Invalid lattice dimensions, kernel parameters, or run configuration."""


class StaleEdgeError(EmpiresError):
    """A merge was requested for an edge whose endpoint no longer exists."""


class UnsupportedKernelError(EmpiresError):
    """The requested analysis is not defined for this kernel kind."""


class DataQualityError(EmpiresError):
    """Simulation output violates a precondition of an estimator."""


class CouplingViolationError(EmpiresError):
    """The percolation/region-process coupling produced mismatched multisets."""


class InvariantViolation(EmpiresError):
    """An internal bookkeeping invariant failed; indicates a bug."""
