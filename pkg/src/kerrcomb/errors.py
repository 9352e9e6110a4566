"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands live on incompatible Hilbert spaces."""


class CutoffTooSmallError(ValueError):
    """Requested state leaks past the Fock cutoff beyond the tolerated level."""


class ScenarioValidationError(ValueError):
    """A scenario document is malformed or references unknown factories/metrics."""


class LeakAbortError(RuntimeError):
    """Truncation-edge population grew far beyond tolerance; results untrustworthy."""
