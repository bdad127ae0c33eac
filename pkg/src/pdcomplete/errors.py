"""Exception types shared across the package."""


class PdCompleteError(Exception):
    """Base class for all package errors."""


class StructuralError(PdCompleteError, ValueError):
    """Malformed input: wrong shape, broken symmetry, invalid cover or tree."""


class MembershipError(PdCompleteError, ValueError):
    """A function vector lies outside the range of the kernel it is measured in."""


class NumericalError(PdCompleteError, RuntimeError):
    """Numerical failure: lost positive-definiteness, no convergence, degenerate solve."""
