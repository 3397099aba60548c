"""Exception types raised across the package."""


class OrbitCascadeError(Exception):
    """Base class for all package errors."""


class DomainError(OrbitCascadeError, ValueError):
    """An input lies outside the domain an operation is defined on."""


class PoleError(DomainError):
    """A transfer function was evaluated at one of its poles."""


class HorizonError(DomainError):
    """A time at or beyond the finite maneuver blow-up horizon."""


class SingularityError(DomainError):
    """A formula is singular at the given input (e.g. unit gain)."""


class DegenerateGeometryError(DomainError):
    """Conjunction geometry has no well-defined conjunction plane."""


class DataError(OrbitCascadeError, ValueError):
    """Input data is malformed or physically inconsistent."""

    def __init__(self, message, rows=None):
        super().__init__(message)
        self.rows = list(rows or [])


class NumericalError(OrbitCascadeError, ArithmeticError):
    """A numerical procedure failed to reach its requested accuracy."""

    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class InferenceError(OrbitCascadeError, ValueError):
    """Policy parameters cannot be identified from the supplied traces."""


class TleError(DataError):
    """A two-line element set failed format validation."""


class ChecksumError(TleError):
    def __init__(self, line_no, expected, found):
        super().__init__(
            f"TLE line {line_no} checksum mismatch: expected {expected}, found {found}"
        )
        self.line_no = line_no
        self.expected = expected
        self.found = found
