"""Exception hierarchy shared by every module."""


class PlpolyError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(PlpolyError, ValueError):
    pass


class FormatError(PlpolyError, ValueError):
    """Malformed polyhedron text."""


class FloatConversionError(PlpolyError, OverflowError):
    """A rational entry has no finite binary64 image."""


class SingularBasis(PlpolyError):
    """The chosen basis columns are linearly dependent."""


class IterationLimit(PlpolyError):
    """The floating-point simplex gave up."""


class NoInterior(PlpolyError):
    """The polyhedron has an empty interior."""


class EmptyPolyhedron(PlpolyError):
    pass


class OracleLimit(PlpolyError):
    """Fourier-Motzkin exceeded its intermediate row cap."""


class ConsistencyError(PlpolyError):
    """A checker discrepancy that no rational fallback could resolve."""
