"""Exception types raised by the library."""


class MoutardError(Exception):
    """Base class for every error raised by :mod:`moutard`."""


class DomainBoundsError(MoutardError, ValueError):
    """Grid bounds touch a coordinate singularity (r = 0, sin(theta) = 0)."""


class GridSizeError(MoutardError, ValueError):
    """Too few grid points for the fourth-order stencils."""


class GridMismatchError(MoutardError, ValueError):
    """Two fields that must share a grid do not."""


class NonFiniteValueError(MoutardError, ValueError):
    """A sampled or computed field contains NaN or Inf."""


class EmptyMaskError(MoutardError, ValueError):
    """A norm was requested over a mask that selects no points."""


class SpecialFunctionDomainError(MoutardError, ValueError):
    """Argument outside the domain of a special function."""


class NearZeroError(MoutardError, ValueError):
    """A denominator field (seed Y0 or F) vanishes on the requested points.

    ``points`` holds the offending ``(i, j)`` grid indices.
    """

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)


class InexactFormError(MoutardError):
    """A one-form failed the path-independence check.

    Usually the generating functions do not solve the Schrodinger equation
    with a common potential, or the grid is too coarse.
    """

    def __init__(self, message, defect=float("nan")):
        super().__init__(message)
        self.defect = defect


class ConstraintError(MoutardError, ValueError):
    """Catalog parameters would put a singularity inside the domain."""


class UnknownFamilyError(MoutardError, KeyError):
    """Catalog family identifier not recognised."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""
