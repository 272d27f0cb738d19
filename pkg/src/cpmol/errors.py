"""Exception types shared across the solver."""


class CpmolError(Exception):
    """Base class for all solver errors."""


class AmbiguousClosestPoint(CpmolError):
    """Query point is (numerically) equidistant to multiple surface points.

    Raised for points on or very near the medial axis, e.g. the center of a
    circle.  During band construction this signals that the band is too wide
    for the geometry at the requested grid spacing.
    """


class EmptyMesh(CpmolError):
    """Triangle mesh has no faces."""


class DegenerateTriangle(CpmolError):
    """Triangle mesh contains a zero-area face."""


class NotWatertight(CpmolError):
    """Triangle mesh has an edge not shared by exactly two faces."""


class UnsupportedSurface(CpmolError):
    """Operation not available for this surface kind."""


class BandNotClosed(CpmolError):
    """Band failed its stencil-closure consistency check."""


class OutOfBand(CpmolError):
    """Interpolation stencil references a node outside the band."""


class MissingNeighbour(CpmolError):
    """Difference stencil references a node outside the band."""


class NonpositiveDiffusivity(CpmolError):
    """Variable-coefficient diffusivity must be strictly positive."""


class SingularSystem(CpmolError):
    """Linear system is singular and nullspace handling is disabled."""


class SolverFailure(CpmolError):
    """Linear solver did not reach the requested residual tolerance."""


class NonFinite(CpmolError):
    """NaN or Inf detected during time stepping (reported as instability)."""
