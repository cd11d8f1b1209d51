"""Exception types raised across the package."""


class LabError(Exception):
    """Base class for all errors raised by boundary_lab."""


class NonConstantDistance(LabError):
    """The visual distance is not constant on the given pair (one set contains the other)."""


class NeedsRefinement(LabError):
    """A metric derivative is not constant on the cylinder; refine it first."""


class DepthTooShallow(LabError):
    """The cylinder is too shallow for its image under the action to be a single cylinder."""


class ZeroFunction(LabError):
    """The operation is undefined on the zero function."""


class DimensionTooLarge(LabError):
    """The requested dense computation exceeds the desk-scale caps."""


class DegenerateFit(LabError):
    """A least-squares fit cannot be formed (too few rows or coincident x-values)."""
