"""Exception types shared across the package."""


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class DegenerateMetricError(ValueError):
    """A metric failed the pointwise positive-definiteness test."""


class VarianceMismatchError(ValueError):
    """A symmetric 2-tensor has the wrong variance for the operation."""


class WindowError(ValueError):
    """A time parameter lies outside a metric path's validity window."""


class BandLimitError(ValueError):
    """Requested Fourier support is not resolvable on the grid."""
