"""Exception types shared across the toolkit.

Plain invalid arguments raise ValueError; everything that carries domain
meaning gets its own class so callers (and the CLI exit-code mapping) can
tell failure modes apart.
"""


class NonlocalHeatError(Exception):
    """Base class for toolkit-specific failures."""


class GridMismatchError(NonlocalHeatError):
    """A binary operation received functions living on different grids."""


class SamplingError(NonlocalHeatError):
    """A scalar function produced a non-finite value at a grid node."""


class DomainTooSmallError(NonlocalHeatError):
    """The truncated domain [-L, L] cannot support the requested computation."""

    def __init__(self, message: str, min_half_extent: float | None = None):
        super().__init__(message)
        self.min_half_extent = min_half_extent


class MomentDivergesError(NonlocalHeatError):
    """A moment integral diverges at or above the critical exponent."""


class DiscretizationQualityError(NonlocalHeatError):
    """Discrete kernel mass deviates from the truncated integral beyond the h^2 band."""


class MomentTableError(NonlocalHeatError):
    """A moment table lacks an order required by the polynomial algebra."""


class InternalConsistencyError(NonlocalHeatError):
    """A mathematically guaranteed relation failed; indicates a numerical bug."""


class FitFailureError(NonlocalHeatError):
    """An envelope fit could not be carried out on the requested range."""


class FitInconsistencyError(NonlocalHeatError):
    """Fitted envelope constants produced an empty blow-up window."""
