"""Exception types raised across the package."""


class CartanGeoError(Exception):
    """Base class for all package errors."""


class DimensionError(CartanGeoError, ValueError):
    """Vector, matrix or tensor shape does not match the algebra."""


class ChartError(CartanGeoError, ValueError):
    """Point chart is unsupported, mismatched, or invalid for the group."""


class NilpotencyError(CartanGeoError, ValueError):
    """Operation needs a nilpotent (usually 2-step) algebra."""


class DegenerateMetricError(CartanGeoError, ValueError):
    """Symmetric form is singular (or numerically so)."""


class InvariantError(CartanGeoError, ValueError):
    """Input violates a structural invariant (antisymmetry, centrality, ...)."""


class FamilyError(CartanGeoError, ValueError):
    """Parametric family is evaluated outside its contract."""
