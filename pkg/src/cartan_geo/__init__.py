"""Cartan-Schouten metrics, connections, Fisher structures and biinvariant means on Lie groups."""

from . import connections, cs_metrics, fisher, lie_core, mean
from .connections import *  # noqa: F401,F403
from .cs_metrics import *  # noqa: F401,F403
from .errors import (
    CartanGeoError,
    ChartError,
    DegenerateMetricError,
    DimensionError,
    FamilyError,
    InvariantError,
    NilpotencyError,
)
from .fisher import *  # noqa: F401,F403
from .lie_core import *  # noqa: F401,F403
from .mean import *  # noqa: F401,F403

__version__ = "0.1.0"

__all__ = (
    ["CartanGeoError", "ChartError", "DegenerateMetricError", "DimensionError", "FamilyError"]
    + ["InvariantError", "NilpotencyError", "connections", "cs_metrics", "fisher", "lie_core", "mean"]
    + connections.__all__
    + cs_metrics.__all__
    + fisher.__all__
    + lie_core.__all__
    + mean.__all__
)
