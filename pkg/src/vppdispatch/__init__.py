"""vppdispatch: uncertainty-aware dispatch for building districts.

Forecast loads, solar capacity and prices with uncertainty estimates,
sample scenarios, solve a two-stage stochastic linear program over a
rolling horizon with online model fine-tuning, and score runs against
baseline controllers.
"""

__version__ = "0.1.0"

from .domain import (
    BuildingSeries,
    DispatchPlan,
    GenerationDevice,
    MarketSeries,
    ProblemInstance,
    StorageDevice,
    TimeGrid,
    validate_instance,
    validate_plan,
)

__all__ = [
    "__version__",
    "BuildingSeries",
    "DispatchPlan",
    "GenerationDevice",
    "MarketSeries",
    "ProblemInstance",
    "StorageDevice",
    "TimeGrid",
    "validate_instance",
    "validate_plan",
]
