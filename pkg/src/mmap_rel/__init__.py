"""Matrix-analytic reliability and cost model of a multi-state unit with shocks,
preventive maintenance and a Bernoulli vacation policy for the repairperson."""

from . import economics, matkit, measures, mmap_continuous, mmap_discrete, model, phdist
from .economics import EconomicParameters, cost_vector, total_profit_rate
from .mmap_discrete import build
from .model import SystemModel, discretize, from_config, load

__version__ = "0.1.0"

__all__ = [
    "matkit", "phdist", "model", "mmap_continuous", "mmap_discrete", "measures", "economics",
    "SystemModel", "EconomicParameters", "build", "load", "from_config", "discretize",
    "cost_vector", "total_profit_rate",
]
