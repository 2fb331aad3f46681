"""LORD and LORD-II: decomposition-based multi-modal multi-objective optimizers."""

from .core import BoxBounds, Candidate, ConfigurationError, ConsistencyError, ContractViolation, Population, make_rng
from .engine import OptimizerConfig, RunResult, run
from .filters import Variant
from .problems import ProblemDef, get_problem, sample_reference_set

__all__ = [
    "BoxBounds",
    "Candidate",
    "ConfigurationError",
    "ConsistencyError",
    "ContractViolation",
    "OptimizerConfig",
    "Population",
    "ProblemDef",
    "RunResult",
    "Variant",
    "get_problem",
    "make_rng",
    "run",
    "sample_reference_set",
]
__version__ = "0.1.0"
