"""Green-aware deployment constraint generation for microservice applications."""

from .engine import GeneratorConfig, compute_threshold, generate, placement_compatible
from .model import AFFINITY, AVOID_NODE, Constraint
from .pipeline import PipelineConfig, RunManifest, run_generate
from .ranker import RankerConfig, rank

__all__ = [
    "AFFINITY",
    "AVOID_NODE",
    "Constraint",
    "GeneratorConfig",
    "PipelineConfig",
    "RankerConfig",
    "RunManifest",
    "compute_threshold",
    "generate",
    "placement_compatible",
    "rank",
    "run_generate",
]
__version__ = "0.1.0"
