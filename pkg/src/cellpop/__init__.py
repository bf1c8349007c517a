"""Cell-based Monte Carlo population control and a 1-D gray IMC testbed."""
from .allocation import AllocationConfig, allocate_objectives, compute_share
from .harness import ExperimentConfig, distance_to_uniform, init_chain, iterate_chain, run_experiment
from .popcontrol import (CellControlInput, CellControlOutcome, SplittingMode, apply_cell_control,
                         compute_objective_weight, plan_source_emission, renormalize,
                         roulette_split)
from .rng import Purpose, Stream, StreamKey, derive, uniform01

__version__ = "0.1.0"

__all__ = [
    "AllocationConfig", "allocate_objectives", "compute_share",
    "ExperimentConfig", "distance_to_uniform", "init_chain", "iterate_chain", "run_experiment",
    "CellControlInput", "CellControlOutcome", "SplittingMode", "apply_cell_control",
    "compute_objective_weight", "plan_source_emission", "renormalize", "roulette_split",
    "Purpose", "Stream", "StreamKey", "derive", "uniform01",
]
