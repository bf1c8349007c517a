"""1-D gray implicit Monte Carlo slab with pluggable population control."""
from .config import SlabConfig, default_configs, marshak_config, two_wave_config
from .simulation import RunResult, SimState, advance_timestep, initial_state, run_realization

__all__ = [
    "SlabConfig", "default_configs", "marshak_config", "two_wave_config",
    "RunResult", "SimState", "advance_timestep", "initial_state", "run_realization",
]
