"""Energy-proportional distribution of a global particle budget over cells.

Each cell receives an objective count proportional to its share of the total
energy ``q_m = (E_r,m + S_m) / E_tot``, rounded stochastically so that
``E[N_obj,m] = q_m * N_share``.  A floor of ``1{E_r>0} + 1{S>0}`` keeps every
non-empty cell represented; the budget reserves ``2 * n_cells`` particles for
that fail-safe.

Note on the fractional part.  The remainder is sometimes written as
``R_m = (E_r,m - S_m)/E_tot - floor((E_r,m + S_m)/E_tot)``, which neither
involves ``N_share`` nor is the fractional part of the scaled share, and
would make the expected total budget wrong.  The rounding here uses
``R_m = q_m N_share - floor(q_m N_share)``, the only choice for which
``E[N_obj,m] = q_m N_share``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetTooSmall, DegenerateDomain
from .rng import Stream


@dataclass(frozen=True)
class AllocationConfig:
    """Either ``n_total`` (global budget) or ``n_obj_usr`` (per-cell average)."""

    n_cells: int
    n_total: int | None = None
    n_obj_usr: int | None = None

    def __post_init__(self):
        if (self.n_total is None) == (self.n_obj_usr is None):
            raise ValueError("give exactly one of n_total or n_obj_usr")
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")


def compute_share(config: AllocationConfig) -> tuple[int, int]:
    """Return ``(N_total, N_share)``."""
    c_m = config.n_cells
    if config.n_total is not None:
        if config.n_total <= 2 * c_m:
            raise BudgetTooSmall(
                f"n_total={config.n_total} must exceed 2 * n_cells = {2 * c_m}")
        return config.n_total, config.n_total - 2 * c_m
    if config.n_obj_usr <= 2:
        raise BudgetTooSmall(f"per-cell average {config.n_obj_usr} must exceed 2")
    return config.n_obj_usr * c_m, (config.n_obj_usr - 2) * c_m


def allocate_objectives(e_r, s, n_share: int, stream: Stream) -> np.ndarray:
    """Per-cell objective counts for one time step.

    Cell ``m`` reads the variate at counter ``m`` of ``stream``.  Cells with no
    energy get 0 and must be skipped by the caller.
    """
    e_r = np.asarray(e_r, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(e_r < 0) or np.any(s < 0):
        raise ValueError("cell energies must be non-negative")
    cell_e = e_r + s
    e_tot = cell_e.sum()
    if not e_tot > 0.0:
        raise DegenerateDomain("total energy over the domain is zero")

    share = cell_e / e_tot * n_share
    base = np.floor(share)
    u = stream.at(np.arange(cell_e.size, dtype=np.uint64))
    n = base.astype(np.int64) + (u < share - base)
    floor_ = (e_r > 0).astype(np.int64) + (s > 0)
    n = np.maximum(n, floor_)
    n[cell_e <= 0.0] = 0
    return n
