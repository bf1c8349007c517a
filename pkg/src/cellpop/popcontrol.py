"""Cell-local population control: emission sizing, Russian roulette,
splitting, renormalization and the non-void correction.

All routines work on plain weight arrays.  Callers that carry particle state
(position, direction, ...) use ``CellControlOutcome.parents`` to copy the
parent's payload onto each surviving particle or clone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numba
import numpy as np

from .errors import DegenerateCell, InvalidObjective, InvalidWeight, NoEmission
from .rng import Stream, nb_uniform


class SplittingMode(Enum):
    CONSERVATIVE = "c"
    NON_CONSERVATIVE = "nc"

    @classmethod
    def parse(cls, value) -> "SplittingMode":
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("-", "_")
        aliases = {
            "c": cls.CONSERVATIVE, "conservative": cls.CONSERVATIVE,
            "nc": cls.NON_CONSERVATIVE, "non_conservative": cls.NON_CONSERVATIVE,
            "nonconservative": cls.NON_CONSERVATIVE,
        }
        try:
            return aliases[v]
        except KeyError:
            raise ValueError(f"unknown splitting mode {value!r}") from None


def compute_objective_weight(e_r: float, s: float, n_obj: int) -> float:
    """Target weight ``(E_r + S) / N_obj`` for every particle of the cell."""
    if n_obj < 1:
        raise InvalidObjective(f"objective count must be >= 1, got {n_obj}")
    total = e_r + s
    if not total > 0.0:
        raise DegenerateCell(f"cell energy E_r + S = {total} is not positive")
    return total / n_obj


def plan_source_emission(s: float, w_obj: float) -> tuple[int, float]:
    """Number and weight of particles carrying the source energy ``s``.

    At least one particle is emitted; ``n * w`` reproduces ``s`` up to one
    rounding of the division.
    """
    if not s > 0.0:
        raise NoEmission(f"source energy {s} is not positive")
    if not w_obj > 0.0:
        raise InvalidWeight(f"objective weight {w_obj} is not positive")
    n = max(1, math.floor(s / w_obj))
    return n, s / n


def _rr_split(w, w_obj, u, mode):
    """Vectorized RR + S: copies per particle, weight per copy, RR mask.

    Below the objective weight a particle survives when ``u <= w / w_obj``;
    above it, it becomes ``floor(w / w_obj)`` copies plus one more when
    ``u < frac(w / w_obj)``.
    """
    ratio = w / w_obj
    whole = np.floor(ratio)
    frac = ratio - whole
    rr = whole == 0.0
    n = np.where(rr, frac >= u, whole + (u < frac)).astype(np.int64)
    if mode is SplittingMode.CONSERVATIVE:
        per = np.where(rr, w_obj, w / np.maximum(n, 1))
    else:
        per = np.full(w.shape, w_obj)
    return n, per, rr


@numba.njit(cache=True)
def _rr_split_kernel(w, w_obj, key_hash, conservative):
    # scalar twin of _rr_split fused with the bookkeeping; particle p reads counter p
    n_in = w.size
    n = np.empty(n_in, np.int64)
    per = np.empty(n_in)
    killed = survived = split = clones = 0
    total = 0
    for p in range(n_in):
        u = nb_uniform(key_hash, p)
        ratio = w[p] / w_obj
        whole = np.floor(ratio)
        frac = ratio - whole
        if whole == 0.0:
            k = 1 if frac >= u else 0
            per[p] = w_obj
            if k:
                survived += 1
            else:
                killed += 1
        else:
            k = int(whole) + (1 if u < frac else 0)
            per[p] = w[p] / k if conservative else w_obj
            if k > 1:
                split += 1
                clones += k - 1
        n[p] = k
        total += k
    kept = np.empty(total)
    parents = np.empty(total, np.int64)
    j = 0
    for p in range(n_in):
        for _ in range(n[p]):
            kept[j] = per[p]
            parents[j] = p
            j += 1
    return kept, parents, killed, survived, split, clones


def roulette_split(w: float, w_obj: float, u: float, mode: SplittingMode) -> list[float]:
    """RR + S applied to a single particle with the uniform variate ``u``."""
    if not (w > 0.0 and w_obj > 0.0):
        raise InvalidWeight(f"weights must be positive (w={w}, w_obj={w_obj})")
    mode = SplittingMode.parse(mode)
    n, per, _ = _rr_split(np.array([w]), w_obj, np.array([u]), mode)
    return [float(per[0])] * int(n[0])


def renormalize(weights, target: float):
    """Scale ``weights`` so that they sum to ``target``; returns (scaled, c)."""
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if not (total > 0.0 and target > 0.0):
        raise InvalidWeight("renormalization needs a positive mass and target")
    c = target / total
    return w * c, c


@dataclass
class CellControlInput:
    initial_weights: np.ndarray
    source_energy: float
    objective_count: int
    mode: SplittingMode = SplittingMode.NON_CONSERVATIVE
    # boundary energy entering through the cell's face; emitted as a second
    # source population sized with the same objective weight
    surface_energy: float = 0.0

    def __post_init__(self):
        self.initial_weights = np.asarray(self.initial_weights, dtype=float).reshape(-1)
        self.mode = SplittingMode.parse(self.mode)
        if self.initial_weights.size and not np.all(self.initial_weights > 0.0):
            raise InvalidWeight("initial weights must all be positive")
        if self.source_energy < 0.0 or self.surface_energy < 0.0:
            raise InvalidWeight("source energies must be non-negative")
        if self.objective_count < 1:
            raise InvalidObjective(f"objective count must be >= 1, got {self.objective_count}")

    @property
    def radiative_energy(self) -> float:
        return float(self.initial_weights.sum())

    @property
    def total_energy(self) -> float:
        return self.radiative_energy + self.source_energy + self.surface_energy


@dataclass
class CellControlOutcome:
    kept_weights: np.ndarray
    parents: np.ndarray
    emitted: tuple[int, float]
    objective_weight: float
    renorm_factor: float
    killed: int = 0
    survived_rr: int = 0
    split_events: int = 0
    clones_created: int = 0
    pre_renorm_energy: float = 0.0
    nonvoid: bool = False
    surface_emitted: tuple[int, float] = (0, 0.0)
    input_energy: float = field(default=0.0, repr=False)

    @property
    def n_particles(self) -> int:
        return self.kept_weights.size + self.emitted[0] + self.surface_emitted[0]

    def total_energy(self) -> float:
        n_v, w_v = self.emitted
        n_s, w_s = self.surface_emitted
        return float(self.kept_weights.sum()) + n_v * w_v + n_s * w_s

    def all_weights(self) -> np.ndarray:
        n_v, w_v = self.emitted
        n_s, w_s = self.surface_emitted
        return np.concatenate([self.kept_weights, np.full(n_v, w_v), np.full(n_s, w_s)])


def apply_cell_control(inp: CellControlInput, stream: Stream) -> CellControlOutcome:
    """Run the full cell control on one cell.

    One uniform is consumed per initial particle, read at counter position
    ``p`` of ``stream`` so the outcome does not depend on processing order.
    """
    w = inp.initial_weights
    e_r = inp.radiative_energy
    s = inp.source_energy
    s_surf = inp.surface_energy
    total = e_r + s + s_surf
    w_obj = compute_objective_weight(e_r, s + s_surf, inp.objective_count)

    n_vol, w_vol = plan_source_emission(s, w_obj) if s > 0.0 else (0, 0.0)
    n_surf, w_surf = plan_source_emission(s_surf, w_obj) if s_surf > 0.0 else (0, 0.0)

    if w.size:
        kept, parents, killed, survived, split, clones = _rr_split_kernel(
            w, w_obj, np.uint64(stream.key.hash64), inp.mode is SplittingMode.CONSERVATIVE)
    else:
        parents = np.empty(0, dtype=np.int64)
        kept = np.empty(0)
        killed = survived = split = clones = 0

    pre = float(kept.sum())
    emitted_mass = n_vol * w_vol + n_surf * w_surf
    nonvoid = False
    if kept.size == 0 and n_vol == 0 and n_surf == 0:
        # every particle rouletted away in a sourceless cell
        nonvoid = True
        c = 1.0
        heaviest = int(np.argmax(w))
        kept = np.array([e_r])
        parents = np.array([heaviest])
    else:
        c = total / (pre + emitted_mass)
        kept = kept * c
        w_vol *= c
        w_surf *= c

    return CellControlOutcome(
        kept_weights=kept,
        parents=parents,
        emitted=(n_vol, w_vol),
        surface_emitted=(n_surf, w_surf),
        objective_weight=w_obj,
        renorm_factor=c,
        killed=killed,
        survived_rr=survived,
        split_events=split,
        clones_created=clones,
        pre_renorm_energy=pre,
        nonvoid=nonvoid,
        input_energy=total,
    )
