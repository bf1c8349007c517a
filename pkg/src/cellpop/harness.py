"""Repeated population control on a single weight vector.

A cell's population is controlled over and over without any transport in
between.  The chain state after ``l`` iterations has ``N^l`` weights; its
distance to the target distribution (``N_obj`` weights of ``1/N_obj``) is

    d^l = sum_i |w_i - 1/N_obj|.

With a source term ``S`` the emitted particles are planned once, keep their
weight ``S / N_vol`` forever, and only the remaining ("initial") population
goes through roulette, splitting and renormalization.  The initial population
is renormalized back to ``1 - S`` so the total mass stays 1.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .popcontrol import SplittingMode, _rr_split, plan_source_emission
from .rng import Purpose, StreamKey

D_FLOOR = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    n0: int
    n_obj: int
    source: float = 0.0
    mode: SplittingMode = SplittingMode.NON_CONSERVATIVE
    iterations: int = 100
    runs: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", SplittingMode.parse(self.mode))
        if self.n_obj < 1:
            raise ValueError("objective count must be ≥ 1")
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")
        if not 0.0 <= self.source < 1.0:
            raise ValueError("source must lie in [0, 1)")
        if self.iterations < 0 or self.runs < 1:
            raise ValueError("iterations must be >= 0 and runs >= 1")


@dataclass
class ChainState:
    ini_weights: np.ndarray
    n_vol: int = 0
    w_vol: float = 0.0
    iteration: int = 0

    @property
    def n_particles(self) -> int:
        return self.ini_weights.size + self.n_vol

    def all_weights(self) -> np.ndarray:
        return np.concatenate([self.ini_weights, np.full(self.n_vol, self.w_vol)])


def run_key(config: ExperimentConfig, run: int) -> StreamKey:
    return StreamKey(config.seed).derive(run)


def init_chain(config: ExperimentConfig, key: StreamKey) -> ChainState:
    """Draw ``N0`` uniform weights, scaled to total ``1 - S``."""
    u = 1.0 - key.derive(Purpose.INIT).stream().uniforms(config.n0)  # (0, 1]
    ini = u * ((1.0 - config.source) / u.sum())
    if config.source > 0.0:
        n_vol, w_vol = plan_source_emission(config.source, 1.0 / config.n_obj)
    else:
        n_vol, w_vol = 0, 0.0
    return ChainState(ini, n_vol, w_vol, 0)


def distance_to_uniform(weights, n_obj: int) -> float:
    return float(np.abs(np.asarray(weights, dtype=float) - 1.0 / n_obj).sum())


def iterate_chain(state: ChainState, config: ExperimentConfig, key: StreamKey) -> ChainState:
    """One RR + S + renormalization pass over the initial population.

    ``key`` is the run's key; the iteration index is appended to it so every
    pass draws from its own stream.
    """
    ini = state.ini_weights
    target = 1.0 - config.source
    w_obj = (ini.sum() + config.source) / config.n_obj
    u = key.derive(Purpose.ROULETTE, state.iteration).stream().at(
        np.arange(ini.size, dtype=np.uint64))
    n, per, _ = _rr_split(ini, w_obj, u, config.mode)
    new = np.repeat(per, n)
    if new.size == 0:
        new = np.array([target])
    elif config.mode is SplittingMode.NON_CONSERVATIVE:
        # all copies carry w_obj: the renormalized weights are target / N exactly
        new = np.full(new.size, target / new.size)
    else:
        new *= target / new.sum()
    return ChainState(new, state.n_vol, state.w_vol, state.iteration + 1)


def appendix_bounds(weights: np.ndarray, w_obj: float) -> tuple[float, float]:
    """(max/min weight ratio, min weight / w_obj) over the non-zero weights."""
    w = weights[weights > 0]
    return float(w.max() / w.min()), float(w.min() / w_obj)


@dataclass
class Trace:
    """Per-iteration rows, flattened over runs (run-major, l = 1..iterations)."""

    run: np.ndarray
    l: np.ndarray
    n: np.ndarray
    d: np.ndarray
    ratio: np.ndarray
    min_over_wobj: np.ndarray
    n_ini: np.ndarray

    def reshape(self, name: str, runs: int) -> np.ndarray:
        return getattr(self, name).reshape(runs, -1)

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(header if header.endswith("\n") else header + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run", "l", "N", "d"])
        d = np.maximum(self.d, D_FLOOR)
        for r, l, n, dd in zip(self.run.tolist(), self.l.tolist(), self.n.tolist(), d.tolist()):
            w.writerow([r, l, n, repr(dd)])
        return buf.getvalue()


def run_chain(config: ExperimentConfig, run: int) -> dict[str, np.ndarray]:
    key = run_key(config, run)
    state = init_chain(config, key)
    it = config.iterations
    out = {k: np.empty(it) for k in ("d", "ratio", "min_over_wobj")}
    out["n"] = np.empty(it, dtype=np.int64)
    out["n_ini"] = np.empty(it, dtype=np.int64)
    # w_obj for the bound check is the one used to produce the iterate
    for i in range(it):
        w_obj = (state.ini_weights.sum() + config.source) / config.n_obj
        state = iterate_chain(state, config, key)
        ratio, mn = appendix_bounds(state.ini_weights, w_obj)
        out["n"][i] = state.n_particles
        out["n_ini"][i] = state.ini_weights.size
        out["d"][i] = distance_to_uniform(state.all_weights(), config.n_obj)
        out["ratio"][i] = ratio
        out["min_over_wobj"][i] = mn
    return out


def _run_block(args):
    config, runs = args
    return [run_chain(config, r) for r in runs]


def run_experiment(config: ExperimentConfig, workers: int = 1) -> Trace:
    """Run ``config.runs`` independent chains; parallel over runs.

    The output does not depend on ``workers``: each run has its own streams.
    """
    runs = list(range(config.runs))
    if workers > 1:
        blocks = [runs[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_block, [(config, b) for b in blocks]))
        by_run = {}
        for b, res in zip(blocks, parts):
            by_run.update(zip(b, res))
        results = [by_run[r] for r in runs]
    else:
        results = [run_chain(config, r) for r in runs]

    it = config.iterations
    cat = {k: np.concatenate([res[k] for res in results]) if results else np.empty(0)
           for k in ("n", "d", "ratio", "min_over_wobj", "n_ini")}
    return Trace(
        run=np.repeat(np.arange(config.runs), it),
        l=np.tile(np.arange(1, it + 1), config.runs),
        **cat,
    )
