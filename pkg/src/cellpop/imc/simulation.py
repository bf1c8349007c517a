"""Time stepping of the gray IMC slab with pluggable population control.

One step:

1. opacity, Fleck factor from the start-of-step matter temperature;
2. volumic emission per cell and surface energy at the driven boundaries;
3. objective counts: fixed ``n_obj`` (alg2-*) or energy-proportional
   allocation of a global budget (alg3);
4. cell control on census + volumic (+ surface, for boundary cells)
   particles, all sized with the cell's objective weight;
5. sampling of emitted particles and tracking of everybody;
6. matter temperature update from deposited minus emitted energy.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..allocation import AllocationConfig, allocate_objectives, compute_share
from ..popcontrol import CellControlInput, SplittingMode, apply_cell_control
from ..rng import Purpose, StreamKey
from .config import SlabConfig
from .physics import (fleck_factor, opacity, radiative_temperature, surface_emission,
                      update_matter, volumic_emission)
from .tracking import track

STEP_FIELDS = (
    "step", "time", "e_rad_start", "e_mat_start", "influx", "leakage", "e_rad_end",
    "e_mat_end", "emitted", "deposited", "n_tracked", "n_census", "n_emitted", "killed",
    "survived_rr", "split_events", "clones", "events", "balance_residual",
)


@dataclass
class SimState:
    T: np.ndarray
    x: np.ndarray
    mu: np.ndarray
    w: np.ndarray
    cell: np.ndarray
    step: int = 0

    def census_energy(self, n_cells: int) -> np.ndarray:
        return np.bincount(self.cell, weights=self.w, minlength=n_cells)

    def census_count(self, n_cells: int) -> np.ndarray:
        return np.bincount(self.cell, minlength=n_cells)


@dataclass
class TimestepReport:
    step: int
    time: float
    e_rad_start: float
    e_mat_start: float
    influx: float
    leakage: float
    e_rad_end: float
    e_mat_end: float
    emitted: float
    deposited: float
    n_tracked: int
    n_census: int
    n_emitted: int
    killed: int
    survived_rr: int
    split_events: int
    clones: int
    events: int
    balance_residual: float
    wall_seconds: float = field(default=0.0, compare=False)

    def row(self) -> list:
        return [getattr(self, k) for k in STEP_FIELDS]


def strategy_mode(strategy: str) -> SplittingMode:
    return SplittingMode.CONSERVATIVE if strategy == "alg2-c" else SplittingMode.NON_CONSERVATIVE


def _initial_per_cell(cfg: SlabConfig) -> int:
    if cfg.strategy == "alg3" and cfg.n_total is not None:
        return max(1, cfg.n_total // cfg.n_cells)
    return cfg.n_obj


def cell_opacity(cfg: SlabConfig, T: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Opacity and Fleck factor per cell; cells at exactly 0 K are black."""
    k = np.full(T.shape, np.inf)
    f = np.ones(T.shape)
    hot = T > 0.0
    k[hot] = opacity(T[hot], cfg.rho, d[hot])
    f[hot] = fleck_factor(T[hot], k[hot], cfg.dt, cfg.rho, cfg.c_v, cfg.a, cfg.c)
    return k, f


def initial_state(cfg: SlabConfig, key: StreamKey) -> SimState:
    """Matter at ``T_init``; radiation in equilibrium with it, ``n`` particles per cell."""
    n_cells = cfg.n_cells
    T = np.full(n_cells, float(cfg.T_init))
    e_cell = cfg.a * cfg.T_init**4 * cfg.volume
    if e_cell <= 0.0:
        empty = np.empty(0)
        return SimState(T, empty, empty.copy(), empty.copy(), np.empty(0, dtype=np.int64))
    per = _initial_per_cell(cfg)
    cell = np.repeat(np.arange(n_cells), per)
    u = key.derive(Purpose.INIT).stream().at(np.arange(2 * cell.size, dtype=np.uint64))
    x = (cell + u[0::2]) * cfg.dx
    mu = 2.0 * u[1::2] - 1.0
    w = np.full(cell.size, e_cell / per)
    return SimState(T, x, mu, w, cell)


def _emit(stream, n, x_lo, dx, dt):
    u = stream.at(np.arange(3 * n, dtype=np.uint64)).reshape(n, 3)
    return x_lo + dx * u[:, 0], 2.0 * u[:, 1] - 1.0, dt * (1.0 - u[:, 2])


def _emit_surface(stream, n, x0, sign, dt):
    u = stream.at(np.arange(2 * n, dtype=np.uint64)).reshape(n, 2)
    # density 2|mu| on the inward half range
    return np.full(n, x0), sign * np.sqrt(1.0 - u[:, 0]), dt * (1.0 - u[:, 1])


def objective_counts(cfg: SlabConfig, e_r, source, key: StreamKey) -> np.ndarray:
    n_cells = cfg.n_cells
    if cfg.strategy == "alg3":
        acfg = AllocationConfig(n_cells, n_total=cfg.n_total,
                                n_obj_usr=None if cfg.n_total is not None else cfg.n_obj)
        _, n_share = compute_share(acfg)
        if (e_r + source).sum() <= 0.0:
            return np.zeros(n_cells, dtype=np.int64)
        return allocate_objectives(e_r, source, n_share,
                                   key.derive(Purpose.ALLOCATION).stream())
    n = np.full(n_cells, cfg.n_obj, dtype=np.int64)
    n[(e_r + source) <= 0.0] = 0
    return n


def advance_timestep(state: SimState, cfg: SlabConfig, key: StreamKey,
                     d: np.ndarray | None = None):
    """Advance one step.  ``key`` is the run key; the step index is appended.

    Returns the new state and a :class:`TimestepReport`.
    """
    t0 = time.perf_counter()
    n_cells = cfg.n_cells
    vol = cfg.volume
    dt = cfg.dt
    d = cfg.cell_d() if d is None else d
    step_key = key.derive(state.step)
    mode = strategy_mode(cfg.strategy)

    k, f = cell_opacity(cfg, state.T, d)
    S = np.zeros(n_cells)
    hot = state.T > 0.0
    S[hot] = volumic_emission(f[hot], k[hot], state.T[hot], dt, vol, cfg.a, cfg.c)
    surf = np.zeros(n_cells)
    if cfg.T_left is not None:
        surf[0] += surface_emission(cfg.T_left, dt, cfg.a, cfg.c, cfg.area)
    if cfg.T_right is not None:
        surf[-1] += surface_emission(cfg.T_right, dt, cfg.a, cfg.c, cfg.area)
    influx = float(surf.sum())

    e_r = state.census_energy(n_cells)
    e_rad_start = float(state.w.sum())
    e_mat_start = float((cfg.rho * cfg.c_v * vol * state.T).sum())
    n_obj = objective_counts(cfg, e_r, S + surf, step_key)

    # census particles grouped by cell (state keeps them sorted)
    bounds = np.searchsorted(state.cell, np.arange(n_cells + 1))
    xs, mus, ws, cells, ts = [], [], [], [], []
    w_obj = np.zeros(n_cells)
    killed = survived = split = clones = n_emitted = 0
    roulette_key = step_key.derive(Purpose.ROULETTE)
    emission_key = step_key.derive(Purpose.EMISSION)
    edges = np.arange(n_cells + 1) * cfg.dx
    for m in range(n_cells):
        if n_obj[m] == 0:
            continue
        lo, hi = bounds[m], bounds[m + 1]
        out = apply_cell_control(
            CellControlInput(state.w[lo:hi], S[m], int(n_obj[m]), mode, surface_energy=surf[m]),
            roulette_key.derive(m).stream())
        w_obj[m] = out.objective_weight
        killed += out.killed
        survived += out.survived_rr
        split += out.split_events
        clones += out.clones_created
        idx = lo + out.parents
        nk = idx.size
        xs.append(state.x[idx])
        mus.append(state.mu[idx])
        ws.append(out.kept_weights)
        cells.append(np.full(nk, m))
        ts.append(np.full(nk, dt))
        n_vol, w_vol = out.emitted
        if n_vol:
            ex, emu, et = _emit(emission_key.derive(m).stream(), n_vol, edges[m], cfg.dx, dt)
            xs.append(ex); mus.append(emu); ws.append(np.full(n_vol, w_vol))
            cells.append(np.full(n_vol, m)); ts.append(et)
        n_surf, w_surf = out.surface_emitted
        if n_surf:
            # a boundary cell can be driven from both sides when n_cells == 1
            shares = []
            if m == 0 and cfg.T_left is not None:
                shares.append((0, surface_emission(cfg.T_left, dt, cfg.a, cfg.c, cfg.area), 0.0, 1.0))
            if m == n_cells - 1 and cfg.T_right is not None:
                shares.append((1, surface_emission(cfg.T_right, dt, cfg.a, cfg.c, cfg.area),
                               cfg.length, -1.0))
            ns = _split_surface(n_surf, [s[1] for s in shares])
            for (side, _, x0, sign), nside in zip(shares, ns):
                if nside == 0:
                    continue
                stream = emission_key.derive(n_cells + side).stream()
                ex, emu, et = _emit_surface(stream, nside, x0, sign, dt)
                xs.append(ex); mus.append(emu); ws.append(np.full(nside, w_surf))
                cells.append(np.full(nside, m)); ts.append(et)
        n_emitted += n_vol + n_surf

    if xs:
        x = np.concatenate(xs)
        mu = np.concatenate(mus)
        w = np.concatenate(ws)
        cell = np.concatenate(cells).astype(np.int64)
        t_rem = np.concatenate(ts)
    else:
        x = np.empty(0); mu = np.empty(0); w = np.empty(0); t_rem = np.empty(0)
        cell = np.empty(0, dtype=np.int64)
    n_tracked = x.size

    cutoff = cfg.weight_cutoff * w_obj
    res = track(x, mu, w, cell, t_rem, step_key.derive(Purpose.SCATTERING).hash64,
                edges, k, f, cutoff, cfg.c)

    T_new = update_matter(state.T, res.deposited, S, cfg.rho, cfg.c_v, vol)
    alive = res.fate == 0
    order = np.argsort(cell[alive], kind="stable")
    new_state = SimState(T_new, x[alive][order], mu[alive][order], w[alive][order],
                         cell[alive][order], state.step + 1)

    e_rad_end = float(new_state.w.sum())
    e_mat_end = float((cfg.rho * cfg.c_v * vol * T_new).sum())
    leakage = res.leak_left + res.leak_right
    before = e_rad_start + e_mat_start + influx - leakage
    residual = (e_rad_end + e_mat_end) - before
    report = TimestepReport(
        step=state.step + 1,
        time=(state.step + 1) * dt,
        e_rad_start=e_rad_start,
        e_mat_start=e_mat_start,
        influx=influx,
        leakage=leakage,
        e_rad_end=e_rad_end,
        e_mat_end=e_mat_end,
        emitted=float(S.sum()),
        deposited=float(res.deposited.sum()),
        n_tracked=n_tracked,
        n_census=int(alive.sum()),
        n_emitted=n_emitted,
        killed=killed,
        survived_rr=survived,
        split_events=split,
        clones=clones,
        events=int(res.events),
        balance_residual=residual,
        wall_seconds=time.perf_counter() - t0,
    )
    return new_state, report


def _split_surface(n: int, energies: list[float]) -> list[int]:
    if len(energies) == 1:
        return [n]
    tot = sum(energies)
    first = int(round(n * energies[0] / tot))
    return [first, n - first]


@dataclass
class RunResult:
    run: int
    T_matter: np.ndarray
    T_rad: np.ndarray
    e_r: np.ndarray
    n_census: np.ndarray
    reports: list[TimestepReport]
    cpu_seconds: float
    x_centers: np.ndarray

    @property
    def initial_energy(self) -> float:
        r = self.reports[0]
        return r.e_rad_start + r.e_mat_start

    def cumulative_balance(self) -> float:
        """Relative mismatch of final energy against initial + influx - leakage."""
        r0, rn = self.reports[0], self.reports[-1]
        start = r0.e_rad_start + r0.e_mat_start
        infl = sum(r.influx for r in self.reports)
        leak = sum(r.leakage for r in self.reports)
        end = rn.e_rad_end + rn.e_mat_end
        return abs(end - (start + infl - leak)) / (start + infl)


def run_realization(cfg: SlabConfig, run: int, n_steps: int | None = None,
                    progress=None) -> RunResult:
    """One independent realization, streams keyed by ``(seed, run)``."""
    key = StreamKey(cfg.seed).derive(run)
    state = initial_state(cfg, key)
    d = cfg.cell_d()
    steps = cfg.n_steps if n_steps is None else n_steps
    reports = []
    cpu = 0.0
    for _ in range(steps):
        state, rep = advance_timestep(state, cfg, key, d)
        reports.append(rep)
        cpu += rep.wall_seconds
        if progress is not None:
            progress(run, rep)
    e_r = state.census_energy(cfg.n_cells)
    return RunResult(
        run=run,
        T_matter=state.T,
        T_rad=radiative_temperature(e_r, cfg.volume, cfg.a),
        e_r=e_r,
        n_census=state.census_count(cfg.n_cells),
        reports=reports,
        cpu_seconds=cpu,
        x_centers=(np.arange(cfg.n_cells) + 0.5) * cfg.dx,
    )
