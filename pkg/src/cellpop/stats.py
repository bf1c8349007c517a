"""Statistics across independent realizations of the slab problem.

For ``n`` realizations of a cell field ``T(u, m)``::

    mean(m) = 1/n sum_u T(u, m)
    var(m)  = 1/(n-1) sum_u (T(u, m) - mean(m))^2
    RE2     = sum_m var(m) / sum_m mean(m)^2
    FOM     = 1 / (RE2 * T_cpu)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _sps

from .errors import DegenerateReference, InfiniteFom, InsufficientRuns

FOM_INF = "inf"


@dataclass(frozen=True)
class RealizationMatrix:
    values: np.ndarray                  # (n_runs, n_cells)
    cpu_seconds: np.ndarray | None = None  # (n_runs,), None when not measured

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ValueError("realization values must be finite")
        object.__setattr__(self, "values", v)
        if self.cpu_seconds is not None:
            c = np.asarray(self.cpu_seconds, dtype=float).reshape(-1)
            if c.size != v.shape[0]:
                raise ValueError("one cpu time per realization is required")
            if not np.all(np.isfinite(c)):
                raise ValueError("cpu times must be finite")
            object.__setattr__(self, "cpu_seconds", c)

    @property
    def n_runs(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Summary:
    n: int
    mean: np.ndarray
    var: np.ndarray
    std: np.ndarray
    ci99: np.ndarray


def summarize(values) -> Summary:
    """Per-column mean, unbiased variance, std and 99% Student-t half-width."""
    if isinstance(values, RealizationMatrix):
        values = values.values
    v = np.atleast_2d(np.asarray(values, dtype=float))
    n = v.shape[0]
    if n < 2:
        raise InsufficientRuns(f"need at least 2 realizations, got {n}")
    mean = v.mean(axis=0)
    var = v.var(axis=0, ddof=1)
    std = np.sqrt(var)
    t = _sps.t.ppf(0.995, n - 1)
    return Summary(n, mean, var, std, t * std / math.sqrt(n))


def relative_error_sq(summary: Summary) -> float:
    den = float(np.sum(summary.mean ** 2))
    if den <= 0.0:
        raise DegenerateReference("all cell means are zero")
    return float(np.sum(summary.var)) / den


def figure_of_merit(re2: float, t_cpu: float) -> float:
    if t_cpu <= 0.0:
        raise ValueError("cpu time must be positive")
    if re2 <= 0.0:
        raise InfiniteFom("zero relative error gives an unbounded figure of merit")
    return 1.0 / (re2 * t_cpu)


@dataclass(frozen=True)
class FomReport:
    mean: np.ndarray
    var: np.ndarray
    std: np.ndarray
    ci99_halfwidth: np.ndarray
    re2: float
    cpu_seconds: float | None
    fom: float | None      # None: infinite, or no timing available
    n_runs: int

    @property
    def fom_text(self) -> str:
        if self.cpu_seconds is None:
            return ""
        return FOM_INF if self.fom is None else repr(self.fom)


def fom_report(matrix: RealizationMatrix) -> FomReport:
    s = summarize(matrix.values)
    re2 = relative_error_sq(s)
    cpu = fom = None
    if matrix.cpu_seconds is not None:
        cpu = float(matrix.cpu_seconds.mean())
        try:
            fom = figure_of_merit(re2, cpu)
        except InfiniteFom:
            fom = None
    return FomReport(s.mean, s.var, s.std, s.ci99, re2, cpu, fom, s.n)
