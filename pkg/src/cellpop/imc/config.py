"""Slab problem description and the two built-in benchmark setups."""
from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .physics import A_RAD, C_LIGHT

STRATEGIES = ("alg2-c", "alg2-nc", "alg3")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SlabConfig:
    """All inputs of a 1-D slab run.  Keys mirror the benchmark tables."""

    dt: float
    t_final: float
    n_cells: int
    dx: float
    rho: float
    c_v: float
    d_left: float
    T_init: float
    T_left: float | None = None
    T_right: float | None = None
    d_right: float | None = None
    x_interface: float | None = None
    strategy: str = "alg2-nc"
    n_obj: int | None = 200
    n_total: int | None = None
    runs: int = 30
    seed: int = 1
    a: float = A_RAD
    c: float = C_LIGHT
    weight_cutoff: float = 1e-12
    area: float = 1.0
    name: str = "slab"

    def __post_init__(self):
        self.validate()

    def validate(self):
        for key in ("dt", "t_final", "dx", "rho", "c_v", "d_left", "a", "c", "area"):
            v = getattr(self, key)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{key} must be a positive number, got {v!r}")
        if not (isinstance(self.n_cells, int) and self.n_cells >= 1):
            raise ConfigError("n_cells must be an integer >= 1")
        if self.T_init < 0:
            raise ConfigError("T_init must be non-negative")
        for key in ("T_left", "T_right", "d_right"):
            v = getattr(self, key)
            if v is not None and not v > 0:
                raise ConfigError(f"{key} must be positive when given")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.n_obj is not None and self.n_obj < 1:
            raise ConfigError("objective count must be ≥ 1")
        if self.strategy.startswith("alg2") and self.n_obj is None:
            raise ConfigError("alg2 strategies need n_obj")
        if self.strategy == "alg3":
            if self.n_total is None and self.n_obj is None:
                raise ConfigError("alg3 needs n_total or n_obj")
            if self.n_total is not None and self.n_total <= 2 * self.n_cells:
                raise ConfigError(f"n_total must exceed 2 * n_cells = {2 * self.n_cells}")
            if self.n_total is None and self.n_obj <= 2:
                raise ConfigError("alg3 with a per-cell average needs n_obj > 2")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not 0 <= self.weight_cutoff < 1:
            raise ConfigError("weight_cutoff must lie in [0, 1)")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def length(self) -> float:
        return self.n_cells * self.dx

    @property
    def volume(self) -> float:
        return self.dx * self.area

    def cell_d(self):
        """Opacity constant of every cell (``d_right`` beyond ``x_interface``)."""
        import numpy as np

        d = np.full(self.n_cells, float(self.d_left))
        if self.d_right is not None:
            x_if = self.x_interface if self.x_interface is not None else 0.5 * self.length
            centers = (np.arange(self.n_cells) + 0.5) * self.dx
            d[centers > x_if] = self.d_right
        return d

    def replace(self, **changes) -> "SlabConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, data: dict) -> "SlabConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "n_total" in data and "n_obj" not in data:
            # a global budget alone: the per-cell default does not apply
            data["n_obj"] = None
        for key in ("n_cells", "n_obj", "n_total", "runs", "seed"):
            if key in data and data[key] is not None:
                if float(data[key]) != int(data[key]):
                    raise ConfigError(f"{key} must be an integer")
                data[key] = int(data[key])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def dumps(config: SlabConfig, fmt: str = "toml") -> str:
    if fmt == "json":
        return json.dumps(config.to_dict(), indent=2) + "\n"
    return tomli_w.dumps(config.to_dict())


def loads(text: str, fmt: str = "toml") -> SlabConfig:
    try:
        data = json.loads(text) if fmt == "json" else tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    return SlabConfig.from_dict(data)


def load(path) -> SlabConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    fmt = "json" if path.suffix.lower() == ".json" else "toml"
    return loads(path.read_text(), fmt)


def save(config: SlabConfig, path) -> None:
    path = Path(path)
    fmt = "json" if path.suffix.lower() == ".json" else "toml"
    path.write_text(dumps(config, fmt))


def marshak_config(**overrides) -> SlabConfig:
    """Single Marshak wave, 50 cells of 0.01 cm, observed at 74 ns."""
    base = SlabConfig(
        name="marshak",
        dt=4e-11,
        t_final=74e-9,
        n_cells=50,
        dx=0.01,
        rho=3.0,
        c_v=8.6177e7,
        d_left=1.56e23,
        T_init=11604.0,
        T_left=11604000.0,
    )
    return base.replace(**overrides) if overrides else base


def two_wave_config(**overrides) -> SlabConfig:
    """Marshak wave plus a weak wave driven from the right into a thin medium."""
    base = marshak_config(
        name="two-wave",
        t_final=2e-9,
        d_right=1.56e13,
        x_interface=0.25,
        T_right=116040.0,
    )
    return base.replace(**overrides) if overrides else base


def default_configs() -> dict[str, SlabConfig]:
    return {"marshak": marshak_config(), "two-wave": two_wave_config()}
