"""Experiment configuration: a flat TOML key/value file.

Example::

    dimension = 1
    delta0 = 0.5
    t_min = 100.0
    t_max = 10000.0
    t_points = 25
    tol = 1e-8
    seed = 7

    u0.family = "zero"
    u1.family = "gaussian"
    u1.amplitude = 1.0
    u1.width = 1.0
    u1.center = [0.0]

    grid.enabled = false
    grid.box = 128.0
    grid.N = 4096

    output.csv = "lemma21.csv"
    output.json = "lemma21.json"
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .data import Bump, Dipole, Gaussian, GridSamples
from .oracles import GridField
from .symbols import DEFAULT_DELTA0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 1
    u0: object = None
    u1: object = None
    delta0: float = DEFAULT_DELTA0
    t_min: float = 1e2
    t_max: float = 1e4
    t_points: int = 25
    tol: float = 1e-8
    grid_enabled: bool = False
    grid_box: float = 128.0
    grid_N: int = 4096
    grid_t: float = 20.0
    hf_t_max: float = 40.0
    hf_t_points: int = 41
    directions: int = 64
    seed: int = 0
    samples: int = 10_000
    r_samples: tuple = (0.6, 0.8, 1.0, 2.0, 3.0, 5.0, 10.0)
    csv_path: Path | None = None
    json_path: Path | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("dimension must be >= 1")
        if not 0.0 < self.delta0 < 2.0:
            raise ConfigError(f"delta0 must lie in (0, 2), got {self.delta0}")
        if not 0.0 < self.t_min < self.t_max:
            raise ConfigError("need 0 < t_min < t_max")
        if self.t_points < 2:
            raise ConfigError("t_points must be >= 2")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        for name in ("u0", "u1"):
            datum = getattr(self, name)
            if datum is None:
                object.__setattr__(self, name, Gaussian(self.n, amplitude=0.0))
            elif datum.n != self.n:
                raise ConfigError(f"{name} has dimension {datum.n}, config says {self.n}")

    def t_grid(self) -> np.ndarray:
        grid = np.geomspace(self.t_min, self.t_max, self.t_points)
        if not np.all(np.diff(grid) > 0):
            raise ConfigError("t-grid must be strictly increasing")
        return grid

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def _datum(spec: dict, n: int, base: Path):
    family = str(spec.get("family", "zero")).lower()
    try:
        if family == "zero":
            return Gaussian(n, amplitude=0.0)
        if family == "gaussian":
            return Gaussian(n, float(spec.get("amplitude", 1.0)), float(spec.get("width", 1.0)),
                            spec.get("center"))
        if family == "dipole":
            return Dipole(n, float(spec.get("amplitude", 1.0)), float(spec.get("width", 1.0)),
                          spec.get("separation"))
        if family == "bump":
            return Bump(n, float(spec.get("amplitude", 1.0)), float(spec.get("radius", 1.0)),
                        int(spec.get("power", 2)))
        if family == "grid":
            path = base / spec["path"]
            field_ = GridField.load(path)
            if field_.n != n:
                raise ConfigError(f"grid file {path} has dimension {field_.n}")
            return GridSamples(n, field_.box, field_.N, field_.values)
    except (TypeError, ValueError, KeyError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad {family} datum: {exc}") from exc
    raise ConfigError(f"unknown datum family {family!r}")


_TOP = {
    "dimension": ("n", int),
    "delta0": ("delta0", float),
    "t_min": ("t_min", float),
    "t_max": ("t_max", float),
    "t_points": ("t_points", int),
    "tol": ("tol", float),
    "seed": ("seed", int),
    "samples": ("samples", int),
    "directions": ("directions", int),
    "hf_t_max": ("hf_t_max", float),
    "hf_t_points": ("hf_t_points", int),
}


def parse_config(data: dict, base: Path = Path(".")) -> ExperimentConfig:
    kwargs = {}
    known = set(_TOP) | {"u0", "u1", "grid", "output", "r_samples"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        for key, (name, kind) in _TOP.items():
            if key in data:
                kwargs[name] = kind(data[key])
        n = kwargs.get("n", 1)
        grid = data.get("grid", {})
        if "enabled" in grid:
            kwargs["grid_enabled"] = bool(grid["enabled"])
        if "box" in grid:
            kwargs["grid_box"] = float(grid["box"])
        if "N" in grid:
            kwargs["grid_N"] = int(grid["N"])
        if "t" in grid:
            kwargs["grid_t"] = float(grid["t"])
        if "r_samples" in data:
            kwargs["r_samples"] = tuple(float(r) for r in data["r_samples"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    for name in ("u0", "u1"):
        if name in data:
            kwargs[name] = _datum(data[name], n, base)
    out = data.get("output", {})
    if "csv" in out:
        kwargs["csv_path"] = base / out["csv"]
    if "json" in out:
        kwargs["json_path"] = base / out["json"]
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parse_config(data, path.parent)
