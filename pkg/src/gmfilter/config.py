"""Experiment configuration: YAML schema, validation, defaults.

One structured file describes an experiment end to end: scenario
selection and geometry, filter roster and parameters, run counts,
seeds, output directory. Validation failures always name the offending
key. Annotated examples ship under configs/.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from gmfilter.errors import ConfigError
from gmfilter.scenarios.tricyclist import TricyclistConfig

__all__ = ["FilterOptions", "RadioScenarioConfig", "ExperimentConfig", "load_config"]

KNOWN_FILTERS = ("gmf", "pf", "pgm-ds", "pgm-du")


@dataclass(frozen=True)
class FilterOptions:
    """Parameters shared across filter constructions."""

    num_samples: int = 2000
    bandwidth_exponent: float = -0.2
    mi_bounding: bool = True
    joseph_update: bool = False
    gmf_ess_fraction: float | None = None
    pf_ess_fraction: float = 0.5
    eps: float = 5.0
    min_pts: int = 8
    ut_alpha: float = 0.01
    ut_beta: float = 2.0
    ut_kappa: float = 0.0
    covariance_update: bool = False

    def validate(self) -> None:
        if self.num_samples < 2:
            raise ConfigError(f"key 'filter_params.num_samples': must be >= 2, "
                              f"got {self.num_samples}")
        if self.bandwidth_exponent >= 0:
            raise ConfigError("key 'filter_params.bandwidth_exponent': must be < 0, "
                              f"got {self.bandwidth_exponent}")
        if self.eps <= 0:
            raise ConfigError(f"key 'filter_params.eps': must be > 0, got {self.eps}")
        if self.min_pts < 1:
            raise ConfigError(f"key 'filter_params.min_pts': must be >= 1, got {self.min_pts}")
        if self.ut_alpha <= 0:
            raise ConfigError(f"key 'filter_params.ut_alpha': must be > 0, got {self.ut_alpha}")
        if not 0.0 <= self.pf_ess_fraction <= 1.0:
            raise ConfigError("key 'filter_params.pf_ess_fraction': must be in [0, 1], "
                              f"got {self.pf_ess_fraction}")


@dataclass(frozen=True)
class RadioScenarioConfig:
    grid: str = ""
    cell_size: float = 1.0
    origin: tuple = (0.0, 0.0)
    source: tuple = (45.0, 40.0)
    waypoints: tuple = ((5.0, 5.0), (55.0, 5.0), (55.0, 55.0), (5.0, 55.0))
    robot_speed: float = 2.0
    rate_hz: float = 1.0
    snr_noise_var: float = 8.0
    process_variance: float = 0.5
    los_params: tuple = (-20.0, 55.0)
    nlos_params: tuple = (-30.0, 45.0)
    los_threshold: float = 15.0
    r_min: float = 8.0
    r_max: float = 35.0
    snr_low: float = 0.0
    snr_high: float = 50.0
    prior_mean: tuple = (30.0, 30.0)
    prior_cov: tuple = (900.0, 900.0)
    snapshot_every: int = 0
    snapshot_format: str = "csv"

    def validate(self, base_dir: Path) -> None:
        if not self.grid:
            raise ConfigError("key 'radio.grid': a grid raster path is required")
        if not self.grid_path(base_dir).exists():
            raise ConfigError(f"key 'radio.grid': file not found: {self.grid_path(base_dir)}")
        if self.cell_size <= 0:
            raise ConfigError(f"key 'radio.cell_size': must be > 0, got {self.cell_size}")
        if self.robot_speed <= 0:
            raise ConfigError(f"key 'radio.robot_speed': must be > 0, got {self.robot_speed}")
        if self.rate_hz <= 0:
            raise ConfigError(f"key 'radio.rate_hz': must be > 0, got {self.rate_hz}")
        if self.r_min > self.r_max:
            raise ConfigError(f"key 'radio.r_min': {self.r_min} exceeds r_max {self.r_max}")
        if not self.snr_low < self.snr_high:
            raise ConfigError("key 'radio.snr_low': must be < radio.snr_high, "
                              f"got {self.snr_low} >= {self.snr_high}")
        if self.los_threshold <= 0:
            raise ConfigError(f"key 'radio.los_threshold': must be > 0, got {self.los_threshold}")
        if len(self.waypoints) < 1:
            raise ConfigError("key 'radio.waypoints': at least one waypoint required")
        if self.snapshot_format not in ("csv", "bin"):
            raise ConfigError("key 'radio.snapshot_format': must be 'csv' or 'bin', "
                              f"got {self.snapshot_format!r}")
        if self.snapshot_every < 0:
            raise ConfigError(f"key 'radio.snapshot_every': must be >= 0, got {self.snapshot_every}")

    def grid_path(self, base_dir: Path) -> Path:
        p = Path(self.grid)
        return p if p.is_absolute() else base_dir / p

    def snr_settings(self) -> dict:
        """SnrContext keyword arguments (everything but the per-record fields)."""
        return dict(los_params=tuple(self.los_params), nlos_params=tuple(self.nlos_params),
                    los_threshold=self.los_threshold, r_min=self.r_min, r_max=self.r_max,
                    snr_low=self.snr_low, snr_high=self.snr_high)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "tricyclist"
    filters: tuple = KNOWN_FILTERS
    seed: int = 20240 * 100003
    runs: int = 20
    jobs: int = 1
    out: str = "results"
    filter_params: FilterOptions = field(default_factory=FilterOptions)
    tricyclist: TricyclistConfig = field(default_factory=TricyclistConfig)
    radio: RadioScenarioConfig = field(default_factory=RadioScenarioConfig)
    base_dir: str = "."

    def validate(self) -> None:
        if self.scenario not in ("tricyclist", "radio"):
            raise ConfigError(f"key 'scenario': must be 'tricyclist' or 'radio', "
                              f"got {self.scenario!r}")
        for name in self.filters:
            if name not in KNOWN_FILTERS:
                raise ConfigError(f"key 'filters': unknown filter {name!r} "
                                  f"(expected subset of {list(KNOWN_FILTERS)})")
        if not self.filters:
            raise ConfigError("key 'filters': at least one filter required")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"key 'seed': must be a u64, got {self.seed}")
        if self.runs < 1:
            raise ConfigError(f"key 'runs': must be >= 1, got {self.runs}")
        self.filter_params.validate()
        if self.scenario == "radio":
            self.radio.validate(Path(self.base_dir))
        else:
            self._validate_tricyclist()

    def _validate_tricyclist(self) -> None:
        cfg = self.tricyclist
        if cfg.dt <= 0:
            raise ConfigError(f"key 'tricyclist.dt': must be > 0, got {cfg.dt}")
        if cfg.num_steps < 1:
            raise ConfigError(f"key 'tricyclist.num_steps': must be >= 1, got {cfg.num_steps}")
        if cfg.wheelbase <= 0:
            raise ConfigError(f"key 'tricyclist.wheelbase': must be > 0, got {cfg.wheelbase}")
        if len(cfg.initial_mean) != 7 or len(cfg.initial_cov_diag) != 7:
            raise ConfigError("key 'tricyclist.initial_mean': state is 7-dimensional")
        if len(cfg.q_diag) != 5:
            raise ConfigError(f"key 'tricyclist.q_diag': exactly 5 entries, got {len(cfg.q_diag)}")
        if len(cfg.r_diag) != 2:
            raise ConfigError(f"key 'tricyclist.r_diag': exactly 2 entries, got {len(cfg.r_diag)}")
        if cfg.meas_period < 1:
            raise ConfigError(f"key 'tricyclist.meas_period': must be >= 1, got {cfg.meas_period}")
        if any(not math.isfinite(v) for v in cfg.initial_mean):
            raise ConfigError("key 'tricyclist.initial_mean': entries must be finite")


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


def _build_dataclass(cls, data: dict, key_prefix: str):
    allowed = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in allowed:
            raise ConfigError(f"key '{key_prefix}{key}': unknown key "
                              f"(expected one of {sorted(allowed)})")
        kwargs[key] = _tuplify(value)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key '{key_prefix.rstrip('.')}': {exc}") from exc


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate a YAML experiment file; overrides win over file keys."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    top_allowed = {f.name for f in fields(ExperimentConfig)} - {"base_dir"}
    for key in raw:
        if key not in top_allowed:
            raise ConfigError(f"key '{key}': unknown key "
                              f"(expected one of {sorted(top_allowed)})")

    kwargs = {"base_dir": str(path.parent)}
    for key, value in raw.items():
        if key == "filter_params":
            kwargs[key] = _build_dataclass(FilterOptions, value or {}, "filter_params.")
        elif key == "tricyclist":
            kwargs[key] = _build_dataclass(TricyclistConfig, value or {}, "tricyclist.")
        elif key == "radio":
            kwargs[key] = _build_dataclass(RadioScenarioConfig, value or {}, "radio.")
        elif key == "filters":
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = _tuplify(value)
    config = ExperimentConfig(**kwargs)
    if overrides:
        clean = {k: v for k, v in overrides.items() if v is not None}
        if "num_samples" in clean:
            config = replace(config, filter_params=replace(
                config.filter_params, num_samples=clean.pop("num_samples")))
        if clean:
            config = replace(config, **clean)
    config.validate()
    return config
