"""Scenario configuration: defaults, JSON loading, validation, RNG substreams."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Raised when a scenario file is malformed or violates a constraint."""


@dataclass(frozen=True)
class ScenarioConfig:
    """All tunables of a simulation run.

    Every field has a default so ``ScenarioConfig()`` is a complete,
    runnable scenario. Angles are degrees, powers dBm, distances metres
    unless the name says otherwise.
    """

    # RF and power budget
    carrier_freq_hz: float = 3.5e9
    bandwidth_hz: float = 1e6
    gbs_tx_power_dbm: float = 46.0
    ue_tx_power_dbm: float = 23.0
    noise_psd_dbm_hz: float = -174.0
    nf_downlink_db: float = 9.0
    nf_uplink_db: float = 5.0

    # site layout and antenna array
    n_sites: int = 7
    sectors_per_site: int = 3
    isd_m: float = 500.0
    gbs_height_m: float = 25.0
    array_rows: int = 8
    array_cols: int = 16
    element_spacing_wavelengths: float = 0.5

    # user population
    n_uavs: int = 15
    n_gues: int = 6
    gue_height_m: float = 1.5
    uav_height_min_m: float = 50.0
    uav_height_max_m: float = 300.0

    # uplink pilots
    pilot_len: int = 12
    pilot_reuse: int = 7
    zc_root: int = 1

    # direction detection and decontamination
    grid_az_step_deg: float = 1.0
    grid_el_step_deg: float = 1.0
    peak_threshold_over_median_db: float = 10.0
    peak_min_separation_deg: float = 3.0
    max_peaks: int = 8
    common_path_tol_deg: float = 2.0
    n_extra_pilots: int = 2

    # propagation extras
    n_paths: int = 20
    shadow_fading: bool = False
    shadow_sigma_db: float = 4.0
    uav_force_los: bool = False

    # aerial mobility
    uav_speed_min_kmh: float = 40.0
    uav_speed_max_kmh: float = 160.0
    velocity_hold_s: float = 1.0

    # tracking timeline
    track_duration_s: float = 4.0
    sim_step_s: float = 0.01
    conv_pilot_period_s: float = 0.5
    angspeed_pair_gap_s: float = 0.1
    angspeed_period_s: float = 1.0
    kf_meas_period_s: float = 0.5
    track_range_m: float = 150.0
    track_altitude_m: float = 100.0

    # Kalman tuning; kf_r_meas defaults to the variance of a uniform
    # quantization error over one azimuth grid step
    kf_q_angle: float = 1e-4
    kf_q_rate: float = 1e-2
    kf_r_meas: float | None = None

    # Monte Carlo
    n_drops: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.kf_r_meas is None:
            object.__setattr__(self, "kf_r_meas", self.grid_az_step_deg**2 / 12.0)
        _validate(self)

    @property
    def n_sectors(self) -> int:
        return self.n_sites * self.sectors_per_site

    @property
    def n_users(self) -> int:
        return self.n_uavs + self.n_gues

    @property
    def n_elements(self) -> int:
        return self.array_rows * self.array_cols

    @property
    def wavelength_m(self) -> float:
        return 299792458.0 / self.carrier_freq_hz

    def uplink_noise_mw(self) -> float:
        return dbm_to_mw(
            self.noise_psd_dbm_hz + 10.0 * math.log10(self.bandwidth_hz) + self.nf_uplink_db
        )

    def downlink_noise_mw(self) -> float:
        return dbm_to_mw(
            self.noise_psd_dbm_hz + 10.0 * math.log10(self.bandwidth_hz) + self.nf_downlink_db
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "ScenarioConfig":
        d = self.to_dict()
        d.update(changes)
        return ScenarioConfig(**d)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    if mw <= 0.0:
        raise ValueError("power must be positive to convert to dBm")
    return 10.0 * math.log10(mw)


_POSITIVE_FIELDS = (
    "carrier_freq_hz",
    "bandwidth_hz",
    "isd_m",
    "gbs_height_m",
    "gue_height_m",
    "uav_height_min_m",
    "element_spacing_wavelengths",
    "grid_az_step_deg",
    "grid_el_step_deg",
    "peak_min_separation_deg",
    "common_path_tol_deg",
    "velocity_hold_s",
    "track_duration_s",
    "sim_step_s",
    "conv_pilot_period_s",
    "angspeed_pair_gap_s",
    "angspeed_period_s",
    "kf_meas_period_s",
    "track_range_m",
    "track_altitude_m",
    "kf_q_angle",
    "kf_q_rate",
    "shadow_sigma_db",
)

_POSITIVE_INT_FIELDS = (
    "n_sites",
    "sectors_per_site",
    "array_rows",
    "array_cols",
    "pilot_len",
    "pilot_reuse",
    "zc_root",
    "max_peaks",
    "n_extra_pilots",
    "n_paths",
    "n_drops",
)

_NONNEG_INT_FIELDS = ("n_uavs", "n_gues")


def _check(ok: bool, msg: str):
    if not ok:
        raise ConfigError(msg)


def _divides(step: float, period: float) -> bool:
    k = period / step
    return abs(k - round(k)) <= 1e-9 * max(1.0, abs(k))


def _validate(cfg: ScenarioConfig):
    for name in _POSITIVE_FIELDS:
        _check(getattr(cfg, name) > 0, f"{name} must be positive")
    for name in _POSITIVE_INT_FIELDS:
        v = getattr(cfg, name)
        _check(isinstance(v, int) and not isinstance(v, bool) and v >= 1,
               f"{name} must be a positive integer")
    for name in _NONNEG_INT_FIELDS:
        v = getattr(cfg, name)
        _check(isinstance(v, int) and not isinstance(v, bool) and v >= 0,
               f"{name} must be a non-negative integer")
    _check(cfg.uav_height_min_m < cfg.uav_height_max_m,
           "uav_height_min_m must be below uav_height_max_m")
    _check(0.0 <= cfg.uav_speed_min_kmh < cfg.uav_speed_max_kmh,
           "uav_speed_min_kmh must be non-negative and below uav_speed_max_kmh")
    _check(cfg.pilot_reuse <= cfg.pilot_len,
           "pilot_reuse must not exceed pilot_len (cyclic shifts must stay orthogonal)")
    _check(math.gcd(cfg.zc_root, cfg.pilot_len) == 1,
           "zc_root must be coprime with pilot_len")
    _check(cfg.zc_root < cfg.pilot_len, "zc_root must be below pilot_len")
    _check(cfg.peak_threshold_over_median_db >= 0,
           "peak_threshold_over_median_db must be non-negative")
    _check(cfg.kf_r_meas > 0, "kf_r_meas must be positive")
    _check(cfg.seed >= 0, "seed must be a non-negative integer")
    _check(cfg.uav_height_min_m > cfg.gue_height_m,
           "uav_height_min_m must be above gue_height_m")
    for name in ("conv_pilot_period_s", "angspeed_pair_gap_s", "angspeed_period_s",
                 "kf_meas_period_s", "track_duration_s"):
        _check(_divides(cfg.sim_step_s, getattr(cfg, name)),
               f"sim_step_s must divide {name}")
    _check(cfg.angspeed_pair_gap_s < cfg.angspeed_period_s,
           "angspeed_pair_gap_s must be below angspeed_period_s")
    _check(cfg.shadow_sigma_db > 0, "shadow_sigma_db must be positive")


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}
_BOOL_FIELDS = {"shadow_fading", "uav_force_los"}
_INT_FIELDS = set(_POSITIVE_INT_FIELDS) | set(_NONNEG_INT_FIELDS) | {"seed"}


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a config from a plain dict, rejecting unknown or mistyped keys."""
    if not isinstance(data, dict):
        raise ConfigError("scenario file must contain a JSON object")
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
    clean = {}
    for key, value in data.items():
        if key in _BOOL_FIELDS:
            if not isinstance(value, bool):
                raise ConfigError(f"{key} must be a boolean")
        elif key in _INT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key} must be an integer")
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                if not (key == "kf_r_meas" and value is None):
                    raise ConfigError(f"{key} must be a number")
            value = float(value) if value is not None else None
        clean[key] = value
    return ScenarioConfig(**clean)


def load_config(path: str | Path) -> ScenarioConfig:
    """Load and validate a JSON scenario file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg: ScenarioConfig, path: str | Path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")


def derive_substream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Independent, reproducible RNG stream for one (label, index) slot.

    The label is hashed so distinct purposes ("drop", "noise", ...) can
    never collide, and the stream depends only on (seed, label, index),
    not on how many other streams were derived before it. That keeps
    results identical whether drops run serially or in a process pool.
    """
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    entropy = [int(seed) % 2**64, int(index) % 2**64, *words]
    return np.random.default_rng(np.random.SeedSequence(entropy))
