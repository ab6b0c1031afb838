"""Urban-macro propagation for ground and aerial users, plus UAV mobility.

Path loss and line-of-sight probability follow the urban-macro models
commonly used for cellular-connected aerial traffic: ground users see the
classic UMa LoS/NLoS pair, aerial users above 22.5 m switch to
height-dependent expressions and become line-of-sight with probability 1
above 100 m. Small-scale fading for NLoS links is a 20-ray cluster around
the geometric direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (GUE, UAV, ArrayGeometry, Sector, UserState, angles_to,
                       steering_vector, wrap_deg)


@dataclass(frozen=True)
class PathComponent:
    az_deg: float  # global frame
    el_deg: float
    gain: complex


@dataclass(frozen=True)
class LinkState:
    sector_id: int
    user_id: int
    kind: str
    is_los: bool
    d3d_m: float
    d2d_m: float
    az_deg: float  # global frame, toward the user
    el_deg: float
    path_loss_db: float
    paths: tuple[PathComponent, ...] = ()


def los_probability(kind: str, height_m: float, d2d_m: float) -> float:
    """Probability that a link is line-of-sight.

    Ground users: certain within 18 m ground distance, then the standard
    urban-macro decay. Aerial users between 22.5 m and 100 m use the
    height-dependent aerial variant; above 100 m links are always LoS.
    """
    if kind == UAV and height_m > 100.0:
        return 1.0
    if kind == UAV and height_m > 22.5:
        d1 = max(460.0 * math.log10(height_m) - 700.0, 18.0)
        p1 = 4300.0 * math.log10(height_m) - 3800.0
        if d2d_m <= d1:
            return 1.0
        return d1 / d2d_m + math.exp(-d2d_m / p1) * (1.0 - d1 / d2d_m)
    # ground users, and low aerial users handled like ground users
    if d2d_m <= 18.0:
        return 1.0
    return 18.0 / d2d_m + math.exp(-d2d_m / 63.0) * (1.0 - 18.0 / d2d_m)


def path_loss_db(kind: str, is_los: bool, d3d_m: float, height_m: float,
                 carrier_freq_hz: float) -> float:
    """Urban-macro path loss in dB; NLoS is floored at the LoS value."""
    if d3d_m <= 0.0:
        raise ValueError("d3d_m must be positive")
    fc_ghz = carrier_freq_hz / 1e9
    los = 28.0 + 22.0 * math.log10(d3d_m) + 20.0 * math.log10(fc_ghz)
    if is_los:
        return los
    if kind == UAV and height_m > 22.5:
        nlos = (-17.5 + (46.0 - 7.0 * math.log10(height_m)) * math.log10(d3d_m)
                + 20.0 * math.log10(40.0 * math.pi * fc_ghz / 3.0))
    else:
        nlos = (13.54 + 39.08 * math.log10(d3d_m) + 20.0 * math.log10(fc_ghz)
                - 0.6 * (height_m - 1.5))
    return max(los, nlos)


def build_link(sector: Sector, user: UserState, cfg, rng: np.random.Generator) -> LinkState:
    """Draw the large-scale state of one sector-user link.

    The LoS flag is a Bernoulli draw against ``los_probability`` (UAV
    links can be forced LoS via config). NLoS links also draw their
    ray cluster here: per-ray azimuth jitter N(0, 10 deg), elevation
    jitter N(0, 5 deg) clipped to [-90, 90], i.i.d. unit-variance
    complex Gaussian ray gains.
    """
    az_rel, el, d3d, d2d = angles_to(sector, user.position)
    az_global = float(wrap_deg(az_rel + sector.boresight_az_deg))
    height = user.position[2]
    p_los = los_probability(user.kind, height, d2d)
    if user.kind == UAV and cfg.uav_force_los:
        is_los = True
    else:
        is_los = bool(rng.random() < p_los)
    pl = path_loss_db(user.kind, is_los, d3d, height, cfg.carrier_freq_hz)
    if cfg.shadow_fading:
        pl += float(rng.normal(0.0, cfg.shadow_sigma_db))
    paths: tuple[PathComponent, ...] = ()
    if not is_los:
        comps = []
        for _ in range(cfg.n_paths):
            az_l = float(wrap_deg(az_global + rng.normal(0.0, 10.0)))
            el_l = float(np.clip(el + rng.normal(0.0, 5.0), -90.0, 90.0))
            re, im = rng.standard_normal(2)
            comps.append(PathComponent(az_l, el_l, complex(re, im) / math.sqrt(2.0)))
        paths = tuple(comps)
    return LinkState(
        sector_id=sector.sector_id,
        user_id=user.user_id,
        kind=user.kind,
        is_los=is_los,
        d3d_m=d3d,
        d2d_m=d2d,
        az_deg=az_global,
        el_deg=el,
        path_loss_db=pl,
        paths=paths,
    )


def realize_channel(link: LinkState, array: ArrayGeometry,
                    rng: np.random.Generator) -> np.ndarray:
    """One narrowband channel vector for the link.

    LoS: amplitude 10^(-PL/20) times a steering vector at the geometric
    direction with a uniform random phase. NLoS: equal-power sum of the
    link's ray cluster, normalized so E[|h|^2] = M * 10^(-PL/10).
    """
    amp = 10.0 ** (-link.path_loss_db / 20.0)
    if link.is_los:
        psi = rng.uniform(0.0, 2.0 * math.pi)
        return amp * np.exp(1j * psi) * steering_vector(array, link.az_deg, link.el_deg)
    if not link.paths:
        raise ValueError("NLoS link has no ray cluster")
    h = np.zeros(array.n_elements, dtype=complex)
    for comp in link.paths:
        h += comp.gain * steering_vector(array, comp.az_deg, comp.el_deg)
    return amp / math.sqrt(len(link.paths)) * h


@dataclass(frozen=True)
class MobilityState:
    """Piecewise-constant-velocity aerial motion with altitude reflection."""

    position: tuple[float, float, float]
    speed_mps: float
    heading_az_deg: float
    heading_el_deg: float
    time_to_change_s: float

    @property
    def velocity_mps(self) -> np.ndarray:
        az = math.radians(self.heading_az_deg)
        el = math.radians(self.heading_el_deg)
        return self.speed_mps * np.array(
            [math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)]
        )


def draw_velocity(cfg, rng: np.random.Generator) -> tuple[float, float, float]:
    """Speed uniform in the configured km/h band, heading uniform in
    azimuth and within +/-15 deg of horizontal."""
    speed = rng.uniform(cfg.uav_speed_min_kmh, cfg.uav_speed_max_kmh) / 3.6
    az = rng.uniform(0.0, 360.0)
    el = rng.uniform(-15.0, 15.0)
    return float(speed), float(az), float(el)


def initial_mobility(cfg, position, rng: np.random.Generator) -> MobilityState:
    speed, az, el = draw_velocity(cfg, rng)
    return MobilityState(
        position=tuple(float(v) for v in position),
        speed_mps=speed,
        heading_az_deg=az,
        heading_el_deg=el,
        time_to_change_s=cfg.velocity_hold_s,
    )


def step_mobility(state: MobilityState, dt: float, cfg,
                  rng: np.random.Generator) -> MobilityState:
    """Advance one time step; redraw velocity when the hold expires.

    Altitude is kept inside [uav_height_min_m, uav_height_max_m] by
    reflecting the vertical heading at the band edges.
    """
    pos = np.asarray(state.position) + state.velocity_mps * dt
    speed, az, el = state.speed_mps, state.heading_az_deg, state.heading_el_deg
    if pos[2] >= cfg.uav_height_max_m and el > 0.0:
        pos[2] = cfg.uav_height_max_m
        el = -el
    elif pos[2] <= cfg.uav_height_min_m and el < 0.0:
        pos[2] = cfg.uav_height_min_m
        el = -el
    remaining = state.time_to_change_s - dt
    if remaining <= 1e-9:
        speed, az, el = draw_velocity(cfg, rng)
        remaining += cfg.velocity_hold_s
    return MobilityState(
        position=(float(pos[0]), float(pos[1]), float(pos[2])),
        speed_mps=speed,
        heading_az_deg=az,
        heading_el_deg=el,
        time_to_change_s=remaining,
    )
