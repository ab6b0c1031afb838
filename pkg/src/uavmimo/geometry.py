"""Hexagonal site layout, user drops, and planar-array steering vectors.

Frames and conventions used throughout the package:

* global frame: x east, y north, z up; azimuth = atan2(y, x) in degrees,
  wrapped to (-180, 180]; elevation measured up from the horizontal plane.
* each sector carries a vertical rows x cols array whose boresight points
  along ``boresight_az_deg`` in the horizontal plane; rows index elevation,
  columns index azimuth.
* ``steering_vector`` takes a global azimuth and subtracts the boresight
  internally, so callers never juggle relative angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

UAV = "UAV"
GUE = "GUE"


def wrap_deg(angle):
    """Wrap an angle (scalar or array) in degrees to (-180, 180]."""
    return 180.0 - (180.0 - np.asarray(angle)) % 360.0


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array, vertical panel, half-open toward boresight."""

    rows: int
    cols: int
    spacing_wavelengths: float
    boresight_az_deg: float

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class Sector:
    sector_id: int
    site_index: int
    boresight_az_deg: float
    position: tuple[float, float, float]

    @property
    def position_arr(self) -> np.ndarray:
        return np.array(self.position)


@dataclass(frozen=True)
class UserState:
    user_id: int
    kind: str  # UAV or GUE
    position: tuple[float, float, float]
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    pilot_index: int = -1

    @property
    def position_arr(self) -> np.ndarray:
        return np.array(self.position)


@dataclass(frozen=True)
class NetworkLayout:
    site_positions: tuple[tuple[float, float], ...]
    sectors: tuple[Sector, ...]
    users: tuple[UserState, ...]
    drop_radius_m: float

    def with_users(self, users) -> "NetworkLayout":
        return replace(self, users=tuple(users))


def site_grid(n_sites: int, isd_m: float) -> np.ndarray:
    """First ``n_sites`` positions of a hexagonal lattice with pitch isd_m.

    Sites are ordered by distance from the origin, then by angle, so
    n_sites=7 yields the centre site plus the inner ring of six.
    """
    pts = []
    for i in range(-4, 5):
        for j in range(-4, 5):
            x = isd_m * (i + 0.5 * j)
            y = isd_m * (math.sqrt(3.0) / 2.0) * j
            pts.append((x, y))
    pts.sort(key=lambda p: (round(math.hypot(*p), 6),
                            round(math.degrees(math.atan2(p[1], p[0])) % 360.0, 6)))
    if n_sites > len(pts):
        raise ValueError(f"n_sites={n_sites} exceeds generated lattice size")
    return np.array(pts[:n_sites])


def build_sectors(sites: np.ndarray, sectors_per_site: int, gbs_height_m: float) -> tuple[Sector, ...]:
    sectors = []
    for s, (x, y) in enumerate(sites):
        for j in range(sectors_per_site):
            sectors.append(Sector(
                sector_id=s * sectors_per_site + j,
                site_index=s,
                boresight_az_deg=360.0 * j / sectors_per_site,
                position=(float(x), float(y), gbs_height_m),
            ))
    return tuple(sectors)


def point_in_hexagon(x: float, y: float, circumradius: float) -> bool:
    """Inside test for a flat-topped-axis hexagon with vertices every 60 deg."""
    inradius = circumradius * math.sqrt(3.0) / 2.0
    for theta in (math.pi / 6.0, math.pi / 2.0, 5.0 * math.pi / 6.0):
        if abs(x * math.cos(theta) + y * math.sin(theta)) > inradius + 1e-9:
            return False
    return True


def drop_point(rng: np.random.Generator, circumradius: float) -> tuple[float, float]:
    """Uniform point in the hexagonal coverage region by rejection sampling."""
    while True:
        x = rng.uniform(-circumradius, circumradius)
        y = rng.uniform(-circumradius, circumradius)
        if point_in_hexagon(x, y, circumradius):
            return float(x), float(y)


def build_layout(cfg, rng: np.random.Generator) -> NetworkLayout:
    """Place sites, sectors and a uniform random drop of users.

    UAV altitudes are uniform in [uav_height_min_m, uav_height_max_m];
    GUEs sit at gue_height_m. Users are static within a drop, so their
    velocity is zero; mobility is simulated separately for tracking runs.
    """
    sites = site_grid(cfg.n_sites, cfg.isd_m)
    sectors = build_sectors(sites, cfg.sectors_per_site, cfg.gbs_height_m)
    radius = float(np.max(np.hypot(sites[:, 0], sites[:, 1]))) + cfg.isd_m / 2.0
    users = []
    for uid in range(cfg.n_uavs):
        x, y = drop_point(rng, radius)
        z = rng.uniform(cfg.uav_height_min_m, cfg.uav_height_max_m)
        users.append(UserState(user_id=uid, kind=UAV, position=(x, y, float(z))))
    for k in range(cfg.n_gues):
        x, y = drop_point(rng, radius)
        users.append(UserState(user_id=cfg.n_uavs + k, kind=GUE,
                               position=(x, y, cfg.gue_height_m)))
    return NetworkLayout(
        site_positions=tuple((float(x), float(y)) for x, y in sites),
        sectors=sectors,
        users=tuple(users),
        drop_radius_m=radius,
    )


def angles_to(sector: Sector, point) -> tuple[float, float, float, float]:
    """Angles and distances from a sector's array to a point.

    Returns (azimuth relative to boresight in (-180, 180], elevation,
    3D distance, 2D ground distance). Elevation is positive above the
    array's horizontal plane.
    """
    d = np.asarray(point, dtype=float) - sector.position_arr
    d2d = math.hypot(d[0], d[1])
    d3d = math.sqrt(d2d * d2d + d[2] * d[2])
    if d3d == 0.0:
        raise ValueError("point coincides with the array position")
    az_rel = float(wrap_deg(math.degrees(math.atan2(d[1], d[0])) - sector.boresight_az_deg))
    el = math.degrees(math.atan2(d[2], d2d))
    return az_rel, el, d3d, d2d


def global_azimuth(sector: Sector, point) -> float:
    """Global-frame azimuth from a sector position to a point."""
    d = np.asarray(point, dtype=float) - sector.position_arr
    return float(wrap_deg(math.degrees(math.atan2(d[1], d[0]))))


def steering_vector(array: ArrayGeometry, az_deg: float, el_deg: float) -> np.ndarray:
    """Array response for a plane wave from global azimuth/elevation.

    Element (m, n) of the vertical panel sits m rows up and n columns
    across; its phase advance is
    2*pi*spacing*(n*cos(el)*sin(az - boresight) + m*sin(el)).
    The result is flattened row-major, length rows*cols, unit-modulus
    entries.
    """
    if not -90.0 - 1e-9 <= el_deg <= 90.0 + 1e-9:
        raise ValueError(f"elevation {el_deg} outside [-90, 90]")
    az_rel = math.radians(float(wrap_deg(az_deg - array.boresight_az_deg)))
    el = math.radians(el_deg)
    m = np.arange(array.rows)[:, None]
    n = np.arange(array.cols)[None, :]
    phase = 2.0 * math.pi * array.spacing_wavelengths * (
        n * math.cos(el) * math.sin(az_rel) + m * math.sin(el)
    )
    return np.exp(1j * phase).reshape(-1)


def fold_to_front(az_deg: float, boresight_az_deg: float) -> float:
    """Mirror an azimuth into the front half-plane of a boresight.

    A vertical panel of isotropic elements cannot distinguish a plane
    wave at relative azimuth a from one at 180 - a (identical phase
    profiles), so detected directions are canonicalized to the half-plane
    facing the boresight.
    """
    az_rel = float(wrap_deg(az_deg - boresight_az_deg))
    if az_rel > 90.0:
        az_rel = 180.0 - az_rel
    elif az_rel < -90.0:
        az_rel = -180.0 - az_rel
    return float(wrap_deg(az_rel + boresight_az_deg))


def angular_separation_deg(az1: float, el1: float, az2: float, el2: float) -> float:
    """Chebyshev-style separation used for peak deduplication and matching."""
    return max(abs(float(wrap_deg(az1 - az2))), abs(el1 - el2))
