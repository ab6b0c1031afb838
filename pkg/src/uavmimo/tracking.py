"""3D beam tracking of a fast aerial user under three pilot schedules.

* conventional: measure the direction on a fixed pilot period and hold
  the beam between measurements;
* angular_speed: measure twice in quick succession once per period,
  convert the difference into azimuth/elevation rates, and steer an
  extrapolated beam between pairs;
* kalman: run the pair schedule, reinitialize a constant-angular-velocity
  Kalman filter from each completed pair, and correct it with additional
  periodic pilot measurements.

The figure of merit is the normalized beamforming gain
|a(est)^H a(true)|^2 / M^2, which is 1.0 for a perfectly steered beam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import initial_mobility, path_loss_db, step_mobility
from .config import ScenarioConfig, dbm_to_mw, derive_substream
from .decontam import detect_directions
from .geometry import (UAV, ArrayGeometry, Sector, angles_to, steering_vector,
                       wrap_deg)
from .pilot import ls_estimate, uplink_rx, zc_sequence

CONVENTIONAL = "conventional"
ANGULAR_SPEED = "angular_speed"
KALMAN = "kalman"
SCHEMES = (CONVENTIONAL, ANGULAR_SPEED, KALMAN)


@dataclass(frozen=True)
class GainSample:
    time_s: float
    scheme: str
    normalized_gain: float
    true_az_deg: float
    true_el_deg: float
    est_az_deg: float
    est_el_deg: float


@dataclass(frozen=True)
class TrackingRun:
    scheme: str
    trajectory_index: int
    samples: list[GainSample]
    pilot_count: int


def normalized_gain(array: ArrayGeometry, est_az_deg: float, est_el_deg: float,
                    true_az_deg: float, true_el_deg: float) -> float:
    """|a(est)^H a(true)|^2 / M^2; 1.0 when the beam points at the user.

    Normalizing by the two vectors' own energies (each M up to rounding)
    instead of the literal constant keeps the result exactly 1.0 for a
    perfectly aligned beam and never above 1.0.
    """
    a_est = steering_vector(array, est_az_deg, est_el_deg)
    a_true = steering_vector(array, true_az_deg, true_el_deg)
    num = float(abs(np.vdot(a_est, a_true)))
    den = float(abs(np.vdot(a_est, a_est))) * float(abs(np.vdot(a_true, a_true)))
    return min((num * num) / den, 1.0)


def estimate_angular_speeds(az0: float, el0: float, t0: float, az1: float,
                            el1: float, t1: float) -> tuple[float, float]:
    """Finite-difference rates in deg/s; azimuth differences wrap."""
    dt = t1 - t0
    if dt <= 0.0:
        raise ValueError("measurement times must be increasing")
    om_az = float(wrap_deg(az1 - az0)) / dt
    om_el = (el1 - el0) / dt
    return om_az, om_el


def predict_angles(az_deg: float, el_deg: float, om_az_dps: float, om_el_dps: float,
                   dt: float) -> tuple[float, float]:
    """Linear extrapolation; azimuth wraps, elevation clips to [-90, 90]."""
    az = float(wrap_deg(az_deg + om_az_dps * dt))
    el = float(np.clip(el_deg + om_el_dps * dt, -90.0, 90.0))
    return az, el


def kalman_predict(x: np.ndarray, p: np.ndarray, dt: float, q_angle: float,
                   q_rate: float) -> tuple[np.ndarray, np.ndarray]:
    """Constant-angular-velocity time update for state [az, el, w_az, w_el]."""
    f = np.eye(4)
    f[0, 2] = dt
    f[1, 3] = dt
    q = np.diag([q_angle * dt * dt, q_angle * dt * dt, q_rate * dt, q_rate * dt])
    x_new = f @ x
    p_new = f @ p @ f.T + q
    return x_new, _stabilize(p_new)


def kalman_update(x: np.ndarray, p: np.ndarray, z_az_deg: float, z_el_deg: float,
                  r_meas: float) -> tuple[np.ndarray, np.ndarray]:
    """Angle-only measurement update; the azimuth innovation wraps."""
    h = np.zeros((2, 4))
    h[0, 0] = 1.0
    h[1, 1] = 1.0
    innovation = np.array([float(wrap_deg(z_az_deg - x[0])), z_el_deg - x[1]])
    s = h @ p @ h.T + r_meas * np.eye(2)
    gain = p @ h.T @ np.linalg.inv(s)
    x_new = x + gain @ innovation
    p_new = (np.eye(4) - gain @ h) @ p
    return x_new, _stabilize(p_new)


def kalman_step(x: np.ndarray, p: np.ndarray, dt: float, q_angle: float,
                q_rate: float, z: tuple[float, float] | None = None,
                r_meas: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One predict step, plus a measurement update when z is given."""
    x, p = kalman_predict(x, p, dt, q_angle, q_rate)
    if z is not None:
        if r_meas is None:
            raise ValueError("r_meas required with a measurement")
        x, p = kalman_update(x, p, z[0], z[1], r_meas)
    return x, p


def _stabilize(p: np.ndarray) -> np.ndarray:
    """Symmetrize and floor eigenvalues so the covariance stays valid."""
    p = (p + p.T) / 2.0
    eigmin = float(np.min(np.linalg.eigvalsh(p)))
    if eigmin < 1e-12:
        p = p + (1e-12 - eigmin) * np.eye(p.shape[0])
    return p


@dataclass(frozen=True)
class Trajectory:
    times_s: np.ndarray  # (N,)
    az_deg: np.ndarray  # global frame, from the tracking sector
    el_deg: np.ndarray
    d3d_m: np.ndarray
    altitudes_m: np.ndarray


def tracking_sector(cfg: ScenarioConfig) -> Sector:
    return Sector(sector_id=0, site_index=0, boresight_az_deg=0.0,
                  position=(0.0, 0.0, cfg.gbs_height_m))


def tracking_array(cfg: ScenarioConfig) -> ArrayGeometry:
    return ArrayGeometry(rows=cfg.array_rows, cols=cfg.array_cols,
                         spacing_wavelengths=cfg.element_spacing_wavelengths,
                         boresight_az_deg=0.0)


def simulate_trajectory(cfg: ScenarioConfig, rng: np.random.Generator) -> Trajectory:
    """Quasi-static random flight sampled on the tracking time grid.

    The user starts at the configured ground range and altitude on a
    random bearing from the sector and flies piecewise-constant-velocity
    legs of velocity_hold_s each.
    """
    sector = tracking_sector(cfg)
    n_steps = int(round(cfg.track_duration_s / cfg.sim_step_s))
    bearing = math.radians(rng.uniform(0.0, 360.0))
    start = (cfg.track_range_m * math.cos(bearing),
             cfg.track_range_m * math.sin(bearing),
             cfg.track_altitude_m)
    state = initial_mobility(cfg, start, rng)
    times = np.arange(n_steps) * cfg.sim_step_s
    az = np.empty(n_steps)
    el = np.empty(n_steps)
    d3d = np.empty(n_steps)
    alt = np.empty(n_steps)
    for i in range(n_steps):
        az_rel, el_i, d3d_i, _ = angles_to(sector, state.position)
        az[i] = wrap_deg(az_rel + sector.boresight_az_deg)
        el[i] = el_i
        d3d[i] = d3d_i
        alt[i] = state.position[2]
        if i + 1 < n_steps:
            state = step_mobility(state, cfg.sim_step_s, cfg, rng)
    return Trajectory(times_s=times, az_deg=az, el_deg=el, d3d_m=d3d, altitudes_m=alt)


def measure_angles(cfg: ScenarioConfig, array: ArrayGeometry, true_az_deg: float,
                   true_el_deg: float, d3d_m: float, altitude_m: float,
                   rng: np.random.Generator) -> tuple[float, float] | None:
    """One uplink pilot measurement of the user's direction.

    Simulates the LoS uplink pilot, correlates out the channel estimate,
    and returns the strongest detected direction, or None if nothing
    clears the detection threshold.
    """
    pl = path_loss_db(UAV, True, d3d_m, altitude_m, cfg.carrier_freq_hz)
    psi = rng.uniform(0.0, 2.0 * math.pi)
    h = 10.0 ** (-pl / 20.0) * np.exp(1j * psi) * steering_vector(array, true_az_deg,
                                                                  true_el_deg)
    pilot = zc_sequence(cfg.zc_root, 0, cfg.pilot_len)
    block = uplink_rx(0, [(h, pilot, dbm_to_mw(cfg.ue_tx_power_dbm))],
                      cfg.uplink_noise_mw(), rng)
    h_ls = ls_estimate(block, pilot)
    peaks = detect_directions(h_ls, array, cfg)
    if not peaks:
        return None
    return peaks[0].az_deg, peaks[0].el_deg


def _steps(cfg: ScenarioConfig, period_s: float) -> int:
    return int(round(period_s / cfg.sim_step_s))


def run_tracking(cfg: ScenarioConfig, scheme: str, seed: int,
                 trajectory_index: int) -> TrackingRun:
    """Track one trajectory with one scheme.

    The trajectory substream depends only on (seed, trajectory_index) and
    the measurement-noise substream only on (seed, trajectory_index, time
    step), so all schemes see the same flight and the same pilot noise
    where their schedules coincide.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    array = tracking_array(cfg)
    traj = simulate_trajectory(cfg, derive_substream(seed, "trajectory", trajectory_index))
    n_steps = len(traj.times_s)
    conv_steps = _steps(cfg, cfg.conv_pilot_period_s)
    period_steps = _steps(cfg, cfg.angspeed_period_s)
    gap_steps = _steps(cfg, cfg.angspeed_pair_gap_s)
    kf_steps = _steps(cfg, cfg.kf_meas_period_s)

    est_az, est_el = array.boresight_az_deg, 0.0
    pair_start: tuple[float, float, float] | None = None  # (t, az, el)
    base: tuple[float, float, float, float, float] | None = None
    kf_x: np.ndarray | None = None
    kf_p: np.ndarray | None = None
    pilot_count = 0
    samples: list[GainSample] = []

    def measure(step: int, draw_slot: list) -> tuple[float, float] | None:
        nonlocal pilot_count
        pilot_count += 1
        if draw_slot[0] is None:
            draw_slot[0] = derive_substream(seed, f"track-noise-{trajectory_index}", step)
        return measure_angles(cfg, array, traj.az_deg[step], traj.el_deg[step],
                              traj.d3d_m[step], traj.altitudes_m[step], draw_slot[0])

    for i in range(n_steps):
        t = float(traj.times_s[i])
        rng_slot = [None]  # one noise stream per step, shared across schemes
        if kf_x is not None and i > 0:
            kf_x, kf_p = kalman_predict(kf_x, kf_p, cfg.sim_step_s, cfg.kf_q_angle,
                                        cfg.kf_q_rate)

        if scheme == CONVENTIONAL:
            if i % conv_steps == 0:
                meas = measure(i, rng_slot)
                if meas is not None:
                    est_az, est_el = meas
        else:
            if i % period_steps == 0:
                meas = measure(i, rng_slot)
                if meas is not None:
                    pair_start = (t, meas[0], meas[1])
                    if base is None and kf_x is None:
                        est_az, est_el = meas
                    if scheme == KALMAN and kf_x is not None:
                        kf_x, kf_p = kalman_update(kf_x, kf_p, meas[0], meas[1],
                                                   cfg.kf_r_meas)
            elif i % period_steps == gap_steps:
                meas = measure(i, rng_slot)
                if meas is not None and pair_start is not None:
                    t0, az0, el0 = pair_start
                    om_az, om_el = estimate_angular_speeds(az0, el0, t0,
                                                           meas[0], meas[1], t)
                    base = (t, meas[0], meas[1], om_az, om_el)
                    if scheme == KALMAN:
                        dt_pair = t - t0
                        kf_x = np.array([meas[0], meas[1], om_az, om_el])
                        kf_p = _stabilize(np.diag([
                            cfg.kf_r_meas, cfg.kf_r_meas,
                            2.0 * cfg.kf_r_meas / dt_pair**2,
                            2.0 * cfg.kf_r_meas / dt_pair**2,
                        ]))
            if scheme == KALMAN and i % kf_steps == 0:
                # correction pilots run on their own period even when they
                # land on a pair instant, so two pilots go out back to back
                meas = measure(i, rng_slot)
                if meas is not None and kf_x is not None:
                    kf_x, kf_p = kalman_update(kf_x, kf_p, meas[0], meas[1],
                                               cfg.kf_r_meas)

        if scheme == ANGULAR_SPEED and base is not None:
            tb, azb, elb, om_az, om_el = base
            est_az, est_el = predict_angles(azb, elb, om_az, om_el, t - tb)
        elif scheme == KALMAN and kf_x is not None:
            est_az = float(wrap_deg(kf_x[0]))
            est_el = float(np.clip(kf_x[1], -90.0, 90.0))

        gain = normalized_gain(array, est_az, est_el,
                               float(traj.az_deg[i]), float(traj.el_deg[i]))
        samples.append(GainSample(
            time_s=t, scheme=scheme, normalized_gain=gain,
            true_az_deg=float(traj.az_deg[i]), true_el_deg=float(traj.el_deg[i]),
            est_az_deg=est_az, est_el_deg=est_el,
        ))
    return TrackingRun(scheme=scheme, trajectory_index=trajectory_index,
                       samples=samples, pilot_count=pilot_count)
