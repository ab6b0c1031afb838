"""Direction detection on the angular grid and pilot decontamination.

Two cleanup paths share the same matched-filter front end:

* ground users project their contaminated estimate onto the orthogonal
  complement of the detected above-horizon interferer directions
  (aerial interferers are spatially sparse, so a null-space projection
  removes most of their energy);
* aerial users resolve contamination actively: after extra randomized
  pilot rounds, the one propagation path present in every round is the
  served user's own, and the estimate is rebuilt as that single ray.

A vertical panel of isotropic elements cannot tell front from back
(relative azimuth a and 180 - a give identical phase profiles), so all
detected azimuths are folded into the sector's front half-plane before
deduplication and matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (ArrayGeometry, angular_separation_deg, fold_to_front,
                       steering_vector, wrap_deg)

# interferer directions this close to the served user's own direction are
# never nulled, else the projection would erase the user's own signal
OWN_DIRECTION_EXCLUSION_DEG = 2.0

_PHASE_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
_PHASE_CACHE_MAX = 8


@dataclass(frozen=True)
class SpatialSpectrum:
    """Matched-filter correlation of a snapshot against the steering grid."""

    az_grid: np.ndarray  # global azimuth, degrees
    el_grid: np.ndarray  # elevation, degrees
    corr: np.ndarray  # (n_el, n_az) complex, a(az, el)^H y
    boresight_az_deg: float
    n_elements: int
    array: ArrayGeometry | None = None

    @property
    def power(self) -> np.ndarray:
        """|a^H y|^2 / M, the beamformed power per grid direction."""
        return np.abs(self.corr) ** 2 / self.n_elements


@dataclass(frozen=True)
class PathEstimate:
    """One detected propagation path: direction, complex gain, beam power."""

    az_deg: float  # global frame, folded to the array's front half-plane
    el_deg: float
    amplitude: complex  # a^H y / M at the grid peak
    power: float  # |amplitude|^2 * M


def _phase_tables(array: ArrayGeometry, az_grid: np.ndarray,
                  el_grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    key = (array.rows, array.cols, array.spacing_wavelengths, array.boresight_az_deg,
           az_grid[0], az_grid[-1], len(az_grid), el_grid[0], el_grid[-1], len(el_grid))
    hit = _PHASE_CACHE.get(key)
    if hit is not None:
        return hit
    c = 2.0 * math.pi * array.spacing_wavelengths
    el = np.radians(el_grid)
    az_rel = np.radians(wrap_deg(az_grid - array.boresight_az_deg))
    v = c * np.sin(el)  # (E,)
    row_phase = np.exp(-1j * np.outer(v, np.arange(array.rows)))  # (E, R)
    u = c * np.cos(el)[:, None] * np.sin(az_rel)[None, :]  # (E, A)
    col_phase = np.exp(-1j * u[:, :, None] * np.arange(array.cols))  # (E, A, C)
    if len(_PHASE_CACHE) >= _PHASE_CACHE_MAX:
        _PHASE_CACHE.pop(next(iter(_PHASE_CACHE)))
    _PHASE_CACHE[key] = (row_phase, col_phase)
    return row_phase, col_phase


def matched_filter_spectrum(y: np.ndarray, array: ArrayGeometry,
                            az_range_deg: tuple[float, float] = (0.0, 360.0),
                            el_range_deg: tuple[float, float] = (0.0, 90.0),
                            steps_deg: tuple[float, float] = (1.0, 1.0)) -> SpatialSpectrum:
    """Correlate a snapshot with steering vectors over an angular grid.

    The azimuth grid covers [start, stop) (it wraps), the elevation grid
    [start, stop] inclusive. Exploits the separable row/column phase
    structure of the planar array, so the cost is O(E*A*C) instead of
    O(E*A*R*C).
    """
    y = np.asarray(y)
    if y.shape != (array.n_elements,):
        raise ValueError(f"snapshot must have length {array.n_elements}")
    az0, az1 = az_range_deg
    el0, el1 = el_range_deg
    step_az, step_el = steps_deg
    if step_az <= 0 or step_el <= 0:
        raise ValueError("grid steps must be positive")
    az_grid = np.arange(az0, az1, step_az, dtype=float)
    el_grid = np.arange(el0, el1 + step_el / 2.0, step_el, dtype=float)
    if len(az_grid) == 0 or len(el_grid) == 0:
        raise ValueError("empty angle grid")
    row_phase, col_phase = _phase_tables(array, az_grid, el_grid)
    ymat = y.reshape(array.rows, array.cols)
    t = row_phase @ ymat  # (E, C)
    corr = np.einsum("ec,eac->ea", t, col_phase)
    return SpatialSpectrum(az_grid=az_grid, el_grid=el_grid, corr=corr,
                           boresight_az_deg=array.boresight_az_deg,
                           n_elements=array.n_elements, array=array)


def _parabolic_offset(p_minus: float, p_zero: float, p_plus: float) -> float:
    denom = p_minus - 2.0 * p_zero + p_plus
    # a genuine peak sample is concave; convex or flat data means the side
    # samples are corrupted (interference ridge), so keep the centre
    if denom >= -1e-300:
        return 0.0
    return float(np.clip(0.5 * (p_minus - p_plus) / denom, -0.5, 0.5))


def _beam_power(y: np.ndarray, array: ArrayGeometry, az_deg: float,
                el_deg: float) -> float:
    a = steering_vector(array, az_deg, el_deg)
    return float(abs(np.vdot(a, y)) ** 2 / array.n_elements)


def _refine_sine_domain(y: np.ndarray, array: ArrayGeometry, az_deg: float,
                        el_deg: float, p_zero: float, step_az_deg: float,
                        step_el_deg: float) -> tuple[float, float]:
    """Sub-grid peak refinement by symmetric resampling in sine space.

    The planar-array response separates into a column factor, even in the
    horizontal direction sine w = cos(el) sin(az_rel), and a row factor,
    even in the vertical sine t = sin(el). A parabola fitted to powers on
    the degree grid therefore carries an angle-dependent bias that never
    vanishes, even for a noiseless on-grid source. Probing two fresh
    correlations at exactly symmetric offsets in w (then, holding w
    fixed, in t) makes both side powers coincide when the candidate sits
    on an isolated source, so the fitted vertex is exact there while
    retaining sub-grid accuracy off-grid.
    """
    el_rad = math.radians(el_deg)
    az_rel = math.radians(float(wrap_deg(az_deg - array.boresight_az_deg)))
    w0 = math.cos(el_rad) * math.sin(az_rel)
    dw = math.cos(el_rad) * abs(math.cos(az_rel)) * math.sin(math.radians(step_az_deg))
    cos_el = math.cos(el_rad)
    if dw > 1e-12 and (abs(w0) + dw) / cos_el <= 1.0:
        az_lo = array.boresight_az_deg + math.degrees(math.asin((w0 - dw) / cos_el))
        az_hi = array.boresight_az_deg + math.degrees(math.asin((w0 + dw) / cos_el))
        p_lo = _beam_power(y, array, az_lo, el_deg)
        p_hi = _beam_power(y, array, az_hi, el_deg)
        w0 = w0 + dw * _parabolic_offset(p_lo, p_zero, p_hi)
        az_deg = array.boresight_az_deg + math.degrees(math.asin(w0 / cos_el))
        p_zero = _beam_power(y, array, az_deg, el_deg)
    t0 = math.sin(el_rad)
    dt = abs(math.cos(el_rad)) * math.sin(math.radians(step_el_deg))
    ok = dt > 1e-12 and abs(t0) + dt <= 1.0
    if ok:
        # move along the elevation sine while holding w constant, so the
        # column factor cancels and the parabola sees a purely even row
        # pattern; solve the matching azimuth at each probe elevation
        el_lo = math.asin(t0 - dt)
        el_hi = math.asin(t0 + dt)
        ok = (abs(w0) <= math.cos(el_lo) and abs(w0) <= math.cos(el_hi))
    if ok:
        bore = array.boresight_az_deg
        az_lo = bore + math.degrees(math.asin(w0 / math.cos(el_lo)))
        az_hi = bore + math.degrees(math.asin(w0 / math.cos(el_hi)))
        p_lo = _beam_power(y, array, az_lo, math.degrees(el_lo))
        p_hi = _beam_power(y, array, az_hi, math.degrees(el_hi))
        t_star = t0 + dt * _parabolic_offset(p_lo, p_zero, p_hi)
        el_star = math.asin(t_star)
        if abs(w0) <= math.cos(el_star):
            el_deg = math.degrees(el_star)
            az_deg = bore + math.degrees(math.asin(w0 / math.cos(el_star)))
    return az_deg, el_deg


def detect_peaks(spectrum: SpatialSpectrum, threshold_over_median_db: float,
                 min_separation_deg: float, max_peaks: int,
                 snapshot: np.ndarray | None = None) -> list[PathEstimate]:
    """Grid local maxima above threshold, refined, folded, deduplicated.

    A cell is a candidate if it exceeds every grid neighbour (azimuth
    wraps, elevation edges padded) and its power exceeds the spectrum
    median by the threshold. Candidates are taken strongest first; each
    is refined by a 1D parabolic fit per axis, folded into the front
    half-plane, and dropped if it lands within min_separation_deg
    (max of wrapped azimuth and elevation distance) of an accepted peak.

    When the raw snapshot is passed along, refinement resamples the beam
    power at symmetric sine-space offsets instead of reusing the degree
    grid, which removes the fit bias entirely for isolated sources.
    """
    power = spectrum.power
    n_el, n_az = power.shape
    median = float(np.median(power))
    threshold = median * 10.0 ** (threshold_over_median_db / 10.0)
    neighbours = [np.roll(power, 1, axis=1), np.roll(power, -1, axis=1)]
    pad = np.full((1, n_az), -np.inf)
    up = np.vstack([power[1:], pad])
    down = np.vstack([pad, power[:-1]])
    neighbours += [up, down]
    for horiz in (np.roll(power, 1, axis=1), np.roll(power, -1, axis=1)):
        neighbours.append(np.vstack([horiz[1:], pad]))
        neighbours.append(np.vstack([pad, horiz[:-1]]))
    is_max = power > threshold
    for nb in neighbours:
        is_max &= power >= nb
    cand_el, cand_az = np.nonzero(is_max)
    if len(cand_el) == 0:
        return []
    order = np.lexsort((cand_az, cand_el, -power[cand_el, cand_az]))
    step_az = float(spectrum.az_grid[1] - spectrum.az_grid[0]) if n_az > 1 else 0.0
    step_el = float(spectrum.el_grid[1] - spectrum.el_grid[0]) if n_el > 1 else 0.0
    accepted: list[PathEstimate] = []
    for idx in order:
        e, a = int(cand_el[idx]), int(cand_az[idx])
        az = float(spectrum.az_grid[a])
        el = float(spectrum.el_grid[e])
        if snapshot is not None and spectrum.array is not None:
            az, el = _refine_sine_domain(snapshot, spectrum.array, az, el,
                                         float(power[e, a]), step_az, step_el)
        else:
            if n_az > 2:
                az += step_az * _parabolic_offset(power[e, (a - 1) % n_az],
                                                  power[e, a],
                                                  power[e, (a + 1) % n_az])
            if 0 < e < n_el - 1:
                el += step_el * _parabolic_offset(power[e - 1, a], power[e, a],
                                                  power[e + 1, a])
        az = fold_to_front(az, spectrum.boresight_az_deg)
        if any(angular_separation_deg(az, el, p.az_deg, p.el_deg) < min_separation_deg
               for p in accepted):
            continue
        amplitude = complex(spectrum.corr[e, a]) / spectrum.n_elements
        accepted.append(PathEstimate(az_deg=az, el_deg=el, amplitude=amplitude,
                                     power=abs(amplitude) ** 2 * spectrum.n_elements))
        if len(accepted) >= max_peaks:
            break
    return accepted


def detect_directions(y: np.ndarray, array: ArrayGeometry, cfg) -> list[PathEstimate]:
    """Full-grid spectrum plus peak detection with the scenario's settings."""
    spectrum = matched_filter_spectrum(
        y, array,
        az_range_deg=(0.0, 360.0),
        el_range_deg=(0.0, 90.0),
        steps_deg=(cfg.grid_az_step_deg, cfg.grid_el_step_deg),
    )
    return detect_peaks(spectrum, cfg.peak_threshold_over_median_db,
                        cfg.peak_min_separation_deg, cfg.max_peaks, snapshot=y)


def decontaminate_gue(h_est: np.ndarray, uav_dirs: list[PathEstimate],
                      array: ArrayGeometry) -> np.ndarray:
    """Project an estimate onto the complement of the detected directions.

    Returns (I - A (A^H A)^-1 A^H) h_est where A stacks steering vectors
    of uav_dirs. Near-parallel directions (normalized correlation above
    0.999 with an already kept column) are dropped so the Gram matrix
    stays well conditioned. With no directions the estimate is returned
    unchanged.
    """
    if not uav_dirs:
        return np.array(h_est, copy=True)
    m = array.n_elements
    kept: list[np.ndarray] = []
    for est in sorted(uav_dirs, key=lambda p: -p.power):
        col = steering_vector(array, est.az_deg, est.el_deg)
        if any(abs(np.vdot(k, col)) / m > 0.999 for k in kept):
            continue
        kept.append(col)
    a = np.column_stack(kept)
    gram = a.conj().T @ a
    rhs = a.conj().T @ h_est
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        coef = np.linalg.lstsq(a, h_est, rcond=None)[0]
    return h_est - a @ coef


# a component and its independent re-detection come from one transmitter
# only if their powers agree; beyond this ratio the angular coincidence is
# dismissed as unrelated energy that happens to sit nearby
MATCH_POWER_TOL_DB = 6.0

# contenders whose steering vectors are this collinear with the winner's
# (normalized |a1^H a2| / M) form the same physical beam: elevation-ridge
# mates differ by a couple of array rows (>= 0.9) and visible-edge grating
# pairs share column phases exactly, while genuinely distinct transmitters
# land near 1/sqrt(M) with sidelobe coupling peaking around 0.22
ALIAS_COLLINEARITY_MIN = 0.8

# a recurring contender is treated as the winner's own shoulder or ridge
# when its per-round power agrees with the winner's score scaled by the
# squared beam coupling to this many dB; a separate transmitter has no
# reason to track that level, while high-elevation ridge artifacts of the
# winner match it to a fraction of a dB in every round
SELF_PATTERN_TOL_DB = 3.0


def match_directions(candidates: list[PathEstimate], reference: list[PathEstimate],
                     tol_deg: float,
                     power_tol_db: float = MATCH_POWER_TOL_DB) -> list[PathEstimate]:
    """Candidates that coincide with some reference detection.

    A match requires both the direction (within tol_deg) and the power
    (within power_tol_db) to agree, because the same transmitter seen
    twice by one array keeps its received level while unrelated energy
    that merely lands nearby almost never does. Candidate order is
    preserved (strongest first when the detector produced them).
    """
    ratio = 10.0 ** (power_tol_db / 10.0)
    out = []
    for p in candidates:
        for q in reference:
            if (angular_separation_deg(p.az_deg, p.el_deg, q.az_deg, q.el_deg)
                    <= tol_deg and p.power <= q.power * ratio
                    and q.power <= p.power * ratio):
                out.append(p)
                break
    return out


def merge_path_estimates(paths: list[PathEstimate],
                         min_separation_deg: float) -> list[PathEstimate]:
    """Deduplicate directions gathered from several detections.

    Keeps the strongest representative of each angular neighbourhood,
    returned strongest first.
    """
    out: list[PathEstimate] = []
    for p in sorted(paths, key=lambda q: -q.power):
        if all(angular_separation_deg(p.az_deg, p.el_deg, q.az_deg, q.el_deg)
               >= min_separation_deg for q in out):
            out.append(p)
    return out


def select_interferer_dirs(peaks: list[PathEstimate], own_az_deg: float,
                           own_el_deg: float, array: ArrayGeometry) -> list[PathEstimate]:
    """Above-horizon detected directions, excluding the user's own.

    The served user's own direction is compared after folding to the
    front half-plane and clipping elevation into the scanned range, so a
    ground user slightly below the horizon still shields its own peak.
    """
    own_az = fold_to_front(own_az_deg, array.boresight_az_deg)
    own_el = float(np.clip(own_el_deg, 0.0, 90.0))
    out = []
    for p in peaks:
        if p.el_deg <= 0.0:
            continue
        if angular_separation_deg(p.az_deg, p.el_deg, own_az, own_el) <= OWN_DIRECTION_EXCLUSION_DEG:
            continue
        out.append(p)
    return out


def _qualified_paths(rounds: list[list[PathEstimate]],
                     tol_deg: float) -> list[tuple[float, PathEstimate]]:
    """Round-0 candidates that recur in every later round, best first.

    Each entry carries the candidate's score: the minimum over rounds of
    the strongest matched power, so a path must be consistently strong
    to rank high.
    """
    if len(rounds) < 2:
        raise ValueError("need the regular round plus at least one extra round")
    if not rounds[0]:
        raise ValueError("no paths detected in the regular pilot round")
    qualified: list[tuple[float, PathEstimate]] = []
    for cand in rounds[0]:
        score = cand.power
        ok = True
        for later in rounds[1:]:
            matches = [p.power for p in later
                       if angular_separation_deg(cand.az_deg, cand.el_deg,
                                                 p.az_deg, p.el_deg) <= tol_deg]
            if not matches:
                ok = False
                break
            score = min(score, max(matches))
        if ok:
            qualified.append((score, cand))
    qualified.sort(key=lambda t: -t[0])
    return qualified


def identify_common_path(rounds: list[list[PathEstimate]],
                         tol_deg: float) -> tuple[PathEstimate, int]:
    """Find the round-0 path that recurs in every later round.

    A round-0 candidate qualifies if every later round contains a peak
    within tol_deg (wrapped azimuth / elevation Chebyshev distance).
    Among qualifiers the one with the highest minimum matched power
    across rounds wins. Returns (path, n_qualified); when nothing
    qualifies the fallback result is the strongest round-0 peak and
    n_qualified is 0, so callers can decide how much to trust it.
    """
    qualified = _qualified_paths(rounds, tol_deg)
    if not qualified:
        fallback = max(rounds[0], key=lambda p: p.power)
        return fallback, 0
    return qualified[0][1], len(qualified)


def reconstruct_single_path(path: PathEstimate, array: ArrayGeometry) -> np.ndarray:
    """Rank-1 estimate amplitude * a(az, el) for one identified path."""
    return path.amplitude * steering_vector(array, path.az_deg, path.el_deg)


def resolve_common_direction(path: PathEstimate,
                             rounds: list[list[PathEstimate]],
                             tol_deg: float) -> PathEstimate:
    """Re-estimate an identified path's direction from the later rounds.

    The regular round carries the full co-pilot collision by definition,
    so its refined angles are tilted by whatever shares the beam there.
    The later rounds re-observe the same path under independently drawn
    company; averaging their matched detections (strongest within
    tol_deg per round) removes the systematic regular-round tilt while
    the complex amplitude keeps its regular-round value, which sets the
    reconstruction scale.
    """
    matched = []
    for later in rounds[1:]:
        close = [p for p in later
                 if angular_separation_deg(path.az_deg, path.el_deg,
                                           p.az_deg, p.el_deg) <= tol_deg]
        if close:
            matched.append(max(close, key=lambda p: p.power))
    if not matched:
        return path
    az = path.az_deg + float(np.mean([wrap_deg(p.az_deg - path.az_deg)
                                      for p in matched]))
    el = float(np.mean([p.el_deg for p in matched]))
    return PathEstimate(az_deg=float(wrap_deg(az)), el_deg=el,
                        amplitude=path.amplitude, power=path.power)


def decontaminate_uav(rounds: list[list[PathEstimate]], array: ArrayGeometry,
                      tol_deg: float) -> tuple[np.ndarray, bool]:
    """Rebuild an aerial user's estimate from its common path.

    Returns (amplitude * a(az, el), ambiguous flag). Ambiguous is set
    when nothing recurs across all rounds, when the best recurring
    candidate sits far below the extra rounds' dominant energy (the
    served user transmits in every extra round, so a winner at sidelobe
    level means the real peak was displaced and debris recurred in its
    place), or when a second recurring candidate scores within the
    power-matching tolerance of the winner, meaning an interferer
    survived every extra round at comparable strength and the protocol
    cannot tell the two apart. In the first two cases the fallback
    reconstruction is the strongest regular-round peak. Recurring
    structure of the served path itself does not trip the flag: grating
    and elevation-ridge aliases of the winner have steering vectors
    nearly collinear with the winner's, so whichever member of the
    family is picked forms the same physical beam, and a contender whose
    recurring power sits at the winner's own pattern level toward that
    direction (score times squared beam coupling) is the winner's
    shoulder or ridge, not a separate transmitter. Only a comparable
    contender that would steer a materially different beam counts as
    ambiguity. For a line-of-sight channel observed noiselessly the
    reconstruction is collinear with the true channel vector.
    """
    qualified = _qualified_paths(rounds, tol_deg)
    if not qualified:
        return (reconstruct_single_path(max(rounds[0], key=lambda p: p.power),
                                        array), True)
    score, path = qualified[0]
    ratio = 10.0 ** (MATCH_POWER_TOL_DB / 10.0)
    # the served user transmits in every extra round, so the true common
    # path carries a dominant share of every extra round's energy; a
    # winner far below that level is pattern debris that only recurred
    # because the real peak was displaced (for example by an unresolvable
    # co-pilot merging into the served lobe)
    min_top = min(max(p.power for p in later) for later in rounds[1:])
    if score * ratio < min_top:
        return (reconstruct_single_path(max(rounds[0], key=lambda p: p.power),
                                        array), True)
    a_win = steering_vector(array, path.az_deg, path.el_deg)
    ambiguous = False
    for s, cand in qualified[1:]:
        if s * ratio < score:
            break
        a_c = steering_vector(array, cand.az_deg, cand.el_deg)
        coupling = abs(np.vdot(a_win, a_c)) / array.n_elements
        if coupling >= ALIAS_COLLINEARITY_MIN:
            continue
        level = score * coupling * coupling
        if level > 0.0 and abs(10.0 * np.log10(s / level)) <= SELF_PATTERN_TOL_DB:
            continue
        ambiguous = True
        break
    refined = resolve_common_direction(path, rounds, tol_deg)
    return reconstruct_single_path(refined, array), ambiguous
