import numpy as np
import pytest
from hypothesis import given, strategies as st

from uavmimo.decontam import (
    ALIAS_COLLINEARITY_MIN,
    MATCH_POWER_TOL_DB,
    PathEstimate,
    decontaminate_gue,
    decontaminate_uav,
    detect_directions,
    detect_peaks,
    identify_common_path,
    match_directions,
    matched_filter_spectrum,
    merge_path_estimates,
    reconstruct_single_path,
    resolve_common_direction,
    select_interferer_dirs,
)
from uavmimo.geometry import steering_vector


def path(az, el, power=100.0):
    amp = np.sqrt(power / 128.0)
    return PathEstimate(az_deg=az, el_deg=el, amplitude=complex(amp), power=power)


def correlation(x, y):
    return abs(np.vdot(x, y)) / (np.linalg.norm(x) * np.linalg.norm(y))


# ---------------------------------------------------------------- spectrum

def test_spectrum_on_grid_source_peaks_at_m(array):
    y = steering_vector(array, 40.0, 25.0)
    spec = matched_filter_spectrum(y, array)
    e = int(np.argmin(np.abs(spec.el_grid - 25.0)))
    a = int(np.argmin(np.abs(spec.az_grid - 40.0)))
    assert spec.power[e, a] == pytest.approx(128.0, rel=1e-12)
    assert spec.power.max() == pytest.approx(128.0, rel=1e-12)


def test_spectrum_zero_snapshot_is_zero(array):
    spec = matched_filter_spectrum(np.zeros(128, dtype=complex), array)
    assert np.all(spec.power == 0.0)


def test_spectrum_two_separated_sources_give_two_maxima(array):
    y = steering_vector(array, 20.0, 10.0) + steering_vector(array, 50.0, 30.0)
    spec = matched_filter_spectrum(y, array)
    peaks = detect_peaks(spec, 10.0, 3.0, 8, snapshot=y)
    found = [(round(p.az_deg), round(p.el_deg)) for p in peaks[:2]]
    assert (20, 10) in found and (50, 30) in found


def test_spectrum_power_property_matches_corr(array, rng):
    y = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    spec = matched_filter_spectrum(y, array, (0.0, 20.0), (0.0, 5.0))
    assert np.allclose(spec.power, np.abs(spec.corr) ** 2 / 128.0)


def test_spectrum_rejects_wrong_snapshot_length(array):
    with pytest.raises(ValueError):
        matched_filter_spectrum(np.zeros(64, dtype=complex), array)


@pytest.mark.parametrize("steps", [(0.0, 1.0), (1.0, -2.0)])
def test_spectrum_rejects_bad_steps(array, steps):
    with pytest.raises(ValueError):
        matched_filter_spectrum(np.zeros(128, dtype=complex), array, steps_deg=steps)


def test_spectrum_rejects_empty_grid(array):
    with pytest.raises(ValueError):
        matched_filter_spectrum(np.zeros(128, dtype=complex), array,
                                az_range_deg=(10.0, 10.0))


# ------------------------------------------------------------ peak finding

def test_detect_peaks_empty_for_zero_snapshot(array):
    y = np.zeros(128, dtype=complex)
    spec = matched_filter_spectrum(y, array)
    assert detect_peaks(spec, 10.0, 3.0, 8, snapshot=y) == []


def test_detect_on_grid_source_is_exact(array, default_cfg):
    y = steering_vector(array, 37.0, 22.0)
    p = detect_directions(y, array, default_cfg)[0]
    assert p.az_deg == pytest.approx(37.0, abs=1e-9)
    assert p.el_deg == pytest.approx(22.0, abs=1e-9)
    assert p.power == pytest.approx(128.0, rel=1e-9)
    assert p.amplitude == pytest.approx(1.0 + 0.0j, abs=1e-9)


def test_detect_off_grid_source_within_one_step(array, default_cfg):
    y = steering_vector(array, 33.4, 18.7)
    p = detect_directions(y, array, default_cfg)[0]
    assert abs(p.az_deg - 33.4) <= default_cfg.grid_az_step_deg
    assert abs(p.el_deg - 18.7) <= default_cfg.grid_el_step_deg


def test_detect_close_equal_sources_never_duplicate(array):
    y = steering_vector(array, 30.0, 20.0) + steering_vector(array, 33.0, 20.0)
    spec = matched_filter_spectrum(y, array)
    peaks = detect_peaks(spec, 10.0, 3.0, 8, snapshot=y)
    for i, p in enumerate(peaks):
        for q in peaks[i + 1:]:
            sep = max(abs((p.az_deg - q.az_deg + 180) % 360 - 180),
                      abs(p.el_deg - q.el_deg))
            assert sep >= 3.0


def test_detect_respects_max_peaks(array):
    rng = np.random.default_rng(3)
    y = sum(steering_vector(array, az, el)
            for az, el in [(10, 10), (40, 20), (70, 35), (-30, 15), (-60, 45)])
    spec = matched_filter_spectrum(y, array)
    assert len(detect_peaks(spec, 3.0, 3.0, 2, snapshot=y)) <= 2


def test_detect_moderate_noise_accuracy(array, default_cfg, rng):
    hits = 0
    for _ in range(100):
        az = float(rng.uniform(-60, 60))
        el = float(rng.uniform(5, 60))
        h = steering_vector(array, az, el)
        sigma = np.sqrt(0.5 / 10.0)  # 10 dB element SNR
        y = h + sigma * (rng.standard_normal(128) + 1j * rng.standard_normal(128))
        p = detect_directions(y, array, default_cfg)[0]
        daz = abs((p.az_deg - az + 180) % 360 - 180)
        if daz <= default_cfg.grid_az_step_deg and abs(p.el_deg - el) <= default_cfg.grid_el_step_deg:
            hits += 1
    assert hits >= 97


# ------------------------------------------------------------- projection

def test_project_no_directions_returns_independent_copy(array, rng):
    h = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    out = decontaminate_gue(h, [], array)
    assert np.array_equal(out, h)
    out[0] = 0.0
    assert h[0] != 0.0


def test_project_annihilates_listed_direction(array):
    h = steering_vector(array, 25.0, 30.0)
    out = decontaminate_gue(h, [path(25.0, 30.0)], array)
    assert np.linalg.norm(out) < 1e-10 * np.sqrt(128.0)


def test_project_matches_explicit_gram_solve(array, rng):
    h = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    dirs = [path(10.0, 12.0), path(-35.0, 40.0)]
    a = np.column_stack([steering_vector(array, p.az_deg, p.el_deg) for p in dirs])
    expected = h - a @ np.linalg.solve(a.conj().T @ a, a.conj().T @ h)
    out = decontaminate_gue(h, dirs, array)
    assert np.allclose(out, expected, atol=1e-9)


def test_project_near_collinear_directions_stay_stable(array, rng):
    h = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    dirs = [path(10.0, 12.0), path(10.0005, 12.0003), path(10.001, 12.0)]
    out = decontaminate_gue(h, dirs, array)
    assert np.all(np.isfinite(out))
    assert np.linalg.norm(out) <= np.linalg.norm(h) * (1 + 1e-9)
    again = decontaminate_gue(out, dirs, array)
    assert np.allclose(again, out, atol=1e-9 * np.linalg.norm(h))


def test_project_recovers_serving_part(array, rng):
    h0 = steering_vector(array, -20.0, 8.0)
    g = 0.8 * steering_vector(array, 45.0, 35.0)
    out = decontaminate_gue(h0 + g, [path(45.0, 35.0)], array)
    assert correlation(out, h0) > 0.99


dir_strategy = st.tuples(st.floats(-80.0, 80.0), st.floats(1.0, 80.0))


@given(dirs=st.lists(dir_strategy, min_size=1, max_size=4), seed=st.integers(0, 2**31))
def test_project_idempotent_contractive_orthogonal(array, dirs, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    paths = [path(az, el) for az, el in dirs]
    out = decontaminate_gue(h, paths, array)
    assert np.linalg.norm(out) <= np.linalg.norm(h) * (1 + 1e-12)
    twice = decontaminate_gue(out, paths, array)
    assert np.linalg.norm(twice - out) <= 1e-12 * np.linalg.norm(h) + 1e-12
    for az, el in dirs:
        a = steering_vector(array, az, el)
        assert abs(np.vdot(a, out)) <= 1e-9 * np.linalg.norm(a) * np.linalg.norm(h)


# ------------------------------------------------------ matching / merging

def test_match_requires_direction_and_power(array):
    ref = [path(30.0, 20.0, power=100.0)]
    assert match_directions([path(31.0, 20.5, power=80.0)], ref, 2.0)
    assert not match_directions([path(35.0, 20.0, power=100.0)], ref, 2.0)
    assert not match_directions([path(30.0, 20.0, power=100.0 * 10 ** 0.7)], ref, 2.0)
    assert not match_directions([path(30.0, 20.0, power=100.0 / 10 ** 0.7)], ref, 2.0)


def test_match_power_gate_is_two_sided_at_tolerance(array):
    ref = [path(0.0, 10.0, power=100.0)]
    edge = 100.0 * 10 ** (MATCH_POWER_TOL_DB / 10.0)
    assert match_directions([path(0.0, 10.0, power=edge * 0.999)], ref, 2.0)
    assert match_directions([path(0.0, 10.0, power=100.0 / (0.999 * 10 ** 0.6))], ref, 2.0)


def test_match_preserves_candidate_order(array):
    ref = [path(0.0, 10.0), path(50.0, 30.0)]
    cands = [path(50.2, 30.1), path(0.1, 10.0)]
    out = match_directions(cands, ref, 2.0)
    assert [p.az_deg for p in out] == [50.2, 0.1]


def test_merge_keeps_strongest_representative():
    merged = merge_path_estimates(
        [path(10.0, 10.0, power=50.0), path(10.5, 10.2, power=90.0),
         path(40.0, 10.0, power=20.0)], 3.0)
    assert [p.power for p in merged] == [90.0, 20.0]
    assert merged[0].az_deg == 10.5
    for i, p in enumerate(merged):
        for q in merged[i + 1:]:
            sep = max(abs((p.az_deg - q.az_deg + 180) % 360 - 180),
                      abs(p.el_deg - q.el_deg))
            assert sep >= 3.0


def test_merge_empty_is_empty():
    assert merge_path_estimates([], 3.0) == []


def test_select_interferers_drops_horizon_and_own(array):
    peaks = [path(30.0, 20.0), path(60.0, 0.0), path(45.0, -3.0), path(31.0, 21.0)]
    out = select_interferer_dirs(peaks, 30.5, 20.5, array)
    assert [(p.az_deg, p.el_deg) for p in out] == [(31.0, 21.0)] or \
           [(p.az_deg, p.el_deg) for p in out] == []
    # own exclusion is 2 deg Chebyshev: (31, 21) sits 0.5 deg away, dropped too
    assert all(max(abs(p.az_deg - 30.5), abs(p.el_deg - 20.5)) > 2.0 for p in out)


def test_select_interferers_folds_own_azimuth(array):
    # a back half-plane own direction folds onto its front image
    peaks = [path(30.0, 10.0), path(-70.0, 25.0)]
    out = select_interferer_dirs(peaks, 150.0, 10.0, array)
    assert [(p.az_deg, p.el_deg) for p in out] == [(-70.0, 25.0)]


def test_select_interferers_clips_own_elevation(array):
    peaks = [path(10.0, 1.5), path(10.0, 30.0)]
    out = select_interferer_dirs(peaks, 10.0, -5.0, array)
    assert [(p.az_deg, p.el_deg) for p in out] == [(10.0, 30.0)]


# ------------------------------------------------------------ common path

def test_identify_common_path_picks_recurring():
    rounds = [
        [path(10.0, 20.0, 100.0), path(50.0, 30.0, 90.0)],
        [path(10.3, 19.8, 95.0)],
        [path(9.8, 20.1, 99.0), path(-40.0, 5.0, 50.0)],
    ]
    p, n = identify_common_path(rounds, 2.0)
    assert (p.az_deg, p.el_deg) == (10.0, 20.0)
    assert n == 1


def test_identify_common_path_survives_jitter():
    rounds = [[path(0.0, 10.0)], [path(1.9, 11.9)], [path(-1.9, 8.1)]]
    p, n = identify_common_path(rounds, 2.0)
    assert n == 1 and p.az_deg == 0.0


def test_identify_common_path_disjoint_falls_back():
    rounds = [[path(0.0, 10.0, 100.0), path(90.0, 40.0, 120.0)],
              [path(-120.0, 70.0)]]
    p, n = identify_common_path(rounds, 2.0)
    assert n == 0
    assert p.az_deg == 90.0  # strongest regular-round peak


def test_identify_common_path_tiebreak_min_power():
    rounds = [
        [path(0.0, 10.0, 100.0), path(60.0, 30.0, 100.0)],
        [path(0.0, 10.0, 40.0), path(60.0, 30.0, 70.0)],
    ]
    p, n = identify_common_path(rounds, 2.0)
    assert p.az_deg == 60.0
    assert n == 2


def test_identify_requires_extra_round():
    with pytest.raises(ValueError):
        identify_common_path([[path(0.0, 10.0)]], 2.0)
    with pytest.raises(ValueError):
        identify_common_path([[], [path(0.0, 10.0)]], 2.0)


def test_resolve_direction_averages_extra_rounds():
    p = path(10.0, 20.0, 100.0)
    rounds = [[p], [path(10.4, 20.2)], [path(9.8, 19.9)]]
    out = resolve_common_direction(p, rounds, 2.0)
    assert out.az_deg == pytest.approx(10.1)
    assert out.el_deg == pytest.approx(20.05)
    assert out.amplitude == p.amplitude and out.power == p.power


def test_resolve_direction_wraps_azimuth():
    p = path(359.5, 10.0)
    rounds = [[p], [path(359.0, 10.0)], [path(1.0, 10.0)]]
    out = resolve_common_direction(p, rounds, 2.0)
    assert out.az_deg == pytest.approx(0.0, abs=1e-9)


def test_resolve_direction_without_matches_keeps_path():
    p = path(10.0, 20.0)
    out = resolve_common_direction(p, [[p], [path(100.0, 50.0)]], 2.0)
    assert out == p


def test_reconstruct_single_path_scales_steering(array):
    p = PathEstimate(az_deg=25.0, el_deg=15.0, amplitude=0.5 - 0.25j, power=1.0)
    rec = reconstruct_single_path(p, array)
    assert np.allclose(rec, (0.5 - 0.25j) * steering_vector(array, 25.0, 15.0))
    assert np.linalg.norm(rec) == pytest.approx(abs(p.amplitude) * np.sqrt(128.0))


# ------------------------------------------------------- aerial two-phase

def test_uav_single_collision_recovers_collinear(array, default_cfg):
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(30):
        az1 = float(rng.integers(-70, 70)) % 360.0
        el1 = float(rng.integers(3, 56))
        az2 = float(rng.integers(-70, 70)) % 360.0
        el2 = float(rng.integers(3, 56))
        if max(abs((az1 - az2 + 180) % 360 - 180), abs(el1 - el2)) < 10:
            continue
        h = steering_vector(array, az1, el1)
        g = float(rng.uniform(0.3, 1.0)) * steering_vector(array, az2, el2)
        r0 = detect_directions(h + g, array, default_cfg)
        r1 = detect_directions(h, array, default_cfg)
        rec, ambiguous = decontaminate_uav([r0, r1, r1], array,
                                           default_cfg.common_path_tol_deg)
        if ambiguous:
            continue
        assert 1.0 - correlation(rec, h) < 1e-9
        checked += 1
    assert checked >= 20


def test_uav_persistent_distinct_interferer_flags_ambiguous(array, default_cfg):
    h = steering_vector(array, 20.0, 30.0)
    g = 0.95 * steering_vector(array, -40.0, 12.0)
    r = detect_directions(h + g, array, default_cfg)
    rec, ambiguous = decontaminate_uav([r, r, r], array,
                                       default_cfg.common_path_tol_deg)
    assert ambiguous


def test_uav_own_sidelobes_do_not_flag(array, default_cfg):
    h = steering_vector(array, 35.0, 24.0)
    r = detect_directions(h, array, default_cfg)
    assert len(r) >= 1
    rec, ambiguous = decontaminate_uav([r, r, r], array,
                                       default_cfg.common_path_tol_deg)
    assert not ambiguous
    assert 1.0 - correlation(rec, h) < 1e-9


def test_uav_ridge_aliases_do_not_flag(array, default_cfg):
    # high elevation produces grid maxima on adjacent rows that share the
    # same horizontal direction sine; any of them steers the same beam
    h = steering_vector(array, 35.0, 70.0)
    r = detect_directions(h, array, default_cfg)
    rec, ambiguous = decontaminate_uav([r, r, r], array,
                                       default_cfg.common_path_tol_deg)
    assert not ambiguous
    assert 1.0 - correlation(rec, h) < 1e-6
    win = max(r, key=lambda p: p.power)
    for q in r[1:4]:
        a1 = steering_vector(array, win.az_deg, win.el_deg)
        a2 = steering_vector(array, q.az_deg, q.el_deg)
        if q.power * 10 ** (MATCH_POWER_TOL_DB / 10.0) >= win.power:
            assert abs(np.vdot(a1, a2)) / 128.0 >= ALIAS_COLLINEARITY_MIN


def test_uav_disjoint_rounds_fall_back_flagged(array, default_cfg):
    r0 = [path(10.0, 20.0, 100.0), path(60.0, 40.0, 80.0)]
    r1 = [path(-120.0, 70.0, 50.0)]
    rec, ambiguous = decontaminate_uav([r0, r1], array, 2.0)
    assert ambiguous
    expected = reconstruct_single_path(r0[0], array)
    assert np.allclose(rec, expected)
