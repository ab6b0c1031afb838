import math

import numpy as np
import pytest

from uavmimo.channel import (
    LinkState,
    MobilityState,
    build_link,
    draw_velocity,
    initial_mobility,
    los_probability,
    path_loss_db,
    realize_channel,
    step_mobility,
)
from uavmimo.config import ScenarioConfig
from uavmimo.geometry import GUE, UAV, Sector, UserState, steering_vector


def make_sector() -> Sector:
    return Sector(sector_id=0, site_index=0, boresight_az_deg=0.0,
                  position=(0.0, 0.0, 25.0))


def los_link(az=20.0, el=10.0, pl_db=0.0) -> LinkState:
    return LinkState(sector_id=0, user_id=0, kind=UAV, is_los=True,
                     d3d_m=100.0, d2d_m=100.0, az_deg=az, el_deg=el,
                     path_loss_db=pl_db)


def test_los_probability_high_uav_is_certain():
    assert los_probability(UAV, 150.0, 5000.0) == 1.0
    assert los_probability(UAV, 100.1, 1e6) == 1.0


def test_los_probability_mid_uav_near_site():
    assert los_probability(UAV, 60.0, 0.0) == 1.0
    assert los_probability(UAV, 60.0, 100.0) == 1.0  # inside d1 = 117.95 m
    assert 0.0 < los_probability(UAV, 60.0, 5000.0) < 1.0


def test_los_probability_ground_values():
    assert los_probability(GUE, 1.5, 10.0) == 1.0
    assert los_probability(GUE, 1.5, 1000.0) == pytest.approx(
        0.0180001255, abs=1e-9)
    # monotone decay with distance
    d = np.array([20.0, 50.0, 200.0, 1000.0])
    p = [los_probability(GUE, 1.5, float(x)) for x in d]
    assert all(a > b for a, b in zip(p, p[1:]))


def test_path_loss_los_reference_value():
    pl = path_loss_db(GUE, True, 200.0, 1.5, 3.5e9)
    expected = 28.0 + 22.0 * math.log10(200.0) + 20.0 * math.log10(3.5)
    assert pl == pytest.approx(expected, abs=1e-9)
    assert pl == pytest.approx(89.504, abs=1e-3)


def test_path_loss_los_slope_is_22db_per_decade():
    near = path_loss_db(UAV, True, 200.0, 80.0, 3.5e9)
    far = path_loss_db(UAV, True, 2000.0, 80.0, 3.5e9)
    assert far - near == pytest.approx(22.0, abs=1e-9)


def test_path_loss_nlos_never_below_los():
    for kind, h in ((UAV, 80.0), (UAV, 250.0), (GUE, 1.5)):
        for d in (30.0, 100.0, 700.0, 3000.0):
            los = path_loss_db(kind, True, d, h, 3.5e9)
            nlos = path_loss_db(kind, False, d, h, 3.5e9)
            assert nlos >= los


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss_db(GUE, True, 0.0, 1.5, 3.5e9)


def test_los_channel_norm_and_collinearity(array, rng):
    link = los_link(pl_db=0.0)
    h = realize_channel(link, array, rng)
    assert np.sum(np.abs(h) ** 2) == pytest.approx(array.n_elements, rel=1e-12)
    a = steering_vector(array, link.az_deg, link.el_deg)
    # unit-modulus phase alignment: the beam toward the true direction
    # captures the full coherent gain
    coherent = abs(np.vdot(a, h)) ** 2
    assert coherent == pytest.approx(array.n_elements ** 2, rel=1e-12)


def test_nlos_channel_mean_power(array):
    cfg = ScenarioConfig()
    sector = make_sector()
    user = UserState(user_id=0, kind=GUE, position=(120.0, 40.0, 1.5))
    rng = np.random.default_rng(7)
    total = 0.0
    count = 0
    trials = 0
    while count < 2000:
        link = build_link(sector, user, cfg, rng)
        trials += 1
        if link.is_los:
            continue
        h = realize_channel(link, array, rng)
        total += float(np.sum(np.abs(h) ** 2)) / 10.0 ** (-link.path_loss_db / 10.0)
        count += 1
        assert trials < 100000
    mean_gain = total / count
    assert mean_gain == pytest.approx(array.n_elements, rel=0.03)


def test_nlos_requires_ray_cluster(array, rng):
    bare = LinkState(sector_id=0, user_id=0, kind=GUE, is_los=False,
                     d3d_m=100.0, d2d_m=100.0, az_deg=0.0, el_deg=0.0,
                     path_loss_db=90.0)
    with pytest.raises(ValueError):
        realize_channel(bare, array, rng)


def test_build_link_deterministic():
    cfg = ScenarioConfig()
    sector = make_sector()
    user = UserState(user_id=3, kind=GUE, position=(300.0, -150.0, 1.5))
    a = build_link(sector, user, cfg, np.random.default_rng(11))
    b = build_link(sector, user, cfg, np.random.default_rng(11))
    assert a == b


def test_build_link_elevation_signs():
    cfg = ScenarioConfig()
    sector = make_sector()
    rng = np.random.default_rng(5)
    up = build_link(sector, UserState(0, UAV, (200.0, 0.0, 150.0)), cfg, rng)
    down = build_link(sector, UserState(1, GUE, (200.0, 0.0, 1.5)), cfg, rng)
    assert up.el_deg > 0.0
    assert down.el_deg < 0.0


def test_force_los_flag():
    cfg = ScenarioConfig(uav_force_los=True)
    sector = make_sector()
    # 40 m altitude at 5 km ground range would almost surely be NLoS
    user = UserState(0, UAV, (5000.0, 0.0, 40.0))
    for seed in range(20):
        link = build_link(sector, user, cfg, np.random.default_rng(seed))
        assert link.is_los


def test_draw_velocity_bands():
    cfg = ScenarioConfig()
    rng = np.random.default_rng(2)
    for _ in range(200):
        speed, az, el = draw_velocity(cfg, rng)
        assert cfg.uav_speed_min_kmh / 3.6 <= speed <= cfg.uav_speed_max_kmh / 3.6
        assert 0.0 <= az < 360.0
        assert -15.0 <= el <= 15.0


def test_step_mobility_advances_position():
    cfg = ScenarioConfig()
    state = MobilityState(position=(0.0, 0.0, 100.0), speed_mps=10.0,
                          heading_az_deg=0.0, heading_el_deg=0.0,
                          time_to_change_s=1.0)
    out = step_mobility(state, 0.5, cfg, np.random.default_rng(0))
    assert out.position[0] == pytest.approx(5.0)
    assert out.position[1] == pytest.approx(0.0)
    assert out.position[2] == pytest.approx(100.0)
    assert out.time_to_change_s == pytest.approx(0.5)


def test_step_mobility_reflects_at_ceiling():
    cfg = ScenarioConfig()
    state = MobilityState(position=(0.0, 0.0, 299.9), speed_mps=20.0,
                          heading_az_deg=0.0, heading_el_deg=90.0,
                          time_to_change_s=10.0)
    out = step_mobility(state, 0.1, cfg, np.random.default_rng(0))
    assert out.position[2] == pytest.approx(cfg.uav_height_max_m)
    assert out.heading_el_deg == pytest.approx(-90.0)


def test_step_mobility_redraws_after_hold():
    cfg = ScenarioConfig()
    rng = np.random.default_rng(9)
    state = initial_mobility(cfg, (0.0, 0.0, 100.0), rng)
    before = (state.speed_mps, state.heading_az_deg, state.heading_el_deg)
    out = state
    for _ in range(int(round(cfg.velocity_hold_s / 0.01))):
        out = step_mobility(out, 0.01, cfg, rng)
    after = (out.speed_mps, out.heading_az_deg, out.heading_el_deg)
    assert after != before
    assert out.time_to_change_s == pytest.approx(cfg.velocity_hold_s)


def test_mobility_altitude_stays_in_band():
    cfg = ScenarioConfig()
    rng = np.random.default_rng(31)
    state = initial_mobility(cfg, (0.0, 0.0, 51.0), rng)
    for _ in range(4000):
        state = step_mobility(state, 0.01, cfg, rng)
        assert cfg.uav_height_min_m <= state.position[2] <= cfg.uav_height_max_m
