import numpy as np
import pytest
from hypothesis import given, strategies as st

from uavmimo.swarm import PhaseSplit, delivered_throughput, optimal_phase_split


def test_equal_rates_split_half_and_half():
    s = optimal_phase_split(5e6, 5e6, 2.0)
    assert s.t1_s == pytest.approx(1.0)
    assert s.t2_s == pytest.approx(1.0)
    assert s.throughput_bps == pytest.approx(2.5e6)


def test_asymmetric_rates_oracle():
    # r1 = 2 Mbps, r2 = 1 Mbps over 3 s: one second of fast uplink fills
    # exactly what two seconds of slow downlink can drain
    s = optimal_phase_split(2e6, 1e6, 3.0)
    assert s.t1_s == pytest.approx(1.0)
    assert s.t2_s == pytest.approx(2.0)
    assert s.throughput_bps == pytest.approx(2e6 / 3.0)


def test_infinite_second_phase_limit():
    s_fast = optimal_phase_split(3e6, 1e12, 1.0)
    assert s_fast.throughput_bps == pytest.approx(3e6, rel=1e-5)
    assert s_fast.t1_s == pytest.approx(1.0, rel=1e-5)


def test_balance_condition_exact():
    s = optimal_phase_split(7.3e6, 2.9e6, 4.7)
    assert s.t1_s * s.rate1_bps == pytest.approx(s.t2_s * s.rate2_bps, rel=1e-12)


def test_delivered_bits_consistency():
    s = optimal_phase_split(4e6, 6e6, 2.5)
    assert s.delivered_bits == pytest.approx(s.throughput_bps * 2.5)


def test_delivered_throughput_interior_point():
    # r1*t1 = 2e6, r2*(total-t1) = 3e6, min is the first phase
    assert delivered_throughput(2e6, 3e6, 1.0, 2.0) == pytest.approx(1e6)


def test_delivered_throughput_rejects_bad_split():
    with pytest.raises(ValueError):
        delivered_throughput(1e6, 1e6, -0.1, 2.0)
    with pytest.raises(ValueError):
        delivered_throughput(1e6, 1e6, 2.1, 2.0)


@pytest.mark.parametrize("r1,r2,total", [
    (0.0, 1e6, 1.0),
    (1e6, -2.0, 1.0),
    (1e6, 1e6, 0.0),
])
def test_optimal_split_rejects_bad_inputs(r1, r2, total):
    with pytest.raises(ValueError):
        optimal_phase_split(r1, r2, total)


rates = st.floats(1e3, 1e9)


@given(r1=rates, r2=rates, total=st.floats(0.1, 100.0))
def test_closed_form_beats_any_grid_point(r1, r2, total):
    best = optimal_phase_split(r1, r2, total)
    for frac in np.linspace(0.0, 1.0, 41):
        assert delivered_throughput(r1, r2, frac * total, total) <= \
            best.throughput_bps * (1 + 1e-12)


@given(r1=rates, r2=rates, total=st.floats(0.1, 100.0))
def test_optimum_matches_its_own_evaluation(r1, r2, total):
    best = optimal_phase_split(r1, r2, total)
    assert delivered_throughput(r1, r2, best.t1_s, total) == \
        pytest.approx(best.throughput_bps, rel=1e-9)
