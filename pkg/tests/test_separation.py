import pytest
from hypothesis import given
from hypothesis import strategies as st

from blockbell.separation import (
    LIGHT_MINUTE,
    LIGHT_SECOND,
    SPEED_OF_LIGHT,
    SeparationScenario,
    SeparationType,
    classify,
    required_distance,
    throwaway_trials_needed,
)

MOON_DISTANCE = 3.844e8


def test_required_distance_examples():
    assert required_distance(4e-5) == pytest.approx(12_000, rel=5e-3)
    assert required_distance(4e-5) == pytest.approx(11_991.7, abs=0.1)
    assert required_distance(1.3) == pytest.approx(MOON_DISTANCE, rel=0.02)
    assert required_distance(0) == 0
    with pytest.raises(ValueError):
        required_distance(-1)


def test_earth_orbit_scale_is_light_minutes():
    # Earth's orbital diameter (~2 AU) is roughly 16-17 light-minutes.
    assert 2 * 1.496e11 / LIGHT_MINUTE == pytest.approx(16.6, abs=0.1)


def test_classify_examples():
    assert classify(SeparationScenario(20 * LIGHT_MINUTE, 20 * 60, 60, 4e-5)) is SeparationType.TYPE1
    assert classify(SeparationScenario(2 * LIGHT_SECOND, 75 * 60, 1, 4e-5)) is SeparationType.TYPE2
    assert classify(SeparationScenario(12_000, 75 * 60, 1, 4e-5)) is SeparationType.TYPE3
    assert classify(SeparationScenario(10, 75 * 60, 1, 4e-5)) is SeparationType.NONE_ACHIEVED


def test_type_ordering():
    assert SeparationType.TYPE1 > SeparationType.TYPE2 > SeparationType.TYPE3 > SeparationType.NONE_ACHIEVED


def test_scenario_validation():
    with pytest.raises(ValueError):
        SeparationScenario(-1, 10, 1, 0.1)
    with pytest.raises(ValueError):
        SeparationScenario(1, 10, 20, 0.1)
    with pytest.raises(ValueError):
        SeparationScenario(1, 10, 1, 0)


def test_throwaway_trials():
    # 12 km is a hair more than one 40 microsecond period of light travel.
    assert 12_000 / SPEED_OF_LIGHT / 4e-5 == pytest.approx(1.0007, abs=1e-4)
    assert throwaway_trials_needed(12_000, 4e-5) == 2
    assert throwaway_trials_needed(required_distance(4e-5), 4e-5) == 1
    assert throwaway_trials_needed(0, 4e-5) == 0
    assert throwaway_trials_needed(120_000, 4e-5) == 11


@given(st.floats(0, 1e4), st.floats(0, 1e4))
def test_required_distance_linear(t, s):
    assert required_distance(2 * t) == pytest.approx(2 * required_distance(t))
    assert required_distance(t + s) == pytest.approx(required_distance(t) + required_distance(s))


@given(
    st.floats(1e-6, 1.0),
    st.floats(1.0, 100.0),
    st.floats(1.0, 100.0),
    st.floats(0, 1e13),
    st.floats(0, 1e13),
)
def test_classify_monotone_and_boundary_inclusive(trial, block_mult, exp_mult, d1, d2):
    block = trial * block_mult
    exp = block * exp_mult
    lo, hi = sorted((d1, d2))
    assert classify(SeparationScenario(lo, exp, block, trial)) <= classify(SeparationScenario(hi, exp, block, trial))
    edge = SeparationScenario(required_distance(exp), exp, block, trial)
    assert classify(edge) is SeparationType.TYPE1
