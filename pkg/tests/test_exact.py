import math
from fractions import Fraction

import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from blockbell.ch import JointDistribution, ch_value, mix
from blockbell.exact import (
    CycleAssignment,
    binomial_tail_exact,
    binomial_tail_p,
    compare_fraction,
    compare_mc_exact,
    cycle_violation_prob,
    exact_report,
    expected_cycle_ch,
)
from blockbell.sim import ExperimentConfig, run_experiment
from blockbell.strategy import (
    STATE_MID,
    THREE_STATE_MIXTURE,
    CHCountSpec,
    MixtureStrategy,
    build_state_table,
    table_distribution,
)
from oracles import naive_cycle_stats, three_state_closed_form

F = Fraction


def as_oracle_input(m):
    return [(d.terms(), w) for d, w in m.components]


def rho_eps_mixture(rho, eps):
    comps = []
    for d, w in zip((0, 3, 12, 39), (F(2, 5), F(1, 4), F(1, 5), F(3, 20))):
        q = rho - d * eps
        comps.append((JointDistribution(q, q / 3, q / 3, q / 3), w))
    return MixtureStrategy(tuple(comps))


@st.composite
def random_mixtures(draw, max_k=4):
    k = draw(st.integers(1, max_k))
    comps = []
    for _ in range(k):
        n = 72
        n1 = draw(st.integers(0, n))
        n2 = draw(st.integers(0, n - n1))
        n3 = draw(st.integers(0, n - n1 - n2))
        pp = draw(st.integers(0, n1 + n2 + n3))
        comps.append(table_distribution(build_state_table(CHCountSpec(pp, n1, n2, n3, n))))
    raw = [draw(st.integers(1, 9)) for _ in range(k)]
    return MixtureStrategy(tuple((d, F(r, sum(raw))) for d, r in zip(comps, raw)))


def test_three_state_is_149_over_256():
    assert cycle_violation_prob(THREE_STATE_MIXTURE) == three_state_closed_form() == F(149, 256)


def test_single_saturating_component_never_violates():
    assert cycle_violation_prob(MixtureStrategy.of((STATE_MID, 1))) == 0


def test_rho_eps_family_exceeds_63_percent():
    m = rho_eps_mixture(F(1, 2), F(1, 100))
    viol, _, _ = naive_cycle_stats(as_oracle_input(m))
    assert viol == F(101267, 160000)
    assert cycle_violation_prob(m) == viol
    assert viol > F(63, 100)


@pytest.mark.parametrize("rho, eps", [(F(2, 5), F(1, 200)), (F(1), F(1, 41)), (F(1, 10), F(1, 1000))])
def test_rho_eps_scale_invariance(rho, eps):
    assert cycle_violation_prob(rho_eps_mixture(rho, eps)) == cycle_violation_prob(rho_eps_mixture(F(1, 2), F(1, 100)))


def test_expected_ch_examples():
    assert expected_cycle_ch(THREE_STATE_MIXTURE) == 0
    assert expected_cycle_ch(MixtureStrategy.of((JointDistribution.of("1/4", "1/2", 0, 0), 1))) == F(-1, 4)


def test_report_assignment_count():
    assert exact_report(THREE_STATE_MIXTURE).assignment_count == 81
    assert exact_report(rho_eps_mixture(F(1, 2), F(1, 100))).assignment_count == 256


def test_cycle_assignment():
    a = CycleAssignment.from_tuple((0, 1, 2, 1))
    assert list(a.component_per_slot.values()) == [0, 1, 2, 1]


@settings(max_examples=60, deadline=None)
@given(random_mixtures())
def test_enumeration_matches_naive_oracle(m):
    viol, expect, mass = naive_cycle_stats(as_oracle_input(m))
    rep = exact_report(m)
    assert mass == 1
    assert rep.violation_probability == viol
    assert rep.expected_ch == expect


@settings(max_examples=60, deadline=None)
@given(random_mixtures())
def test_expected_ch_is_linear_and_non_positive(m):
    e = expected_cycle_ch(m)
    assert e == ch_value(mix(m.components))
    assert e <= 0
    # Violating and non-violating mass partition the assignment space.
    viol, _, mass = naive_cycle_stats(as_oracle_input(m))
    assert 0 <= cycle_violation_prob(m) <= 1
    assert cycle_violation_prob(m) + (mass - viol) == 1


def test_binomial_tail_trivial():
    assert binomial_tail_p(0, 10, F(1, 2)) == 1.0
    assert binomial_tail_exact(10, 10, F(1, 2)) == F(1, 1024)


def test_binomial_tail_against_scipy():
    for v, c, p in [(394, 650, F(1, 2)), (394, 650, F(149, 256)), (7, 20, F(1, 3)), (0, 5, F(1, 7))]:
        ref = scipy.stats.binom.sf(v - 1, c, float(p))
        assert binomial_tail_p(v, c, p) == pytest.approx(ref, rel=1e-9)


def test_reported_cycle_p_values():
    assert binomial_tail_p(394, 650, F(1, 2)) < 1e-6
    assert binomial_tail_p(394, 650, F(149, 256)) > 0.05


def test_binomial_tail_errors():
    for args in [(-1, 5, F(1, 2)), (6, 5, F(1, 2)), (1, 5, F(0)), (1, 5, F(1))]:
        with pytest.raises(ValueError):
            binomial_tail_p(*args)


@given(st.integers(1, 60), st.data())
def test_binomial_tail_monotone(c, data):
    v = data.draw(st.integers(0, c - 1))
    p = data.draw(st.fractions(min_value=F(1, 50), max_value=F(48, 50), max_denominator=50))
    q = data.draw(st.fractions(min_value=p, max_value=F(49, 50), max_denominator=50))
    assert binomial_tail_exact(v + 1, c, p) <= binomial_tail_exact(v, c, p)
    assert binomial_tail_exact(v, c, p) <= binomial_tail_exact(v, c, q)


def test_compare_examples():
    exact = F(149, 256)
    assert compare_fraction(149, 256, exact).z == 0
    reported = compare_fraction(394, 650, exact)
    se = math.sqrt(149 / 256 * 107 / 256 / 650)
    assert reported.z == pytest.approx((394 / 650 - 149 / 256) / se)
    assert 1.2 < abs(reported.z) < 1.3
    assert abs(compare_fraction(377, 650, F(1, 2)).z) > 4
    with pytest.raises(ValueError):
        compare_fraction(0, 0, exact)


def test_compare_mc_exact_seeded():
    r = run_experiment(ExperimentConfig(10_000, 72, seed=2024), THREE_STATE_MIXTURE)
    cmp = compare_mc_exact(r, THREE_STATE_MIXTURE)
    assert cmp.exact == F(149, 256)
    assert cmp.cycles == r.cycle_count > 1000
    assert abs(cmp.z) < 4
