"""Exact per-cycle violation probabilities and binomial tail p-values."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .ch import SETTINGS, SettingPair
from .sim import ExperimentResult
from .strategy import MixtureStrategy


@dataclass(frozen=True)
class CycleAssignment:
    """Which mixture component was emitted in each slot of a cycle."""

    component_per_slot: dict[SettingPair, int]

    @classmethod
    def from_tuple(cls, indices: tuple[int, int, int, int]) -> CycleAssignment:
        return cls(dict(zip(SETTINGS, indices)))


@dataclass(frozen=True)
class ExactReport:
    violation_probability: Fraction
    expected_ch: Fraction
    assignment_count: int


def exact_report(m: MixtureStrategy) -> ExactReport:
    """Enumerate all k**4 slot assignments of a k-component mixture.

    Probabilities are rescaled to integers over a common denominator so the
    inner loop is integer-only; the results are still exact.
    """
    dists, weights = m.distributions, m.weights
    k = len(dists)
    scale = math.lcm(*(t.denominator for d in dists for t in d.terms()))
    wscale = math.lcm(*(w.denominator for w in weights))
    pos = [int(d.p_pp_ab * scale) for d in dists]
    n_abp = [int(d.p_p0_abp * scale) for d in dists]
    n_apb = [int(d.p_0p_apb * scale) for d in dists]
    n_apbp = [int(d.p_pp_apbp * scale) for d in dists]
    w = [int(x * wscale) for x in weights]

    violating = 0
    ch_mass = 0
    for i, j, l, r in itertools.product(range(k), repeat=4):
        weight = w[i] * w[j] * w[l] * w[r]
        ch = pos[i] - n_abp[j] - n_apb[l] - n_apbp[r]
        ch_mass += weight * ch
        if ch > 0:
            violating += weight
    total = wscale**4
    return ExactReport(
        violation_probability=Fraction(violating, total),
        expected_ch=Fraction(ch_mass, total * scale),
        assignment_count=k**4,
    )


def cycle_violation_prob(m: MixtureStrategy) -> Fraction:
    return exact_report(m).violation_probability


def expected_cycle_ch(m: MixtureStrategy) -> Fraction:
    return exact_report(m).expected_ch


def binomial_tail_exact(v: int, c: int, p0: Fraction) -> Fraction:
    """P[X >= v] for X ~ Binomial(c, p0), as an exact rational."""
    p0 = Fraction(p0)
    if not 0 <= v <= c:
        raise ValueError(f"need 0 <= v <= c, got v={v}, c={c}")
    if not 0 < p0 < 1:
        raise ValueError(f"null probability must lie in (0, 1), got {p0}")
    a, b = p0.numerator, p0.denominator
    num = sum(math.comb(c, x) * a**x * (b - a) ** (c - x) for x in range(v, c + 1))
    return Fraction(num, b**c)


def binomial_tail_p(v: int, c: int, p0: Fraction) -> float:
    """One-sided upper-tail p-value, summed exactly and then rounded once."""
    return float(binomial_tail_exact(v, c, p0))


@dataclass(frozen=True)
class MonteCarloComparison:
    observed: Fraction
    exact: Fraction
    cycles: int
    standard_error: float
    z: float


def compare_fraction(violations: int, cycles: int, exact: Fraction) -> MonteCarloComparison:
    if cycles <= 0:
        raise ValueError("no cycles to compare")
    observed = Fraction(violations, cycles)
    p = float(exact)
    se = math.sqrt(p * (1 - p) / cycles)
    diff = observed - exact
    if diff == 0:
        z = 0.0
    elif se == 0:
        z = math.copysign(math.inf, diff)
    else:
        z = float(diff) / se
    return MonteCarloComparison(observed, Fraction(exact), cycles, se, z)


def compare_mc_exact(result: ExperimentResult, m: MixtureStrategy) -> MonteCarloComparison:
    return compare_fraction(result.violation_count, result.cycle_count, cycle_violation_prob(m))
