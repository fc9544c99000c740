"""Search over saturating mixture families for high per-cycle violation rates.

Every component in a deficit family has the shape
``(q, q/3, q/3, q/3)`` with ``q = rho - deficit * eps_unit``, so it sits
exactly on the CH boundary.  In a cycle where the ab slot holds component
``i`` and the other slots hold ``j, l, r`` the CH estimate is positive iff
``d_j + d_l + d_r > 3 d_i``: only deficit ratios and weights matter, which
is why the objective is piecewise constant in the deficits and the search
is derivative-free.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .ch import JointDistribution
from .exact import cycle_violation_prob
from .strategy import MixtureStrategy

logger = logging.getLogger(__name__)

RHO_EPS_DEFICITS = (0, 3, 12, 39)
RHO_EPS_WEIGHTS = (Fraction(2, 5), Fraction(1, 4), Fraction(1, 5), Fraction(3, 20))


def _weights(ws: Sequence) -> tuple[Fraction, ...]:
    ws = tuple(Fraction(w) for w in ws)
    if any(w < 0 for w in ws):
        raise ValueError(f"negative weight in {ws}")
    if sum(ws) != 1:
        raise ValueError(f"weights sum to {sum(ws)}, not 1")
    return ws


@dataclass(frozen=True)
class GeneralDeficitFamily:
    deficits: tuple[Fraction, ...]
    weights: tuple[Fraction, ...]
    rho: Fraction = Fraction(1, 2)
    eps_unit: Fraction = Fraction(1, 100)

    def __post_init__(self) -> None:
        deficits = tuple(Fraction(d) for d in self.deficits)
        weights = _weights(self.weights)
        rho, eps = Fraction(self.rho), Fraction(self.eps_unit)
        if not deficits or deficits[0] != 0:
            raise ValueError("the first deficit must be 0")
        if any(b < a for a, b in zip(deficits, deficits[1:])):
            raise ValueError(f"deficits must be non-decreasing: {deficits}")
        if len(weights) != len(deficits):
            raise ValueError("need one weight per deficit")
        if not 0 < rho <= 1:
            raise ValueError(f"rho={rho} outside (0, 1]")
        if eps <= 0:
            raise ValueError("eps_unit must be positive")
        if rho - deficits[-1] * eps < 0:
            raise ValueError(f"largest deficit drives P(++|ab) below 0 (rho={rho}, eps={eps})")
        object.__setattr__(self, "deficits", deficits)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "eps_unit", eps)

    @property
    def k(self) -> int:
        return len(self.deficits)

    def component(self, i: int) -> JointDistribution:
        q = self.rho - self.deficits[i] * self.eps_unit
        return JointDistribution(q, q / 3, q / 3, q / 3)


@dataclass(frozen=True)
class RhoEpsFamily:
    """Four saturating states with deficits 0, 3, 12, 39 in units of ``eps``."""

    rho: Fraction
    eps: Fraction
    weights: tuple[Fraction, ...] = RHO_EPS_WEIGHTS

    def __post_init__(self) -> None:
        rho, eps = Fraction(self.rho), Fraction(self.eps)
        if not 0 < rho <= 1:
            raise ValueError(f"rho={rho} outside (0, 1]")
        if not 0 < eps < rho / 40:
            raise ValueError(f"eps={eps} must lie in (0, rho/40)")
        weights = _weights(self.weights)
        if len(weights) != 4:
            raise ValueError("the rho/eps family has exactly four components")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "weights", weights)

    def to_deficit_family(self) -> GeneralDeficitFamily:
        return GeneralDeficitFamily(RHO_EPS_DEFICITS, self.weights, self.rho, self.eps)


Family = GeneralDeficitFamily | RhoEpsFamily


def family_to_mixture(f: Family) -> MixtureStrategy:
    """Mixture over the family's components; zero-weight components are dropped."""
    if isinstance(f, RhoEpsFamily):
        f = f.to_deficit_family()
    return MixtureStrategy(tuple((f.component(i), w) for i, w in enumerate(f.weights) if w > 0))


def evaluate(f: Family) -> Fraction:
    return cycle_violation_prob(family_to_mixture(f))


@dataclass(frozen=True)
class SearchConfig:
    grid_resolution: int = 12
    refinement_steps: int = 60
    seed: int = 0

    def __post_init__(self) -> None:
        if self.grid_resolution <= 0 or self.refinement_steps < 0:
            raise ValueError("grid_resolution must be positive and refinement_steps non-negative")


@dataclass
class SearchResult:
    family: GeneralDeficitFamily
    probability: Fraction
    evaluations: int
    grid_best: Fraction
    history: list[Fraction] = field(default_factory=list)

    def __iter__(self):
        yield self.family
        yield self.probability


def simplex_grid(k: int, resolution: int):
    """All weight vectors with entries in multiples of 1/resolution."""
    for bars in itertools.combinations(range(resolution + k - 1), k - 1):
        parts, prev = [], -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(resolution + k - 2 - prev)
        yield tuple(Fraction(p, resolution) for p in parts)


def geometric_deficits(k: int, ratio: Fraction) -> tuple[Fraction, ...]:
    """(0, 1, 1 + g, 1 + g + g**2, ...) for growth ratio g."""
    out, acc, step = [Fraction(0)], Fraction(0), Fraction(1)
    for _ in range(k - 1):
        acc += step
        out.append(acc)
        step *= ratio
    return tuple(out)


def _scaled_family(deficits: Sequence[Fraction], weights: Sequence[Fraction]) -> GeneralDeficitFamily:
    rho = Fraction(1, 2)
    top = max(deficits)
    eps = rho / (2 * top) if top > 0 else rho / 40
    return GeneralDeficitFamily(tuple(deficits), tuple(weights), rho, eps)


def optimize_deficit_family(
    k: int,
    cfg: SearchConfig = SearchConfig(),
    fixed_deficits: Sequence[Fraction] | None = None,
    on_evaluate: Callable[[GeneralDeficitFamily, Fraction], None] | None = None,
) -> SearchResult:
    """Grid search then pattern search over weights and deficit gaps.

    The grid covers the weight simplex at ``cfg.grid_resolution`` crossed
    with geometric deficit ladders whose ratios run over ``[0, 4]``.  The
    refinement polls mass transfers between pairs of weights and
    multiplicative moves of each deficit gap, keeps the first strict
    improvement, and halves both step sizes after an unsuccessful poll.
    With ``fixed_deficits`` only the weights move.
    """
    if k < 1:
        raise ValueError("need at least one component")
    rng = random.Random(cfg.seed)
    res = cfg.grid_resolution
    evaluations = 0

    def score(deficits, weights) -> Fraction:
        nonlocal evaluations
        fam = _scaled_family(deficits, weights)
        p = evaluate(fam)
        evaluations += 1
        if on_evaluate is not None:
            on_evaluate(fam, p)
        return p

    if fixed_deficits is not None:
        if len(fixed_deficits) != k:
            raise ValueError("fixed_deficits must have k entries")
        ladders = [tuple(Fraction(d) for d in fixed_deficits)]
    else:
        ladders = list(dict.fromkeys(geometric_deficits(k, Fraction(4 * j, res)) for j in range(res + 1)))

    best_p, best_d, best_w = Fraction(-1), None, None
    for deficits in ladders:
        for weights in simplex_grid(k, res):
            p = score(deficits, weights)
            if p > best_p:
                best_p, best_d, best_w = p, deficits, weights
    grid_best = best_p
    logger.info("grid stage: %d evaluations, best %s", evaluations, float(best_p))

    w_step = Fraction(1, res)
    d_step = Fraction(1, 2)
    history = [best_p]
    for _ in range(cfg.refinement_steps):
        moves = []
        for i, j in itertools.permutations(range(k), 2):
            if best_w[j] >= w_step:
                w = list(best_w)
                w[i] += w_step
                w[j] -= w_step
                moves.append((best_d, tuple(w)))
        if fixed_deficits is None:
            gaps = [b - a for a, b in zip(best_d, best_d[1:])]
            for g_idx, gap in enumerate(gaps):
                candidates = [gap * (1 + d_step), gap * (1 - d_step)] if gap else [d_step]
                for new_gap in candidates:
                    new_gaps = list(gaps)
                    new_gaps[g_idx] = new_gap
                    d = [Fraction(0)]
                    for g in new_gaps:
                        d.append(d[-1] + g)
                    moves.append((tuple(d), best_w))
        rng.shuffle(moves)
        improved = False
        for d, w in moves:
            p = score(d, w)
            if p > best_p:
                best_p, best_d, best_w = p, d, w
                improved = True
                break
        if not improved:
            w_step /= 2
            d_step /= 2
        history.append(best_p)

    family = _scaled_family(best_d, best_w)
    return SearchResult(family, best_p, evaluations, grid_best, history)
