"""Local hidden variable strategies for block-measurement experiments.

A strategy decides, block by block, which deterministic *state table* the
source emits.  Static mixtures draw a table independently per block; the
adaptive strategy uses the settings of earlier blocks (possible when whole
blocks are spacelike separated but the experiment is not); the signaling
strategy waits a few trials for the remote setting and then samples any
target behaviour it likes.

Randomness comes from :func:`make_rng`, a :class:`random.Random`
(Mersenne Twister MT19937) seeded with an integer.  Every draw is an exact
integer draw via ``randrange`` so runs are bit-reproducible across
platforms.
"""

from __future__ import annotations

import enum
import functools
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .ch import (
    CH_EVENT,
    OUTCOME_PAIRS,
    PLUS,
    SETTINGS,
    ZERO,
    Choice,
    JointDistribution,
    Outcome,
    OutcomeCounts,
    OutcomePair,
    SettingPair,
    ch_value,
    satisfies_ch,
)


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


@dataclass(frozen=True)
class TrialAssignment:
    """Predetermined outcomes of one trial for each of the four local settings."""

    out_a: Outcome
    out_ap: Outcome
    out_b: Outcome
    out_bp: Outcome

    @classmethod
    def parse(cls, text: str) -> TrialAssignment:
        """``"++0+"`` -> outcomes for (a, a', b, b')."""
        if len(text) != 4:
            raise ValueError(f"need four outcome symbols, got {text!r}")
        return cls(*(Outcome(ch) for ch in text))

    def respond(self, setting: SettingPair) -> OutcomePair:
        alice = self.out_ap if setting.alice_choice is Choice.PRIMED else self.out_a
        bob = self.out_bp if setting.bob_choice is Choice.PRIMED else self.out_b
        return (alice, bob)

    def __str__(self) -> str:
        return "".join(o.value for o in (self.out_a, self.out_ap, self.out_b, self.out_bp))


@dataclass(frozen=True)
class StateTable:
    trials: tuple[TrialAssignment, ...]

    def __post_init__(self) -> None:
        if not self.trials:
            raise ValueError("a state table needs at least one trial")

    @property
    def length(self) -> int:
        return len(self.trials)

    def __len__(self) -> int:
        return len(self.trials)


@dataclass(frozen=True)
class CHCountSpec:
    """Target per-block counts of the four CH events."""

    c_pp_ab: int
    c_p0_abp: int
    c_0p_apb: int
    c_pp_apbp: int
    n: int

    def __post_init__(self) -> None:
        counts = (self.c_pp_ab, self.c_p0_abp, self.c_0p_apb, self.c_pp_apbp)
        if any(not isinstance(c, int) or c < 0 for c in counts):
            raise ValueError(f"counts must be non-negative integers: {counts}")
        if self.n <= 0:
            raise ValueError("block length must be positive")
        negative = self.c_p0_abp + self.c_0p_apb + self.c_pp_apbp
        if self.c_pp_ab > self.n or negative > self.n:
            raise ValueError(f"counts exceed block length {self.n}: {counts}")
        if self.c_pp_ab > negative:
            raise ValueError(
                f"infeasible: {self.c_pp_ab} ++|ab counts but only {negative} balancing counts"
            )


# Trial types used by the constructive builder, in emission order.
T_PP_P0 = TrialAssignment.parse("+++0")  # ++|ab and +0|ab'
T_PP_0P = TrialAssignment.parse("+0++")  # ++|ab and 0+|a'b
T_PP_PP = TrialAssignment.parse("++++")  # ++|ab and ++|a'b'
T_P0 = TrialAssignment.parse("++00")  # +0|ab' only
T_0P = TrialAssignment.parse("00++")  # 0+|a'b only
T_PP = TrialAssignment.parse("0+0+")  # ++|a'b' only
T_INERT = TrialAssignment.parse("0000")


def build_state_table(spec: CHCountSpec) -> StateTable:
    """Deterministic table whose measured CH counts match ``spec`` exactly.

    Each ++|ab trial is paired with one negative-term event, first +0|ab',
    then 0+|a'b, then ++|a'b'; leftover negative counts get single-event
    padding trials and the rest of the block is all-zero.  The (9, 3, 2, 4)
    spec on 12 trials gives the classic 12-trial illustration verbatim.
    """
    x1 = min(spec.c_p0_abp, spec.c_pp_ab)
    remaining = spec.c_pp_ab - x1
    x2 = min(spec.c_0p_apb, remaining)
    x3 = remaining - x2
    plan = [
        (T_PP_P0, x1),
        (T_PP_0P, x2),
        (T_PP_PP, x3),
        (T_P0, spec.c_p0_abp - x1),
        (T_0P, spec.c_0p_apb - x2),
        (T_PP, spec.c_pp_apbp - x3),
    ]
    trials: list[TrialAssignment] = []
    for kind, count in plan:
        trials.extend([kind] * count)
    trials.extend([T_INERT] * (spec.n - len(trials)))
    return StateTable(tuple(trials))


def measure_block(t: StateTable, s: SettingPair) -> OutcomeCounts:
    return OutcomeCounts.from_pairs(trial.respond(s) for trial in t.trials)


def table_distribution(t: StateTable) -> JointDistribution:
    terms = []
    for setting in SETTINGS:
        counts = measure_block(t, setting)
        terms.append(counts.frequency(CH_EVENT[setting]))
    return JointDistribution(*terms)


@functools.lru_cache(maxsize=256)
def realize_mixture_component(d: JointDistribution, n: int) -> StateTable:
    """State table of length ``n`` whose empirical distribution is exactly ``d``."""
    if n <= 0:
        raise ValueError("block length must be positive")
    if not satisfies_ch(d):
        raise ValueError(f"distribution violates CH (value {ch_value(d)}); no local table exists")
    counts = []
    for term in d.terms():
        scaled = term * n
        if scaled.denominator != 1:
            raise ValueError(f"block length {n} is not a multiple of denominator {term.denominator}")
        counts.append(int(scaled))
    return build_state_table(CHCountSpec(*counts, n=n))


@dataclass(frozen=True)
class MixtureStrategy:
    """A source that picks component ``i`` with probability ``weight_i`` per block."""

    components: tuple[tuple[JointDistribution, Fraction], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("mixture needs at least one component")
        normalized = []
        for dist, weight in self.components:
            weight = Fraction(weight)
            if not 0 < weight <= 1:
                raise ValueError(f"weight {weight} outside (0, 1]")
            if not satisfies_ch(dist):
                raise ValueError(f"component {dist} violates CH; not a local strategy")
            normalized.append((dist, weight))
        total = sum(w for _, w in normalized)
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "components", tuple(normalized))

    @classmethod
    def of(cls, *pairs: tuple[JointDistribution, Fraction | int | str]) -> MixtureStrategy:
        return cls(tuple((d, Fraction(w)) for d, w in pairs))

    @property
    def distributions(self) -> tuple[JointDistribution, ...]:
        return tuple(d for d, _ in self.components)

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(w for _, w in self.components)

    def __len__(self) -> int:
        return len(self.components)

    @functools.cached_property
    def _cumulative(self) -> tuple[list[int], int]:
        return _integer_cumulative(self.weights)


def _draw_index(cumulative: Sequence[int], total: int, rng: random.Random) -> int:
    r = rng.randrange(total)
    for i, edge in enumerate(cumulative):
        if r < edge:
            return i
    raise AssertionError("cumulative weights do not cover the draw range")


def _integer_cumulative(weights: Sequence[Fraction]) -> tuple[list[int], int]:
    denom = math.lcm(*(w.denominator for w in weights))
    cumulative, acc = [], 0
    for w in weights:
        acc += int(w * denom)
        cumulative.append(acc)
    return cumulative, denom


def draw_block_state(m: MixtureStrategy, rng: random.Random) -> int:
    """Index of the component emitted for the next block (exact integer draw)."""
    cumulative, denom = m._cumulative
    return _draw_index(cumulative, denom, rng)


# Three saturating states whose 1/2, 1/4, 1/4 mixture violates CH in most cycles.
STATE_HIGH = JointDistribution.of("24/72", "8/72", "8/72", "8/72")
STATE_MID = JointDistribution.of("18/72", "6/72", "6/72", "6/72")
STATE_LOW = JointDistribution.of("3/72", "1/72", "1/72", "1/72")
THREE_STATE_MIXTURE = MixtureStrategy.of(
    (STATE_HIGH, Fraction(1, 2)),
    (STATE_MID, Fraction(1, 4)),
    (STATE_LOW, Fraction(1, 4)),
)


class Phase(enum.Enum):
    PROBING = "probing"
    COMMITTED = "committed"


@dataclass(frozen=True)
class AdaptiveType2Strategy:
    """Distributions used by the history-aware strategy."""

    probe: JointDistribution = STATE_MID
    commit_if_ab_missing: JointDistribution = STATE_HIGH
    commit_otherwise: JointDistribution = STATE_LOW

    def __post_init__(self) -> None:
        for d in (self.probe, self.commit_if_ab_missing, self.commit_otherwise):
            if not satisfies_ch(d):
                raise ValueError(f"{d} violates CH; not a local strategy")

    @property
    def distributions(self) -> tuple[JointDistribution, JointDistribution, JointDistribution]:
        return (self.probe, self.commit_if_ab_missing, self.commit_otherwise)


DEFAULT_ADAPTIVE = AdaptiveType2Strategy()


@dataclass(frozen=True)
class AdaptiveType2State:
    settings_seen: frozenset[SettingPair] = frozenset()
    phase: Phase = Phase.PROBING
    committed_distribution: JointDistribution | None = None

    def __post_init__(self) -> None:
        if self.phase is Phase.COMMITTED:
            if len(self.settings_seen) < 3 or self.committed_distribution is None:
                raise ValueError("committed state needs three settings seen and a distribution")

    @property
    def missing(self) -> SettingPair | None:
        if len(self.settings_seen) != 3:
            return None
        (rest,) = set(SETTINGS) - self.settings_seen
        return rest


def adaptive_next(
    state: AdaptiveType2State,
    just_measured: SettingPair | None,
    strategy: AdaptiveType2Strategy = DEFAULT_ADAPTIVE,
) -> tuple[JointDistribution, AdaptiveType2State]:
    """Distribution to send for the next block, given the setting just measured.

    Pass ``just_measured=None`` to read the distribution for the current
    state without recording a block.  While probing the strategy sends the
    probe state; after three distinct settings it commits to the high state
    if ab is the one still missing and to the low state otherwise.  When the
    missing setting is finally measured the cycle is complete and the state
    goes back to probing.
    """
    if just_measured is None:
        if state.phase is Phase.COMMITTED:
            return state.committed_distribution, state
        return strategy.probe, state

    if state.phase is Phase.COMMITTED:
        if just_measured is state.missing:
            return strategy.probe, AdaptiveType2State()
        return state.committed_distribution, state

    seen = state.settings_seen | {just_measured}
    if len(seen) < 3:
        return strategy.probe, replace(state, settings_seen=seen)
    (missing,) = set(SETTINGS) - seen
    chosen = strategy.commit_if_ab_missing if missing is SettingPair.AB else strategy.commit_otherwise
    return chosen, AdaptiveType2State(seen, Phase.COMMITTED, chosen)


@dataclass(frozen=True)
class SignalingType3Config:
    """Within-block signaling: idle ``throwaway_count`` trials, then sample freely.

    ``target_behavior`` maps every setting pair to a full distribution over
    the four joint outcomes.
    """

    target_behavior: Mapping[SettingPair, Mapping[OutcomePair, Fraction]]
    throwaway_count: int = 0
    _tables: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.throwaway_count < 0:
            raise ValueError("throwaway_count must be non-negative")
        if set(self.target_behavior) != set(SETTINGS):
            raise ValueError("target_behavior must cover all four setting pairs")
        tables = {}
        for setting, dist in self.target_behavior.items():
            dist = {pair: Fraction(dist.get(pair, 0)) for pair in OUTCOME_PAIRS}
            if any(p < 0 for p in dist.values()):
                raise ValueError(f"negative probability for {setting}")
            if sum(dist.values()) != 1:
                raise ValueError(f"distribution for {setting} does not sum to 1")
            tables[setting] = _integer_cumulative([dist[p] for p in OUTCOME_PAIRS])
        object.__setattr__(self, "_tables", tables)

    def ch_target(self) -> Fraction:
        """CH value the behaviour would produce with no throwaway trials."""
        return ch_value(
            JointDistribution(
                *(Fraction(self.target_behavior[s].get(CH_EVENT[s], 0)) for s in SETTINGS)
            )
        )


def signaling_block_outcomes(
    cfg: SignalingType3Config,
    alice_setting: Choice,
    bob_setting: Choice,
    n: int,
    rng: random.Random,
) -> list[OutcomePair]:
    if cfg.throwaway_count >= n:
        raise ValueError(f"throwaway_count {cfg.throwaway_count} leaves no trials in a block of {n}")
    cumulative, denom = cfg._tables[SettingPair.from_choices(alice_setting, bob_setting)]
    out: list[OutcomePair] = [(ZERO, ZERO)] * cfg.throwaway_count
    out.extend(OUTCOME_PAIRS[_draw_index(cumulative, denom, rng)] for _ in range(n - cfg.throwaway_count))
    return out


def pr_box_behavior() -> dict[SettingPair, dict[OutcomePair, Fraction]]:
    """A signaling-only behaviour with CH = 1: ++ always, except +0 on a'b'."""
    one = Fraction(1)
    behavior = {s: {(PLUS, PLUS): one} for s in SETTINGS}
    behavior[SettingPair.APBP] = {(PLUS, ZERO): one}
    return behavior


Strategy = MixtureStrategy | AdaptiveType2Strategy | SignalingType3Config
