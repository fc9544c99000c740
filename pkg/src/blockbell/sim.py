"""Randomized-settings block experiments and their aggregation into cycles."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .ch import (
    CH_EVENT,
    SETTINGS,
    JointDistribution,
    OutcomeCounts,
    SettingPair,
    ch_value,
    is_violation,
)
from .strategy import (
    AdaptiveType2State,
    AdaptiveType2Strategy,
    MixtureStrategy,
    SignalingType3Config,
    Strategy,
    adaptive_next,
    draw_block_state,
    make_rng,
    measure_block,
    realize_mixture_component,
    signaling_block_outcomes,
)


class CyclePolicy(enum.Enum):
    DISCARD_DUPLICATES = "discard_duplicates"
    QUEUE_PER_SETTING = "queue_per_setting"


@dataclass(frozen=True)
class ExperimentConfig:
    num_blocks: int
    trials_per_block: int
    seed: int = 0
    cycle_policy: CyclePolicy = CyclePolicy.DISCARD_DUPLICATES

    def __post_init__(self) -> None:
        if self.num_blocks <= 0:
            raise ValueError(f"num_blocks must be positive, got {self.num_blocks}")
        if self.trials_per_block <= 0:
            raise ValueError(f"trials_per_block must be positive, got {self.trials_per_block}")
        object.__setattr__(self, "cycle_policy", CyclePolicy(self.cycle_policy))


@dataclass(frozen=True)
class BlockRecord:
    index: int
    setting: SettingPair
    counts: OutcomeCounts
    component_id: int | None = None


@dataclass(frozen=True)
class CycleRecord:
    block_indices: dict[SettingPair, int]
    term_estimates: JointDistribution
    ch_estimate: Fraction
    violated: bool


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    blocks: tuple[BlockRecord, ...]
    cycles: tuple[CycleRecord, ...]

    @property
    def violation_count(self) -> int:
        return sum(c.violated for c in self.cycles)

    @property
    def cycle_count(self) -> int:
        return len(self.cycles)


def _make_cycle(slots: dict[SettingPair, BlockRecord]) -> CycleRecord:
    terms = JointDistribution(*(slots[s].counts.frequency(CH_EVENT[s]) for s in SETTINGS))
    ch = ch_value(terms)
    return CycleRecord(
        block_indices={s: slots[s].index for s in SETTINGS},
        term_estimates=terms,
        ch_estimate=ch,
        violated=is_violation(ch),
    )


def form_cycles(
    blocks: Iterable[BlockRecord],
    policy: CyclePolicy = CyclePolicy.DISCARD_DUPLICATES,
) -> list[CycleRecord]:
    """Group blocks into cycles holding one block per setting pair.

    ``DISCARD_DUPLICATES`` fills one open cycle in block order and drops
    blocks whose setting already has a slot.  ``QUEUE_PER_SETTING`` pairs
    the k-th block of every setting, so nothing is dropped but cycles may
    mix blocks far apart in time.
    """
    policy = CyclePolicy(policy)
    cycles = []
    if policy is CyclePolicy.DISCARD_DUPLICATES:
        slots: dict[SettingPair, BlockRecord] = {}
        for block in blocks:
            if block.setting in slots:
                continue
            slots[block.setting] = block
            if len(slots) == 4:
                cycles.append(_make_cycle(slots))
                slots = {}
        return cycles

    queues: dict[SettingPair, list[BlockRecord]] = {s: [] for s in SETTINGS}
    for block in blocks:
        queues[block.setting].append(block)
    for group in zip(*(queues[s] for s in SETTINGS)):
        cycles.append(_make_cycle(dict(zip(SETTINGS, group))))
    return cycles


def cycle_ch(c: CycleRecord) -> Fraction:
    return ch_value(c.term_estimates)


def violation_fraction(r: ExperimentResult) -> Fraction:
    if r.cycle_count == 0:
        raise ValueError("experiment produced no complete cycles")
    return Fraction(r.violation_count, r.cycle_count)


def _readouts(table) -> dict[SettingPair, OutcomeCounts]:
    return {s: measure_block(table, s) for s in SETTINGS}


def _draw_setting(rng: random.Random) -> SettingPair:
    return SETTINGS[rng.randrange(4)]


def run_experiment(
    cfg: ExperimentConfig,
    strategy: Strategy,
    settings: Sequence[SettingPair] | None = None,
) -> ExperimentResult:
    """Simulate ``cfg.num_blocks`` blocks against ``strategy``.

    Settings are drawn uniformly per block unless ``settings`` forces the
    sequence.  For every block the setting is drawn before the strategy
    state, so the setting stream is the same for every strategy at a given
    seed.
    """
    if settings is not None and len(settings) != cfg.num_blocks:
        raise ValueError(f"forced settings has {len(settings)} entries, expected {cfg.num_blocks}")
    n = cfg.trials_per_block
    rng = make_rng(cfg.seed)
    blocks = []

    if isinstance(strategy, MixtureStrategy):
        # Tables are deterministic, so each (component, setting) readout is fixed.
        readout = [_readouts(realize_mixture_component(d, n)) for d in strategy.distributions]
        for i in range(cfg.num_blocks):
            setting = settings[i] if settings is not None else _draw_setting(rng)
            comp = draw_block_state(strategy, rng)
            blocks.append(BlockRecord(i, setting, readout[comp][setting], comp))

    elif isinstance(strategy, AdaptiveType2Strategy):
        readout = {d: _readouts(realize_mixture_component(d, n)) for d in strategy.distributions}
        ids = {d: k for k, d in reversed(list(enumerate(strategy.distributions)))}
        state = AdaptiveType2State()
        dist, state = adaptive_next(state, None, strategy)
        for i in range(cfg.num_blocks):
            setting = settings[i] if settings is not None else _draw_setting(rng)
            blocks.append(BlockRecord(i, setting, readout[dist][setting], ids[dist]))
            dist, state = adaptive_next(state, setting, strategy)

    elif isinstance(strategy, SignalingType3Config):
        if strategy.throwaway_count >= n:
            raise ValueError(f"throwaway_count {strategy.throwaway_count} >= block length {n}")
        for i in range(cfg.num_blocks):
            setting = settings[i] if settings is not None else _draw_setting(rng)
            pairs = signaling_block_outcomes(strategy, setting.alice_choice, setting.bob_choice, n, rng)
            blocks.append(BlockRecord(i, setting, OutcomeCounts.from_pairs(pairs)))

    else:
        raise TypeError(f"unsupported strategy type {type(strategy).__name__}")

    return ExperimentResult(cfg, tuple(blocks), tuple(form_cycles(blocks, cfg.cycle_policy)))
