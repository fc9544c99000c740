"""Light-travel arithmetic for the three grades of spacelike separation.

Type 1: every event at one station is spacelike separated from every event
at the other (distance covers the whole run).  Type 2: each block is
spacelike separated from the concurrent block at the other station.
Type 3: only simultaneous trials are spacelike separated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact by definition of the metre
LIGHT_MINUTE = SPEED_OF_LIGHT * 60
LIGHT_SECOND = SPEED_OF_LIGHT


class SeparationType(enum.IntEnum):
    NONE_ACHIEVED = 0
    TYPE3 = 1
    TYPE2 = 2
    TYPE1 = 3

    @property
    def label(self) -> str:
        return {0: "none", 1: "Type 3", 2: "Type 2", 3: "Type 1"}[self.value]


@dataclass(frozen=True)
class SeparationScenario:
    distance: float
    experiment_duration: float
    block_duration: float
    trial_duration: float

    def __post_init__(self) -> None:
        if self.distance < 0:
            raise ValueError("distance must be non-negative")
        if min(self.experiment_duration, self.block_duration, self.trial_duration) <= 0:
            raise ValueError("durations must be positive")
        if not self.trial_duration <= self.block_duration <= self.experiment_duration:
            raise ValueError("need trial_duration <= block_duration <= experiment_duration")

    def thresholds(self) -> dict[SeparationType, float]:
        return {
            SeparationType.TYPE1: required_distance(self.experiment_duration),
            SeparationType.TYPE2: required_distance(self.block_duration),
            SeparationType.TYPE3: required_distance(self.trial_duration),
        }


def required_distance(duration: float) -> float:
    """Distance light covers in ``duration`` seconds."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    return SPEED_OF_LIGHT * duration


def classify(s: SeparationScenario) -> SeparationType:
    # Thresholds are inclusive: reaching the light distance counts.
    for kind, needed in s.thresholds().items():
        if s.distance >= needed:
            return kind
    return SeparationType.NONE_ACHIEVED


def throwaway_trials_needed(distance: float, trial_period: float) -> int:
    """Trials that start before a setting signal from ``distance`` away can arrive."""
    if distance < 0 or trial_period <= 0:
        raise ValueError("need distance >= 0 and trial_period > 0")
    periods = distance / SPEED_OF_LIGHT / trial_period
    # Absorb float round-off when the delay is an exact multiple of the period.
    return math.ceil(periods - 1e-9)
