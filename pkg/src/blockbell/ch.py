"""Settings, outcomes and the Clauser-Horne statistic.

All probabilities are :class:`fractions.Fraction` so that saturation
(a CH value of exactly zero) is never blurred by rounding.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class Side(enum.Enum):
    ALICE = "alice"
    BOB = "bob"


class Choice(enum.Enum):
    UNPRIMED = 0
    PRIMED = 1


@dataclass(frozen=True)
class LocalSetting:
    side: Side
    choice: Choice

    def __str__(self) -> str:
        letter = "a" if self.side is Side.ALICE else "b"
        return letter + ("'" if self.choice is Choice.PRIMED else "")


class SettingPair(enum.Enum):
    """The four joint configurations, declared in serialization order."""

    AB = "ab"
    ABP = "abp"
    APB = "apb"
    APBP = "apbp"

    @property
    def alice_choice(self) -> Choice:
        return Choice.PRIMED if self in (SettingPair.APB, SettingPair.APBP) else Choice.UNPRIMED

    @property
    def bob_choice(self) -> Choice:
        return Choice.PRIMED if self in (SettingPair.ABP, SettingPair.APBP) else Choice.UNPRIMED

    @property
    def alice(self) -> LocalSetting:
        return LocalSetting(Side.ALICE, self.alice_choice)

    @property
    def bob(self) -> LocalSetting:
        return LocalSetting(Side.BOB, self.bob_choice)

    @classmethod
    def from_choices(cls, alice: Choice, bob: Choice) -> SettingPair:
        for pair in cls:
            if pair.alice_choice is alice and pair.bob_choice is bob:
                return pair
        raise AssertionError("unreachable")

    def __str__(self) -> str:
        return f"{self.alice}{self.bob}"


SETTINGS: tuple[SettingPair, ...] = tuple(SettingPair)


class Outcome(enum.Enum):
    PLUS = "+"
    ZERO = "0"


PLUS = Outcome.PLUS
ZERO = Outcome.ZERO

OutcomePair = tuple[Outcome, Outcome]
OUTCOME_PAIRS: tuple[OutcomePair, ...] = ((PLUS, PLUS), (PLUS, ZERO), (ZERO, PLUS), (ZERO, ZERO))

# The outcome pair that each setting contributes to the CH statistic.
CH_EVENT: dict[SettingPair, OutcomePair] = {
    SettingPair.AB: (PLUS, PLUS),
    SettingPair.ABP: (PLUS, ZERO),
    SettingPair.APB: (ZERO, PLUS),
    SettingPair.APBP: (PLUS, PLUS),
}


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse a ``"num/den"`` string (or an integer) into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a 'num/den' string, got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class JointDistribution:
    """The four conditional probabilities entering the CH inequality."""

    p_pp_ab: Fraction
    p_p0_abp: Fraction
    p_0p_apb: Fraction
    p_pp_apbp: Fraction

    def __post_init__(self) -> None:
        for name in ("p_pp_ab", "p_p0_abp", "p_0p_apb", "p_pp_apbp"):
            value = getattr(self, name)
            if isinstance(value, float):
                raise TypeError(f"{name} must be an exact rational, not float")
            value = Fraction(value)
            if not 0 <= value <= 1:
                raise ValueError(f"{name}={value} outside [0, 1]")
            object.__setattr__(self, name, value)

    @classmethod
    def of(cls, *terms: Fraction | int | str) -> JointDistribution:
        """Build from four terms given in the order (ab, ab', a'b, a'b')."""
        if len(terms) != 4:
            raise ValueError(f"expected 4 terms, got {len(terms)}")
        return cls(*(parse_rational(t) for t in terms))

    def terms(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.p_pp_ab, self.p_p0_abp, self.p_0p_apb, self.p_pp_apbp)

    def term(self, setting: SettingPair) -> Fraction:
        return self.terms()[SETTINGS.index(setting)]

    @property
    def negative_mass(self) -> Fraction:
        return self.p_p0_abp + self.p_0p_apb + self.p_pp_apbp

    def to_strings(self) -> list[str]:
        return [format_rational(t) for t in self.terms()]

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> JointDistribution:
        return cls.of(*items)


def ch_value(d: JointDistribution) -> Fraction:
    """P(++|ab) - P(+0|ab') - P(0+|a'b) - P(++|a'b')."""
    return d.p_pp_ab - d.p_p0_abp - d.p_0p_apb - d.p_pp_apbp


def satisfies_ch(d: JointDistribution) -> bool:
    return ch_value(d) <= 0


def is_saturating(d: JointDistribution) -> bool:
    return ch_value(d) == 0


def is_violation(ch: Fraction) -> bool:
    # A CH value of exactly zero is not a violation.
    return ch > 0


def mix(components: Iterable[tuple[JointDistribution, Fraction]]) -> JointDistribution:
    """Weighted termwise average of distributions (weights must sum to 1)."""
    components = list(components)
    total = sum((Fraction(w) for _, w in components), Fraction(0))
    if total != 1:
        raise ValueError(f"weights sum to {total}, not 1")
    acc = [Fraction(0)] * 4
    for dist, w in components:
        for i, t in enumerate(dist.terms()):
            acc[i] += Fraction(w) * t
    return JointDistribution(*acc)


@dataclass(frozen=True)
class OutcomeCounts:
    """Joint outcome counts for one block measured in one setting."""

    pp: int
    p0: int
    zp: int
    zz: int

    def __post_init__(self) -> None:
        if min(self.pp, self.p0, self.zp, self.zz) < 0:
            raise ValueError("counts must be non-negative")
        if self.block_length <= 0:
            raise ValueError("block_length must be positive")

    @property
    def block_length(self) -> int:
        return self.pp + self.p0 + self.zp + self.zz

    def __getitem__(self, pair: OutcomePair) -> int:
        return self.as_dict()[pair]

    def as_dict(self) -> dict[OutcomePair, int]:
        return dict(zip(OUTCOME_PAIRS, (self.pp, self.p0, self.zp, self.zz)))

    def nonzero(self) -> dict[str, int]:
        """Compact ``{"++": 9, "00": 3}`` view with zero entries dropped."""
        return {a.value + b.value: n for (a, b), n in self.as_dict().items() if n}

    def frequency(self, pair: OutcomePair) -> Fraction:
        return Fraction(self[pair], self.block_length)

    @classmethod
    def from_mapping(cls, counts: dict[OutcomePair, int]) -> OutcomeCounts:
        unknown = set(counts) - set(OUTCOME_PAIRS)
        if unknown:
            raise ValueError(f"unknown outcome pairs: {unknown}")
        return cls(*(counts.get(p, 0) for p in OUTCOME_PAIRS))

    @classmethod
    def from_pairs(cls, pairs: Iterable[OutcomePair]) -> OutcomeCounts:
        tally = dict.fromkeys(OUTCOME_PAIRS, 0)
        for pair in pairs:
            tally[pair] += 1
        return cls.from_mapping(tally)
