"""JSON/CSV formats for strategy descriptions and simulation results.

Rationals are always written as ``"num/den"`` strings.  Setting pairs are
keyed ``ab``, ``abp``, ``apb``, ``apbp`` (``p`` for prime) and joint
outcomes ``"++"``, ``"+0"``, ``"0+"``, ``"00"`` (Alice first).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .ch import (
    OUTCOME_PAIRS,
    SETTINGS,
    JointDistribution,
    Outcome,
    OutcomeCounts,
    SettingPair,
    format_rational,
    parse_rational,
)
from .sim import BlockRecord, CyclePolicy, CycleRecord, ExperimentConfig, ExperimentResult, form_cycles, violation_fraction
from .strategy import AdaptiveType2Strategy, MixtureStrategy, SignalingType3Config, Strategy

RESULTS_SCHEMA = "blockbell.results/1"
BUNDLED = ("paper-3state", "paper-4state", "adaptive-type2", "signaling-type3")


@dataclass(frozen=True)
class StrategyFile:
    strategy: Strategy
    block_length: int


def _pair_key(pair) -> str:
    return pair[0].value + pair[1].value


def _parse_pair(key: str):
    if len(key) != 2:
        raise ValueError(f"bad outcome key {key!r}")
    return (Outcome(key[0]), Outcome(key[1]))


def _dist(items) -> JointDistribution:
    if not isinstance(items, list) or len(items) != 4:
        raise ValueError(f"distribution must be a list of four 'num/den' strings, got {items!r}")
    return JointDistribution.from_strings(items)


def strategy_from_dict(data: dict[str, Any]) -> StrategyFile:
    try:
        kind = data["type"]
        block_length = int(data["block_length"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"strategy file needs 'type' and 'block_length': {exc}") from exc
    if block_length <= 0:
        raise ValueError("block_length must be positive")

    if kind == "mixture":
        comps = data.get("components")
        if not comps:
            raise ValueError("mixture strategy needs a non-empty 'components' list")
        strategy = MixtureStrategy(
            tuple((_dist(c["dist"]), parse_rational(c["weight"])) for c in comps)
        )
    elif kind == "adaptive_type2":
        defaults = AdaptiveType2Strategy()
        strategy = AdaptiveType2Strategy(
            *(
                _dist(data[name]) if name in data else getattr(defaults, name)
                for name in ("probe", "commit_if_ab_missing", "commit_otherwise")
            )
        )
    elif kind == "signaling_type3":
        behavior = {}
        for setting in SETTINGS:
            raw = data["target_behavior"][setting.value]
            behavior[setting] = {_parse_pair(k): parse_rational(v) for k, v in raw.items()}
        strategy = SignalingType3Config(behavior, int(data.get("throwaway_count", 0)))
    else:
        raise ValueError(f"unknown strategy type {kind!r}")
    return StrategyFile(strategy, block_length)


def strategy_to_dict(sf: StrategyFile) -> dict[str, Any]:
    s = sf.strategy
    if isinstance(s, MixtureStrategy):
        body = {
            "type": "mixture",
            "components": [{"dist": d.to_strings(), "weight": format_rational(w)} for d, w in s.components],
        }
    elif isinstance(s, AdaptiveType2Strategy):
        body = {
            "type": "adaptive_type2",
            "probe": s.probe.to_strings(),
            "commit_if_ab_missing": s.commit_if_ab_missing.to_strings(),
            "commit_otherwise": s.commit_otherwise.to_strings(),
        }
    elif isinstance(s, SignalingType3Config):
        body = {
            "type": "signaling_type3",
            "throwaway_count": s.throwaway_count,
            "target_behavior": {
                setting.value: {
                    _pair_key(p): format_rational(Fraction(s.target_behavior[setting].get(p, 0)))
                    for p in OUTCOME_PAIRS
                }
                for setting in SETTINGS
            },
        }
    else:
        raise TypeError(f"cannot serialize {type(s).__name__}")
    return {"type": body.pop("type"), "block_length": sf.block_length, **body}


def load_strategy(source: str | Path) -> StrategyFile:
    """Load a strategy file by path, or a bundled one by name (e.g. ``paper-3state``)."""
    path = Path(source)
    if path.exists():
        text = path.read_text()
    else:
        name = str(source).removesuffix(".json")
        if name not in BUNDLED:
            raise ValueError(f"no strategy file {source!r} (bundled: {', '.join(BUNDLED)})")
        text = resources.files("blockbell.data").joinpath(f"{name}.json").read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"strategy file {source!r} is not valid JSON: {exc}") from exc
    return strategy_from_dict(data)


def _counts_to_dict(c: OutcomeCounts) -> dict[str, int]:
    return {_pair_key(p): n for p, n in c.as_dict().items()}


def results_to_dict(result: ExperimentResult, strategy: StrategyFile | None = None) -> dict[str, Any]:
    cfg = result.config
    out: dict[str, Any] = {
        "schema": RESULTS_SCHEMA,
        "config": {
            "num_blocks": cfg.num_blocks,
            "trials_per_block": cfg.trials_per_block,
            "seed": cfg.seed,
            "cycle_policy": cfg.cycle_policy.value,
        },
    }
    if strategy is not None:
        out["strategy"] = strategy_to_dict(strategy)
    out["cycle_count"] = result.cycle_count
    out["violation_count"] = result.violation_count
    if result.cycle_count:
        frac = violation_fraction(result)
        out["violation_fraction"] = format_rational(frac)
        out["violation_fraction_decimal"] = float(frac)
    else:
        out["violation_fraction"] = None
        out["violation_fraction_decimal"] = None
    out["cycles"] = [
        {
            "index": i,
            "blocks": {s.value: c.block_indices[s] for s in SETTINGS},
            "terms": c.term_estimates.to_strings(),
            "ch": format_rational(c.ch_estimate),
            "violated": c.violated,
        }
        for i, c in enumerate(result.cycles)
    ]
    out["blocks"] = [
        {
            "index": b.index,
            "setting": b.setting.value,
            "counts": _counts_to_dict(b.counts),
            "component": b.component_id,
        }
        for b in result.blocks
    ]
    return out


def results_from_dict(data: dict[str, Any]) -> ExperimentResult:
    """Rebuild an :class:`ExperimentResult` and check the stored cycles against it."""
    if data.get("schema") != RESULTS_SCHEMA:
        raise ValueError(f"unexpected schema {data.get('schema')!r}")
    c = data["config"]
    cfg = ExperimentConfig(c["num_blocks"], c["trials_per_block"], c["seed"], CyclePolicy(c["cycle_policy"]))
    blocks = tuple(
        BlockRecord(
            b["index"],
            SettingPair(b["setting"]),
            OutcomeCounts.from_mapping({_parse_pair(k): v for k, v in b["counts"].items()}),
            b["component"],
        )
        for b in data["blocks"]
    )
    cycles = tuple(
        CycleRecord(
            {SettingPair(k): v for k, v in cy["blocks"].items()},
            _dist(cy["terms"]),
            parse_rational(cy["ch"]),
            bool(cy["violated"]),
        )
        for cy in data["cycles"]
    )
    if list(cycles) != form_cycles(blocks, cfg.cycle_policy):
        raise ValueError("stored cycles do not match the stored blocks")
    result = ExperimentResult(cfg, blocks, cycles)
    if result.violation_count != data["violation_count"] or result.cycle_count != data["cycle_count"]:
        raise ValueError("stored violation/cycle counts are inconsistent")
    return result


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


CYCLE_CSV_FIELDS = ("cycle", "ab", "abp", "apb", "apbp", "ch_num", "ch_den", "violated")


def cycles_to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CYCLE_CSV_FIELDS)
    for i, c in enumerate(result.cycles):
        writer.writerow(
            [i, *(c.block_indices[s] for s in SETTINGS), c.ch_estimate.numerator, c.ch_estimate.denominator, int(c.violated)]
        )
    return buf.getvalue()


def cycles_from_csv(text: str) -> list[dict[str, Any]]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CYCLE_CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for row in reader:
        rows.append(
            {
                "cycle": int(row["cycle"]),
                "blocks": {s: int(row[s.value]) for s in SETTINGS},
                "ch": Fraction(int(row["ch_num"]), int(row["ch_den"])),
                "violated": row["violated"] == "1",
            }
        )
    return rows
