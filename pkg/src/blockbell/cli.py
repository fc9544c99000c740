"""Command-line entry point.

Examples::

    blockbell exact paper-3state
    blockbell --seed 7 --out run1 simulate paper-3state --blocks 10000
    blockbell analyze 394 650 1/2
    blockbell optimize --components 4
    blockbell separation --distance-km 12 --experiment-minutes 75 --block-seconds 1 --trial-seconds 4e-5

Exit codes: 0 success, 2 validation error, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .ch import format_rational, parse_rational
from .exact import binomial_tail_p, compare_mc_exact, exact_report
from .optimizer import SearchConfig, optimize_deficit_family
from .schema import StrategyFile, cycles_to_csv, dump_json, load_strategy, results_to_dict
from .separation import (
    SeparationScenario,
    SeparationType,
    classify,
    required_distance,
    throwaway_trials_needed,
)
from .sim import CyclePolicy, ExperimentConfig, run_experiment
from .strategy import MixtureStrategy

logger = logging.getLogger("blockbell")

EXIT_OK, EXIT_INTERNAL, EXIT_VALIDATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=default(0), help="random seed (default 0)")
    p.add_argument("--out", type=Path, default=default(None), help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default=default("json"), help="stdout report format")
    p.add_argument("-v", "--verbose", action="store_true", default=default(False))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockbell", description="Block-measurement Bell test simulator and exact analysis")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="run a seeded block experiment")
    p.add_argument("strategy", help="strategy JSON path or bundled name")
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--trials", type=int, default=None, help="trials per block (default: strategy block_length)")
    p.add_argument("--cycle-policy", choices=[c.value for c in CyclePolicy], default=CyclePolicy.DISCARD_DUPLICATES.value)

    p = sub.add_parser("exact", parents=[common], help="exact per-cycle violation probability of a mixture")
    p.add_argument("strategy")

    p = sub.add_parser("optimize", parents=[common], help="search deficit families for high violation rates")
    p.add_argument("--components", "-k", type=int, default=4)
    p.add_argument("--grid", type=int, default=SearchConfig.grid_resolution)
    p.add_argument("--steps", type=int, default=SearchConfig.refinement_steps)

    p = sub.add_parser("analyze", parents=[common], help="one-sided binomial p-value for a cycle count")
    p.add_argument("violations", type=int)
    p.add_argument("cycles", type=int)
    p.add_argument("null_p", type=_rational, nargs="?", default=Fraction(1, 2))

    p = sub.add_parser("separation", parents=[common], help="light-travel thresholds for separation types")
    dist = p.add_mutually_exclusive_group()
    dist.add_argument("--distance", type=float, help="metres")
    dist.add_argument("--distance-km", type=float)
    exp = p.add_mutually_exclusive_group()
    exp.add_argument("--experiment-seconds", type=float)
    exp.add_argument("--experiment-minutes", type=float)
    blk = p.add_mutually_exclusive_group()
    blk.add_argument("--block-seconds", type=float)
    blk.add_argument("--block-minutes", type=float)
    p.add_argument("--trial-seconds", type=float, default=4e-5)
    return parser


def _emit(report: dict[str, Any], fmt: str, rows: list[dict[str, Any]] | None = None) -> str:
    if fmt == "json":
        return dump_json(report)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(rows[0].keys())
        writer.writerows(r.values() for r in rows)
    else:
        writer.writerow(("key", "value"))
        for k, v in report.items():
            writer.writerow((k, json.dumps(v) if isinstance(v, (dict, list)) else v))
    return buf.getvalue()


def _write_outputs(args, config: dict[str, Any], files: dict[str, str]) -> None:
    """Write ``files`` plus a manifest into ``args.out`` (if given)."""
    if args.out is None:
        return
    args.out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (args.out / name).write_text(text)
    manifest = {
        "subcommand": args.command,
        "config": config,
        "seed": args.seed,
        "version": __version__,
        "outputs": sorted(files),
    }
    (args.out / "manifest.json").write_text(dump_json(manifest))


def cmd_simulate(args) -> dict[str, Any]:
    sf = load_strategy(args.strategy)
    trials = args.trials if args.trials is not None else sf.block_length
    cfg = ExperimentConfig(args.blocks, trials, args.seed, CyclePolicy(args.cycle_policy))
    result = run_experiment(cfg, sf.strategy)
    data = results_to_dict(result, StrategyFile(sf.strategy, trials))
    if args.out is None:
        args.out = Path("blockbell-out")
    config = {"strategy": str(args.strategy), **data["config"]}
    _write_outputs(args, config, {"results.json": dump_json(data), "cycles.csv": cycles_to_csv(result)})
    report = {k: data[k] for k in ("cycle_count", "violation_count", "violation_fraction", "violation_fraction_decimal")}
    if isinstance(sf.strategy, MixtureStrategy) and result.cycle_count:
        cmp = compare_mc_exact(result, sf.strategy)
        report.update(exact_probability=format_rational(cmp.exact), z=cmp.z)
    if result.cycles:
        report["first_cycle_violated"] = result.cycles[0].violated
    report["out"] = str(args.out)
    return report


def cmd_exact(args) -> dict[str, Any]:
    sf = load_strategy(args.strategy)
    if not isinstance(sf.strategy, MixtureStrategy):
        raise ValueError("exact analysis needs a static mixture strategy")
    rep = exact_report(sf.strategy)
    report = {
        "violation_probability": format_rational(rep.violation_probability),
        "violation_probability_decimal": float(rep.violation_probability),
        "expected_ch": format_rational(rep.expected_ch),
        "assignment_count": rep.assignment_count,
    }
    _write_outputs(args, {"strategy": str(args.strategy)}, {"exact.json": dump_json(report)})
    return report


def cmd_optimize(args) -> dict[str, Any]:
    cfg = SearchConfig(args.grid, args.steps, args.seed)
    res = optimize_deficit_family(args.components, cfg)
    fam = res.family
    report = {
        "components": fam.k,
        "weights": [format_rational(w) for w in fam.weights],
        "deficits": [format_rational(d) for d in fam.deficits],
        "rho": format_rational(fam.rho),
        "eps": format_rational(fam.eps_unit),
        "probability": format_rational(res.probability),
        "probability_decimal": float(res.probability),
        "grid_best_decimal": float(res.grid_best),
        "evaluations": res.evaluations,
    }
    config = {"components": args.components, "grid_resolution": args.grid, "refinement_steps": args.steps}
    _write_outputs(args, config, {"optimize.json": dump_json(report)})
    return report


def cmd_analyze(args) -> dict[str, Any]:
    p = binomial_tail_p(args.violations, args.cycles, args.null_p)
    report = {
        "violations": args.violations,
        "cycles": args.cycles,
        "null_p": format_rational(args.null_p),
        "observed_fraction": args.violations / args.cycles if args.cycles else None,
        "p_value": p,
    }
    config = {"violations": args.violations, "cycles": args.cycles, "null_p": report["null_p"]}
    _write_outputs(args, config, {"analyze.json": dump_json(report)})
    return report


def _pick(*values, default):
    for v in values:
        if v is not None:
            return v
    return default


def cmd_separation(args) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    distance = _pick(args.distance, None if args.distance_km is None else args.distance_km * 1e3, default=0.0)
    experiment = _pick(
        args.experiment_seconds,
        None if args.experiment_minutes is None else args.experiment_minutes * 60,
        default=75 * 60.0,
    )
    block = _pick(args.block_seconds, None if args.block_minutes is None else args.block_minutes * 60, default=1.0)
    scenario = SeparationScenario(distance, experiment, block, args.trial_seconds)
    kind = classify(scenario)
    rows = [
        {"type": t.label, "duration_s": d, "threshold_m": required_distance(d), "achieved": distance >= required_distance(d)}
        for t, d in (
            (SeparationType.TYPE1, experiment),
            (SeparationType.TYPE2, block),
            (SeparationType.TYPE3, args.trial_seconds),
        )
    ]
    report = {
        "distance_m": distance,
        "classification": kind.label,
        "thresholds": rows,
        "throwaway_trials": throwaway_trials_needed(distance, args.trial_seconds),
    }
    config = {"distance_m": distance, "experiment_s": experiment, "block_s": block, "trial_s": args.trial_seconds}
    _write_outputs(args, config, {"separation.json": dump_json(report)})
    return report, rows


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        rows = None
        if args.command == "separation":
            report, rows = cmd_separation(args)
        else:
            report = {
                "simulate": cmd_simulate,
                "exact": cmd_exact,
                "optimize": cmd_optimize,
                "analyze": cmd_analyze,
            }[args.command](args)
    except ValueError as exc:
        print(f"blockbell: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL
    sys.stdout.write(_emit(report, args.format, rows))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
