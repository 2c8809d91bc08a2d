"""Command-line entry point: run-clean, attack, sweep, report.

Configuration is a declarative JSON file plus flag overrides; the
``LIGHTATTACK_OUTPUT_DIR`` environment variable overrides the output
directory (and nothing else). Exit codes: 0 success, 2 configuration
error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .errors import ConfigError, LightattackError, SceneFormatError
from .metrics import EvalReport, intensity_sweep
from .pipeline import (ExperimentConfig, build_report, load_config_scenes, resolve_degradation,
                       run_condition, summarize)
from .reporting import (read_records, write_manifest, write_records, write_report,
                        write_summary, write_sweep)

OUTPUT_DIR_ENV = "LIGHTATTACK_OUTPUT_DIR"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lightattack",
        description="Search indoor-lighting configurations that break navigation agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON experiment config; flags override its fields")
        p.add_argument("--scenes", help="scene directory, or 'builtin:suite50'")
        p.add_argument("--agent", help="agent name: goal_seeker, threshold[:LO:HI[:GAIN]], "
                                       "scripted:<path>, bridge:<endpoint>")
        p.add_argument("--max-steps", type=int, dest="max_steps")
        p.add_argument("--seeds", help="comma-separated episode seeds, e.g. 0,1,2")
        p.add_argument("--degradation", help="'identity', 'benchmark', or @profile.json")
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--workers", type=int)
        p.add_argument("--task-id", dest="task_id")
        p.add_argument("--dump-trajectories", action="store_true",
                       help="write per-episode trajectory CSVs under the output directory")

    run_clean = sub.add_parser("run-clean", help="roll every episode at nominal intensity")
    add_common(run_clean)

    attack = sub.add_parser("attack", help="run the configured attack and report ASR/EL")
    add_common(attack)
    attack.add_argument("--attack", choices=["random_intensity", "sila", "sila_dila"])
    attack.add_argument("--pipeline-mode", dest="pipeline_mode", choices=["cascade", "independent"])
    attack.add_argument("--alpha", type=float, dest="sila_alpha", help="intensity step size")
    attack.add_argument("--iterations", type=int, dest="sila_iterations", help="search budget K")
    attack.add_argument("--epsilon", type=float, dest="sila_epsilon", help="exploration rate")
    attack.add_argument("--l0", type=float, dest="sila_l0", help="start intensity (default: nominal)")
    attack.add_argument("--bounds", dest="sila_bounds", help="intensity bounds, e.g. 0,1.5")
    attack.add_argument("--loss", choices=["timestep_weighted", "unweighted", "final_step"])
    attack.add_argument("--budget", dest="dila_budget",
                        help="switch budget: an integer or 'unlimited'")
    attack.add_argument("--initial-indicator", dest="dila_initial", choices=["on", "off"])
    attack.add_argument("--trigger", dest="dila_trigger",
                        help="'lookahead' or 'random:<count>'")

    sweep = sub.add_parser("sweep", help="success rate across an intensity grid")
    add_common(sweep)
    sweep.add_argument("--sweep-range", dest="sweep_range", help="grid range, e.g. 0,2")
    sweep.add_argument("--sweep-step", dest="sweep_step", type=float, default=0.1)

    report = sub.add_parser("report", help="recompute the summary from stored records")
    report.add_argument("--output-dir", dest="output_dir", required=True)

    return parser


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad seeds list {text!r}: {exc}") from exc


def _parse_bounds(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"bounds must be 'lo,hi', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _parse_budget(text: str) -> int | None:
    if text == "unlimited":
        return None
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"budget must be an integer or 'unlimited', got {text!r}") from exc


def _parse_degradation(text: str) -> str | dict:
    if text.startswith("@"):
        path = Path(text[1:])
        if not path.is_file():
            raise ConfigError(f"degradation profile file not found: {path}")
        return json.loads(path.read_text())
    return text


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            base = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
    config = ExperimentConfig.from_dict(base)

    if os.environ.get(OUTPUT_DIR_ENV):
        config = dataclasses.replace(config, output_dir=os.environ[OUTPUT_DIR_ENV])

    overrides: dict = {}
    for name in ("scenes", "agent", "max_steps", "output_dir", "workers", "task_id",
                 "attack", "pipeline_mode", "sila_alpha", "sila_iterations",
                 "sila_epsilon", "sila_l0", "loss", "dila_initial", "dila_trigger"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "seeds", None) is not None:
        overrides["seeds"] = _parse_seeds(args.seeds)
    if getattr(args, "sila_bounds", None) is not None:
        overrides["sila_bounds"] = _parse_bounds(args.sila_bounds)
    if getattr(args, "dila_budget", None) is not None:
        overrides["dila_budget"] = _parse_budget(args.dila_budget)
    if getattr(args, "degradation", None) is not None:
        overrides["degradation"] = _parse_degradation(args.degradation)
    try:
        return dataclasses.replace(config, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _prepare_output(config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out / "manifest.json", config.to_dict(), list(config.seeds))
    return out


def _print_summary(records) -> None:
    for row in summarize(records):
        asr = "undefined" if row.asr is None else f"{row.asr:.4f}"
        print(f"{row.condition:>18s}  asr={asr:>9s}  el={row.el:8.2f}  n={row.n:<4d} "
              f"rollouts_mean={row.rollouts_mean:.2f}")


def cmd_run_clean(config: ExperimentConfig, dump: bool = False) -> EvalReport:
    scenes = load_config_scenes(config)
    out = _prepare_output(config)
    dump_dir = str(out / "trajectories") if dump else None
    clean = run_condition(scenes, config, "clean", dump_dir)
    report = build_report(config.task_id, clean, [])
    write_records(out / "records.jsonl", list(report.records))
    write_summary(out / "summary.csv", summarize(list(report.records)))
    write_report(out / "report.json", report)
    _print_summary(list(report.records))
    rate = report.n_clean_success / report.n_episodes
    print(f"clean success rate: {rate:.4f} ({report.n_clean_success}/{report.n_episodes})")
    return report


def cmd_attack(config: ExperimentConfig, dump: bool = False) -> EvalReport:
    scenes = load_config_scenes(config)
    out = _prepare_output(config)
    dump_dir = str(out / "trajectories") if dump else None

    records_path = out / "records.jsonl"
    clean = []
    if records_path.is_file():
        existing = [r for r in read_records(records_path) if r.condition == "clean"]
        wanted = {f"{s.id}#s{seed}" for s in scenes for seed in config.seeds}
        if {r.episode_id for r in existing} == wanted:
            clean = existing
    if not clean:
        clean = run_condition(scenes, config, "clean", dump_dir)

    attacked = run_condition(scenes, config, config.attack, dump_dir)
    report = build_report(config.task_id, clean, attacked)
    write_records(records_path, list(report.records))
    write_summary(out / "summary.csv", summarize(list(report.records)))
    write_report(out / "report.json", report)
    _print_summary(list(report.records))
    asr = "undefined" if report.asr is None else f"{report.asr:.4f}"
    print(f"asr={asr} el_clean={report.el_clean:.2f} el_attack={report.el_attack:.2f}")
    return report


def cmd_sweep(config: ExperimentConfig, sweep_range: tuple[float, float] | None,
              step: float) -> list:
    scenes = load_config_scenes(config)
    out = _prepare_output(config)
    if sweep_range is None:
        sweep_range = scenes[0].intensity_bounds
    factory_name = config.agent
    from .agents import make_factory

    rows = intensity_sweep(scenes, make_factory(factory_name), sweep_range, step,
                           max_steps=config.max_steps, seed=config.seeds[0],
                           degradation=resolve_degradation(config.degradation))
    write_sweep(out / "sweep.csv", rows)
    for row in rows:
        print(f"intensity={row.intensity:6.3f}  success_rate={row.success_rate:.4f}")
    return rows


def cmd_report(output_dir: str) -> None:
    out = Path(output_dir)
    records_path = out / "records.jsonl"
    if not records_path.is_file():
        raise ConfigError(f"no records found at {records_path}")
    records = read_records(records_path)
    write_summary(out / "summary.csv", summarize(records))
    _print_summary(records)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            cmd_report(args.output_dir)
            return 0
        config = build_config(args)
        if args.command == "run-clean":
            cmd_run_clean(config, dump=args.dump_trajectories)
        elif args.command == "attack":
            cmd_attack(config, dump=args.dump_trajectories)
        elif args.command == "sweep":
            sweep_range = _parse_bounds(args.sweep_range) if args.sweep_range else None
            cmd_sweep(config, sweep_range, args.sweep_step)
        return 0
    except (ConfigError, SceneFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (LightattackError, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
