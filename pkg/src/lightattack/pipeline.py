"""Experiment orchestration: conditions, seed derivation, episode workers.

A task set is the cross product of a scene suite and a seed list. Every
per-episode computation is a pure function of (scene, seed, config), so
episodes can run on any number of workers and the aggregated outputs are
identical; files are written in canonical order after a join barrier.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from multiprocessing import get_context
from pathlib import Path

from .agents import make_factory
from .dila import DilaConfig, LookaheadTrigger, RandomTrigger, dila_attack, switched_schedule_from_outcome
from .episode import EpisodeSpec, run_episode
from .errors import AsrUndefinedError, ConfigError
from .losses import LossKind
from .metrics import (EpisodeRecord, EvalReport, compute_asr, compute_el, episode_id,
                      goal_instruction, random_intensity_baseline)
from .reporting import SummaryRow
from .scene import Scene, check_success, constant_schedule, load_scene_suite, scene_from_dict, scene_to_dict
from .sensing import DegradationProfile, IDENTITY_PROFILE
from .sila import SilaConfig, sila_attack

ATTACK_KINDS = ("random_intensity", "sila", "sila_dila")
PIPELINE_MODES = ("cascade", "independent")
BUILTIN_SUITE = "builtin:suite50"


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment run."""

    scenes: str = BUILTIN_SUITE
    agent: str = "goal_seeker"
    max_steps: int = 120
    seeds: tuple[int, ...] = (0,)
    degradation: str | dict = "identity"
    attack: str = "sila_dila"
    pipeline_mode: str = "cascade"
    sila_l0: float | None = None
    sila_alpha: float = 0.05
    sila_iterations: int = 20
    sila_epsilon: float = 0.1
    sila_bounds: tuple[float, float] | None = None
    loss: str = "timestep_weighted"
    dila_budget: int | None = None
    dila_initial: str = "on"
    dila_trigger: str = "lookahead"
    output_dir: str = "out"
    workers: int = 1
    task_id: str = "task"

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ConfigError("seeds list must be non-empty")
        if self.attack not in ATTACK_KINDS:
            raise ConfigError(f"attack must be one of {ATTACK_KINDS}, got {self.attack!r}")
        if self.pipeline_mode not in PIPELINE_MODES:
            raise ConfigError(f"pipeline mode must be one of {PIPELINE_MODES}")
        if self.max_steps <= 0:
            raise ConfigError("max_steps must be > 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            LossKind(self.loss)
        except ValueError:
            raise ConfigError(f"unknown loss kind {self.loss!r}") from None
        if self.dila_trigger != "lookahead" and not self.dila_trigger.startswith("random:"):
            raise ConfigError(f"dila trigger must be 'lookahead' or 'random:<count>', got {self.dila_trigger!r}")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def to_dict(self) -> dict:
        return {
            "scenes": self.scenes,
            "agent": self.agent,
            "max_steps": self.max_steps,
            "seeds": list(self.seeds),
            "degradation": self.degradation,
            "attack": self.attack,
            "pipeline_mode": self.pipeline_mode,
            "sila_l0": self.sila_l0,
            "sila_alpha": self.sila_alpha,
            "sila_iterations": self.sila_iterations,
            "sila_epsilon": self.sila_epsilon,
            "sila_bounds": list(self.sila_bounds) if self.sila_bounds else None,
            "loss": self.loss,
            "dila_budget": self.dila_budget,
            "dila_initial": self.dila_initial,
            "dila_trigger": self.dila_trigger,
            "output_dir": self.output_dir,
            "workers": self.workers,
            "task_id": self.task_id,
        }

    @staticmethod
    def from_dict(obj: dict) -> "ExperimentConfig":
        known = set(ExperimentConfig.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(obj)
        if "seeds" in kwargs:
            kwargs["seeds"] = tuple(kwargs["seeds"])
        if kwargs.get("sila_bounds"):
            kwargs["sila_bounds"] = tuple(kwargs["sila_bounds"])
        return ExperimentConfig(**kwargs)


def builtin_data_dir() -> Path:
    return Path(str(resources.files("lightattack").joinpath("data")))


def resolve_scene_dir(spec: str) -> Path:
    if spec == BUILTIN_SUITE:
        return builtin_data_dir() / "scenes"
    path = Path(spec)
    if not path.is_dir():
        raise ConfigError(f"scene directory not found: {path}")
    return path


def resolve_degradation(spec: str | dict) -> DegradationProfile:
    if isinstance(spec, dict):
        try:
            return DegradationProfile.from_dict(spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad degradation profile: {exc}") from exc
    if spec == "identity":
        return IDENTITY_PROFILE
    if spec == "benchmark":
        profile_path = builtin_data_dir() / "benchmark_profile.json"
        return DegradationProfile.from_dict(json.loads(profile_path.read_text()))
    raise ConfigError(f"unknown degradation profile {spec!r} (use 'identity', 'benchmark', or an inline object)")


def load_config_scenes(config: ExperimentConfig) -> list[Scene]:
    return load_scene_suite(resolve_scene_dir(config.scenes))


def derive_seed(*parts: object) -> int:
    """Stable sub-seed from labeled parts; independent of process or run order."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def _episode_spec(scene: Scene, seed: int, config: ExperimentConfig) -> EpisodeSpec:
    return EpisodeSpec(scene_id=scene.id, instruction=goal_instruction(scene),
                       max_steps=config.max_steps, seed=seed)


def _sila_config(scene: Scene, seed: int, config: ExperimentConfig) -> SilaConfig:
    bounds = config.sila_bounds if config.sila_bounds is not None else scene.intensity_bounds
    return SilaConfig(
        l0=config.sila_l0,
        alpha=config.sila_alpha,
        iterations=config.sila_iterations,
        epsilon=config.sila_epsilon,
        bounds=bounds,
        rng_seed=derive_seed("sila", scene.id, seed),
        loss_kind=LossKind(config.loss),
    )


def _dila_config(scene: Scene, seed: int, config: ExperimentConfig, on_level: float) -> DilaConfig:
    if config.dila_trigger == "lookahead":
        trigger: LookaheadTrigger | RandomTrigger = LookaheadTrigger()
    else:
        count = int(config.dila_trigger.split(":", 1)[1])
        trigger = RandomTrigger(count=count, seed=derive_seed("dila_random", scene.id, seed))
    return DilaConfig(on_level=on_level, switch_budget=config.dila_budget,
                      initial_indicator=config.dila_initial, trigger=trigger)


def run_episode_condition(scene: Scene, seed: int, config: ExperimentConfig,
                          condition: str, dump_dir: str | None = None) -> EpisodeRecord:
    """Compute the record for one (scene, seed) pair under one condition.

    With ``dump_dir`` set, the final rollout's per-step trajectory is also
    written there as a plot-ready CSV.
    """
    factory = make_factory(config.agent)
    degradation = resolve_degradation(config.degradation)
    spec = _episode_spec(scene, seed, config)
    eid = episode_id(scene.id, seed)

    record: EpisodeRecord
    trajectory = None
    if condition == "clean":
        schedule = constant_schedule(scene, scene.nominal_intensity)
        trajectory = run_episode(factory, scene, schedule, spec, degradation)
        record = EpisodeRecord(eid, "clean", check_success(trajectory, scene), len(trajectory),
                               schedule.summary(), 1, seed)
    elif condition == "random_intensity":
        record = random_intensity_baseline(scene, factory, spec,
                                           derive_seed("random_intensity", scene.id, seed), degradation)
        if dump_dir is not None:
            schedule = constant_schedule(scene, record.final_intensity["level"])
            trajectory = run_episode(factory, scene, schedule, spec, degradation)
    elif condition in ("sila", "sila_dila"):
        outcome = sila_attack(scene, factory, spec, _sila_config(scene, seed, config), degradation)
        run_dila = condition == "sila_dila" and (
            config.pipeline_mode == "independent" or not outcome.found_failure)
        if not run_dila:
            schedule = constant_schedule(scene, outcome.l_star)
            trajectory = run_episode(factory, scene, schedule, spec, degradation)
            summary = dict(schedule.summary(), stage="sila",
                           found_failure=outcome.found_failure, l_last=outcome.l_last)
            record = EpisodeRecord(eid, condition, check_success(trajectory, scene), len(trajectory),
                                   summary, outcome.rollouts_used, seed)
        else:
            dila_outcome = dila_attack(scene, factory, spec,
                                       _dila_config(scene, seed, config, outcome.l_star), degradation)
            trajectory = dila_outcome.trajectory
            schedule = switched_schedule_from_outcome(scene, dila_outcome, outcome.l_star)
            summary = dict(schedule.summary(), stage="dila",
                           sila_found_failure=outcome.found_failure,
                           n_switches=len(dila_outcome.switch_steps),
                           lookahead_steps=len(dila_outcome.lookahead_trace))
            record = EpisodeRecord(eid, condition, check_success(trajectory, scene), len(trajectory),
                                   summary, outcome.rollouts_used + 1, seed)
    else:
        raise ConfigError(f"unknown condition {condition!r}")

    if dump_dir is not None and trajectory is not None:
        from .reporting import write_trajectory

        directory = Path(dump_dir) / condition
        directory.mkdir(parents=True, exist_ok=True)
        write_trajectory(directory / f"{scene.id}__s{seed}.csv", trajectory)
    return record


def _worker(args: tuple[dict, int, dict, str, str | None]) -> dict:
    from .reporting import record_to_dict

    scene_dict, seed, config_dict, condition, dump_dir = args
    scene = scene_from_dict(scene_dict)
    config = ExperimentConfig.from_dict(config_dict)
    return record_to_dict(run_episode_condition(scene, seed, config, condition, dump_dir))


def run_condition(scenes: list[Scene], config: ExperimentConfig, condition: str,
                  dump_dir: str | None = None) -> list[EpisodeRecord]:
    """Run one condition over the whole task set, optionally in parallel."""
    from .reporting import record_from_dict

    pairs = [(scene, seed) for scene in scenes for seed in config.seeds]
    if config.workers == 1:
        records = [run_episode_condition(scene, seed, config, condition, dump_dir)
                   for scene, seed in pairs]
    else:
        tasks = [(scene_to_dict(scene), seed, config.to_dict(), condition, dump_dir)
                 for scene, seed in pairs]
        with ProcessPoolExecutor(max_workers=config.workers, mp_context=get_context("spawn")) as pool:
            records = [record_from_dict(d) for d in pool.map(_worker, tasks)]
    return sorted(records, key=lambda r: r.episode_id)


def build_report(task_id: str, clean: list[EpisodeRecord],
                 attacked: list[EpisodeRecord]) -> EvalReport:
    n_clean_success = sum(1 for r in clean if r.success)
    asr = compute_asr(clean, attacked) if attacked and n_clean_success > 0 else None
    return EvalReport(
        task_id=task_id,
        n_episodes=len(clean),
        n_clean_success=n_clean_success,
        asr=asr,
        el_clean=compute_el(clean),
        el_attack=compute_el(attacked) if attacked else None,
        records=tuple(sorted([*clean, *attacked], key=lambda r: (r.condition, r.episode_id))),
    )


def summarize(records: list[EpisodeRecord]) -> list[SummaryRow]:
    by_condition: dict[str, list[EpisodeRecord]] = {}
    for rec in records:
        by_condition.setdefault(rec.condition, []).append(rec)
    clean = by_condition.get("clean", [])
    rows = []
    for condition, recs in sorted(by_condition.items()):
        if condition == "clean" or not clean:
            asr = None
        else:
            try:
                asr = compute_asr(clean, recs)
            except AsrUndefinedError:
                asr = None
        rows.append(SummaryRow(
            condition=condition,
            asr=asr,
            el=compute_el(recs),
            n=len(recs),
            rollouts_mean=sum(r.rollouts_used for r in recs) / len(recs),
        ))
    return rows
