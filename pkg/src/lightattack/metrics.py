"""Attack evaluation: per-episode records, ASR/EL, baselines, intensity sweep.

ASR is the fraction of episodes that succeed under clean lighting but fail
under attack, computed over the clean-success subset only. EL is the mean
episode length over all episodes of a condition; only the final adversarial
rollout counts, never the attacker's intermediate queries.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .agents import AgentFactory
from .episode import EpisodeSpec, run_episode
from .errors import AsrUndefinedError
from .scene import Scene, check_success, constant_schedule
from .sensing import DegradationProfile, IDENTITY_PROFILE

RECORD_SCHEMA = "record/v1"


@dataclass(frozen=True)
class EpisodeRecord:
    """Outcome of one episode under one condition."""

    episode_id: str
    condition: str
    success: bool
    episode_length: int
    final_intensity: dict
    rollouts_used: int
    seed: int

    def __post_init__(self) -> None:
        if self.episode_length < 1:
            raise ValueError("episode length must be >= 1")
        if self.rollouts_used < 0:
            raise ValueError("rollouts_used must be >= 0")


@dataclass(frozen=True)
class EvalReport:
    """Aggregated clean-vs-attacked evaluation for one task set.

    ``asr`` is None exactly when the clean condition had no successes;
    ``el_attack`` is None for clean-only runs.
    """

    task_id: str
    n_episodes: int
    n_clean_success: int
    asr: float | None
    el_clean: float
    el_attack: float | None
    records: tuple[EpisodeRecord, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.asr is not None and self.n_clean_success == 0:
            raise ValueError("asr cannot be defined without clean successes")
        object.__setattr__(self, "records", tuple(self.records))


def compute_asr(clean: list[EpisodeRecord], attacked: list[EpisodeRecord]) -> float:
    """Fraction of clean-success episodes that fail under attack.

    Raises :class:`AsrUndefinedError` when no episode succeeds in the clean
    condition (reported upstream as UNDEFINED, never silently 0).
    """
    clean_by_id = {r.episode_id: r for r in clean}
    if len(clean_by_id) != len(clean):
        raise ValueError("duplicate episode ids in clean records")
    attacked_by_id = {r.episode_id: r for r in attacked}
    if len(attacked_by_id) != len(attacked):
        raise ValueError("duplicate episode ids in attacked records")
    for rec in attacked:
        mate = clean_by_id.get(rec.episode_id)
        if mate is None:
            raise ValueError(f"attacked episode {rec.episode_id!r} has no clean record")
        if mate.seed != rec.seed:
            raise ValueError(f"episode {rec.episode_id!r} pairs records with different seeds")

    clean_successes = [r for r in clean if r.success]
    if not clean_successes:
        raise AsrUndefinedError("no clean successes: ASR is undefined for this task set")
    broken = 0
    for rec in clean_successes:
        attacked_rec = attacked_by_id.get(rec.episode_id)
        if attacked_rec is None:
            raise ValueError(f"clean-success episode {rec.episode_id!r} has no attacked record")
        if not attacked_rec.success:
            broken += 1
    return broken / len(clean_successes)


def compute_el(records: list[EpisodeRecord]) -> float:
    """Mean episode length over all episodes in the set."""
    if not records:
        raise ValueError("EL of an empty record set is undefined")
    return sum(r.episode_length for r in records) / len(records)


def random_intensity_baseline(scene: Scene, agent_factory: AgentFactory, spec: EpisodeSpec,
                              seed: int, degradation: DegradationProfile = IDENTITY_PROFILE) -> EpisodeRecord:
    """One uniform intensity draw from the scene bounds, held for the whole episode."""
    level = random.Random(seed).uniform(scene.l_min, scene.l_max)
    schedule = constant_schedule(scene, level)
    trajectory = run_episode(agent_factory, scene, schedule, spec, degradation)
    return EpisodeRecord(
        episode_id=episode_id(scene.id, spec.seed),
        condition="random_intensity",
        success=check_success(trajectory, scene),
        episode_length=len(trajectory),
        final_intensity=schedule.summary(),
        rollouts_used=1,
        seed=spec.seed,
    )


@dataclass(frozen=True)
class SweepRow:
    intensity: float
    success_rate: float


def intensity_sweep(scenes: list[Scene], agent_factory: AgentFactory,
                    intensity_range: tuple[float, float], step: float,
                    max_steps: int = 120, seed: int = 0,
                    degradation: DegradationProfile = IDENTITY_PROFILE) -> list[SweepRow]:
    """Success rate across the suite at each point of an intensity grid."""
    if step <= 0.0:
        raise ValueError("sweep step must be > 0")
    lo, hi = intensity_range
    if not lo <= hi:
        raise ValueError("sweep range must satisfy lo <= hi")
    n_points = int((hi - lo) / step + 1e-9) + 1
    rows = []
    for i in range(n_points):
        level = round(lo + i * step, 9)
        successes = 0
        for scene in scenes:
            spec = EpisodeSpec(scene_id=scene.id, instruction=goal_instruction(scene),
                               max_steps=max_steps, seed=seed)
            trajectory = run_episode(agent_factory, scene, constant_schedule(scene, level),
                                     spec, degradation)
            if check_success(trajectory, scene):
                successes += 1
        rows.append(SweepRow(intensity=level, success_rate=successes / len(scenes)))
    return rows


def episode_id(scene_id: str, seed: int) -> str:
    return f"{scene_id}#s{seed}"


def goal_instruction(scene: Scene) -> str:
    return (f"navigate to the goal region at ({scene.goal.x:g}, {scene.goal.z:g}) "
            f"and stop within {scene.goal.radius:g} m")
