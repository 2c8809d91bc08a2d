"""Episode runner: rolls a policy through a scene under a lighting schedule."""

from __future__ import annotations

from dataclasses import dataclass

from .agents import AgentFactory
from .errors import ConfigError
from .scene import Action, ActionKind, LightingSchedule, Pose, Scene, transition
from .sensing import DegradationProfile, IDENTITY_PROFILE, render


@dataclass(frozen=True)
class EpisodeSpec:
    """One navigation case: which scene, the task descriptor, step cap, seed."""

    scene_id: str
    instruction: str
    max_steps: int
    seed: int

    def __post_init__(self) -> None:
        if self.max_steps <= 0:
            raise ValueError("max_steps must be > 0")


@dataclass(frozen=True)
class Trajectory:
    """Rollout record: per-step pose, action, and applied intensity.

    ``poses[k]`` is the pose at which ``actions[k]`` was chosen; the pose
    produced by the final action is not recorded (for STOP it is identical
    anyway).
    """

    poses: tuple[Pose, ...]
    actions: tuple[Action, ...]
    applied_intensities: tuple[float, ...]
    terminated_by_stop: bool

    def __post_init__(self) -> None:
        n = len(self.poses)
        if n < 1:
            raise ValueError("trajectory must contain at least one step")
        if len(self.actions) != n or len(self.applied_intensities) != n:
            raise ValueError("poses, actions, and intensities must have equal length")
        if self.terminated_by_stop and self.actions[-1].kind is not ActionKind.STOP:
            raise ValueError("terminated_by_stop requires a final STOP action")
        object.__setattr__(self, "poses", tuple(self.poses))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "applied_intensities", tuple(self.applied_intensities))

    def __len__(self) -> int:
        return len(self.poses)


def run_episode(agent_factory: AgentFactory, scene: Scene, schedule: LightingSchedule,
                spec: EpisodeSpec, degradation: DegradationProfile = IDENTITY_PROFILE) -> Trajectory:
    """Execute one episode and return its trajectory.

    Steps t = 1..max_steps: render under the scheduled intensity, query the
    agent, apply the transition. Terminates early when the agent issues STOP.
    """
    if spec.scene_id != scene.id:
        raise ConfigError(f"episode spec targets scene {spec.scene_id!r} but got scene {scene.id!r}")
    if not schedule.covers(spec.max_steps):
        raise ConfigError(f"lighting schedule covers fewer than {spec.max_steps} steps")

    agent = agent_factory(scene, spec)
    pose = scene.start
    poses: list[Pose] = []
    actions: list[Action] = []
    intensities: list[float] = []
    stopped = False
    try:
        for t in range(1, spec.max_steps + 1):
            level = schedule.level_at(t)
            obs = render(scene, pose, level, degradation, spec.seed, t)
            action = agent.act(obs, spec)
            poses.append(pose)
            actions.append(action)
            intensities.append(level)
            if action.kind is ActionKind.STOP:
                stopped = True
                break
            pose = transition(pose, action, scene)
    finally:
        agent.finish()
    return Trajectory(tuple(poses), tuple(actions), tuple(intensities), stopped)
