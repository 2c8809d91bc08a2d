"""Dynamic lighting attack: on/off switching steered by a one-step lookahead.

At each step the controller asks, without committing anything, what the
agent would do under the current lighting and under the flipped lighting,
simulates both next states, and switches whenever the flipped branch ends
up pointing further away from the goal. A random-timestep variant serves
as the ablation baseline.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .agents import Agent, AgentFactory
from .episode import EpisodeSpec, Trajectory
from .errors import ConfigError
from .scene import Action, ActionKind, GoalRegion, Pose, Scene, SwitchedSchedule, transition
from .sensing import DegradationProfile, IDENTITY_PROFILE, render


def heading_deviation(pose: Pose, goal: GoalRegion) -> float:
    """Angle in [0, pi] between the toward-goal vector and the facing vector.

    Returns 0 when the pose sits exactly on the goal center (the toward
    vector degenerates).
    """
    v1x = goal.x - pose.x
    v1z = goal.z - pose.z
    n1 = math.hypot(v1x, v1z)
    if n1 == 0.0:
        return 0.0
    v2x = math.sin(pose.rot_y)
    v2z = math.cos(pose.rot_y)
    n2 = math.hypot(v2x, v2z)
    cos_beta = (v1x * v2x + v1z * v2z) / (n1 * n2)
    return math.acos(min(1.0, max(-1.0, cos_beta)))


@dataclass(frozen=True)
class LookaheadTrigger:
    """Switch when the flipped lighting strictly increases the heading deviation."""


@dataclass(frozen=True)
class RandomTrigger:
    """Flip the indicator at ``count`` uniformly sampled distinct timesteps."""

    count: int
    seed: int

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError("switch count must be >= 0")


Trigger = LookaheadTrigger | RandomTrigger

UNLIMITED: None = None


@dataclass(frozen=True)
class DilaConfig:
    """Dynamic-attack parameters.

    ``on_level`` of None resolves to the scene's nominal intensity; the
    usual pipeline passes the intensity found by the static attack.
    ``switch_budget`` of None means unlimited (trigger evaluated at every
    step).
    """

    on_level: float | None = None
    switch_budget: int | None = UNLIMITED
    initial_indicator: str = "on"
    trigger: Trigger = LookaheadTrigger()

    def __post_init__(self) -> None:
        if self.switch_budget is not None and self.switch_budget < 1:
            raise ConfigError("switch budget must be >= 1 or unlimited")
        if self.initial_indicator not in ("on", "off"):
            raise ConfigError(f"initial indicator must be 'on' or 'off', got {self.initial_indicator!r}")
        if isinstance(self.trigger, RandomTrigger) and self.switch_budget is not None \
                and self.trigger.count > self.switch_budget:
            raise ConfigError("random trigger count exceeds the switch budget")


@dataclass(frozen=True)
class LookaheadRow:
    timestep: int
    beta_cur: float
    beta_sw: float
    switched: bool


@dataclass(frozen=True)
class DilaOutcome:
    trajectory: Trajectory
    switch_steps: tuple[int, ...]
    lookahead_trace: tuple[LookaheadRow, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "switch_steps", tuple(self.switch_steps))
        object.__setattr__(self, "lookahead_trace", tuple(self.lookahead_trace))


def lookahead_decide(agent: Agent, pose: Pose, scene: Scene, spec: EpisodeSpec,
                     l_cur: float, l_sw: float, t: int,
                     degradation: DegradationProfile = IDENTITY_PROFILE) -> tuple[bool, float, float]:
    """Evaluate the switch trigger at one step without committing anything.

    Peeks the agent's action under both lighting levels, simulates both next
    states (a peeked STOP leaves the pose in place), and compares heading
    deviations. Returns (switched, beta_cur, beta_sw); the switch fires only
    on a strict increase.
    """
    if l_cur == l_sw:
        raise ValueError("lookahead requires two distinct lighting levels")
    obs_cur = render(scene, pose, l_cur, degradation, spec.seed, t)
    obs_sw = render(scene, pose, l_sw, degradation, spec.seed, t)
    a_cur = agent.peek(obs_cur, spec)
    a_sw = agent.peek(obs_sw, spec)
    next_cur = transition(pose, a_cur, scene)
    next_sw = transition(pose, a_sw, scene)
    beta_cur = heading_deviation(next_cur, scene.goal)
    beta_sw = heading_deviation(next_sw, scene.goal)
    return beta_sw - beta_cur > 0.0, beta_cur, beta_sw


def dila_attack(scene: Scene, agent_factory: AgentFactory, spec: EpisodeSpec,
                config: DilaConfig, degradation: DegradationProfile = IDENTITY_PROFILE) -> DilaOutcome:
    """Run one episode under switch-controlled lighting.

    While budget remains, the trigger is consulted before each step; a
    firing trigger flips the on/off indicator before the step commits. The
    committed step then renders at the chosen level, queries the agent, and
    applies the transition. Every applied intensity is 0 or ``on_level``.
    """
    on_level = scene.nominal_intensity if config.on_level is None else config.on_level
    if not scene.l_min <= on_level <= scene.l_max:
        raise ConfigError(f"on level {on_level} outside scene bounds {scene.intensity_bounds}")

    random_steps: frozenset[int] = frozenset()
    if isinstance(config.trigger, RandomTrigger):
        if config.trigger.count > spec.max_steps:
            raise ValueError(f"cannot place {config.trigger.count} switches in {spec.max_steps} steps")
        rng = random.Random(config.trigger.seed)
        random_steps = frozenset(rng.sample(range(1, spec.max_steps + 1), config.trigger.count))

    agent = agent_factory(scene, spec)
    pose = scene.start
    indicator = 1 if config.initial_indicator == "on" else 0
    budget = config.switch_budget

    poses: list[Pose] = []
    actions: list[Action] = []
    intensities: list[float] = []
    switch_steps: list[int] = []
    trace: list[LookaheadRow] = []
    stopped = False

    try:
        for t in range(1, spec.max_steps + 1):
            budget_left = budget is None or len(switch_steps) < budget
            if isinstance(config.trigger, LookaheadTrigger):
                # on_level == 0 makes both branches identical: switching is a
                # no-op and the strict trigger can never fire.
                if budget_left and on_level != 0.0:
                    l_cur = indicator * on_level
                    l_sw = (1 - indicator) * on_level
                    switched, beta_cur, beta_sw = lookahead_decide(
                        agent, pose, scene, spec, l_cur, l_sw, t, degradation)
                    trace.append(LookaheadRow(t, beta_cur, beta_sw, switched))
                    if switched:
                        indicator = 1 - indicator
                        switch_steps.append(t)
            else:
                if budget_left and t in random_steps:
                    indicator = 1 - indicator
                    switch_steps.append(t)

            level = indicator * on_level
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

    trajectory = Trajectory(tuple(poses), tuple(actions), tuple(intensities), stopped)
    return DilaOutcome(trajectory=trajectory, switch_steps=tuple(switch_steps),
                       lookahead_trace=tuple(trace))


def random_trigger_baseline(scene: Scene, agent_factory: AgentFactory, spec: EpisodeSpec,
                            count: int, seed: int, on_level: float | None = None,
                            degradation: DegradationProfile = IDENTITY_PROFILE) -> DilaOutcome:
    """Ablation baseline: same number of switches, arbitrary timesteps, no lookahead."""
    config = DilaConfig(on_level=on_level, switch_budget=UNLIMITED,
                        trigger=RandomTrigger(count=count, seed=seed))
    return dila_attack(scene, agent_factory, spec, config, degradation)


def switched_schedule_from_outcome(scene: Scene, outcome: DilaOutcome, on_level: float) -> SwitchedSchedule:
    """Reconstruct the realized on/off schedule for record keeping."""
    indicators = tuple(1 if level > 0.0 else 0 for level in outcome.trajectory.applied_intensities)
    return SwitchedSchedule(on_level=on_level, indicators=indicators, bounds=scene.intensity_bounds)
