"""Static lighting attack: black-box search for a constant adversarial intensity.

Each iteration rolls the episode under a slightly brighter and a slightly
darker candidate, keeps the direction whose trajectory loss is larger, and
takes an epsilon-greedy sign step on the accumulated offset. The search
stops the moment any rollout fails, or after the iteration budget.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .agents import AgentFactory
from .episode import EpisodeSpec, Trajectory, run_episode
from .errors import ConfigError
from .losses import LossKind, clip_intensity, trajectory_loss
from .scene import Scene, check_success, constant_schedule
from .sensing import DegradationProfile, IDENTITY_PROFILE

DEFAULT_ALPHA = 0.05
DEFAULT_ITERATIONS = 20
DEFAULT_EPSILON = 0.1
DEFAULT_BOUNDS = (0.0, 1.5)


@dataclass(frozen=True)
class SilaConfig:
    """Search hyperparameters.

    ``l0`` of None means "start from the scene's nominal intensity". The
    step size may not exceed the width of the bounds, and the start point
    must be admissible.
    """

    l0: float | None = None
    alpha: float = DEFAULT_ALPHA
    iterations: int = DEFAULT_ITERATIONS
    epsilon: float = DEFAULT_EPSILON
    bounds: tuple[float, float] = DEFAULT_BOUNDS
    rng_seed: int = 0
    loss_kind: LossKind = LossKind.TIMESTEP_WEIGHTED

    def __post_init__(self) -> None:
        lo, hi = self.bounds
        if not lo < hi:
            raise ConfigError(f"bounds must satisfy lo < hi, got {self.bounds}")
        if self.alpha <= 0.0 or self.alpha > hi - lo:
            raise ConfigError(f"alpha must lie in (0, {hi - lo}], got {self.alpha}")
        if self.iterations <= 0:
            raise ConfigError("iteration budget must be > 0")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.l0 is not None and not lo <= self.l0 <= hi:
            raise ConfigError(f"l0 {self.l0} outside bounds {self.bounds}")


@dataclass(frozen=True)
class SilaTraceRow:
    """One search iteration: candidates, their losses, and the update signs.

    ``xi`` and ``b`` are None on the iteration that exited early through a
    failing candidate (no update was computed).
    """

    iteration: int
    l_plus: float
    l_minus: float
    j_plus: float
    j_minus: float
    xi: int | None
    b: int | None


@dataclass(frozen=True)
class SilaOutcome:
    """Search result with full query accounting.

    ``l_star`` is the reported adversarial intensity: the failing candidate
    when a failure was found, otherwise the rolled-out intensity with the
    maximal observed loss. ``l_last`` is the final value of the update rule
    (start point plus accumulated offset), kept for completeness.
    """

    l_star: float
    l_last: float
    found_failure: bool
    iterations_used: int
    rollouts_used: int
    loss_trace: tuple[SilaTraceRow, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "loss_trace", tuple(self.loss_trace))


def sila_attack(scene: Scene, agent_factory: AgentFactory, spec: EpisodeSpec,
                config: SilaConfig, degradation: DegradationProfile = IDENTITY_PROFILE) -> SilaOutcome:
    """Run the static-intensity search for one episode.

    Every rolled-out intensity stays within the configured bounds: the
    accumulated offset is clipped so the realized level remains admissible.
    Ties between the two candidate losses resolve to +1.
    """
    l0 = scene.nominal_intensity if config.l0 is None else config.l0
    lo, hi = config.bounds
    if not lo <= l0 <= hi:
        raise ConfigError(f"start intensity {l0} outside bounds {config.bounds}")
    rng = random.Random(config.rng_seed)

    def rollout(level: float) -> tuple[Trajectory, bool, float]:
        traj = run_episode(agent_factory, scene, constant_schedule(scene, level), spec, degradation)
        return traj, check_success(traj, scene), trajectory_loss(traj, scene.goal, config.loss_kind)

    seen: list[tuple[float, float]] = []  # (level, loss) for argmax reporting

    _, ok, j0 = rollout(l0)
    rollouts = 1
    if not ok:
        return SilaOutcome(l_star=l0, l_last=l0, found_failure=True,
                           iterations_used=0, rollouts_used=rollouts)
    seen.append((l0, j0))

    delta = 0.0
    l_star = l0
    trace: list[SilaTraceRow] = []
    for k in range(1, config.iterations + 1):
        l_k = l0 + delta
        l_plus = clip_intensity(l_k + config.alpha, config.bounds)
        l_minus = clip_intensity(l_k - config.alpha, config.bounds)
        _, ok_plus, j_plus = rollout(l_plus)
        _, ok_minus, j_minus = rollout(l_minus)
        rollouts += 2
        if not ok_plus:
            trace.append(SilaTraceRow(k, l_plus, l_minus, j_plus, j_minus, None, None))
            return SilaOutcome(l_star=l_plus, l_last=l0 + delta, found_failure=True,
                               iterations_used=k, rollouts_used=rollouts, loss_trace=tuple(trace))
        if not ok_minus:
            trace.append(SilaTraceRow(k, l_plus, l_minus, j_plus, j_minus, None, None))
            return SilaOutcome(l_star=l_minus, l_last=l0 + delta, found_failure=True,
                               iterations_used=k, rollouts_used=rollouts, loss_trace=tuple(trace))
        seen.append((l_plus, j_plus))
        seen.append((l_minus, j_minus))
        xi = 1 if j_plus >= j_minus else -1
        b = 1 if rng.random() >= config.epsilon else -1
        delta = clip_intensity(l0 + delta + config.alpha * b * xi, config.bounds) - l0
        l_star = l0 + delta
        trace.append(SilaTraceRow(k, l_plus, l_minus, j_plus, j_minus, xi, b))

    best_level, _ = max(seen, key=lambda pair: pair[1])
    return SilaOutcome(l_star=best_level, l_last=l_star, found_failure=False,
                       iterations_used=config.iterations, rollouts_used=rollouts,
                       loss_trace=tuple(trace))
