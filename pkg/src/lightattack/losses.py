"""Trajectory losses guiding the static lighting search, plus intensity clipping."""

from __future__ import annotations

import enum
import math

from .episode import Trajectory
from .scene import GoalRegion


class LossKind(enum.Enum):
    TIMESTEP_WEIGHTED = "timestep_weighted"
    UNWEIGHTED = "unweighted"
    FINAL_STEP = "final_step"


def _distances(trajectory: Trajectory, goal: GoalRegion, to_boundary: bool) -> list[float]:
    if len(trajectory) == 0:
        raise ValueError("loss of an empty trajectory is undefined")
    out = []
    for pose in trajectory.poses:
        d = math.hypot(pose.x - goal.x, pose.z - goal.z)
        if to_boundary:
            d = max(d - goal.radius, 0.0)
        out.append(d)
    return out


def loss_timestep_weighted(trajectory: Trajectory, goal: GoalRegion, to_boundary: bool = False) -> float:
    """sum_t (t / T_hat) * d_t: late deviation counts more than early deviation."""
    ds = _distances(trajectory, goal, to_boundary)
    t_hat = len(ds)
    return sum(t / t_hat * d for t, d in enumerate(ds, start=1))


def loss_unweighted(trajectory: Trajectory, goal: GoalRegion, to_boundary: bool = False) -> float:
    """sum_t d_t: every timestep weighted equally."""
    return sum(_distances(trajectory, goal, to_boundary))


def loss_final_step(trajectory: Trajectory, goal: GoalRegion, to_boundary: bool = False) -> float:
    """d_T_hat: distance at the last recorded step only."""
    return _distances(trajectory, goal, to_boundary)[-1]


_LOSS_FUNCTIONS = {
    LossKind.TIMESTEP_WEIGHTED: loss_timestep_weighted,
    LossKind.UNWEIGHTED: loss_unweighted,
    LossKind.FINAL_STEP: loss_final_step,
}


def trajectory_loss(trajectory: Trajectory, goal: GoalRegion, kind: LossKind,
                    to_boundary: bool = False) -> float:
    return _LOSS_FUNCTIONS[kind](trajectory, goal, to_boundary=to_boundary)


def clip_intensity(level: float, bounds: tuple[float, float]) -> float:
    """Project an intensity into the admissible closed interval."""
    lo, hi = bounds
    return min(max(level, lo), hi)
