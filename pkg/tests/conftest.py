"""Shared scene builders for the test suite."""

from __future__ import annotations

import pytest

from lightattack.episode import EpisodeSpec
from lightattack.scene import GoalRegion, Pose, Rect, Scene


def make_scene(scene_id: str = "test_scene", extent: Rect | None = None,
               walls: tuple[Rect, ...] = (), goal: GoalRegion | None = None,
               start: Pose | None = None, nominal: float = 1.0,
               bounds: tuple[float, float] = (0.0, 1.5)) -> Scene:
    return Scene(
        id=scene_id,
        extent=extent if extent is not None else Rect(-10.0, -10.0, 10.0, 10.0),
        walls=walls,
        goal=goal if goal is not None else GoalRegion(0.0, 5.0, 0.5),
        start=start if start is not None else Pose(0.0, 0.0, 0.0),
        nominal_intensity=nominal,
        intensity_bounds=bounds,
    )


def make_spec(scene: Scene, max_steps: int = 100, seed: int = 0) -> EpisodeSpec:
    return EpisodeSpec(scene_id=scene.id, instruction="reach the goal and stop",
                       max_steps=max_steps, seed=seed)


@pytest.fixture
def straight_scene() -> Scene:
    """Obstacle-free straight shot: start at origin facing the goal 3 m north."""
    return make_scene(goal=GoalRegion(0.0, 3.0, 0.5))
