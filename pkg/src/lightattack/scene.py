"""Deterministic episodic world: geometry, agent pose, actions, lighting.

A :class:`Scene` is a rectangular extent containing axis-aligned wall blocks,
a circular goal region, a start pose, and the admissible lighting-intensity
interval. The state-transition function, the success predicate, and the
scene-file codec live here; rendering is in :mod:`lightattack.sensing`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from .errors import SceneFormatError
from .geometry import Rect, heading_vector, segment_intersects_rect, wrap_angle

if TYPE_CHECKING:
    from .episode import Trajectory

SCENE_SCHEMA = "scene/v1"

# Default discrete action magnitudes. The attacked models' native action
# spaces are not part of this artifact; these mirror common embodied sims.
DEFAULT_STEP_METERS = 0.25
DEFAULT_TURN_RADIANS = math.pi / 6.0


@dataclass(frozen=True)
class Pose:
    """Agent pose: planar position plus heading about the vertical axis.

    ``rot_y`` is stored normalized to [0, 2*pi); the facing vector is
    ``(sin rot_y, cos rot_y)``.
    """

    x: float
    z: float
    rot_y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.z) and math.isfinite(self.rot_y)):
            raise ValueError("pose components must be finite")
        object.__setattr__(self, "rot_y", wrap_angle(self.rot_y))


@dataclass(frozen=True)
class GoalRegion:
    """Circular goal disk around a target location."""

    x: float
    z: float
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError(f"goal radius must be > 0, got {self.radius}")

    def distance_from(self, x: float, z: float) -> float:
        return math.hypot(x - self.x, z - self.z)

    def contains(self, x: float, z: float) -> bool:
        return self.distance_from(x, z) <= self.radius


class ActionKind(enum.Enum):
    MOVE_AHEAD = "move_ahead"
    ROTATE_LEFT = "rotate_left"
    ROTATE_RIGHT = "rotate_right"
    STOP = "stop"


@dataclass(frozen=True)
class Action:
    """Discrete agent action; ``magnitude`` is meters for moves, radians for turns."""

    kind: ActionKind
    magnitude: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is ActionKind.MOVE_AHEAD and not self.magnitude > 0.0:
            raise ValueError("MoveAhead step must be > 0")
        if self.kind in (ActionKind.ROTATE_LEFT, ActionKind.ROTATE_RIGHT):
            if not (0.0 < self.magnitude <= math.pi):
                raise ValueError("rotation angle must lie in (0, pi]")
        if self.kind is ActionKind.STOP and self.magnitude != 0.0:
            raise ValueError("Stop carries no magnitude")

    @staticmethod
    def move_ahead(step: float = DEFAULT_STEP_METERS) -> "Action":
        return Action(ActionKind.MOVE_AHEAD, step)

    @staticmethod
    def rotate_left(angle: float = DEFAULT_TURN_RADIANS) -> "Action":
        return Action(ActionKind.ROTATE_LEFT, angle)

    @staticmethod
    def rotate_right(angle: float = DEFAULT_TURN_RADIANS) -> "Action":
        return Action(ActionKind.ROTATE_RIGHT, angle)

    @staticmethod
    def stop() -> "Action":
        return Action(ActionKind.STOP, 0.0)

    def encode(self) -> str:
        """Compact text form, e.g. ``move_ahead:0.25`` or ``stop``."""
        if self.kind is ActionKind.STOP:
            return "stop"
        return f"{self.kind.value}:{self.magnitude!r}"

    @staticmethod
    def decode(text: str) -> "Action":
        name, _, mag = text.partition(":")
        try:
            kind = ActionKind(name)
        except ValueError:
            raise ValueError(f"unknown action {text!r}") from None
        if kind is ActionKind.STOP:
            return Action.stop()
        if not mag:
            raise ValueError(f"action {name!r} needs a magnitude")
        return Action(kind, float(mag))


@dataclass(frozen=True)
class Scene:
    """Static environment description for one navigation task."""

    id: str
    extent: Rect
    walls: tuple[Rect, ...]
    goal: GoalRegion
    start: Pose
    nominal_intensity: float
    intensity_bounds: tuple[float, float]

    def __post_init__(self) -> None:
        lo, hi = self.intensity_bounds
        if not self.id:
            raise ValueError("scene id must be non-empty")
        if lo < 0.0 or not lo < hi:
            raise ValueError(f"intensity bounds must satisfy 0 <= lo < hi, got {self.intensity_bounds}")
        if not lo <= self.nominal_intensity <= hi:
            raise ValueError("nominal intensity must lie within the intensity bounds")
        if not self.extent.contains(self.start.x, self.start.z):
            raise ValueError("start position must lie inside the extent")
        for wall in self.walls:
            if wall.contains(self.start.x, self.start.z):
                raise ValueError("start position must lie outside all walls")
        if not self.extent.contains(self.goal.x, self.goal.z):
            raise ValueError("goal center must lie inside the extent")
        object.__setattr__(self, "walls", tuple(self.walls))

    @property
    def l_min(self) -> float:
        return self.intensity_bounds[0]

    @property
    def l_max(self) -> float:
        return self.intensity_bounds[1]

    def position_free(self, x: float, z: float) -> bool:
        """True when (x, z) lies inside the extent and outside every wall."""
        if not self.extent.contains(x, z):
            return False
        return not any(w.contains(x, z) for w in self.walls)


def transition(pose: Pose, action: Action, scene: Scene) -> Pose:
    """Apply one action to a pose.

    MoveAhead advances along the heading unless the swept segment touches a
    wall or leaves the extent; blocked moves return the pose unchanged
    (legal no-ops, never errors). Rotations adjust the heading mod 2*pi and
    Stop leaves the pose untouched.
    """
    if action.kind is ActionKind.STOP:
        return pose
    if action.kind is ActionKind.ROTATE_LEFT:
        return Pose(pose.x, pose.z, pose.rot_y - action.magnitude)
    if action.kind is ActionKind.ROTATE_RIGHT:
        return Pose(pose.x, pose.z, pose.rot_y + action.magnitude)
    dx, dz = heading_vector(pose.rot_y)
    nx = pose.x + action.magnitude * dx
    nz = pose.z + action.magnitude * dz
    if not scene.extent.contains(nx, nz):
        return pose
    for wall in scene.walls:
        if segment_intersects_rect(pose.x, pose.z, nx, nz, wall):
            return pose
    return Pose(nx, nz, pose.rot_y)


def check_success(trajectory: "Trajectory", scene: Scene) -> bool:
    """Success predicate: some step both sits inside the goal disk and issues Stop."""
    if len(trajectory.poses) == 0:
        raise ValueError("trajectory must be non-empty")
    for pose, action in zip(trajectory.poses, trajectory.actions):
        if action.kind is ActionKind.STOP and scene.goal.contains(pose.x, pose.z):
            return True
    return False


# --------------------------------------------------------------------------
# Scene file codec (documented in docs/SCENE_FORMAT.md).

def _rect_from_obj(obj: dict, where: str) -> Rect:
    try:
        return Rect(float(obj["x_min"]), float(obj["z_min"]), float(obj["x_max"]), float(obj["z_max"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"bad rectangle in {where}: {exc}") from exc


def scene_to_dict(scene: Scene) -> dict:
    return {
        "schema": SCENE_SCHEMA,
        "id": scene.id,
        "extent": {"x_min": scene.extent.x_min, "z_min": scene.extent.z_min,
                   "x_max": scene.extent.x_max, "z_max": scene.extent.z_max},
        "walls": [{"x_min": w.x_min, "z_min": w.z_min, "x_max": w.x_max, "z_max": w.z_max}
                  for w in scene.walls],
        "goal": {"x": scene.goal.x, "z": scene.goal.z, "radius": scene.goal.radius},
        "start": {"x": scene.start.x, "z": scene.start.z, "rot_y": scene.start.rot_y},
        "nominal_intensity": scene.nominal_intensity,
        "intensity_bounds": [scene.intensity_bounds[0], scene.intensity_bounds[1]],
    }


def scene_from_dict(obj: dict, source: str = "<dict>") -> Scene:
    if not isinstance(obj, dict):
        raise SceneFormatError(f"{source}: scene document must be an object")
    if obj.get("schema") != SCENE_SCHEMA:
        raise SceneFormatError(f"{source}: expected schema {SCENE_SCHEMA!r}, got {obj.get('schema')!r}")
    try:
        goal = obj["goal"]
        start = obj["start"]
        bounds = obj["intensity_bounds"]
        scene = Scene(
            id=str(obj["id"]),
            extent=_rect_from_obj(obj["extent"], f"{source} extent"),
            walls=tuple(_rect_from_obj(w, f"{source} walls[{i}]") for i, w in enumerate(obj.get("walls", []))),
            goal=GoalRegion(float(goal["x"]), float(goal["z"]), float(goal["radius"])),
            start=Pose(float(start["x"]), float(start["z"]), float(start["rot_y"])),
            nominal_intensity=float(obj["nominal_intensity"]),
            intensity_bounds=(float(bounds[0]), float(bounds[1])),
        )
    except SceneFormatError:
        raise
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"{source}: {exc}") from exc
    return scene


def load_scene(path: str | Path) -> Scene:
    path = Path(path)
    if not path.is_file():
        raise SceneFormatError(f"scene file not found: {path}")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{path}: invalid JSON: {exc}") from exc
    return scene_from_dict(obj, source=str(path))


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2, sort_keys=True) + "\n")


def load_scene_suite(directory: str | Path) -> list[Scene]:
    """Load every ``*.json`` scene in a directory, ordered by scene id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise SceneFormatError(f"scene directory not found: {directory}")
    scenes = [load_scene(p) for p in sorted(directory.glob("*.json"))]
    if not scenes:
        raise SceneFormatError(f"no scene files in {directory}")
    scenes.sort(key=lambda s: s.id)
    ids = [s.id for s in scenes]
    if len(set(ids)) != len(ids):
        raise SceneFormatError(f"duplicate scene ids in {directory}")
    return scenes


# --------------------------------------------------------------------------
# Lighting schedules.

@dataclass(frozen=True)
class ConstantSchedule:
    """Same intensity at every timestep."""

    level: float
    bounds: tuple[float, float]

    def __post_init__(self) -> None:
        lo, hi = self.bounds
        if not lo <= self.level <= hi:
            raise ValueError(f"constant level {self.level} outside bounds {self.bounds}")

    def level_at(self, t: int) -> float:
        return self.level

    def covers(self, max_steps: int) -> bool:
        return True

    def summary(self) -> dict:
        return {"mode": "constant", "level": self.level}


@dataclass(frozen=True)
class SwitchedSchedule:
    """On/off pattern: step t realizes ``indicators[t-1] * on_level``."""

    on_level: float
    indicators: tuple[int, ...]
    bounds: tuple[float, float]

    def __post_init__(self) -> None:
        lo, hi = self.bounds
        if not lo <= self.on_level <= hi:
            raise ValueError(f"on level {self.on_level} outside bounds {self.bounds}")
        if any(i not in (0, 1) for i in self.indicators):
            raise ValueError("indicators must be 0 or 1")
        object.__setattr__(self, "indicators", tuple(self.indicators))

    def level_at(self, t: int) -> float:
        if not 1 <= t <= len(self.indicators):
            raise ValueError(f"schedule has no entry for timestep {t}")
        return self.indicators[t - 1] * self.on_level

    def covers(self, max_steps: int) -> bool:
        return len(self.indicators) >= max_steps

    def summary(self) -> dict:
        return {
            "mode": "switched",
            "on_level": self.on_level,
            "n_on": sum(self.indicators),
            "n_steps": len(self.indicators),
        }


LightingSchedule = ConstantSchedule | SwitchedSchedule


def constant_schedule(scene: Scene, level: float) -> ConstantSchedule:
    return ConstantSchedule(level=level, bounds=scene.intensity_bounds)
