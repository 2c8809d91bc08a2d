#!/usr/bin/env python3
"""Regenerate the bundled scene suite.

Deterministic: a fixed master seed produces the 50 committed scenes. Each
candidate scene is validated before acceptance:

  * walls keep a clear corridor around the start-goal segment,
  * the goal-seeker succeeds under clean nominal lighting with both the
    identity profile and the bundled benchmark profile.

Run from the repository root:  python3 scripts/gen_scenes.py
"""

from __future__ import annotations

import json
import math
import random
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from lightattack.agents import GoalSeekerAgent
from lightattack.episode import EpisodeSpec, run_episode
from lightattack.geometry import Rect, segment_intersects_rect
from lightattack.scene import GoalRegion, Pose, Scene, check_success, constant_schedule, save_scene
from lightattack.sensing import DegradationProfile

MASTER_SEED = 20250810
N_SCENES = 50
BOUNDS = (0.0, 1.5)
NOMINAL = 1.0
GOAL_RADIUS = 0.5
CORRIDOR_CLEARANCE = 0.8
MAX_STEPS = 150

BENCHMARK_PROFILE = {
    "name": "benchmark_bump",
    "bump_amp": 3.0,
    "bump_center": 1.4,
    "bump_width": 0.08,
    "bearing_gain": 1.0,
    "blackout_below": 0.05,
}


def inflate(rect: Rect, margin: float) -> Rect:
    return Rect(rect.x_min - margin, rect.z_min - margin,
                rect.x_max + margin, rect.z_max + margin)


def sample_scene(rng: random.Random, scene_id: str) -> Scene | None:
    width = rng.uniform(10.0, 14.0)
    depth = rng.uniform(10.0, 14.0)
    extent = Rect(0.0, 0.0, width, depth)

    sx = rng.uniform(1.0, width - 1.0)
    sz = rng.uniform(1.0, depth - 1.0)
    for _ in range(40):
        distance = rng.uniform(5.5, 8.5)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        gx = sx + distance * math.sin(angle)
        gz = sz + distance * math.cos(angle)
        if 1.0 <= gx <= width - 1.0 and 1.0 <= gz <= depth - 1.0:
            break
    else:
        return None

    bearing = math.atan2(gx - sx, gz - sz)
    heading = bearing + rng.choice([-3, -2, -1, 0, 1, 2, 3]) * math.pi / 6 + rng.uniform(-0.1, 0.1)
    start = Pose(sx, sz, heading)
    goal = GoalRegion(gx, gz, GOAL_RADIUS)

    walls: list[Rect] = []
    attempts = 0
    target_walls = rng.randint(2, 4)
    while len(walls) < target_walls and attempts < 200:
        attempts += 1
        wx = rng.uniform(0.5, width - 3.0)
        wz = rng.uniform(0.5, depth - 3.0)
        wall = Rect(wx, wz, wx + rng.uniform(0.6, 2.2), wz + rng.uniform(0.6, 2.2))
        padded = inflate(wall, CORRIDOR_CLEARANCE)
        if segment_intersects_rect(sx, sz, gx, gz, padded):
            continue
        if padded.contains(sx, sz) or padded.contains(gx, gz):
            continue
        if inflate(wall, GOAL_RADIUS + 0.5).contains(gx, gz):
            continue
        if any(segment_intersects_rect(w.x_min, w.z_min, w.x_max, w.z_max, inflate(wall, 0.3))
               for w in walls):
            continue
        walls.append(wall)
    if len(walls) < 2:
        return None

    try:
        return Scene(id=scene_id, extent=extent, walls=tuple(walls), goal=goal,
                     start=start, nominal_intensity=NOMINAL, intensity_bounds=BOUNDS)
    except ValueError:
        return None


def clean_run_succeeds(scene: Scene, profile: DegradationProfile) -> bool:
    spec = EpisodeSpec(scene_id=scene.id, instruction="reach the goal", max_steps=MAX_STEPS, seed=0)
    factory = lambda sc, sp: GoalSeekerAgent(sc.goal.radius)
    trajectory = run_episode(factory, scene, constant_schedule(scene, NOMINAL), spec, profile)
    return check_success(trajectory, scene)


def main() -> int:
    out_dir = REPO / "src" / "lightattack" / "data" / "scenes"
    out_dir.mkdir(parents=True, exist_ok=True)
    for stale in out_dir.glob("*.json"):
        stale.unlink()

    benchmark = DegradationProfile.from_dict(BENCHMARK_PROFILE)
    identity = DegradationProfile()
    scenes = []
    attempt = 0
    while len(scenes) < N_SCENES:
        attempt += 1
        rng = random.Random((MASTER_SEED, attempt))
        scene = sample_scene(rng, f"scene_{len(scenes):03d}")
        if scene is None:
            continue
        if not clean_run_succeeds(scene, identity):
            continue
        if not clean_run_succeeds(scene, benchmark):
            continue
        scenes.append(scene)
        save_scene(scene, out_dir / f"{scene.id}.json")

    profile_path = REPO / "src" / "lightattack" / "data" / "benchmark_profile.json"
    profile_path.write_text(json.dumps(BENCHMARK_PROFILE, indent=2, sort_keys=True) + "\n")

    print(f"wrote {len(scenes)} scenes to {out_dir} (attempts: {attempt})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
