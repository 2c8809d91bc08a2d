"""Observation rendering and configurable lighting-dependent degradation.

The attacked reference agents are lighting-sensitive only through a
:class:`DegradationProfile`: a deterministic mapping from the applied
intensity to observation corruption (bearing jitter, goal-field blackout,
obstacle-ray jitter). Profiles are plain data so experiments can construct
known loss landscapes and serialize them into run manifests.

All randomness is counter-based: noise for a field is a pure function of
(seed, timestep, quantized intensity, field), never of call order. Repeated
renders of the same inputs are bit-identical, which the two-sided rollout
comparisons of the static attack rely on.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, asdict

from .geometry import heading_vector, ray_rect_entry, ray_rect_exit, wrap_signed
from .scene import Pose, Scene

# Ray fan: evenly spaced full circle starting at the heading, clockwise.
DEFAULT_NUM_RAYS = 8
DEFAULT_RAY_RANGE = 10.0

# Intensities are quantized before keying noise so that float dust from
# different arithmetic paths to the "same" level cannot change an episode.
_INTENSITY_QUANTUM = 1e-6


@dataclass(frozen=True)
class Observation:
    """What the agent perceives at one timestep.

    ``goal_bearing`` is egocentric and signed: 0 means the goal is dead
    ahead, positive means clockwise of the heading (to the right), range
    (-pi, pi]. Goal fields are ``None`` when blacked out.
    """

    luminance: float
    goal_bearing: float | None
    goal_distance: float | None
    obstacle_rays: tuple[float, ...]
    timestep: int

    def __post_init__(self) -> None:
        if self.luminance < 0.0:
            raise ValueError("luminance must be >= 0")
        if self.goal_distance is not None and self.goal_distance < 0.0:
            raise ValueError("goal distance must be >= 0")
        if any(r < 0.0 for r in self.obstacle_rays):
            raise ValueError("obstacle rays must be >= 0")
        if self.timestep < 1:
            raise ValueError("timestep must be >= 1")
        object.__setattr__(self, "obstacle_rays", tuple(self.obstacle_rays))


@dataclass(frozen=True)
class DegradationProfile:
    """Intensity-to-corruption mapping applied after ground-truth sensing.

    The jitter scale shared by bearing and rays is

        shape(l) = linear_slope * |l - center| + bump_amp * exp(-(l - bump_center)^2 / (2 * bump_width^2))

    where ``center`` defaults to the scene's nominal intensity. Bearing
    jitter is ``bearing_gain * shape(l)`` radians; ray jitter is
    ``ray_gain * shape(l)`` meters. Goal fields are dropped entirely when
    the intensity leaves [blackout_below, blackout_above].
    """

    name: str = "identity"
    linear_slope: float = 0.0
    linear_center: float | None = None
    bump_amp: float = 0.0
    bump_center: float = 0.0
    bump_width: float = 1.0
    bearing_gain: float = 1.0
    ray_gain: float = 0.0
    blackout_below: float | None = None
    blackout_above: float | None = None

    def __post_init__(self) -> None:
        if self.bump_width <= 0.0:
            raise ValueError("bump width must be > 0")
        if self.linear_slope < 0.0 or self.bump_amp < 0.0:
            raise ValueError("shape coefficients must be >= 0")

    def shape(self, intensity: float, nominal: float) -> float:
        center = nominal if self.linear_center is None else self.linear_center
        value = self.linear_slope * abs(intensity - center)
        if self.bump_amp > 0.0:
            d = intensity - self.bump_center
            value += self.bump_amp * math.exp(-(d * d) / (2.0 * self.bump_width * self.bump_width))
        return value

    def bearing_sigma(self, intensity: float, nominal: float) -> float:
        return self.bearing_gain * self.shape(intensity, nominal)

    def ray_sigma(self, intensity: float, nominal: float) -> float:
        return self.ray_gain * self.shape(intensity, nominal)

    def blacked_out(self, intensity: float) -> bool:
        if self.blackout_below is not None and intensity < self.blackout_below:
            return True
        if self.blackout_above is not None and intensity > self.blackout_above:
            return True
        return False

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(obj: dict) -> "DegradationProfile":
        return DegradationProfile(**obj)


IDENTITY_PROFILE = DegradationProfile(name="identity")


def _noise_lanes(seed: int, t: int, intensity: float, tag: bytes, n: int) -> list[float]:
    """n deterministic values in [-1, 1), keyed on (seed, t, quantized l, tag)."""
    ql = int(round(intensity / _INTENSITY_QUANTUM))
    key = b"%d|%d|%d|" % (seed, t, ql) + tag
    out: list[float] = []
    block = 0
    while len(out) < n:
        digest = hashlib.blake2b(key + b"|%d" % block, digest_size=64).digest()
        for i in range(0, 64, 8):
            if len(out) == n:
                break
            u = int.from_bytes(digest[i:i + 8], "big") / 2.0 ** 64
            out.append(2.0 * u - 1.0)
        block += 1
    return out


def true_goal_bearing(pose: Pose, scene: Scene) -> float:
    """Signed egocentric bearing of the goal center, in (-pi, pi]."""
    absolute = math.atan2(scene.goal.x - pose.x, scene.goal.z - pose.z)
    return wrap_signed(absolute - pose.rot_y)


def cast_rays(pose: Pose, scene: Scene,
              n_rays: int = DEFAULT_NUM_RAYS, max_range: float = DEFAULT_RAY_RANGE) -> tuple[float, ...]:
    """Free-space distance along each of n evenly spaced rays, capped at max_range."""
    rays = []
    for i in range(n_rays):
        angle = pose.rot_y + i * (2.0 * math.pi / n_rays)
        dx, dz = heading_vector(angle)
        dist = ray_rect_exit(pose.x, pose.z, dx, dz, scene.extent)
        for wall in scene.walls:
            hit = ray_rect_entry(pose.x, pose.z, dx, dz, wall)
            if hit is not None and hit < dist:
                dist = hit
        rays.append(min(dist, max_range))
    return tuple(rays)


def render(scene: Scene, pose: Pose, intensity: float, degradation: DegradationProfile,
           seed: int, t: int, n_rays: int = DEFAULT_NUM_RAYS, max_range: float = DEFAULT_RAY_RANGE) -> Observation:
    """Render the agent's observation under the applied intensity.

    Intensity 0 is always admissible (the dynamic attack's off level) even
    when the scene's lower bound is positive; anything outside [0, l_max]
    is a domain error.
    """
    if not 0.0 <= intensity <= scene.l_max:
        raise ValueError(f"intensity {intensity} outside [0, {scene.l_max}]")
    if t < 1:
        raise ValueError("timestep must be >= 1")

    rays = cast_rays(pose, scene, n_rays=n_rays, max_range=max_range)
    nominal = scene.nominal_intensity

    if degradation.blacked_out(intensity):
        bearing: float | None = None
        distance: float | None = None
    else:
        bearing = true_goal_bearing(pose, scene)
        distance = scene.goal.distance_from(pose.x, pose.z)
        sigma_b = degradation.bearing_sigma(intensity, nominal)
        if sigma_b > 0.0:
            (n1,) = _noise_lanes(seed, t, intensity, b"bearing", 1)
            bearing = wrap_signed(bearing + sigma_b * n1)

    sigma_r = degradation.ray_sigma(intensity, nominal)
    if sigma_r > 0.0:
        lanes = _noise_lanes(seed, t, intensity, b"rays", len(rays))
        rays = tuple(min(max(r + sigma_r * n, 0.0), max_range) for r, n in zip(rays, lanes))

    return Observation(
        luminance=intensity,
        goal_bearing=bearing,
        goal_distance=distance,
        obstacle_rays=rays,
        timestep=t,
    )
