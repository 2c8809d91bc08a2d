"""Planar geometry primitives: axis-aligned rectangles, segment tests, ray casts.

All coordinates live in the x-z plane; the y axis is vertical and never
appears here. Angles follow the heading convention used throughout the
package: a heading of ``rot_y`` radians corresponds to the unit vector
``(sin rot_y, cos rot_y)``, so 0 faces +z and angles grow clockwise when
viewed from +y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Normalize an angle to [0, 2*pi)."""
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    return a if a < TWO_PI else 0.0


def wrap_signed(angle: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(angle, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a


def heading_vector(rot_y: float) -> tuple[float, float]:
    return (math.sin(rot_y), math.cos(rot_y))


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle in the x-z plane."""

    x_min: float
    z_min: float
    x_max: float
    z_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.z_min < self.z_max):
            raise ValueError(f"degenerate rectangle: {self}")
        for v in (self.x_min, self.z_min, self.x_max, self.z_max):
            if not math.isfinite(v):
                raise ValueError("rectangle coordinates must be finite")

    def contains(self, x: float, z: float) -> bool:
        return self.x_min <= x <= self.x_max and self.z_min <= z <= self.z_max

    def contains_strict(self, x: float, z: float) -> bool:
        return self.x_min < x < self.x_max and self.z_min < z < self.z_max


def segment_intersects_rect(x0: float, z0: float, x1: float, z1: float, rect: Rect) -> bool:
    """True if the closed segment (x0,z0)-(x1,z1) touches the closed rectangle.

    Standard slab clipping: intersect the segment's parameter interval [0, 1]
    with the slabs of both axes.
    """
    t_lo, t_hi = 0.0, 1.0
    dx = x1 - x0
    dz = z1 - z0
    for delta, lo, hi, p in ((dx, rect.x_min, rect.x_max, x0), (dz, rect.z_min, rect.z_max, z0)):
        if delta == 0.0:
            if p < lo or p > hi:
                return False
        else:
            ta = (lo - p) / delta
            tb = (hi - p) / delta
            if ta > tb:
                ta, tb = tb, ta
            t_lo = max(t_lo, ta)
            t_hi = min(t_hi, tb)
            if t_lo > t_hi:
                return False
    return True


def ray_rect_entry(px: float, pz: float, dx: float, dz: float, rect: Rect) -> float | None:
    """Distance along the ray (px,pz)+t*(dx,dz), t >= 0, to first contact with rect.

    Returns None when the ray misses. A ray starting inside returns 0.0.
    """
    t_lo, t_hi = 0.0, math.inf
    for delta, lo, hi, p in ((dx, rect.x_min, rect.x_max, px), (dz, rect.z_min, rect.z_max, pz)):
        if delta == 0.0:
            if p < lo or p > hi:
                return None
        else:
            ta = (lo - p) / delta
            tb = (hi - p) / delta
            if ta > tb:
                ta, tb = tb, ta
            t_lo = max(t_lo, ta)
            t_hi = min(t_hi, tb)
            if t_lo > t_hi:
                return None
    return t_lo


def ray_rect_exit(px: float, pz: float, dx: float, dz: float, rect: Rect) -> float:
    """Distance along the ray from a point inside rect to where it leaves rect."""
    t_hi = math.inf
    for delta, lo, hi, p in ((dx, rect.x_min, rect.x_max, px), (dz, rect.z_min, rect.z_max, pz)):
        if delta == 0.0:
            continue
        ta = (lo - p) / delta
        tb = (hi - p) / delta
        if ta > tb:
            ta, tb = tb, ta
        t_hi = min(t_hi, tb)
    return max(t_hi, 0.0)
