"""Vehicle state, fixed-step kinematic integration and box geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

from .errors import InvalidGeometryError, NumericError
from .road import Point

DT = 0.1
ACCEL_MAX = 4.0
BRAKE_MAX = 8.0
YAW_RATE_MAX = 0.5
HEADING_LIMIT = math.pi / 3

EGO = "EGO"
NPC = "NPC"


@dataclass(frozen=True)
class OrientedBox:
    center: Point
    heading: float
    length: float
    width: float

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise InvalidGeometryError(f"box dimensions must be positive: {self.length} x {self.width}")

    @cached_property
    def axes(self) -> tuple[tuple[float, float], tuple[float, float]]:
        c, s = math.cos(self.heading), math.sin(self.heading)
        return (c, s), (-s, c)

    @cached_property
    def _corners(self) -> tuple[Point, ...]:
        (fx, fy), (rx, ry) = self.axes
        hl, hw = self.length / 2.0, self.width / 2.0
        cs, cd = self.center
        out = []
        for lx, ly in ((-hl, -hw), (-hl, hw), (hl, hw), (hl, -hw)):
            out.append(Point(cs + fx * lx + rx * ly, cd + fy * lx + ry * ly))
        return tuple(out)

    def corners(self) -> tuple[Point, ...]:
        return self._corners

    @property
    def radius(self) -> float:
        return 0.5 * math.hypot(self.length, self.width)


@dataclass(frozen=True)
class VehicleState:
    id: str
    kind: str
    s: float
    d: float
    heading: float
    speed: float
    length: float = 4.7
    width: float = 2.0

    @property
    def position(self) -> Point:
        return Point(self.s, self.d)

    @property
    def forward(self) -> tuple[float, float]:
        return math.cos(self.heading), math.sin(self.heading)

    @property
    def right(self) -> tuple[float, float]:
        return -math.sin(self.heading), math.cos(self.heading)

    def box(self) -> OrientedBox:
        return OrientedBox(self.position, self.heading, self.length, self.width)


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def step_vehicle(state: VehicleState, target_point: Point, target_speed: float, dt: float = DT,
                 accel_max: float = ACCEL_MAX, brake_max: float = BRAKE_MAX,
                 yaw_rate_max: float = YAW_RATE_MAX) -> VehicleState:
    """Advance one step toward ``target_point`` at a speed clamped by the accel limits."""
    values = (state.s, state.d, state.heading, state.speed, target_point[0], target_point[1], target_speed, dt)
    if not all(math.isfinite(v) for v in values):
        raise NumericError(f"non-finite kinematic input: {values}")
    if dt <= 0 or target_speed < 0:
        raise NumericError(f"dt must be positive and target_speed non-negative (dt={dt}, v*={target_speed})")

    dv = min(max(target_speed - state.speed, -brake_max * dt), accel_max * dt)
    speed = max(0.0, state.speed + dv)

    ds = target_point[0] - state.s
    dd = target_point[1] - state.d
    heading = state.heading
    if ds != 0.0 or dd != 0.0:
        turn = _wrap(math.atan2(dd, ds) - heading)
        limit = yaw_rate_max * dt
        heading += min(max(turn, -limit), limit)
        heading = min(max(heading, -HEADING_LIMIT), HEADING_LIMIT)

    step = speed * dt
    return replace(state, s=state.s + step * math.cos(heading), d=state.d + step * math.sin(heading),
                   heading=heading, speed=speed)


def _project(corners, axis) -> tuple[float, float]:
    ax, ay = axis
    dots = [x * ax + y * ay for x, y in corners]
    return min(dots), max(dots)


def _overlap(a: OrientedBox, b: OrientedBox) -> bool:
    ca, cb = a.corners(), b.corners()
    for axis in a.axes + b.axes:
        lo_a, hi_a = _project(ca, axis)
        lo_b, hi_b = _project(cb, axis)
        if hi_a < lo_b or hi_b < lo_a:
            return False
    return True


def _point_segment(p, a, b) -> float:
    ex, ey = b[0] - a[0], b[1] - a[1]
    px, py = p[0] - a[0], p[1] - a[1]
    denom = ex * ex + ey * ey
    t = 0.0 if denom == 0.0 else min(max((px * ex + py * ey) / denom, 0.0), 1.0)
    return math.hypot(px - t * ex, py - t * ey)


def box_distance(a: OrientedBox, b: OrientedBox) -> float:
    """Minimum distance between two boxes; 0 when they touch or overlap."""
    if _overlap(a, b):
        return 0.0
    best = math.inf
    for p_box, q_box in ((a, b), (b, a)):
        q = q_box.corners()
        for p in p_box.corners():
            for i in range(4):
                best = min(best, _point_segment(p, q[i], q[(i + 1) % 4]))
    return best


def boxes_collide(a: OrientedBox, b: OrientedBox) -> bool:
    """Overlap test where edge or corner contact counts as a collision."""
    ca, cb = a.center, b.center
    if math.hypot(ca[0] - cb[0], ca[1] - cb[1]) > a.radius + b.radius:
        return False
    return _overlap(a, b)
