"""Straight multi-lane road segment with a bubble region.

Road frame: ``s`` runs along the road axis, ``d`` is the lateral offset
measured from the left road edge and grows to the right. Lane 0 is the
leftmost lane.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .errors import InvalidGeometryError, OutOfRoadError

STRADDLING = None  # lane_of_box result when a box is not inside a single lane

YELLOW = "yellow"
EDGE = "edge"


class Point(NamedTuple):
    s: float
    d: float


class LineSpec(NamedTuple):
    offset: float
    kind: str


@dataclass(frozen=True)
class RoadModel:
    lane_count: int
    lane_width: float
    road_length: float
    bubble_offset: float
    bubble_length: float
    illegal_lines: tuple[LineSpec, ...]

    @property
    def width(self) -> float:
        return self.lane_count * self.lane_width

    @property
    def bubble_start(self) -> float:
        return self.bubble_offset

    @property
    def bubble_end(self) -> float:
        return self.bubble_offset + self.bubble_length

    @property
    def has_yellow_line(self) -> bool:
        return any(line.kind == YELLOW for line in self.illegal_lines)

    def centerline(self, lane: int) -> float:
        if not 0 <= lane < self.lane_count:
            raise IndexError(f"lane {lane} does not exist")
        return (lane + 0.5) * self.lane_width

    def centerlines(self) -> list[float]:
        return [self.centerline(i) for i in range(self.lane_count)]

    def lane_band(self, lane: int) -> tuple[float, float]:
        return lane * self.lane_width, (lane + 1) * self.lane_width

    def nearest_lane(self, d: float) -> int:
        lane = int(math.floor(d / self.lane_width))
        return min(max(lane, 0), self.lane_count - 1)

    def in_bubble(self, s: float) -> bool:
        return self.bubble_start <= s <= self.bubble_end

    def to_dict(self) -> dict:
        return {
            "lanes": self.lane_count,
            "lane_width_m": self.lane_width,
            "length_m": self.road_length,
            "bubble_offset_m": self.bubble_offset,
            "bubble_length_m": self.bubble_length,
            "yellow_line": self.has_yellow_line,
        }


def build_road(
    lane_count: int = 2,
    lane_width: float = 3.5,
    road_length: float = 500.0,
    bubble_offset: float = 50.0,
    bubble_length: float = 300.0,
    yellow_line: bool = False,
) -> RoadModel:
    """Build a road, validating dimensions.

    Both outer edges are always illegal lines. With ``yellow_line`` the
    left edge (the boundary to opposing traffic) is a yellow line instead
    of a plain edge line.
    """
    dims = (lane_width, road_length, bubble_offset, bubble_length)
    if int(lane_count) != lane_count or lane_count < 1:
        raise InvalidGeometryError(f"lane_count must be a positive integer, got {lane_count!r}")
    if any(not math.isfinite(v) or v <= 0 for v in dims):
        raise InvalidGeometryError(f"road dimensions must be positive, got {dims}")
    if bubble_offset + bubble_length > road_length:
        raise InvalidGeometryError(
            f"bubble [{bubble_offset}, {bubble_offset + bubble_length}] overflows road of length {road_length}"
        )
    lane_count = int(lane_count)
    width = lane_count * lane_width
    lines = (
        LineSpec(0.0, YELLOW if yellow_line else EDGE),
        LineSpec(float(width), EDGE),
    )
    return RoadModel(
        lane_count=lane_count,
        lane_width=float(lane_width),
        road_length=float(road_length),
        bubble_offset=float(bubble_offset),
        bubble_length=float(bubble_length),
        illegal_lines=lines,
    )


PRESETS = {
    "urban2": dict(lane_count=2, lane_width=3.5, road_length=500.0,
                   bubble_offset=50.0, bubble_length=300.0, yellow_line=True),
    "highway4": dict(lane_count=4, lane_width=3.5, road_length=600.0,
                     bubble_offset=50.0, bubble_length=300.0, yellow_line=False),
}

_CONFIG_KEYS = {
    "lanes": "lane_count",
    "lane_width_m": "lane_width",
    "length_m": "road_length",
    "bubble_offset_m": "bubble_offset",
    "bubble_length_m": "bubble_length",
    "yellow_line": "yellow_line",
}


def road_from_dict(cfg: dict) -> RoadModel:
    """Build a road from campaign-config keys (``lanes``, ``lane_width_m``, ...)."""
    kwargs = {}
    for key, arg in _CONFIG_KEYS.items():
        if key in cfg:
            kwargs[arg] = cfg[key]
    return build_road(**kwargs)


def load_road(spec: str) -> RoadModel:
    """Resolve ``urban2``, ``highway4`` or ``custom:<file.json>``."""
    if spec in PRESETS:
        return build_road(**PRESETS[spec])
    if spec.startswith("custom:"):
        path = Path(spec[len("custom:"):])
        with open(path) as fh:
            cfg = json.load(fh)
        return road_from_dict(cfg.get("road", cfg))
    raise InvalidGeometryError(f"unknown road preset {spec!r}")


def _box_lateral_extent(road: RoadModel, box) -> tuple[float, float]:
    ds = [c.d for c in box.corners()]
    lo, hi = min(ds), max(ds)
    if lo < 0.0 or hi > road.width:
        raise OutOfRoadError(f"box lateral extent [{lo:.3f}, {hi:.3f}] leaves road [0, {road.width}]")
    return lo, hi


def lane_of_box(road: RoadModel, box) -> int | None:
    """Lane index when all four corners lie strictly inside one lane band, else ``STRADDLING``.

    Only the lateral extent is checked against the road; vehicles may run
    past the longitudinal ends of the modelled segment.
    """
    lo, hi = _box_lateral_extent(road, box)
    lane = int(math.floor(lo / road.lane_width))
    band_lo, band_hi = road.lane_band(lane)
    if band_lo < lo and hi < band_hi:
        return lane
    return STRADDLING


def distance_to_illegal_lines(road: RoadModel, box) -> float:
    """Shortest distance from a box to any illegal line (0 on contact or crossing)."""
    ds = [c.d for c in box.corners()]
    lo, hi = min(ds), max(ds)
    best = math.inf
    for line in road.illegal_lines:
        if lo <= line.offset <= hi:
            return 0.0
        best = min(best, abs(lo - line.offset), abs(hi - line.offset))
    return best
