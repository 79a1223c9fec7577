"""Baseline EGO controller standing in for the driving system under test.

The controller is deliberately competent but imperfect: it follows the
nearest leader with IDM, changes lanes toward its destination or around a
slow leader when gaps allow, and, when boxed in behind a stopped vehicle,
nudges past it on the left even if that crosses the road's left line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol

from .kinematics import DT, VehicleState
from .road import Point, RoadModel

PERCEPTION_RANGE = 100.0


@dataclass(frozen=True)
class EgoObservation:
    self: VehicleState
    destination: Point
    neighbors: tuple[VehicleState, ...]
    road: RoadModel


@dataclass(frozen=True)
class EgoCommand:
    target_point: Point
    target_speed: float


@dataclass(frozen=True)
class EgoParams:
    v_desired: float = 14.0
    v_max: float = 16.0
    s0: float = 2.0
    headway: float = 1.5
    accel: float = 2.0
    decel: float = 3.0
    delta: float = 4.0
    blocked_gap: float = 25.0
    blocked_ratio: float = 0.5
    lc_front_gap: float = 15.0
    lc_rear_gap: float = 10.0
    stopped_speed: float = 0.5
    nudge_margin: float = 0.5
    nudge_speed: float = 5.0
    dest_decel: float = 2.0
    dest_stop_margin: float = 0.2
    dt: float = DT


class EgoController(Protocol):
    def __call__(self, obs: EgoObservation) -> EgoCommand: ...


def observe(ego: VehicleState, others, destination: Point, road: RoadModel) -> EgoObservation:
    """Ground-truth observation of every vehicle within the perception range."""
    near = [v for v in others if math.hypot(v.s - ego.s, v.d - ego.d) <= PERCEPTION_RANGE]
    near.sort(key=lambda v: (abs(v.s - ego.s), v.id))
    return EgoObservation(ego, destination, tuple(near), road)


def _lateral_extent(v: VehicleState) -> tuple[float, float]:
    ds = [c.d for c in v.box().corners()]
    return min(ds), max(ds)


def _long_extent(v: VehicleState) -> tuple[float, float]:
    ss = [c.s for c in v.box().corners()]
    return min(ss), max(ss)


def _overlaps(lo: float, hi: float, band: tuple[float, float]) -> bool:
    return lo < band[1] and hi > band[0]


def idm_acceleration(v: float, v_lead: float | None, gap: float | None, p: EgoParams) -> float:
    """IDM acceleration; ``gap`` is bumper-to-bumper, ``None`` means free road."""
    free = 1.0 - (v / p.v_desired) ** p.delta
    if gap is None:
        return p.accel * free
    dv = v - v_lead
    s_star = p.s0 + max(0.0, v * p.headway + v * dv / (2.0 * math.sqrt(p.accel * p.decel)))
    return p.accel * (free - (s_star / max(gap, 1e-3)) ** 2)


def _leader(ego: VehicleState, neighbors, band: tuple[float, float]):
    """Closest vehicle ahead whose box overlaps ``band`` laterally, with its bumper gap."""
    best, best_gap = None, math.inf
    ego_front = _long_extent(ego)[1]
    for v in neighbors:
        if v.s <= ego.s:
            continue
        lo, hi = _lateral_extent(v)
        if not _overlaps(lo, hi, band):
            continue
        gap = _long_extent(v)[0] - ego_front
        if gap < best_gap:
            best, best_gap = v, gap
    return best, best_gap


def _lane_gap_ok(ego: VehicleState, neighbors, band, p: EgoParams) -> bool:
    ego_rear, ego_front = _long_extent(ego)
    for v in neighbors:
        lo, hi = _lateral_extent(v)
        if not _overlaps(lo, hi, band):
            continue
        rear, front = _long_extent(v)
        if v.s >= ego.s:
            if rear - ego_front <= p.lc_front_gap:
                return False
        elif ego_rear - front <= p.lc_rear_gap:
            return False
    return True


@dataclass
class BaselineEgo:
    """IDM car-following plus rule-based lane changes.

    Stateless between calls: an unfinished lane change is recognised from
    the vehicle's lateral offset and heading, so identical observations
    always yield identical commands.
    """

    params: EgoParams = field(default_factory=EgoParams)

    def __call__(self, obs: EgoObservation) -> EgoCommand:
        return self.decide(obs)

    def decide(self, obs: EgoObservation) -> EgoCommand:
        p, ego, road = self.params, obs.self, obs.road
        lane = road.nearest_lane(ego.d)
        offset = ego.d - road.centerline(lane)
        dest_lane = road.nearest_lane(obs.destination.d)
        target_d = road.centerline(lane)
        corridor = [road.lane_band(lane)]
        speed_cap = p.v_max

        direction = int(math.copysign(1, offset)) if abs(offset) > 0.3 else 0
        continuing = (direction != 0 and ego.heading * direction > 0.02
                      and 0 <= lane + direction < road.lane_count)
        if continuing:
            target_d = road.centerline(lane + direction)
            corridor.append(road.lane_band(lane + direction))
        else:
            leader, gap = _leader(ego, obs.neighbors, road.lane_band(lane))
            blocked = (leader is not None and gap < p.blocked_gap
                       and leader.speed < p.blocked_ratio * p.v_desired)
            candidates = []
            if dest_lane != lane:
                candidates.append(lane + (1 if dest_lane > lane else -1))
            if blocked:
                for step in (-1, 1):
                    if lane + step not in candidates:
                        candidates.append(lane + step)
            chosen = None
            for cand in candidates:
                if 0 <= cand < road.lane_count and _lane_gap_ok(ego, obs.neighbors, road.lane_band(cand), p):
                    chosen = cand
                    break
            if chosen is not None:
                target_d = road.centerline(chosen)
                corridor.append(road.lane_band(chosen))
            elif blocked and leader.speed < p.stopped_speed:
                # no legal lane left: squeeze past the stopped leader on its left
                left_edge = _lateral_extent(leader)[0]
                target_d = min(target_d, left_edge - ego.width / 2.0 - p.nudge_margin)
                corridor = [(target_d - ego.width / 2.0, target_d + ego.width / 2.0)]
                speed_cap = p.nudge_speed

        lead_v, lead_gap = None, None
        for band in corridor:
            leader, gap = _leader(ego, obs.neighbors, band)
            if leader is not None and (lead_gap is None or gap < lead_gap):
                lead_v, lead_gap = leader.speed, gap
        acc = idm_acceleration(ego.speed, lead_v, lead_gap, p)
        speed = ego.speed + acc * p.dt

        to_go = obs.destination.s - ego.s
        speed = min(speed, math.sqrt(2.0 * p.dest_decel * max(to_go - p.dest_stop_margin, 0.0)), speed_cap)
        speed = min(max(speed, 0.0), p.v_max)

        lookahead = max(8.0, 1.2 * ego.speed)
        return EgoCommand(Point(ego.s + lookahead, target_d), speed)


def ego_decide(obs: EgoObservation, params: EgoParams | None = None) -> EgoCommand:
    return BaselineEgo(params or EgoParams()).decide(obs)


_REGISTRY: dict[str, Callable[[], EgoController]] = {"baseline": BaselineEgo}


def register_controller(name: str, factory: Callable[[], EgoController]) -> None:
    """Make an EGO policy selectable by name (CLI ``--ego``)."""
    _REGISTRY[name] = factory


def make_controller(name: str) -> EgoController:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown EGO controller {name!r}; known: {sorted(_REGISTRY)}") from None


def controller_names() -> list[str]:
    return sorted(_REGISTRY)
