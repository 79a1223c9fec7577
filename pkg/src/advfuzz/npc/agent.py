"""Per-NPC maneuver state machine: detect, decide, plan, follow, complete."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..errors import PlanningError
from ..kinematics import DT, VehicleState
from ..road import Point, RoadModel
from .behavior import BehaviorTree, ManeuverKind, default_tree
from .planning import (PlannerParams, SpeedProfile, WaypointPath, constant_profile, plan_speed,
                       plan_waypoints, ramp_profile)
from .zones import Zone, detect_ego


class ManeuverStatus(str, enum.Enum):
    IDLE = "IDLE"
    RUNNING = "RUNNING"


@dataclass(frozen=True)
class AgentParams:
    ell: float = 20.0
    completion_tol: float = 1.0
    accel_boost: float = 4.0
    decel_drop: float = 4.0
    default_rate: float = 3.0
    min_lookahead: float = 4.0
    lookahead_time: float = 0.8
    planner: PlannerParams = PlannerParams()


@dataclass
class Maneuver:
    kind: ManeuverKind = ManeuverKind.KEEP_SPEED
    status: ManeuverStatus = ManeuverStatus.IDLE
    path: WaypointPath | None = None
    profile: SpeedProfile | None = None
    started: float = 0.0
    gated: bool = False
    zone: Zone | None = None

    def __post_init__(self):
        if (self.status is ManeuverStatus.RUNNING) != (self.path is not None):
            raise ValueError("a maneuver carries a plan exactly when it is RUNNING")


class AdversarialNPC:
    """Decision and tracking logic for one adversarial NPC.

    ``rng`` must be private to this agent so that replaying the seed
    replays its decisions.
    """

    def __init__(self, npc_id: str, road: RoadModel, rng: np.random.Generator,
                 params: AgentParams = AgentParams(), tree: BehaviorTree | None = None):
        self.id = npc_id
        self.road = road
        self.rng = rng
        self.params = params
        self.tree = tree or default_tree()
        self.maneuver = Maneuver()
        self.wrecked = False
        self._cursor = 0

    @property
    def idle(self) -> bool:
        return self.maneuver.status is ManeuverStatus.IDLE

    def decide(self, npc: VehicleState, ego: VehicleState, now: float, active: bool) -> Maneuver:
        """Pick and plan a new maneuver; only legal while IDLE."""
        if not self.idle:
            raise RuntimeError(f"{self.id}: decide called while {self.maneuver.kind.value} is RUNNING")
        zone = None
        if active:
            zone = detect_ego(npc, ego, self.params.ell, self.road.lane_width)
            kind = self.tree.tick(zone, self.rng)
        else:
            kind = ManeuverKind.KEEP_SPEED
        path, kind = self._waypoints(npc, kind)
        profile = self._speeds(path, kind, npc, ego)
        self.maneuver = Maneuver(kind, ManeuverStatus.RUNNING, path, profile, now, gated=not active, zone=zone)
        self._cursor = 0
        return self.maneuver

    def _waypoints(self, npc, kind) -> tuple[WaypointPath, ManeuverKind]:
        try:
            return plan_waypoints(npc, kind, self.road, self.rng, self.params.planner), kind
        except PlanningError:
            kind = ManeuverKind.KEEP_SPEED
            return plan_waypoints(npc, kind, self.road, self.rng, self.params.planner), kind

    def _speeds(self, path, kind, npc, ego) -> SpeedProfile:
        p = self.params
        if kind is ManeuverKind.KEEP_SPEED:
            return constant_profile(path, npc.speed)
        profile = plan_speed(path, npc, ego, p.planner.horizon, p.planner)
        if profile.target is not None:
            return profile
        if kind is ManeuverKind.ACCELERATION_STRAIGHT:
            goal = min(p.planner.v_cap, max(npc.speed, ego.speed) + p.accel_boost)
            return ramp_profile(path, npc.speed, goal, p.default_rate)
        if kind is ManeuverKind.DECELERATION_STRAIGHT:
            return ramp_profile(path, npc.speed, max(0.0, npc.speed - p.decel_drop), p.default_rate)
        return profile

    def command(self, npc: VehicleState, now: float, dt: float = DT) -> tuple[Point, float]:
        """Pure-pursuit target point on the path plus the profile speed one step ahead."""
        m = self.maneuver
        if self.wrecked or m.path is None:
            return Point(npc.s + 1.0, npc.d), 0.0 if self.wrecked else npc.speed
        pts = m.path.points
        arcs = m.path.arcs
        dist = np.hypot(pts[self._cursor:, 0] - npc.s, pts[self._cursor:, 1] - npc.d)
        self._cursor += int(np.argmin(dist))
        ahead = arcs[self._cursor] + max(self.params.min_lookahead, self.params.lookahead_time * npc.speed)
        if ahead >= arcs[-1]:
            end_s, end_d = pts[-1]
            target = Point(float(end_s + ahead - arcs[-1]), float(end_d))
        else:
            target = Point(float(np.interp(ahead, arcs, pts[:, 0])), float(np.interp(ahead, arcs, pts[:, 1])))
        return target, max(m.profile.speed_at(now - m.started + dt), 0.0)

    def update_completion(self, npc: VehicleState, ego: VehicleState, now: float, active: bool) -> bool:
        """Return the maneuver to IDLE once it is done; True when that happened."""
        m = self.maneuver
        if m.status is not ManeuverStatus.RUNNING:
            return False
        end_s, end_d = m.path.end
        limit = self.params.planner.horizon * (2.0 if m.kind.is_lane_change else 1.0)
        done = (
            (m.gated and active)
            or math.hypot(npc.s - end_s, npc.d - end_d) <= self.params.completion_tol
            or npc.s >= end_s
            or now - m.started >= limit
        )
        if done:
            self.maneuver = Maneuver()
        return done

    def wreck(self) -> None:
        self.wrecked = True
        self.maneuver = Maneuver()
