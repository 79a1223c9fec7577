"""Collision liability: rear-end and unsafe-lane-change rules, EGO at fault otherwise."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import NotApplicableError, OutOfRoadError
from .npc.agent import ManeuverStatus
from .npc.behavior import ManeuverKind
from .npc.zones import detect_ego, relative_offset
from .records import COLLISION, RULE_BREAKING, SimulationRecord, ViolationEvent
from .road import STRADDLING, RoadModel, lane_of_box, road_from_dict

EGO_FAULT = "EGO_Fault"
NPC_FAULT = "NPC_Fault"

REAR_END_BY_NPC = "RearEndByNPC"
NPC_UNSAFE_LANE_CHANGE = "NPCUnsafeLaneChange"
DEFAULT_EGO = "Default_EGO"

SWITCH_WINDOW = 30

_LANE_CHANGES = {ManeuverKind.LEFT_CHANGE.value, ManeuverKind.RIGHT_CHANGE.value}


@dataclass(frozen=True)
class FaultVerdict:
    frame: int
    npc: str
    verdict: str
    rule: str
    x: float
    ego_lane: int | None
    npc_lane: int | None
    switched: bool
    npc_maneuver: tuple[str, str] | None
    zone: str | None = None
    both_changing: bool = False      # NPC and EGO both mid lane change: falls through to EGO_Fault

    def to_dict(self) -> dict:
        return {
            "frame": self.frame, "npc": self.npc, "verdict": self.verdict, "rule": self.rule,
            "evidence": {
                "x": self.x, "ego_lane": self.ego_lane, "npc_lane": self.npc_lane, "switched": self.switched,
                "npc_maneuver": list(self.npc_maneuver) if self.npc_maneuver else None,
                "zone": self.zone, "both_changing": self.both_changing,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FaultVerdict":
        ev = data["evidence"]
        return cls(data["frame"], data["npc"], data["verdict"], data["rule"], ev["x"], ev["ego_lane"],
                   ev["npc_lane"], ev["switched"], tuple(ev["npc_maneuver"]) if ev["npc_maneuver"] else None,
                   ev.get("zone"), ev.get("both_changing", False))


def record_road(record: SimulationRecord) -> RoadModel:
    return road_from_dict(record.setup["road"])


def lane_or_straddling(road: RoadModel, state) -> int | None:
    """Lane index of a vehicle; a box sticking out of the road counts as straddling."""
    try:
        return lane_of_box(road, state.box())
    except OutOfRoadError:
        return STRADDLING


def ego_lanes(record: SimulationRecord, road: RoadModel | None = None) -> list[int | None]:
    road = road or record_road(record)
    return [lane_or_straddling(road, f.ego) for f in record.frames]


def switched(record: SimulationRecord, window: int = SWITCH_WINDOW, road: RoadModel | None = None) -> bool:
    """Whether the EGO changed lanes within the last ``window`` frames.

    Straddling frames bridge lanes: lane 0 -> straddling -> lane 1 is a
    switch, and so is a window that ends straddling after leaving a lane.
    A straddling run at the start of the window is matched against the last
    definite lane before the window.
    """
    lanes = ego_lanes(record, road)
    if not lanes:
        return False
    start = max(0, len(lanes) - window)
    tail = lanes[start:]
    definite = [lane for lane in tail if lane is not STRADDLING]
    if len(set(definite)) >= 2:
        return True
    if STRADDLING not in tail:
        return False
    before = next((lane for lane in reversed(lanes[:start]) if lane is not STRADDLING), None)
    if tail[-1] is STRADDLING:
        return bool(definite) or before is not None
    return before is not None and definite[0] != before


def determine_liability(record: SimulationRecord, collision: ViolationEvent, ell: float = 20.0,
                        road: RoadModel | None = None) -> FaultVerdict:
    """Verdict for one EGO-NPC collision, judged on the last recorded frame."""
    if collision.kind != COLLISION:
        raise NotApplicableError(f"{collision.kind} is not a collision")
    ego_id = record.ego_id
    if ego_id not in collision.participants:
        raise NotApplicableError(f"collision {collision.participants} does not involve the EGO")
    others = [p for p in collision.participants if p != ego_id]
    if len(others) != 1:
        raise NotApplicableError(f"collision {collision.participants} is not EGO vs one NPC")
    if not record.frames:
        raise NotApplicableError("record has no frames")
    road = road or record_road(record)
    npc_id = others[0]
    last = record.frames[-1]
    ego, npc = last.ego, last.state(npc_id)

    x, _ = relative_offset(npc, ego)
    l_e, l_n = lane_or_straddling(road, ego), lane_or_straddling(road, npc)
    sw = switched(record, SWITCH_WINDOW, road)
    maneuver = collision.npc_maneuver or last.maneuvers.get(npc_id)
    npc_changing = (maneuver is not None and maneuver[0] in _LANE_CHANGES
                    and maneuver[1] == ManeuverStatus.RUNNING.value)

    if l_e is not STRADDLING and l_e == l_n and x > 0:
        verdict, rule = NPC_FAULT, REAR_END_BY_NPC
    elif npc_changing and not sw:
        verdict, rule = NPC_FAULT, NPC_UNSAFE_LANE_CHANGE
    else:
        verdict, rule = EGO_FAULT, DEFAULT_EGO
    zone = detect_ego(npc, ego, ell, road.lane_width).name
    return FaultVerdict(last.index, npc_id, verdict, rule, float(x), l_e, l_n, sw,
                        tuple(maneuver) if maneuver else None, zone, npc_changing and sw)


def assign_liability(record: SimulationRecord, ell: float | None = None) -> list[FaultVerdict]:
    """Judge every collision in the record and store the verdicts under ``record.liability``."""
    ell = record.setup.get("ell", 20.0) if ell is None else ell
    road = record_road(record)
    verdicts = [determine_liability(record, v, ell, road) for v in record.violations if v.kind == COLLISION]
    record.liability = [v.to_dict() for v in verdicts]
    return verdicts


class EgoViolation(NamedTuple):
    record: int              # position in the input sequence
    event: ViolationEvent
    verdict: FaultVerdict | None


def record_verdicts(record: SimulationRecord) -> list[FaultVerdict]:
    if record.liability is not None:
        return [FaultVerdict.from_dict(v) for v in record.liability]
    ell = record.setup.get("ell", 20.0)
    return [determine_liability(record, v, ell) for v in record.violations if v.kind == COLLISION]


def ego_fault_set(records) -> list[EgoViolation]:
    """EGO-caused violations: EGO_Fault collisions plus every rule-breaking event."""
    out = []
    for k, record in enumerate(records):
        verdicts = iter(record_verdicts(record))
        for event in record.violations:
            if event.kind == COLLISION:
                verdict = next(verdicts)
                if verdict.verdict == EGO_FAULT:
                    out.append(EgoViolation(k, event, verdict))
            elif event.kind in RULE_BREAKING:
                out.append(EgoViolation(k, event, None))
    return out
