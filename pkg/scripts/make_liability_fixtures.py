"""Build the hand-labelled liability fixture corpus in fixtures/liability/.

Each case is a short synthetic two-vehicle trace ending one frame before
contact. Labels come from traffic-code reasoning about who created the
conflict (rear vehicle keeps a safe gap; a lane change must be completed
safely; a vehicle established in its lane has priority), not from the
determiner's rules, so the two are not expected to agree everywhere (a
lane change still flagged RUNNING after the NPC has settled is one such
case). Every case also asserts the lane geometry it describes.

    python3 scripts/make_liability_fixtures.py [OUT_DIR]
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from advfuzz.kinematics import DT, EGO, NPC, VehicleState, boxes_collide
from advfuzz.liability import EGO_FAULT, NPC_FAULT, lane_or_straddling
from advfuzz.records import COLLISION, COLLISION_STOPPED, Frame, SimulationRecord, ViolationEvent, dumps_record
from advfuzz.road import PRESETS, Point, build_road
from advfuzz.search.config import ScenarioConfig

ROAD = build_road(**PRESETS["urban2"])
LANE = ROAD.centerlines()
FRAMES = 60                     # recorded frames; contact would be frame 60
L, W = 4.7, 2.0


@dataclass
class Motion:
    """Longitudinal position s_c + v*t + a*t^2/2 at time t <= 0 (contact at t = 0), plus lane changes."""
    s_c: float
    v: float
    d0: float
    a: float = 0.0
    changes: list[tuple[float, float, float]] = field(default_factory=list)   # (start t, target d, duration)

    def at(self, t: float) -> tuple[float, float]:
        s = self.s_c + self.v * t + 0.5 * self.a * t * t
        d = self.d0
        for start, target, dur in self.changes:
            u = min(max((t - start) / dur, 0.0), 1.0)
            d = d + (target - d) * (3 * u * u - 2 * u ** 3)
        return s, d

    def state(self, vid: str, kind: str, t: float) -> VehicleState:
        s0, d0 = self.at(t - DT)
        s1, d1 = self.at(t)
        return VehicleState(vid, kind, s1, d1, math.atan2(d1 - d0, s1 - s0), math.hypot(s1 - s0, d1 - d0) / DT, L, W)


@dataclass
class Case:
    name: str
    pattern: str
    label: str
    note: str
    ego: Motion
    npc: Motion
    maneuvers: list[tuple[float, str, str]]    # (from time, kind, status), later entries win
    lanes: tuple | None = None                  # required (EGO, NPC) lanes in the last frame; None = straddling


def _maneuver(case: Case, t: float) -> tuple[str, str]:
    cur = ("KEEP_SPEED", "RUNNING")
    for start, kind, status in case.maneuvers:
        if t >= start - 1e-9:
            cur = (kind, status)
    return cur


def build_record(case: Case) -> SimulationRecord:
    """Sample the motions every DT, stop at the first touching step and keep the FRAMES before it."""
    times = np.round(np.arange(-7.0, 4.0, DT), 10)
    hit_k = next((k for k, t in enumerate(times)
                  if boxes_collide(case.ego.state("ego", EGO, t).box(), case.npc.state("npc0", NPC, t).box())), None)
    if hit_k is None or hit_k < FRAMES:
        raise ValueError(f"{case.name}: contact missing or too early")
    frames = []
    for k, t in enumerate(times[hit_k - FRAMES:hit_k]):
        states = (case.ego.state("ego", EGO, t), case.npc.state("npc0", NPC, t))
        frames.append(Frame(k, states, {"npc0": _maneuver(case, t)}))
    last = frames[-1]
    if case.lanes is not None:
        got = tuple(lane_or_straddling(ROAD, st) for st in last.states)
        if got != case.lanes:
            raise ValueError(f"{case.name}: last-frame lanes {got}, case describes {case.lanes}")
    t_hit = times[hit_k]
    hit = (case.ego.state("ego", EGO, t_hit), case.npc.state("npc0", NPC, t_hit))
    ego0, npc0 = frames[0].states
    config = ScenarioConfig(Point(ego0.s, ego0.d), Point(400.0, LANE[0]), (Point(npc0.s, npc0.d),))
    record = SimulationRecord(
        config=config, seed=0,
        vehicles=[{"id": "ego", "kind": EGO, "length": L, "width": W},
                  {"id": "npc0", "kind": NPC, "length": L, "width": W}],
        frames=frames, outcome=COLLISION_STOPPED,
        contact={"frame": FRAMES, "npc": "npc0", "states": {st.id: [st.s, st.d, st.heading, st.speed] for st in hit}},
        setup={"road": ROAD.to_dict(), "ell": 20.0, "ego": "synthetic"},
        meta={"case": case.name},
    )
    record.violations = [ViolationEvent(COLLISION, last.index, ("ego", "npc0"),
                                        {st.id: (st.s, st.d) for st in hit}, last.maneuvers["npc0"])]
    return record


def cut_in_start(from_d: float, to_d: float, contact_d: float, dur: float = 4.0) -> float:
    """Start time of a smoothstep lane change that reaches ``contact_d`` at t = 0."""
    frac = (contact_d - from_d) / (to_d - from_d)
    roots = np.roots([-2.0, 3.0, 0.0, -frac])
    real = roots[np.isclose(roots.imag, 0.0)].real
    u = real[(real >= 0.0) & (real <= 1.0)][0]
    return -float(u) * dur


LEFT, RIGHT = "LEFT_CHANGE", "RIGHT_CHANGE"
KEEP, ACC, DEC = "KEEP_SPEED", "ACCELERATION_STRAIGHT", "DECELERATION_STRAIGHT"


def cases() -> list[Case]:
    out = []
    # --- NPC rear-ends the EGO in a shared lane
    for i, (lane, v_e, v_n, kind) in enumerate([(0, 8.0, 14.0, KEEP), (1, 10.0, 18.0, ACC),
                                                (0, 2.0, 12.0, KEEP), (1, 0.0, 9.0, ACC)]):
        out.append(Case(f"rear_end_by_npc_{i}", "npc rear-ends ego", NPC_FAULT,
                        "NPC behind in the same lane closes the gap and hits the EGO's rear.",
                        Motion(200.0, v_e, LANE[lane]), Motion(200.0 - L + 0.05, v_n, LANE[lane]), [(-12.0, kind, "RUNNING")],
                        (lane, lane)))
    # --- NPC cuts into the EGO's lane while the EGO keeps its lane
    for i, (ego_lane, dv, kind, ds) in enumerate([(0, 1.0, LEFT, 1.0), (1, -1.0, RIGHT, -1.5),
                                                  (0, 3.0, LEFT, 2.5), (1, 0.5, RIGHT, 0.0),
                                                  (0, -0.5, LEFT, 3.8)]):
        d_e = LANE[ego_lane]
        d_from = LANE[1 - ego_lane]
        contact_d = d_e + math.copysign(W - 0.05, d_from - d_e)
        start = cut_in_start(d_from, d_e, contact_d)
        out.append(Case(f"npc_cut_in_{i}", "npc unsafe lane change", NPC_FAULT,
                        "NPC changes into the occupied lane beside the EGO, which holds its lane.",
                        Motion(150.0, 12.0, d_e), Motion(150.0 + ds, 12.0 + dv, d_from, changes=[(start, d_e, 4.0)]),
                        [(-12.0, KEEP, "RUNNING"), (start - 0.2, kind, "RUNNING")], (ego_lane, None)))
    # --- EGO rear-ends an NPC travelling in its lane
    for i, (lane, v_e, v_n, kind, a_n) in enumerate([(0, 14.0, 6.0, KEEP, 0.0), (1, 14.0, 4.0, DEC, -2.0),
                                                     (0, 12.0, 0.0, KEEP, 0.0), (1, 16.0, 10.0, KEEP, 0.0)]):
        out.append(Case(f"ego_rear_ends_npc_{i}", "ego rear-ends npc", EGO_FAULT,
                        "EGO is the rear vehicle and fails to keep a safe gap.",
                        Motion(300.0, v_e, LANE[lane]), Motion(300.0 + L - 0.05, v_n, LANE[lane], a=a_n),
                        [(-12.0, kind, "RUNNING")], (lane, lane)))
    # --- EGO changes lanes into an NPC
    for i, (dv, ds, kind) in enumerate([(0.0, 0.5, KEEP), (2.0, -3.0, KEEP), (-1.0, 1.5, DEC)]):
        contact_d = LANE[1] - (W - 0.05)
        start = cut_in_start(LANE[0], LANE[1], contact_d)
        out.append(Case(f"ego_lane_change_{i}", "ego unsafe lane change", EGO_FAULT,
                        "EGO moves into the adjacent lane that the NPC already occupies.",
                        Motion(250.0, 12.0, LANE[0], changes=[(start, LANE[1], 4.0)]),
                        Motion(250.0 + ds, 12.0 + dv, LANE[1]), [(-12.0, kind, "RUNNING")], (None, 1)))
    # --- both vehicles move onto the shared lane line at the same time
    contact_half = (W - 0.05) / 2.0
    s0 = cut_in_start(LANE[0], LANE[1], 3.5 - contact_half)
    s1 = cut_in_start(LANE[1], LANE[0], 3.5 + contact_half)
    out.append(Case("both_changing_0", "both changing lanes", EGO_FAULT,
                    "Both swap lanes at once and meet on the lane line; the EGO is the rear vehicle.",
                    Motion(180.0, 12.0, LANE[0], changes=[(s0, LANE[1], 4.0)]),
                    Motion(183.5, 12.0, LANE[1], changes=[(s1, LANE[0], 4.0)]),
                    [(-12.0, KEEP, "RUNNING"), (s1 - 0.2, LEFT, "RUNNING")], (None, None)))
    # --- EGO finished a lane change 2.5 s ago and holds lane 1; NPC then cuts in from lane 0
    start = cut_in_start(LANE[0], LANE[1], LANE[1] - (W - 0.05))
    out.append(Case("npc_cut_in_after_ego_change", "npc unsafe lane change", NPC_FAULT,
                    "EGO is settled in its new lane when the NPC cuts in; the recent EGO switch is not causal.",
                    Motion(220.0, 12.0, LANE[0], changes=[(-5.9, LANE[1], 3.0)]),
                    Motion(221.0, 14.0, LANE[0], changes=[(start, LANE[1], 4.0)]),
                    [(-12.0, KEEP, "RUNNING"), (start - 0.2, RIGHT, "RUNNING")], (1, None)))
    # --- NPC's lane change is physically over (still flagged RUNNING); EGO runs into its back much later
    out.append(Case("ego_rear_ends_settled_npc", "ego rear-ends npc", EGO_FAULT,
                    "NPC completed its move into the EGO's lane 3 s earlier and is established there; "
                    "the EGO is the rear vehicle.",
                    Motion(320.0, 13.0, LANE[0]),
                    Motion(320.0 + L - 0.05, 5.0, LANE[1], changes=[(-6.0, LANE[0], 3.0)]),
                    [(-12.0, LEFT, "RUNNING")], (0, 0)))
    # --- NPC brakes hard in front of the EGO long after a completed cut-in
    out.append(Case("ego_rear_ends_braking_npc", "ego rear-ends npc", EGO_FAULT,
                    "NPC decelerates in its own lane; the following EGO had room to stop.",
                    Motion(270.0, 12.0, LANE[1]), Motion(270.0 + L - 0.05, 3.0, LANE[1], a=-1.5),
                    [(-12.0, KEEP, "RUNNING"), (-3.0, DEC, "RUNNING")], (1, 1)))
    return out


def main(out_dir: str = "fixtures/liability") -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("*.json"):
        old.unlink()
    all_cases = cases()
    for k, case in enumerate(all_cases):
        data = json.loads(dumps_record(build_record(case)))
        data["expected"] = {"verdict": case.label, "pattern": case.pattern, "note": case.note}
        (out / f"{k:02d}_{case.name}.json").write_text(json.dumps(data, separators=(",", ":")) + "\n")
    print(f"wrote {len(all_cases)} cases to {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])
