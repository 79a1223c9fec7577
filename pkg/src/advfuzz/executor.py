"""Scenario execution: the per-frame NPC maneuver loop and violation monitoring."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .ego import EgoController, make_controller, observe
from .kinematics import DT, EGO, NPC, VehicleState, boxes_collide, step_vehicle
from .npc.agent import AdversarialNPC, AgentParams
from .records import (COLLISION, COLLISION_STOPPED, COMPLETED, DESTINATION_NOT_REACHED, ILLEGAL_LINE_CROSS,
                      Frame, SimulationRecord, ViolationEvent)
from .road import Point, RoadModel, distance_to_illegal_lines, road_from_dict
from .search.config import VEHICLE_LENGTH, VEHICLE_WIDTH, ScenarioConfig, config_problems
from .errors import SetupError

EGO_ID = "ego"

# (state, time) -> (target point, target speed)
Script = Callable[[VehicleState, float], tuple[Point, float]]


@dataclass(frozen=True)
class SimParams:
    dt: float = DT
    ego_length: float = VEHICLE_LENGTH
    ego_width: float = VEHICLE_WIDTH
    npc_length: float = VEHICLE_LENGTH
    npc_width: float = VEHICLE_WIDTH
    ego_initial_speed: float = 14.0
    npc_initial_speed: float = 6.0
    agent: AgentParams = AgentParams()


def npc_id(k: int) -> str:
    return f"npc{k}"


def execute_scenario(road: RoadModel, config: ScenarioConfig, ego: str | EgoController = "baseline",
                     ell: float = 20.0, seed: int = 0, params: SimParams = SimParams(),
                     validate: bool = True, scripts: dict[str, Script] | None = None,
                     meta: dict | None = None) -> SimulationRecord:
    """Run one scenario for at most ``config.max_frames`` frames of ``dt`` seconds.

    Each frame: idle NPCs (once the EGO has entered the bubble) detect the
    EGO, pick a maneuver and plan it; every vehicle then advances one step
    from the pre-step world state. An EGO collision ends the run and the
    colliding step is left out of the frames. ``validate=False`` and
    ``scripts`` are testing hooks.
    """
    if validate:
        problems = config_problems(config, road)
        if problems:
            raise SetupError("; ".join(problems))
    scripts = scripts or {}
    ego_name = ego if isinstance(ego, str) else getattr(ego, "name", type(ego).__name__)
    controller = make_controller(ego) if isinstance(ego, str) else ego
    agent_params = replace(params.agent, ell=ell)
    dt = params.dt

    n = len(config.npc_starts)
    streams = np.random.SeedSequence(seed).spawn(max(n, 1))
    agents = [AdversarialNPC(npc_id(k), road, np.random.default_rng(streams[k]), agent_params) for k in range(n)]
    ego_state = VehicleState(EGO_ID, EGO, config.ego_start.s, config.ego_start.d, 0.0,
                             params.ego_initial_speed, params.ego_length, params.ego_width)
    npcs = [VehicleState(a.id, NPC, p.s, p.d, 0.0, params.npc_initial_speed, params.npc_length, params.npc_width)
            for a, p in zip(agents, config.npc_starts)]

    vehicles = [{"id": v.id, "kind": v.kind, "length": v.length, "width": v.width} for v in (ego_state, *npcs)]
    frames: list[Frame] = []
    outcome, contact = COMPLETED, None
    active = False

    for k in range(config.max_frames):
        now = k * dt
        active = active or ego_state.s >= road.bubble_start
        for agent, st in zip(agents, npcs):
            if agent.idle and not agent.wrecked and agent.id not in scripts:
                agent.decide(st, ego_state, now, active)
        maneuvers = {a.id: (a.maneuver.kind.value, a.maneuver.status.value) for a in agents}
        frames.append(Frame(k, (ego_state, *npcs), maneuvers))

        cmd = controller(observe(ego_state, npcs, config.destination, road))
        new_ego = step_vehicle(ego_state, cmd.target_point, cmd.target_speed, dt)
        new_npcs = []
        for agent, st in zip(agents, npcs):
            if agent.wrecked:
                new_npcs.append(st)
                continue
            if agent.id in scripts:
                target, speed = scripts[agent.id](st, now)
            else:
                target, speed = agent.command(st, now, dt)
            new_npcs.append(step_vehicle(st, target, speed, dt))

        ego_box = new_ego.box()
        hit = next((st for st in new_npcs if boxes_collide(ego_box, st.box())), None)
        if hit is not None:
            outcome = COLLISION_STOPPED
            contact = {"frame": k + 1, "npc": hit.id,
                       "states": {v.id: [v.s, v.d, v.heading, v.speed] for v in (new_ego, hit)}}
            break

        boxes = [st.box() for st in new_npcs]
        for i in range(n):
            for j in range(i + 1, n):
                if boxes_collide(boxes[i], boxes[j]):
                    for idx in (i, j):
                        agents[idx].wreck()
                        new_npcs[idx] = replace(new_npcs[idx], speed=0.0)
        for agent, st in zip(agents, new_npcs):
            if not agent.wrecked:
                agent.update_completion(st, new_ego, now + dt, active)
        ego_state, npcs = new_ego, new_npcs

    record = SimulationRecord(
        config=config, seed=int(seed), vehicles=vehicles, frames=frames, outcome=outcome, contact=contact,
        setup={"road": road.to_dict(), "ell": ell, "ego": ego_name},
        meta=dict(meta or {}),
    )
    record.violations = detect_violations(record, road)
    return record


def detect_violations(record: SimulationRecord, road: RoadModel) -> list[ViolationEvent]:
    """Collision, first illegal-line contact and missed destination events for a finished record."""
    events = []
    if record.outcome == COLLISION_STOPPED and record.contact:
        last = record.frames[-1]
        other = record.contact["npc"]
        events.append(ViolationEvent(
            COLLISION, last.index, (record.ego_id, other),
            {vid: (st[0], st[1]) for vid, st in record.contact["states"].items()},
            last.maneuvers.get(other),
        ))
    for frame in record.frames:
        if distance_to_illegal_lines(road, frame.ego.box()) == 0.0:
            events.append(ViolationEvent(ILLEGAL_LINE_CROSS, frame.index, (record.ego_id,),
                                         {record.ego_id: (frame.ego.s, frame.ego.d)}))
            break
    if record.outcome == COMPLETED and record.frames:
        last = record.frames[-1]
        dest = record.config.destination
        if math.hypot(last.ego.s - dest.s, last.ego.d - dest.d) > last.ego.length / 2.0:
            events.append(ViolationEvent(DESTINATION_NOT_REACHED, last.index, (record.ego_id,),
                                         {record.ego_id: (last.ego.s, last.ego.d)}))
    return sorted(events, key=lambda e: e.frame)


def replay(record: SimulationRecord, params: SimParams = SimParams()) -> SimulationRecord:
    """Re-simulate a persisted record from its configuration and seed."""
    road = road_from_dict(record.setup["road"])
    return execute_scenario(road, record.config, record.setup.get("ego", "baseline"),
                            record.setup.get("ell", 20.0), record.seed, params, meta=record.meta)
