"""Simulation records, violation events and their JSON persistence."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import RecordFormatError
from .kinematics import DT, VehicleState
from .search.config import ScenarioConfig

COMPLETED = "Completed"
COLLISION_STOPPED = "CollisionStopped"

COLLISION = "Collision"
ILLEGAL_LINE_CROSS = "IllegalLineCross"
DESTINATION_NOT_REACHED = "DestinationNotReached"
RULE_BREAKING = (ILLEGAL_LINE_CROSS, DESTINATION_NOT_REACHED)


@dataclass(frozen=True)
class Frame:
    index: int
    states: tuple[VehicleState, ...]          # same order as SimulationRecord.vehicle_ids
    maneuvers: dict[str, tuple[str, str]]     # npc id -> (kind, status)

    @property
    def time(self) -> float:
        return self.index * DT

    def state(self, vehicle_id: str) -> VehicleState:
        for st in self.states:
            if st.id == vehicle_id:
                return st
        raise KeyError(vehicle_id)

    @property
    def ego(self) -> VehicleState:
        return self.states[0]


@dataclass(frozen=True)
class ViolationEvent:
    kind: str
    frame: int
    participants: tuple[str, ...] = ()
    positions: dict[str, tuple[float, float]] = field(default_factory=dict)
    npc_maneuver: tuple[str, str] | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "frame": self.frame,
            "participants": list(self.participants),
            "positions": {k: list(v) for k, v in self.positions.items()},
            "npc_maneuver": list(self.npc_maneuver) if self.npc_maneuver else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ViolationEvent":
        return cls(
            kind=data["kind"],
            frame=int(data["frame"]),
            participants=tuple(data.get("participants", ())),
            positions={k: (float(v[0]), float(v[1])) for k, v in data.get("positions", {}).items()},
            npc_maneuver=tuple(data["npc_maneuver"]) if data.get("npc_maneuver") else None,
        )


@dataclass
class SimulationRecord:
    config: ScenarioConfig
    seed: int
    vehicles: list[dict]                  # [{"id", "kind", "length", "width"}], EGO first
    frames: list[Frame]
    outcome: str = COMPLETED
    violations: list[ViolationEvent] = field(default_factory=list)
    contact: dict | None = None           # post-step states of the colliding pair, not part of frames
    setup: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    fitness: list[float] | None = None
    liability: list[dict] | None = None

    @property
    def vehicle_ids(self) -> list[str]:
        return [v["id"] for v in self.vehicles]

    @property
    def ego_id(self) -> str:
        return self.vehicles[0]["id"]

    @property
    def duration(self) -> float:
        """Simulated seconds covered by the record."""
        return len(self.frames) * DT

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "setup": self.setup,
            "meta": self.meta,
            "vehicles": self.vehicles,
            "frames": [_frame_to_list(f) for f in self.frames],
            "violations": [v.to_dict() for v in self.violations],
            "outcome": self.outcome,
            "contact": self.contact,
            "fitness": self.fitness,
            "liability": self.liability,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationRecord":
        try:
            vehicles = data["vehicles"]
            frames = [_frame_from_list(f, vehicles) for f in data["frames"]]
            return cls(
                config=ScenarioConfig.from_dict(data["config"]),
                seed=int(data["seed"]),
                vehicles=vehicles,
                frames=frames,
                outcome=data["outcome"],
                violations=[ViolationEvent.from_dict(v) for v in data.get("violations", [])],
                contact=data.get("contact"),
                setup=data.get("setup", {}),
                meta=data.get("meta", {}),
                fitness=data.get("fitness"),
                liability=data.get("liability"),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise RecordFormatError(f"malformed record: {exc!r}") from exc


def _frame_to_list(frame: Frame) -> dict:
    return {
        "frame": frame.index,
        "states": [[st.s, st.d, st.heading, st.speed] for st in frame.states],
        "maneuvers": {k: list(v) for k, v in frame.maneuvers.items()},
    }


def _frame_from_list(data: dict, vehicles: list[dict]) -> Frame:
    states = tuple(
        VehicleState(v["id"], v["kind"], float(s), float(d), float(h), float(sp), float(v["length"]), float(v["width"]))
        for v, (s, d, h, sp) in zip(vehicles, data["states"], strict=True)
    )
    return Frame(int(data["frame"]), states, {k: (m[0], m[1]) for k, m in data["maneuvers"].items()})


def dumps_record(record: SimulationRecord) -> str:
    return json.dumps(record.to_dict(), separators=(",", ":"), allow_nan=False) + "\n"


def save_record(record: SimulationRecord, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_record(record))
    return path


def load_record(path) -> SimulationRecord:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise RecordFormatError(f"{path}: {exc}") from exc
    return SimulationRecord.from_dict(data)


def record_path(campaign_dir, generation: int, index: int) -> Path:
    return Path(campaign_dir) / f"{generation:03d}" / f"{index:03d}.json"


def iter_record_paths(campaign_dir) -> list[Path]:
    """Record files in (generation, index) order."""
    out = []
    for gen_dir in Path(campaign_dir).iterdir() if Path(campaign_dir).is_dir() else ():
        if gen_dir.is_dir() and gen_dir.name.isdigit():
            out.extend(p for p in gen_dir.glob("*.json") if p.stem.isdigit())
    return sorted(out, key=lambda p: (int(p.parent.name), int(p.stem)))


def finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None
