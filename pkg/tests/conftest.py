import json
from pathlib import Path

import pytest
from hypothesis import settings

from advfuzz.records import SimulationRecord
from advfuzz.road import PRESETS, build_road

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures" / "liability"


@pytest.fixture
def urban2():
    return build_road(**PRESETS["urban2"])


@pytest.fixture
def highway4():
    return build_road(**PRESETS["highway4"])


def load_fixture(path):
    data = json.loads(Path(path).read_text())
    return SimulationRecord.from_dict(data), data["expected"]


def fixture_paths():
    return sorted(FIXTURES.glob("*.json"))


def synthetic_record(tracks, road=None, destination=(400.0, 1.75), maneuvers=None, outcome="Completed",
                     contact=None, seed=0):
    """Record from per-frame ``[(s, d, heading, speed), ...]`` rows, EGO first."""
    from advfuzz.kinematics import EGO, NPC, VehicleState
    from advfuzz.records import Frame
    from advfuzz.road import Point
    from advfuzz.search.config import ScenarioConfig

    road = road or build_road(**PRESETS["urban2"])
    ids = ["ego"] + [f"npc{k}" for k in range(len(tracks[0]) - 1)]
    vehicles = [{"id": v, "kind": EGO if k == 0 else NPC, "length": 4.7, "width": 2.0} for k, v in enumerate(ids)]
    frames = []
    for i, row in enumerate(tracks):
        states = tuple(VehicleState(v, vehicles[k]["kind"], *map(float, r)) for k, (v, r) in enumerate(zip(ids, row)))
        man = (maneuvers[i] if maneuvers else None) or {v: ("KEEP_SPEED", "RUNNING") for v in ids[1:]}
        frames.append(Frame(i, states, man))
    first = tracks[0]
    config = ScenarioConfig(Point(first[0][0], first[0][1]), Point(*destination),
                            tuple(Point(r[0], r[1]) for r in first[1:]))
    return SimulationRecord(config=config, seed=seed, vehicles=vehicles, frames=frames, outcome=outcome,
                            contact=contact, setup={"road": road.to_dict(), "ell": 20.0, "ego": "synthetic"})


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
