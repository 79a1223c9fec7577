"""Three-objective fitness of a simulated scenario (all objectives maximised)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationError
from ..kinematics import box_distance
from ..road import RoadModel, distance_to_illegal_lines
from .config import ScenarioConfig


@dataclass(frozen=True)
class FitnessWeights:
    w1: float = 1.0
    w2: float = 1.0
    epsilon: float = 0.1   # metres; floor on distances so f2, f3 stay finite


def destination_distance(record, config: ScenarioConfig) -> float:
    ego = record.frames[-1].ego
    return math.hypot(ego.s - config.destination.s, ego.d - config.destination.d)


def min_npc_distance(record) -> float:
    """Closest EGO-to-NPC box distance over all recorded frames; 0 for a collision record."""
    if record.contact is not None:
        return 0.0
    best = math.inf
    for frame in record.frames:
        ego = frame.ego
        ego_box = ego.box()
        for npc in frame.states[1:]:
            # centre distance minus both half-diagonals bounds the box gap from below
            lower = math.hypot(ego.s - npc.s, ego.d - npc.d) - ego_box.radius - npc.box().radius
            if lower >= best:
                continue
            best = min(best, box_distance(ego_box, npc.box()))
            if best == 0.0:
                return 0.0
    return best


def min_line_distance(record, road: RoadModel) -> float:
    return min(distance_to_illegal_lines(road, f.ego.box()) for f in record.frames)


def evaluate_fitness(record, config: ScenarioConfig, road: RoadModel,
                     weights: FitnessWeights = FitnessWeights()) -> np.ndarray:
    """``(f1, f2, f3)`` = (distance to destination, w1/max(Dc, eps), w2/max(Dl, eps))."""
    if not record.frames:
        raise EvaluationError("cannot score an empty record")
    eps = weights.epsilon
    f1 = destination_distance(record, config)
    f2 = weights.w1 / max(min_npc_distance(record), eps)
    f3 = weights.w2 / max(min_line_distance(record, road), eps)
    return np.array([f1, f2, f3], dtype=float)
