"""Behavior tree mapping the EGO's perception zone to a maneuver."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..errors import TreeStructureError
from .zones import Zone


class ManeuverKind(str, enum.Enum):
    KEEP_SPEED = "KEEP_SPEED"
    ACCELERATION_STRAIGHT = "ACCELERATION_STRAIGHT"
    DECELERATION_STRAIGHT = "DECELERATION_STRAIGHT"
    LEFT_CHANGE = "LEFT_CHANGE"
    RIGHT_CHANGE = "RIGHT_CHANGE"

    @property
    def is_lane_change(self) -> bool:
        return self in (ManeuverKind.LEFT_CHANGE, ManeuverKind.RIGHT_CHANGE)


class Status(enum.Enum):
    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"


@dataclass
class _Blackboard:
    zone: Zone
    rng: np.random.Generator
    selected: list = field(default_factory=list)


class Node:
    def tick(self, bb: _Blackboard) -> Status:
        raise NotImplementedError

    def children(self) -> tuple["Node", ...]:
        return ()


class Sequence(Node):
    """Ticks children in order; fails at the first child that fails."""

    def __init__(self, children: Iterable[Node]):
        self._children = tuple(children)

    def children(self):
        return self._children

    def tick(self, bb):
        for child in self._children:
            if child.tick(bb) is not Status.SUCCESS:
                return Status.FAILURE
        return Status.SUCCESS


class Selector(Node):
    """Ticks children in a random order until one succeeds."""

    def __init__(self, children: Iterable[Node]):
        self._children = tuple(children)

    def children(self):
        return self._children

    def tick(self, bb):
        for i in bb.rng.permutation(len(self._children)):
            if self._children[i].tick(bb) is Status.SUCCESS:
                return Status.SUCCESS
        return Status.FAILURE


class Condition(Node):
    def __init__(self, *zones: Zone):
        self.zones = frozenset(zones)

    def tick(self, bb):
        return Status.SUCCESS if bb.zone in self.zones else Status.FAILURE

    def __repr__(self):
        return f"Condition({sorted(z.name for z in self.zones)})"


class Action(Node):
    def __init__(self, kind: ManeuverKind):
        self.kind = ManeuverKind(kind)

    def tick(self, bb):
        bb.selected.append(self.kind)
        return Status.SUCCESS

    def __repr__(self):
        return f"Action({self.kind.value})"


class BehaviorTree:
    """A validated tree; every zone must select exactly one action."""

    def __init__(self, root: Node):
        self.root = root
        self._check_structure(root)
        probe = np.random.default_rng(0)
        for zone in Zone:
            for _ in range(4):
                bb = _Blackboard(zone, probe)
                root.tick(bb)
                if len(bb.selected) != 1:
                    raise TreeStructureError(
                        f"zone {zone.name} selects {len(bb.selected)} actions, expected exactly one")

    @staticmethod
    def _check_structure(node):
        if not isinstance(node, Node):
            raise TreeStructureError(f"not a tree node: {node!r}")
        if isinstance(node, (Sequence, Selector)):
            if not node.children():
                raise TreeStructureError(f"empty {type(node).__name__}")
            for child in node.children():
                BehaviorTree._check_structure(child)

    def tick(self, zone: Zone, rng: np.random.Generator) -> ManeuverKind:
        bb = _Blackboard(Zone(zone), rng)
        self.root.tick(bb)
        return bb.selected[0]


def _branch(zone: Zone, action: Node) -> Sequence:
    return Sequence([Condition(zone), action])


def default_tree() -> BehaviorTree:
    K = ManeuverKind
    return BehaviorTree(Selector([
        _branch(Zone.NOT_DETECTED, Action(K.KEEP_SPEED)),
        _branch(Zone.N1, Action(K.DECELERATION_STRAIGHT)),
        _branch(Zone.F1, Action(K.KEEP_SPEED)),
        _branch(Zone.L1, Selector([Action(K.KEEP_SPEED), Action(K.LEFT_CHANGE)])),
        _branch(Zone.L2, Action(K.LEFT_CHANGE)),
        _branch(Zone.L3, Action(K.ACCELERATION_STRAIGHT)),
        _branch(Zone.R1, Selector([Action(K.KEEP_SPEED), Action(K.RIGHT_CHANGE)])),
        _branch(Zone.R2, Action(K.RIGHT_CHANGE)),
        _branch(Zone.R3, Action(K.ACCELERATION_STRAIGHT)),
    ]))


def tick_behavior_tree(tree: BehaviorTree, zone: Zone, rng: np.random.Generator) -> ManeuverKind:
    return tree.tick(zone, rng)
