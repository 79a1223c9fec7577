"""Perception zones around an NPC."""
from __future__ import annotations

import enum

import numpy as np

from ..kinematics import VehicleState


class Zone(enum.IntEnum):
    NOT_DETECTED = 0
    N1 = 1
    F1 = 2
    L1 = 3
    L2 = 4
    L3 = 5
    R1 = 6
    R2 = 7
    R3 = 8


def relative_offset(npc: VehicleState, ego: VehicleState) -> tuple[float, float]:
    """Project ``p_ego - p_npc`` onto the NPC's forward and right unit vectors."""
    ds, dd = ego.s - npc.s, ego.d - npc.d
    fx, fy = npc.forward
    rx, ry = npc.right
    return ds * fx + dd * fy, ds * rx + dd * ry


def classify_offsets(x, y, ell: float, w: float):
    """Vectorised zone classification of relative offsets (returns int codes).

    Ties: ``|y| <= w/2`` is the NPC's own lane (``x == 0`` counts as F1);
    ``|x| == ell/2`` falls in the middle band L2/R2. ``y < 0`` is left.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    half_l, half_w = 0.5 * ell, 0.5 * w
    band = np.where(x < -half_l, 0, np.where(x > half_l, 2, 1))
    side = np.where(y < 0, Zone.L1, Zone.R1)
    out = np.where(np.abs(y) <= half_w, np.where(x < 0, Zone.N1, Zone.F1), side + band)
    outside = (np.abs(x) > 1.5 * ell) | (np.abs(y) > 1.5 * w)
    return np.where(outside, Zone.NOT_DETECTED, out).astype(np.int8)


def classify_offset(x: float, y: float, ell: float, w: float) -> Zone:
    return Zone(int(classify_offsets(x, y, ell, w)))


def detect_ego(npc: VehicleState, ego: VehicleState, ell: float = 20.0, w: float = 3.5) -> Zone:
    if not (ell > 0 and w > 0):
        raise ValueError(f"zone dimensions must be positive (ell={ell}, w={w})")
    x, y = relative_offset(npc, ego)
    return classify_offset(x, y, ell, w)
