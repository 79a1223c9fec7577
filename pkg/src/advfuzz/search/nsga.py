"""Pareto ranking, crowding distance and elitist selection; every objective is maximised."""
from __future__ import annotations

import numpy as np


def dominates(a, b) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    return bool(np.all(a >= b) and np.any(a > b))


def dominance_matrix(fitness) -> np.ndarray:
    """``M[i, j]`` is True when individual i dominates individual j."""
    f = np.asarray(fitness, dtype=float)
    ge = np.all(f[:, None, :] >= f[None, :, :], axis=2)
    gt = np.any(f[:, None, :] > f[None, :, :], axis=2)
    return ge & gt


def non_dominated_sort(fitness) -> np.ndarray:
    """Front index per individual; 0 is the non-dominated set."""
    f = np.asarray(fitness, dtype=float)
    n = len(f)
    if n == 0:
        return np.zeros(0, dtype=int)
    if not np.all(np.isfinite(f)):
        raise ValueError("fitness values must be finite")
    dom = dominance_matrix(f)
    counts = dom.sum(axis=0)          # how many individuals dominate each one
    ranks = np.full(n, -1, dtype=int)
    front = np.flatnonzero(counts == 0)
    r = 0
    while front.size:
        ranks[front] = r
        counts = counts - dom[front].sum(axis=0)
        counts[ranks >= 0] = -1
        front = np.flatnonzero(counts == 0)
        r += 1
    return ranks


def crowding_distance(front) -> np.ndarray:
    """Crowding distance within one front.

    Per objective the extremes get +inf and interior points the gap between
    their neighbours divided by the objective's range. Ties keep index
    order; an objective with zero range adds nothing to interior points.
    """
    f = np.asarray(front, dtype=float)
    n = len(f)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for m in range(f.shape[1]):
        order = np.argsort(f[:, m], kind="stable")
        vals = f[order, m]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span > 0:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def rank_and_crowd(fitness) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(fitness, dtype=float)
    ranks = non_dominated_sort(f)
    crowd = np.zeros(len(f))
    for r in np.unique(ranks):
        members = np.flatnonzero(ranks == r)
        crowd[members] = crowding_distance(f[members])
    return ranks, crowd


def select_next_generation(fitness, tau: int) -> np.ndarray:
    """Indices of the ``tau`` survivors: ascending rank, then descending crowding, then index.

    Crowding is compared at 9 decimals so that rounding noise (say, from
    rescaling the objectives) cannot reorder genuine ties.
    """
    ranks, crowd = rank_and_crowd(fitness)
    order = np.lexsort((np.arange(len(ranks)), -np.round(crowd, 9), ranks))
    return order[:tau]
