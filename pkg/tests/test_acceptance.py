"""Acceptance gate: one test per headline criterion, each printing a PASS/FAIL line.

The lines are collected and shown in the terminal summary (and printed
inline for ``-s`` runs).
"""
import json
import math
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from advfuzz.campaign import CampaignSettings, load_campaign, proportion, report, run_campaign, summarize
from advfuzz.executor import replay
from advfuzz.kinematics import EGO, NPC, VehicleState, boxes_collide
from advfuzz.liability import EGO_FAULT, NPC_FAULT, determine_liability
from advfuzz.npc.behavior import ManeuverKind as K, default_tree
from advfuzz.npc.planning import (bezier, has_direction_inversion, has_sharp_turn, departs_lanes, occupancy,
                                  plan_speed, plan_waypoints, too_sparse)
from advfuzz.npc.zones import Zone, classify_offsets, detect_ego
from advfuzz.records import COLLISION, COLLISION_STOPPED, ILLEGAL_LINE_CROSS, ViolationEvent, dumps_record
from advfuzz.road import PRESETS, build_road
from advfuzz.search import ScenarioSearch, SearchParams, check_restart
from advfuzz.search.config import fingerprint
from advfuzz.search.nsga import crowding_distance, non_dominated_sort, rank_and_crowd, select_next_generation

from conftest import ACCEPTANCE, fixture_paths, load_fixture, synthetic_record

URBAN = build_road(**PRESETS["urban2"])
HIGHWAY = build_road(**PRESETS["highway4"])


@contextmanager
def criterion(name, limit=None):
    t0 = time.perf_counter()
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        line = f"FAIL  {name}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        ACCEPTANCE.append(line)
        print(line)
        raise
    elapsed = time.perf_counter() - t0
    info = detail.get("info", "")
    if limit is not None and elapsed >= limit:
        line = f"FAIL  {name}: {elapsed:.2f} s, limit {limit} s  {info}"
        ACCEPTANCE.append(line)
        print(line)
        pytest.fail(line)
    line = f"PASS  {name}: {info} ({elapsed:.2f} s)"
    ACCEPTANCE.append(line)
    print(line)


# -- 1. zones -------------------------------------------------------------------

def zone_oracle_grid(x, y, ell, w):
    """Zone codes straight from the inequality table, written with np.select."""
    inside = (np.abs(x) <= 1.5 * ell) & (np.abs(y) <= 1.5 * w)
    own = np.abs(y) <= 0.5 * w
    left, right = y < -0.5 * w, y > 0.5 * w
    back, mid, front = x < -0.5 * ell, np.abs(x) <= 0.5 * ell, x > 0.5 * ell
    conds = [~inside, own & (x < 0), own & (x >= 0),
             left & back, left & mid, left & front, right & back, right & mid, right & front]
    codes = [Zone.NOT_DETECTED, Zone.N1, Zone.F1, Zone.L1, Zone.L2, Zone.L3, Zone.R1, Zone.R2, Zone.R3]
    return np.select(conds, [int(c) for c in codes], default=-1)


def test_zone_classifier_equivalence():
    with criterion("zone classifier equivalence", limit=5.0) as d:
        rng = np.random.default_rng(0)
        checked = 0
        for ell in (20.0, 30.0, 40.0):
            for w in (3.0, 3.5):
                xs = np.linspace(-1.5 * ell, 1.5 * ell, 1000)
                ys = np.linspace(-1.5 * w, 1.5 * w, 1000)
                x, y = np.meshgrid(xs, ys)
                got = classify_offsets(x, y, ell, w)
                assert np.array_equal(got, zone_oracle_grid(x, y, ell, w)), (ell, w)
                checked += x.size
                # detect_ego itself on a subsample placed around a turned NPC
                for k in rng.choice(x.size, 300, replace=False):
                    h = float(rng.uniform(-0.5, 0.5))
                    npc = VehicleState("npc0", NPC, 200.0, 3.5, h, 5.0)
                    fx, fy, rx, ry = math.cos(h), math.sin(h), -math.sin(h), math.cos(h)
                    px, py = x.flat[k], y.flat[k]
                    ego = VehicleState("ego", EGO, 200.0 + px * fx + py * rx, 3.5 + px * fy + py * ry, 0.0, 5.0)
                    # rounding in the round trip may move a tie point; the oracle sees the recomputed offsets
                    ds, dd = ego.s - npc.s, ego.d - npc.d
                    ox, oy = ds * fx + dd * fy, ds * rx + dd * ry
                    assert int(detect_ego(npc, ego, ell, w)) == int(zone_oracle_grid(np.array(ox), np.array(oy),
                                                                                      ell, w))
        d["info"] = f"{checked:,} grid points over 6 (ell, w) pairs, exact"


# -- 2. behavior tree -------------------------------------------------------------

ALLOWED = {Zone.NOT_DETECTED: {K.KEEP_SPEED}, Zone.N1: {K.DECELERATION_STRAIGHT}, Zone.F1: {K.KEEP_SPEED},
           Zone.L1: {K.KEEP_SPEED, K.LEFT_CHANGE}, Zone.L2: {K.LEFT_CHANGE}, Zone.L3: {K.ACCELERATION_STRAIGHT},
           Zone.R1: {K.KEEP_SPEED, K.RIGHT_CHANGE}, Zone.R2: {K.RIGHT_CHANGE}, Zone.R3: {K.ACCELERATION_STRAIGHT}}


def test_behavior_tree_policy():
    with criterion("behavior-tree policy table", limit=1.0) as d:
        tree = default_tree()
        for zone, allowed in ALLOWED.items():
            rng = np.random.default_rng(int(zone))
            seen = {tree.tick(zone, rng) for _ in range(1000)}
            assert seen <= allowed, (zone, seen)
            if len(allowed) == 2:
                assert seen == allowed, (zone, seen)
        d["info"] = "9 zones x 1000 ticks; L1 and R1 reach both branches"


# -- 3. Bezier ------------------------------------------------------------------------

def hull_contains(ctrl, pts, tol=1e-7):
    """Point-in-hull for 4-point hulls: inside one of the four corner triangles."""
    def cross(o, a, b):
        return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])
    ok = np.zeros(pts.shape[:2], dtype=bool)
    for i, j, k in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        a, b, c = (ctrl[:, None, n, :] for n in (i, j, k))
        d1, d2, d3 = cross(a, b, pts), cross(b, c, pts), cross(c, a, pts)
        scale = tol * (1.0 + np.abs(ctrl).max(axis=(1, 2)))[:, None] ** 2
        neg = (d1 < -scale) | (d2 < -scale) | (d3 < -scale)
        pos = (d1 > scale) | (d2 > scale) | (d3 > scale)
        ok |= ~(neg & pos)
    return ok


def test_bezier_properties():
    with criterion("Bezier properties", limit=5.0) as d:
        rng = np.random.default_rng(1)
        ctrl = rng.uniform(-100, 100, size=(10_000, 4, 2))
        zeta = np.linspace(0.0, 1.0, 21)
        pts = np.stack([bezier(c, zeta) for c in ctrl])
        assert np.array_equal(pts[:, 0], ctrl[:, 0]) and np.array_equal(pts[:, -1], ctrl[:, 3])
        assert hull_contains(ctrl, pts).all()
        accepted = 0
        for k in range(300):
            lane = int(rng.integers(HIGHWAY.lane_count))
            kind = K.LEFT_CHANGE if lane > 0 and (lane == 3 or rng.random() < 0.5) else K.RIGHT_CHANGE
            npc = VehicleState("npc0", NPC, 100.0, HIGHWAY.centerline(lane), 0.0, 8.0)
            path = plan_waypoints(npc, kind, HIGHWAY, np.random.default_rng(k))
            lo, hi = sorted((path.source_lane, path.target_lane))
            band = (HIGHWAY.lane_band(lo)[0], HIGHWAY.lane_band(hi)[1])
            assert not has_direction_inversion(path.points)
            assert not departs_lanes(path.points[path.phase_split:], band)
            assert not has_sharp_turn(path.points, 0.35)
            assert not too_sparse(path.points, 2.0)
            accepted += 1
        d["info"] = f"endpoints exact, 10,000 curves in hull, {accepted} accepted paths re-pass the filters"


# -- 4. speed planner ---------------------------------------------------------------

def envelope_check(v0, t, accel=4.0, brake=8.0, cap=20.0):
    """Closed-form reachable distance after t: full throttle to the cap, full braking to rest."""
    top = max(cap, v0)
    t1 = min(t, (top - v0) / accel)
    far = v0 * t1 + accel * t1 * t1 / 2 + top * (t - t1)
    t2 = min(t, v0 / brake)
    near = v0 * t2 - brake * t2 * t2 / 2
    return near, far


def test_speed_planner_feasibility():
    with criterion("speed-planner feasibility", limit=10.0) as d:
        rng = np.random.default_rng(2)
        kinds = list(K)
        reachable = 0
        for k in range(1000):
            lane = int(rng.integers(URBAN.lane_count))
            v0 = float(rng.uniform(0.0, 18.0))
            npc = VehicleState("npc0", NPC, 150.0, URBAN.centerline(lane), 0.0, v0)
            kind = kinds[int(rng.integers(len(kinds)))]
            if kind.is_lane_change and not 0 <= lane + (-1 if kind is K.LEFT_CHANGE else 1) < URBAN.lane_count:
                kind = K.KEEP_SPEED
            path = plan_waypoints(npc, kind, URBAN, rng)
            ego = VehicleState("ego", EGO, 150.0 + float(rng.uniform(-60, 60)),
                               URBAN.centerline(int(rng.integers(URBAN.lane_count))), 0.0, float(rng.uniform(0, 16)))
            prof = plan_speed(path, npc, ego)
            for (t0, a0), (t1, a1) in zip(prof.knots, prof.knots[1:]):
                assert -8.0 - 1e-9 <= (a1 - a0) / (t1 - t0) <= 4.0 + 1e-9
            assert np.all(prof.speeds >= 0)
            times, lo, hi = occupancy(path, npc, ego, 6.0)
            rows = [(t, a, b) for t, a, b in zip(times, lo, hi) if np.isfinite(a)]
            hit = [(t, a, b) for t, a, b in rows
                   if max(a, envelope_check(v0, t)[0]) <= min(b, envelope_check(v0, t)[1]) + 1e-9]
            if hit:
                reachable += 1
                assert prof.reachable
                assert any(abs(t - prof.target[0]) < 1e-9 and a - 1e-6 <= prof.distance_at(t) <= b + 1e-6
                           for t, a, b in rows)
        d["info"] = f"1000 pairs within limits; {reachable} with a reachable occupied region, all intersected"


# -- 5. NSGA-II --------------------------------------------------------------------------

def pairwise_ranks(pop):
    """Fast non-dominated sort written out with pairwise loops."""
    n = len(pop)
    beats = [[] for _ in range(n)]
    count = [0] * n
    for i in range(n):
        pi = pop[i]
        for j in range(n):
            pj = pop[j]
            if i != j and all(a >= b for a, b in zip(pi, pj)) and pi != pj:
                beats[i].append(j)
                count[j] += 1
    ranks = [0] * n
    front = [i for i in range(n) if count[i] == 0]
    r = 0
    while front:
        nxt = []
        for i in front:
            ranks[i] = r
            for j in beats[i]:
                count[j] -= 1
                if count[j] == 0:
                    nxt.append(j)
        front, r = nxt, r + 1
    return ranks


def test_nsga_correctness():
    with criterion("NSGA-II correctness", limit=10.0) as d:
        rng = np.random.default_rng(3)
        for _ in range(1000):
            n = int(rng.integers(1, 65))
            f = rng.integers(0, 6, size=(n, 3)).astype(float)
            ranks = pairwise_ranks([tuple(r) for r in f])
            assert list(non_dominated_sort(f)) == ranks
            got_r, crowd = rank_and_crowd(f)
            for r in set(ranks):
                members = np.flatnonzero(got_r == r)
                if len(members) > 2:
                    for m in range(3):
                        vals = f[members, m]
                        # ties at an extreme: some holder of the extreme value gets +inf
                        assert np.isinf(crowd[members[vals == vals.min()]]).any()
                        assert np.isinf(crowd[members[vals == vals.max()]]).any()
                else:
                    assert np.all(np.isinf(crowd[members]))
            tau = int(rng.integers(1, n + 1))
            oracle = sorted(range(n), key=lambda i: (ranks[i], -round(crowd[i], 9), i))[:tau]
            chosen = select_next_generation(f, tau)
            assert list(chosen) == oracle
            c = float(rng.uniform(0.1, 50.0))
            assert set(select_next_generation(f * c, tau)) == set(chosen)
        assert list(crowding_distance([(0, 1, 2), (1, 0, 2)])) == [math.inf, math.inf]
        d["info"] = "1000 populations (n <= 64) match the pairwise oracle, sort oracle and scaling"


# -- 6. restart -------------------------------------------------------------------------

def test_restart_semantics():
    with criterion("restart semantics") as d:
        flat = [np.array([3.0, 1.0, 2.0])]
        first = None
        for g in range(1, 12):
            flat.append(np.array([3.0, 1.0, 2.0]))
            if check_restart(flat) and first is None:
                first = g
        assert first == 5
        search = ScenarioSearch(URBAN, np.random.default_rng(4), SearchParams(tau=10, offspring=10))
        emitted = []
        while len(emitted) < 500:
            batch = search.ask()
            emitted.extend(batch)
            search.tell([(1.0, 1.0, 1.0)] * len(batch))
        assert search.restarts[0] == 5
        keys = [fingerprint(c.config) for c in emitted]
        assert len(set(keys)) == len(keys) == 500
        d["info"] = f"first restart at generation 5 (restarts {search.restarts}); 500 configs, no repeats"


# -- 7. determinism and replay; 8. truncation ----------------------------------------

@pytest.fixture(scope="module")
def twin_campaigns(tmp_path_factory):
    root = tmp_path_factory.mktemp("twins")
    dirs = []
    for seed in range(20):
        pair = []
        for run in ("a", "b"):
            out = root / f"{seed:02d}{run}"
            run_campaign(CampaignSettings(road="urban2" if seed % 2 else "highway4", budget=10, seed=seed,
                                          tau=5, offspring=5, out=str(out)))
            pair.append(out)
        dirs.append(pair)
    return dirs


SIDECARS = {"timings.json", "wall_clock.json"}


def test_executor_determinism_and_replay(twin_campaigns):
    with criterion("executor determinism and replay") as d:
        files = replays = 0
        for a, b in twin_campaigns:
            names = sorted(p.relative_to(a) for p in a.rglob("*.json") if p.name not in SIDECARS)
            assert names == sorted(p.relative_to(b) for p in b.rglob("*.json") if p.name not in SIDECARS)
            for name in names:
                assert (a / name).read_bytes() == (b / name).read_bytes(), name
                files += 1
            records, _, _ = load_campaign(a)
            for rec in records:
                again = replay(rec)
                assert again.frames == rec.frames and again.outcome == rec.outcome
                replays += 1
        d["info"] = f"20 campaigns x 10 scenarios, {files} files byte-identical, {replays} replays exact"


def test_collision_truncation(twin_campaigns):
    with criterion("collision truncation") as d:
        frames = stopped = 0
        for a, _ in twin_campaigns:
            for rec in load_campaign(a)[0]:
                for f in rec.frames:
                    boxes = [s.box() for s in f.states]
                    assert not any(boxes_collide(boxes[0], b) for b in boxes[1:])
                    frames += 1
                if rec.outcome == COLLISION_STOPPED:
                    stopped += 1
                    assert rec.contact["frame"] == rec.frames[-1].index + 1
                    hit = rec.contact["states"]
                    ego = VehicleState("ego", EGO, *hit["ego"])
                    npc = VehicleState(rec.contact["npc"], NPC, *hit[rec.contact["npc"]])
                    assert boxes_collide(ego.box(), npc.box())
        assert stopped > 0
        d["info"] = f"{frames} frames free of EGO contact; {stopped} collision records end one step before contact"


# -- 9. liability -------------------------------------------------------------------------

def test_liability_fixture_accuracy():
    with criterion("liability fixture accuracy") as d:
        paths = fixture_paths()
        assert len(paths) == 20
        agree, misses = 0, []
        for path in paths:
            rec, expected = load_fixture(path)
            event = next(e for e in rec.violations if e.kind == COLLISION)
            verdict = determine_liability(rec, event).verdict
            if verdict == expected["verdict"]:
                agree += 1
            else:
                misses.append(path.stem)
        assert agree >= 18, misses
        d["info"] = f"{agree}/20 agree" + (f"; miss: {', '.join(misses)}" if misses else "")


# -- 10. metric arithmetic ----------------------------------------------------------------

def constructed_campaign(ego_caused, violations):
    """One record per violation: EGO_Fault collisions and line crossings are EGO-caused, the rest NPC_Fault."""
    records = []
    for k in range(violations):
        rec = synthetic_record([[(100.0, 1.75, 0, 10), (200.0, 5.25, 0, 0)]])
        if k < ego_caused and k % 2:
            rec.violations = [ViolationEvent(ILLEGAL_LINE_CROSS, 0, ("ego",))]
            rec.liability = []
        else:
            rec.outcome = COLLISION_STOPPED
            rec.violations = [ViolationEvent(COLLISION, 0, ("ego", "npc0"))]
            rec.liability = [{"frame": 0, "npc": "npc0", "verdict": EGO_FAULT if k < ego_caused else NPC_FAULT,
                              "rule": "r", "evidence": {"x": 0.0, "ego_lane": 0, "npc_lane": 0, "switched": False,
                                                        "npc_maneuver": None}}]
        records.append(rec)
    return records


def test_metric_arithmetic():
    with criterion("metric arithmetic reproduction") as d:
        urban = summarize(constructed_campaign(470, 540))
        highway = summarize(constructed_campaign(233, 340))
        assert (urban.ego_fault_num, urban.violation_num, urban.proportion) == (470, 540, 87.04)
        assert (highway.ego_fault_num, highway.violation_num, highway.proportion) == (233, 340, 68.53)
        assert proportion(470, 540) == 87.04 and proportion(233, 340) == 68.53
        d["info"] = "470/540 -> 87.04 %, 233/340 -> 68.53 %"


# -- 11. smoke ---------------------------------------------------------------------------------

def test_end_to_end_smoke(tmp_path):
    with criterion("end-to-end smoke", limit=600.0) as d:
        out = tmp_path / "smoke"
        live = run_campaign(CampaignSettings(road="urban2", budget=200, seed=1, out=str(out)))
        assert live.scenario_num == 200
        assert live.violation_num >= 1 and live.ego_fault_num >= 1
        assert report(out) == live
        assert json.loads((out / "report.json").read_text())["scenario_num"] == 200
        d["info"] = (f"200 scenarios, {live.violation_num} violations, {live.ego_fault_num} EGO-caused "
                     f"({live.proportion} %)")
