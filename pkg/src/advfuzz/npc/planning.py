"""Waypoint generation (cubic Bezier lane changes) and s-t speed planning."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import PlanningError
from ..kinematics import ACCEL_MAX, BRAKE_MAX, DT, VehicleState
from ..road import RoadModel
from .behavior import ManeuverKind


@dataclass(frozen=True)
class PlannerParams:
    straight_length: float = 60.0
    point_spacing: float = 1.0
    blend_length: float = 10.0
    phase1_range: tuple[float, float] = (5.0, 15.0)
    advance_range: tuple[float, float] = (20.0, 40.0)
    bezier_samples: int = 50
    max_turn: float = 0.35
    max_spacing: float = 2.0
    max_attempts: int = 32
    horizon: float = 6.0
    dt: float = DT
    accel_max: float = ACCEL_MAX
    brake_max: float = BRAKE_MAX
    v_cap: float = 20.0


@dataclass(frozen=True, eq=False)
class WaypointPath:
    points: np.ndarray          # (n, 2) rows of (s, d)
    phase_split: int            # index of the last straight-phase point
    source_lane: int
    target_lane: int

    @property
    def arcs(self) -> np.ndarray:
        seg = np.hypot(*np.diff(self.points, axis=0).T)
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def total_length(self) -> float:
        return float(self.arcs[-1])

    @property
    def end(self) -> tuple[float, float]:
        return float(self.points[-1, 0]), float(self.points[-1, 1])


def bezier(control: np.ndarray, zeta) -> np.ndarray:
    """Evaluate a cubic Bezier curve at parameter(s) ``zeta`` in [0, 1]."""
    control = np.asarray(control, dtype=float)
    z = np.atleast_1d(np.asarray(zeta, dtype=float))[:, None]
    u = 1.0 - z
    pts = u ** 3 * control[0] + 3 * u ** 2 * z * control[1] + 3 * u * z ** 2 * control[2] + z ** 3 * control[3]
    return pts if np.ndim(zeta) else pts[0]


# -- rejection predicates -------------------------------------------------

def has_direction_inversion(points: np.ndarray) -> bool:
    return bool(np.any(np.diff(points[:, 0]) <= 0.0))


def departs_lanes(points: np.ndarray, band: tuple[float, float]) -> bool:
    d = points[:, 1]
    return bool(np.any(d < band[0]) or np.any(d > band[1]))


def has_sharp_turn(points: np.ndarray, max_turn: float) -> bool:
    step = np.diff(points, axis=0)
    heading = np.arctan2(step[:, 1], step[:, 0])
    turn = np.abs((np.diff(heading) + np.pi) % (2 * np.pi) - np.pi)
    return bool(np.any(turn > max_turn))


def too_sparse(points: np.ndarray, max_spacing: float) -> bool:
    return bool(np.any(np.hypot(*np.diff(points, axis=0).T) > max_spacing))


def path_defects(path: WaypointPath, road: RoadModel, params: PlannerParams = PlannerParams()) -> list[str]:
    """Names of every rejection rule the path breaks (empty when acceptable)."""
    lanes = sorted((path.source_lane, path.target_lane))
    band = (road.lane_band(lanes[0])[0], road.lane_band(lanes[1])[1])
    out = []
    if has_direction_inversion(path.points):
        out.append("direction_inversion")
    if departs_lanes(path.points[path.phase_split:], band):
        out.append("lane_departure")
    if has_sharp_turn(path.points, params.max_turn):
        out.append("sharp_turn")
    if too_sparse(path.points, params.max_spacing):
        out.append("sparse")
    return out


# -- waypoint generation --------------------------------------------------

def _straight(s0: float, d0: float, center: float, length: float, p: PlannerParams) -> np.ndarray:
    n = max(int(math.ceil(length / p.point_spacing)), 1)
    k = np.linspace(0.0, length, n + 1)
    blend = np.clip(1.0 - k / p.blend_length, 0.0, 1.0)
    return np.column_stack([s0 + k, center + (d0 - center) * blend])


def plan_waypoints(npc: VehicleState, kind: ManeuverKind, road: RoadModel, rng: np.random.Generator,
                   params: PlannerParams = PlannerParams()) -> WaypointPath:
    """Waypoints for a maneuver; lane changes are a straight lead-in followed by a Bezier curve.

    Raises ``PlanningError`` when the target lane does not exist or every
    sampled curve is rejected.
    """
    p = params
    lane = road.nearest_lane(npc.d)
    center = road.centerline(lane)
    kind = ManeuverKind(kind)
    if not kind.is_lane_change:
        pts = _straight(npc.s, npc.d, center, p.straight_length, p)
        return WaypointPath(pts, len(pts) - 1, lane, lane)

    target = lane - 1 if kind is ManeuverKind.LEFT_CHANGE else lane + 1
    if not 0 <= target < road.lane_count:
        raise PlanningError(f"{kind.value} from lane {lane}: no target lane")
    lo_lane, hi_lane = sorted((lane, target))
    band = (road.lane_band(lo_lane)[0], road.lane_band(hi_lane)[1])
    zeta = np.linspace(0.0, 1.0, p.bezier_samples)

    for _ in range(p.max_attempts):
        lead = rng.uniform(*p.phase1_range)
        advance = rng.uniform(*p.advance_range)
        phase1 = _straight(npc.s, npc.d, center, lead, PlannerParams(blend_length=lead))
        p0 = phase1[-1]
        p3 = np.array([p0[0] + advance, road.centerline(target)])
        p1 = np.array([p0[0] + rng.uniform(-0.1, 1.0) * advance,
                       rng.uniform(band[0] - 0.5 * road.lane_width, band[1] + 0.5 * road.lane_width)])
        p2 = np.array([p0[0] + rng.uniform(0.0, 1.1) * advance,
                       rng.uniform(band[0] - 0.5 * road.lane_width, band[1] + 0.5 * road.lane_width)])
        curve = bezier(np.stack([p0, p1, p2, p3]), zeta)
        pts = np.vstack([phase1, curve[1:]])
        path = WaypointPath(pts, len(phase1) - 1, lane, target)
        if not path_defects(path, road, p):
            return path
    raise PlanningError(f"{kind.value}: {p.max_attempts} sampled curves rejected")


# -- speed planning -------------------------------------------------------

def envelope(v0: float, t, accel: float, brake: float, v_cap: float):
    """Reachable travelled-distance bounds ``(s_min, s_max)`` after time ``t``."""
    t = np.asarray(t, dtype=float)
    cap = max(v_cap, v0)
    t_acc = (cap - v0) / accel
    s_max = np.where(t <= t_acc, v0 * t + 0.5 * accel * t ** 2,
                     v0 * t_acc + 0.5 * accel * t_acc ** 2 + cap * (t - t_acc))
    t_stop = v0 / brake
    s_min = np.where(t <= t_stop, v0 * t - 0.5 * brake * t ** 2, v0 ** 2 / (2.0 * brake))
    return s_min, s_max


def occupancy(path: WaypointPath, npc: VehicleState, ego: VehicleState, horizon: float, dt: float = DT):
    """Arc-length intervals of the path covered by the EGO at each future time step.

    The EGO is extrapolated along the road axis at its current speed; its
    box is inflated by half the NPC box so centre-in-box equals contact.
    Returns ``(times, lo, hi)`` with NaN where nothing is covered.
    """
    steps = int(round(horizon / dt))
    times = np.arange(1, steps + 1) * dt
    arcs = path.arcs
    half_l = 0.5 * (ego.length + npc.length)
    half_w = 0.5 * (ego.width + npc.width)
    centers = ego.s + ego.speed * times
    lat_ok = np.abs(path.points[:, 1] - ego.d) <= half_w
    covered = (np.abs(path.points[None, :, 0] - centers[:, None]) <= half_l) & lat_ok[None, :]
    any_cov = covered.any(axis=1)
    lo = np.where(any_cov, np.where(covered, arcs[None, :], np.inf).min(axis=1), np.nan)
    hi = np.where(any_cov, np.where(covered, arcs[None, :], -np.inf).max(axis=1), np.nan)
    return times, lo, hi


@dataclass(frozen=True, eq=False)
class SpeedProfile:
    knots: tuple[tuple[float, float], ...]   # (time, speed); speed is linear between knots, constant after
    speeds: np.ndarray                       # speed at each waypoint
    times: np.ndarray                        # arrival time at each waypoint (inf if never reached)
    target: tuple[float, float] | None = None  # (t, s) aimed at inside the occupied region
    reachable: bool = False
    occupied: tuple = field(default=(), repr=False)

    def speed_at(self, t: float) -> float:
        ts = [k[0] for k in self.knots]
        vs = [k[1] for k in self.knots]
        return float(np.interp(t, ts, vs))

    def distance_at(self, t: float) -> float:
        return _distance(self.knots, t)

    @property
    def duration(self) -> float:
        """Time to reach the final waypoint (inf if the profile stalls)."""
        return float(self.times[-1])


def _distance(knots, t: float) -> float:
    s = 0.0
    for (t0, v0), (t1, v1) in zip(knots, knots[1:]):
        if t <= t0:
            return s
        te = min(t, t1)
        a = (v1 - v0) / (t1 - t0)
        s += v0 * (te - t0) + 0.5 * a * (te - t0) ** 2
        if t <= t1:
            return s
    t_last, v_last = knots[-1]
    return s + v_last * max(t - t_last, 0.0)


def _arrival_times(knots, arcs: np.ndarray) -> np.ndarray:
    out = np.full(len(arcs), np.inf)
    s_start = 0.0
    segs = []
    for (t0, v0), (t1, v1) in zip(knots, knots[1:]):
        a = (v1 - v0) / (t1 - t0)
        length = v0 * (t1 - t0) + 0.5 * a * (t1 - t0) ** 2
        segs.append((t0, v0, a, s_start, s_start + length))
        s_start += length
    t_last, v_last = knots[-1]
    for i, sp in enumerate(arcs):
        for t0, v0, a, sa, sb in segs:
            if sp <= sb:
                rem = sp - sa
                if abs(a) < 1e-12:
                    out[i] = t0 + (rem / v0 if v0 > 1e-12 else 0.0)
                else:
                    disc = max(v0 * v0 + 2.0 * a * rem, 0.0)
                    out[i] = t0 + (math.sqrt(disc) - v0) / a
                break
        else:
            if v_last > 1e-12:
                out[i] = t_last + (sp - s_start) / v_last
            elif sp - s_start <= 1e-9:
                out[i] = t_last
    return out


def _profile(knots, arcs, **extra) -> SpeedProfile:
    knots = tuple((float(t), float(v)) for t, v in knots)
    times = _arrival_times(knots, arcs)
    ts = [k[0] for k in knots]
    vs = [k[1] for k in knots]
    speeds = np.where(np.isfinite(times), np.interp(np.where(np.isfinite(times), times, 0.0), ts, vs),
                      vs[-1])
    return SpeedProfile(knots, speeds, times, **extra)


def _knots_to_hit(v0: float, t_star: float, s_star: float, accel: float, brake: float):
    """Ramp at the limit rate to a cruise speed chosen so that s(t_star) = s_star."""
    gap = s_star - v0 * t_star
    if abs(gap) < 1e-12:
        return [(0.0, v0)]
    if gap > 0:
        disc = max(t_star ** 2 - 2.0 * gap / accel, 0.0)
        u = accel * (t_star - math.sqrt(disc))
        v1, tau = v0 + u, u / accel
    else:
        disc = max(t_star ** 2 + 2.0 * gap / brake, 0.0)
        u = min(brake * (t_star - math.sqrt(disc)), v0)
        v1, tau = v0 - u, u / brake
    if tau <= 1e-12:
        return [(0.0, v0)]
    return [(0.0, v0), (tau, max(v1, 0.0))]


def constant_profile(path: WaypointPath, speed: float) -> SpeedProfile:
    return _profile([(0.0, speed)], path.arcs)


def ramp_profile(path: WaypointPath, v0: float, v_goal: float, rate: float) -> SpeedProfile:
    if rate <= 0 or abs(v_goal - v0) < 1e-12:
        return constant_profile(path, v0)
    return _profile([(0.0, v0), (abs(v_goal - v0) / rate, v_goal)], path.arcs)


def plan_speed(path: WaypointPath, npc: VehicleState, ego: VehicleState, horizon: float = 6.0,
               params: PlannerParams = PlannerParams()) -> SpeedProfile:
    """Speed profile along ``path`` aimed through the EGO's occupied s-t region.

    The earliest time step whose occupied interval intersects the reachable
    envelope is targeted, at the distance closest to constant-speed travel.
    If no occupied step is reachable the profile saturates at the envelope
    point nearest to the region. Without occupancy the speed is held.
    """
    if len(path.points) < 2:
        raise ValueError("speed planning needs a path with at least two waypoints")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    times, lo, hi = occupancy(path, npc, ego, horizon, params.dt)
    occupied = [(float(t), float(a), float(b)) for t, a, b in zip(times, lo, hi) if np.isfinite(a)]
    return profile_through(path.arcs, npc.speed, occupied, params)


def profile_through(arcs: np.ndarray, v0: float, occupied, params: PlannerParams = PlannerParams()) -> SpeedProfile:
    """Speed profile from initial speed ``v0`` through occupied ``(t, s_lo, s_hi)`` rows."""
    p = params
    occupied = tuple((float(t), float(a), float(b)) for t, a, b in occupied)
    if not occupied:
        return _profile([(0.0, v0)], arcs)

    occ = np.array(occupied)
    s_min, s_max = envelope(v0, occ[:, 0], p.accel_max, p.brake_max, p.v_cap)
    lo_r = np.maximum(occ[:, 1], s_min)
    hi_r = np.minimum(occ[:, 2], s_max)
    hit = np.nonzero(lo_r <= hi_r)[0]
    if len(hit):
        i = int(hit[0])
        t_star = occ[i, 0]
        s_star = float(np.clip(v0 * t_star, lo_r[i], hi_r[i]))
        reachable = True
    else:
        miss = np.maximum(occ[:, 1] - s_max, s_min - occ[:, 2])
        i = int(np.argmin(miss))
        t_star = occ[i, 0]
        s_star = float(s_max[i] if occ[i, 1] > s_max[i] else s_min[i])
        reachable = False
    knots = _knots_to_hit(v0, t_star, s_star, p.accel_max, p.brake_max)
    return _profile(knots, arcs, target=(float(t_star), s_star), reachable=reachable, occupied=occupied)
