"""
How an adversarial NPC picks and plans a maneuver
=================================================

An NPC sees the EGO through nine perception zones, feeds the zone to a
behavior tree, turns the chosen maneuver into waypoints and then into a
speed profile aimed at the EGO's predicted path.
"""

import numpy as np

from advfuzz import load_road
from advfuzz.kinematics import EGO, NPC, VehicleState
from advfuzz.npc import default_tree, detect_ego, plan_speed, plan_waypoints

road = load_road("urban2")
print("lane centrelines:", road.centerlines())

# NPC in the right lane, EGO level with it one lane to the left
npc = VehicleState("npc0", NPC, 150.0, road.centerline(1), 0.0, 8.0)
ego = VehicleState("ego", EGO, 148.0, road.centerline(0), 0.0, 12.0)
zone = detect_ego(npc, ego)
print("EGO is in zone", zone.name)

# L2 always means a left lane change
rng = np.random.default_rng(0)
kind = default_tree().tick(zone, rng)
print("behavior tree picks", kind.value)

path = plan_waypoints(npc, kind, road, rng)
print(f"{len(path.points)} waypoints, {path.total_length:.1f} m, ends at d = {path.end[1]:.2f}")

profile = plan_speed(path, npc, ego)
print("aims at (t, s) =", profile.target, "reachable:", profile.reachable)
for t in (0.0, 1.0, 2.0, 3.0):
    print(f"  t = {t:.0f} s   v = {profile.speed_at(t):5.2f} m/s   s = {profile.distance_at(t):6.2f} m")
