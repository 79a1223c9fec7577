from .agent import AdversarialNPC, AgentParams, Maneuver, ManeuverStatus
from .behavior import (Action, BehaviorTree, Condition, ManeuverKind, Selector, Sequence, default_tree,
                       tick_behavior_tree)
from .planning import (PlannerParams, SpeedProfile, WaypointPath, bezier, envelope, occupancy, path_defects,
                       plan_speed, plan_waypoints, profile_through)
from .zones import Zone, classify_offset, classify_offsets, detect_ego, relative_offset

__all__ = [
    "Action", "AdversarialNPC", "AgentParams", "BehaviorTree", "Condition", "Maneuver", "ManeuverKind",
    "ManeuverStatus", "PlannerParams", "Selector", "Sequence", "SpeedProfile", "WaypointPath", "Zone",
    "bezier", "classify_offset", "classify_offsets", "default_tree", "detect_ego", "envelope", "occupancy",
    "path_defects", "plan_speed", "plan_waypoints", "profile_through", "relative_offset", "tick_behavior_tree",
]
