"""Adversarial NPC scenario fuzzing on a deterministic 2D multi-lane traffic simulator.

Pipeline: a genetic search proposes scenario configurations, the executor
runs them with reactive adversarial NPCs around a rule-based EGO, fitness and
violations are read off the record, and collisions are assigned liability.
"""
from .campaign import CampaignReport, CampaignSettings, export_series, report, run_campaign, summarize
from .executor import SimParams, detect_violations, execute_scenario, replay
from .liability import FaultVerdict, assign_liability, determine_liability, ego_fault_set, switched
from .records import SimulationRecord, ViolationEvent, load_record, save_record
from .road import Point, RoadModel, build_road, load_road

__version__ = "0.1.0"

__all__ = [
    "CampaignReport", "CampaignSettings", "FaultVerdict", "Point", "RoadModel", "SimParams", "SimulationRecord",
    "ViolationEvent", "assign_liability", "build_road", "detect_violations", "determine_liability",
    "ego_fault_set", "execute_scenario", "export_series", "load_record", "load_road", "replay", "report",
    "run_campaign", "save_record", "summarize", "switched",
]
