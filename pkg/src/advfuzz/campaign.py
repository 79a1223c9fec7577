"""Fuzzing campaigns: search -> execute -> score -> judge, persisted per scenario, plus metric reports."""
from __future__ import annotations

import csv
import json
import logging
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import RecordFormatError
from .executor import execute_scenario
from .kinematics import DT
from .liability import EGO_FAULT, assign_liability, record_verdicts
from .records import COLLISION, RULE_BREAKING, SimulationRecord, iter_record_paths, load_record, record_path, \
    save_record
from .road import RoadModel, load_road, road_from_dict
from .search.config import ScenarioConfig
from .search.fitness import FitnessWeights, evaluate_fitness
from .search.ga import ScenarioSearch, SearchParams

log = logging.getLogger(__name__)

REPORT_FILE = "report.json"
WALL_REPORT_FILE = "wall_clock.json"
TIMINGS_FILE = "timings.json"
SETTINGS_FILE = "campaign.json"
EXPORT_KINDS = ("speed_traces", "fitness", "histogram")

# campaign config file key -> CampaignSettings field
CONFIG_KEYS = {
    "road": "road", "budget": "budget", "hours": "hours", "seed": "seed", "ell": "ell", "ego": "ego",
    "tau": "tau", "offspring": "offspring", "w1": "w1", "w2": "w2", "epsilon_m": "epsilon",
    "restart_stagnation": "restart_stagnation", "out": "out",
}


@dataclass
class CampaignSettings:
    road: str | dict = "urban2"
    budget: int | None = None        # scenario count
    hours: float | None = None       # wall-clock budget
    seed: int = 0
    ell: float = 20.0
    ego: str = "baseline"
    tau: int = 20
    offspring: int = 20
    w1: float = 1.0
    w2: float = 1.0
    epsilon: float = 0.1
    restart_stagnation: int = 5
    out: str = "campaign"
    workers: int = 1

    def __post_init__(self):
        if self.budget is None and self.hours is None:
            raise ValueError("a scenario budget or an hour budget is required")
        if self.budget is not None and self.budget <= 0:
            raise ValueError(f"budget must be positive, got {self.budget}")
        if self.hours is not None and self.hours <= 0:
            raise ValueError(f"hours must be positive, got {self.hours}")
        if self.ell <= 0:
            raise ValueError(f"ell must be positive, got {self.ell}")

    def build_road(self) -> RoadModel:
        return road_from_dict(self.road) if isinstance(self.road, dict) else load_road(self.road)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("workers", "out"):      # neither affects results
            out.pop(key)
        return out


def settings_from_file(path, **overrides) -> CampaignSettings:
    """Settings from a JSON campaign config; ``overrides`` that are not None win."""
    data = json.loads(Path(path).read_text())
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown campaign config keys: {sorted(unknown)}")
    kwargs = {CONFIG_KEYS[k]: v for k, v in data.items()}
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return CampaignSettings(**kwargs)


def scenario_seed(master: int, generation: int, index: int) -> int:
    return int(np.random.SeedSequence([master, generation, index]).generate_state(1)[0])


def evaluate_scenario(road: RoadModel, config: ScenarioConfig, seed: int, ell: float, ego: str,
                      weights: FitnessWeights, meta: dict) -> tuple[SimulationRecord, float]:
    """Execute, score and judge one scenario; returns the record and its wall-clock seconds."""
    t0 = time.perf_counter()
    record = execute_scenario(road, config, ego, ell, seed, meta=meta)
    record.fitness = evaluate_fitness(record, config, road, weights).tolist()
    assign_liability(record, ell)
    return record, time.perf_counter() - t0


def _evaluate_job(job):
    return evaluate_scenario(*job)


def worker_count(default: int = 1) -> int:
    raw = os.environ.get("ADVFUZZ_WORKERS")
    if raw is None:
        return default
    n = int(raw)
    if n < 1:
        raise ValueError(f"ADVFUZZ_WORKERS must be >= 1, got {raw!r}")
    return n


@dataclass
class CampaignReport:
    scenario_num: int = 0
    violation_num: int = 0
    ego_fault_num: int = 0
    proportion: float = 0.0                   # percent of violations caused by the EGO
    minutes_per_scenario: float = 0.0
    minutes_per_violation: float | None = 0.0
    minutes_per_ego_fault: float | None = 0.0
    first_violation_minute: float | None = 0.0
    first_ego_fault_minute: float | None = 0.0
    best_fitness: list[list[float]] = field(default_factory=list)   # per generation, per objective
    histogram: dict[str, int] = field(default_factory=dict)
    corrupt_records: int = 0
    clock: str = "simulated"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignReport":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


def proportion(ego_faults: int, violations: int) -> float:
    return round(100.0 * ego_faults / violations, 2) if violations else 0.0


def summarize(records: list[SimulationRecord], durations=None, generations=None, corrupt: int = 0,
              clock: str = "simulated") -> CampaignReport:
    """Campaign metrics over records in run order.

    ``durations`` are per-scenario seconds (simulated time by default);
    event times are the scenario's start offset plus the event frame time.
    """
    if not records:
        return CampaignReport(corrupt_records=corrupt, clock=clock)
    durations = [r.duration for r in records] if durations is None else list(durations)
    generations = [r.meta.get("generation", 0) for r in records] if generations is None else list(generations)
    starts = np.concatenate([[0.0], np.cumsum(durations)[:-1]])
    total_min = float(np.sum(durations)) / 60.0

    violation_times, fault_times = [], []
    histogram: Counter = Counter()
    for start, record in zip(starts, records):
        verdicts = iter(record_verdicts(record))
        for event in record.violations:
            t = (start + event.frame * DT) / 60.0
            histogram[event.kind] += 1
            violation_times.append(t)
            if event.kind == COLLISION:
                if next(verdicts).verdict == EGO_FAULT:
                    fault_times.append(t)
            elif event.kind in RULE_BREAKING:
                fault_times.append(t)

    best: dict[int, np.ndarray] = {}
    for gen, record in zip(generations, records):
        if record.fitness is not None:
            f = np.asarray(record.fitness, dtype=float)
            best[gen] = f if gen not in best else np.maximum(best[gen], f)

    n_v, n_e = len(violation_times), len(fault_times)
    return CampaignReport(
        scenario_num=len(records),
        violation_num=n_v,
        ego_fault_num=n_e,
        proportion=proportion(n_e, n_v),
        minutes_per_scenario=total_min / len(records),
        minutes_per_violation=total_min / n_v if n_v else None,
        minutes_per_ego_fault=total_min / n_e if n_e else None,
        first_violation_minute=min(violation_times) if n_v else None,
        first_ego_fault_minute=min(fault_times) if n_e else None,
        best_fitness=[best[g].tolist() for g in sorted(best)],
        histogram=dict(sorted(histogram.items())),
        corrupt_records=corrupt,
        clock=clock,
    )


def load_campaign(records_dir) -> tuple[list[SimulationRecord], list[Path], int]:
    """Readable records in (generation, index) order, their paths and the count of corrupt files."""
    records, paths, corrupt = [], [], 0
    for path in iter_record_paths(records_dir):
        try:
            records.append(load_record(path))
            paths.append(path)
        except (RecordFormatError, OSError, UnicodeDecodeError) as exc:
            log.warning("skipping corrupt record %s: %s", path, exc)
            corrupt += 1
    return records, paths, corrupt


def _key(path: Path) -> str:
    return f"{path.parent.name}/{path.stem}"


def report(records_dir, clock: str = "simulated") -> CampaignReport:
    """Recompute the campaign report from persisted records alone.

    ``clock="wall"`` uses the measured per-scenario seconds stored beside
    the records instead of simulated time.
    """
    if not Path(records_dir).is_dir():
        raise FileNotFoundError(f"no campaign directory {records_dir}")
    records, paths, corrupt = load_campaign(records_dir)
    generations = [int(p.parent.name) for p in paths]
    durations = None
    if clock == "wall":
        timings_path = Path(records_dir) / TIMINGS_FILE
        timings = json.loads(timings_path.read_text()) if timings_path.exists() else {}
        durations = [float(timings.get(_key(p), 0.0)) for p in paths]
    elif clock != "simulated":
        raise ValueError(f"unknown clock {clock!r}")
    return summarize(records, durations, generations, corrupt, clock)


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def run_campaign(settings: CampaignSettings, progress=None) -> CampaignReport:
    """Run a seeded campaign into ``settings.out`` and return its (simulated-time) report.

    Writes one record per scenario, ``report.json``, the settings, and the
    wall-clock sidecars ``timings.json`` and ``wall_clock.json``. Records and
    ``report.json`` depend only on the settings, never on timing or worker
    count, except that an hour budget decides where the run stops.
    """
    road = settings.build_road()
    out = Path(settings.out)
    if out.exists() and iter_record_paths(out):
        raise FileExistsError(f"{out} already holds campaign records")
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / SETTINGS_FILE, settings.to_dict())

    search = ScenarioSearch(
        road, np.random.default_rng(np.random.SeedSequence([settings.seed, 0])),
        SearchParams(tau=settings.tau, offspring=settings.offspring,
                     restart_stagnation=settings.restart_stagnation),
    )
    weights = FitnessWeights(settings.w1, settings.w2, settings.epsilon)
    deadline = time.monotonic() + settings.hours * 3600.0 if settings.hours else None
    budget = settings.budget if settings.budget is not None else float("inf")
    workers = max(1, settings.workers)

    records: list[SimulationRecord] = []
    timings: dict[str, float] = {}
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while len(records) < budget and (deadline is None or time.monotonic() < deadline):
            batch = search.ask()
            batch = batch[:int(min(len(batch), budget - len(records)))]
            jobs = [(road, c.config, scenario_seed(settings.seed, c.generation, c.index), settings.ell,
                     settings.ego, weights, {"generation": c.generation, "index": c.index, "origin": c.origin})
                    for c in batch]
            results = []
            if pool is not None:
                results = list(pool.map(_evaluate_job, jobs))
            else:
                for job in jobs:
                    results.append(evaluate_scenario(*job))
                    if deadline is not None and time.monotonic() >= deadline:
                        break
            for cand, (record, wall) in zip(batch, results):
                path = save_record(record, record_path(out, cand.generation, cand.index))
                timings[_key(path)] = wall
                records.append(record)
                if progress:
                    progress(record)
            search.tell([r.fitness for r, _ in results])
    finally:
        if pool is not None:
            pool.shutdown()

    result = summarize(records)
    write_json(out / REPORT_FILE, result.to_dict())
    write_json(out / TIMINGS_FILE, timings)
    write_json(out / WALL_REPORT_FILE, summarize(records, [timings[k] for k in timings], clock="wall").to_dict())
    write_json(out / "restarts.json", search.restarts)
    return result


def _open_csv(path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh)


def export_series(records_dir, kind: str, out_dir=None) -> Path:
    """Write one CSV of plot-ready data and return its path.

    ``speed_traces``: generation, index, frame, time, vehicle, speed (one row
    per frame per vehicle). ``fitness``: per-generation best f1, f2, f3.
    ``histogram``: violation kind and count.
    """
    if kind not in EXPORT_KINDS:
        raise ValueError(f"unknown export kind {kind!r}; expected one of {EXPORT_KINDS}")
    out_dir = Path(out_dir or records_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{kind}.csv"
    fh, writer = _open_csv(path)
    with fh:
        if kind == "speed_traces":
            records, paths, _ = load_campaign(records_dir)
            writer.writerow(["generation", "index", "frame", "time", "vehicle", "speed"])
            for record, p in zip(records, paths):
                for frame in record.frames:
                    for st in frame.states:
                        writer.writerow([int(p.parent.name), int(p.stem), frame.index, f"{frame.time:.1f}",
                                         st.id, repr(st.speed)])
        elif kind == "fitness":
            writer.writerow(["generation", "f1", "f2", "f3"])
            for gen, f in enumerate(report(records_dir).best_fitness):
                writer.writerow([gen, *map(repr, f)])
        else:
            writer.writerow(["kind", "count"])
            for name, count in report(records_dir).histogram.items():
                writer.writerow([name, count])
    return path
