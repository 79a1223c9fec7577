"""Scenario configuration genome and its random generation, mutation and crossover."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import CrossoverError, GenerationError, MutationError, SetupError
from ..kinematics import VehicleState, boxes_collide
from ..road import Point, RoadModel

VEHICLE_LENGTH = 4.7
VEHICLE_WIDTH = 2.0
DEFAULT_FRAMES = 500
MAX_ATTEMPTS = 100

WEATHER_FLOATS = ("rain", "fog", "wetness", "cloudness")
WEATHER_GENES = WEATHER_FLOATS + ("time",)


@dataclass(frozen=True)
class Weather:
    """Weather genes; searched and persisted but inert in the simulator."""
    rain: float = 0.0
    fog: float = 0.0
    wetness: float = 0.0
    cloudness: float = 0.0
    time: int = 12

    def genes(self) -> tuple:
        return tuple(getattr(self, g) for g in WEATHER_GENES)

    @classmethod
    def from_genes(cls, genes) -> "Weather":
        return cls(*(float(g) for g in genes[:4]), int(genes[4]))


@dataclass(frozen=True)
class ScenarioConfig:
    ego_start: Point
    destination: Point
    npc_starts: tuple[Point, ...]
    weather: Weather = Weather()
    max_frames: int = DEFAULT_FRAMES

    def chromosome(self, name: str) -> tuple:
        if name == "E":
            return (self.ego_start, self.destination)
        if name == "N":
            return self.npc_starts
        if name == "W":
            return self.weather.genes()
        raise KeyError(name)

    def with_chromosome(self, name: str, genes) -> "ScenarioConfig":
        genes = tuple(genes)
        if name == "E":
            return replace(self, ego_start=genes[0], destination=genes[1])
        if name == "N":
            return replace(self, npc_starts=genes)
        if name == "W":
            return replace(self, weather=Weather.from_genes(genes))
        raise KeyError(name)

    def genes(self) -> list[tuple[str, int, object]]:
        """Flat ``(chromosome, index, value)`` listing used for diffing."""
        return [(c, i, g) for c in CHROMOSOMES for i, g in enumerate(self.chromosome(c))]

    def to_dict(self) -> dict:
        return {
            "ego": {"start": list(self.ego_start), "destination": list(self.destination)},
            "npcs": [list(p) for p in self.npc_starts],
            "weather": {g: getattr(self.weather, g) for g in WEATHER_GENES},
            "max_frames": self.max_frames,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        w = data.get("weather", {})
        return cls(
            ego_start=Point(*map(float, data["ego"]["start"])),
            destination=Point(*map(float, data["ego"]["destination"])),
            npc_starts=tuple(Point(*map(float, p)) for p in data["npcs"]),
            weather=Weather(*(float(w.get(g, 0.0)) for g in WEATHER_FLOATS), int(w.get("time", 12))),
            max_frames=int(data.get("max_frames", DEFAULT_FRAMES)),
        )


CHROMOSOMES = ("E", "N", "W")


def _box(p: Point):
    return VehicleState("", "", p.s, p.d, 0.0, 0.0, VEHICLE_LENGTH, VEHICLE_WIDTH).box()


def config_problems(config: ScenarioConfig, road: RoadModel) -> list[str]:
    out = []
    half = VEHICLE_LENGTH / 2.0
    if not config.npc_starts:
        out.append("no NPCs")
    for k, p in enumerate(config.npc_starts):
        if not (road.bubble_start + half <= p.s <= road.bubble_end - half):
            out.append(f"npc{k} outside bubble")
    if not (half <= config.ego_start.s <= road.bubble_start - half):
        out.append("EGO start not before bubble")
    if not (road.bubble_end < config.destination.s <= road.road_length):
        out.append("destination not beyond bubble")
    for p in (config.ego_start, config.destination, *config.npc_starts):
        if not (VEHICLE_WIDTH / 2.0 < p.d < road.width - VEHICLE_WIDTH / 2.0):
            out.append(f"point {tuple(p)} not inside the road laterally")
    for name in WEATHER_FLOATS:
        v = getattr(config.weather, name)
        if not 0.0 <= v <= 1.0:
            out.append(f"{name}={v} outside [0, 1]")
    if not (isinstance(config.weather.time, int) and 0 <= config.weather.time <= 24):
        out.append(f"time={config.weather.time} outside [0, 24]")
    if config.max_frames <= 0:
        out.append("max_frames must be positive")
    boxes = [_box(p) for p in (config.ego_start, *config.npc_starts)]
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if boxes_collide(boxes[i], boxes[j]):
                out.append(f"initial boxes {i} and {j} overlap")
    return out


def validate_config(config: ScenarioConfig, road: RoadModel) -> None:
    problems = config_problems(config, road)
    if problems:
        raise SetupError("; ".join(problems))


def _lane_point(road: RoadModel, rng, lo: float, hi: float) -> Point:
    lane = int(rng.integers(road.lane_count))
    return Point(float(rng.uniform(lo, hi)), road.centerline(lane))


def sample_ego_start(road, rng) -> Point:
    half = VEHICLE_LENGTH / 2.0
    return _lane_point(road, rng, half, road.bubble_start - half)


def sample_destination(road, rng) -> Point:
    return _lane_point(road, rng, road.bubble_end + 10.0, road.road_length - 10.0)


def sample_npc_start(road, rng) -> Point:
    half = VEHICLE_LENGTH / 2.0
    return _lane_point(road, rng, road.bubble_start + half, road.bubble_end - half)


def sample_weather_gene(name: str, rng):
    if name == "time":
        return int(rng.integers(0, 25))
    return float(rng.uniform(0.0, 1.0))


def random_config(road: RoadModel, rng: np.random.Generator, npc_count: int | None = None,
                  max_frames: int = DEFAULT_FRAMES) -> ScenarioConfig:
    n = road.lane_count if npc_count is None else npc_count
    for _ in range(MAX_ATTEMPTS):
        cfg = ScenarioConfig(
            ego_start=sample_ego_start(road, rng),
            destination=sample_destination(road, rng),
            npc_starts=tuple(sample_npc_start(road, rng) for _ in range(n)),
            weather=Weather.from_genes([sample_weather_gene(g, rng) for g in WEATHER_GENES]),
            max_frames=max_frames,
        )
        if not config_problems(cfg, road):
            return cfg
    raise GenerationError(f"could not place {n} NPCs without overlap in {MAX_ATTEMPTS} attempts")


def _resample(chrom: str, index: int, road, rng):
    if chrom == "E":
        return sample_ego_start(road, rng) if index == 0 else sample_destination(road, rng)
    if chrom == "N":
        return sample_npc_start(road, rng)
    return sample_weather_gene(WEATHER_GENES[index], rng)


def mutate(config: ScenarioConfig, road: RoadModel, rng: np.random.Generator) -> ScenarioConfig:
    """Resample exactly one gene of one uniformly chosen chromosome."""
    chrom = CHROMOSOMES[int(rng.integers(3))]
    genes = list(config.chromosome(chrom))
    index = int(rng.integers(len(genes)))
    for _ in range(MAX_ATTEMPTS):
        value = _resample(chrom, index, road, rng)
        if value == genes[index]:
            continue
        trial = list(genes)
        trial[index] = value
        child = config.with_chromosome(chrom, trial)
        if not config_problems(child, road):
            return child
    raise MutationError(f"no valid value for gene {chrom}[{index}] in {MAX_ATTEMPTS} attempts")


def _repair(config: ScenarioConfig, road, rng) -> ScenarioConfig:
    if not config_problems(config, road):
        return config
    npcs = list(config.npc_starts)
    for _ in range(MAX_ATTEMPTS):
        bad = _overlapping_npcs(replace(config, npc_starts=tuple(npcs)))
        if not bad:
            break
        npcs[bad[-1]] = sample_npc_start(road, rng)
    fixed = replace(config, npc_starts=tuple(npcs))
    if config_problems(fixed, road):
        raise CrossoverError("could not repair crossover child")
    return fixed


def _overlapping_npcs(config: ScenarioConfig) -> list[int]:
    boxes = [_box(p) for p in (config.ego_start, *config.npc_starts)]
    out = []
    for j in range(1, len(boxes)):
        if any(boxes_collide(boxes[i], boxes[j]) for i in range(j)):
            out.append(j - 1)
    return out


def crossover(a: ScenarioConfig, b: ScenarioConfig, rng: np.random.Generator,
              road: RoadModel | None = None) -> tuple[ScenarioConfig, ScenarioConfig]:
    """Single-point crossover inside one uniformly chosen chromosome.

    Genes from the cut point to the end of the chromosome are swapped.
    With ``road`` given, children whose NPC boxes overlap are repaired by
    resampling the offending NPC starts.
    """
    chrom = CHROMOSOMES[int(rng.integers(3))]
    ga, gb = list(a.chromosome(chrom)), list(b.chromosome(chrom))
    if len(ga) != len(gb):
        raise CrossoverError(f"chromosome {chrom} lengths differ ({len(ga)} vs {len(gb)})")
    cut = int(rng.integers(len(ga)))
    child_a = a.with_chromosome(chrom, ga[:cut] + gb[cut:])
    child_b = b.with_chromosome(chrom, gb[:cut] + ga[cut:])
    if road is not None:
        child_a, child_b = _repair(child_a, road, rng), _repair(child_b, road, rng)
    return child_a, child_b


def fingerprint(config: ScenarioConfig) -> tuple:
    """Quantised identity: positions to 1 m, weather floats to 0.05, time exact."""
    def q(p):
        return (round(p.s), round(p.d))
    w = config.weather
    return (
        q(config.ego_start), q(config.destination), tuple(q(p) for p in config.npc_starts),
        tuple(round(getattr(w, g) / 0.05) for g in WEATHER_FLOATS), w.time, config.max_frames,
    )

