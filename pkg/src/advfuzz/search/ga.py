"""Generational NSGA-II loop over scenario configurations with stagnation restart.

The search is driven ask/tell style so that the caller owns evaluation
(and may fan it out over workers)::

    search = ScenarioSearch(road, rng)
    while budget:
        batch = search.ask()
        search.tell([evaluate(c.config) for c in batch])
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CrossoverError, GenerationError, MutationError
from ..road import RoadModel
from .config import DEFAULT_FRAMES, MAX_ATTEMPTS, ScenarioConfig, crossover, fingerprint, mutate, random_config
from .nsga import rank_and_crowd, select_next_generation

RANDOM = "random"
MUTATION = "mutation"
CROSSOVER = "crossover"
RESTART = "restart"


@dataclass(frozen=True)
class SearchParams:
    tau: int = 20
    offspring: int = 20              # half from mutation, half from crossover pairs
    restart_stagnation: int = 5
    npc_count: int | None = None     # defaults to the lane count
    max_frames: int = DEFAULT_FRAMES

    def __post_init__(self):
        if self.tau < 2 or self.offspring < 1 or self.restart_stagnation < 1:
            raise ValueError(f"invalid search parameters {self}")


@dataclass
class Candidate:
    config: ScenarioConfig
    origin: str
    generation: int
    index: int
    fitness: np.ndarray | None = None
    rank: int = 0
    crowding: float = 0.0


def check_restart(history, window: int = 5) -> bool:
    """True when none of the last ``window`` generations beat the earlier best on any objective.

    ``history`` holds one per-objective best vector per generation. The
    archive is the per-objective maximum over everything before the window,
    so the first possible restart is at generation ``window``.
    """
    h = np.asarray(history, dtype=float)
    if h.ndim != 2 or len(h) == 0:
        raise ValueError("history must be a non-empty list of fitness vectors")
    if len(h) <= window:
        return False
    archive = h[:-window].max(axis=0)
    return not bool(np.any(h[-window:] > archive))


@dataclass
class ScenarioSearch:
    road: RoadModel
    rng: np.random.Generator
    params: SearchParams = SearchParams()
    generation: int = 0
    population: list[Candidate] = field(default_factory=list)
    history: list[np.ndarray] = field(default_factory=list)
    seen: set = field(default_factory=set)
    restarts: list[int] = field(default_factory=list)
    _pending: list[Candidate] | None = None
    _restart_next: bool = False

    def ask(self) -> list[Candidate]:
        """Configurations of the next generation; call ``tell`` before asking again."""
        if self._pending is not None:
            raise RuntimeError("previous generation has not been told yet")
        if not self.population or self._restart_next:
            origin = RESTART if self._restart_next else RANDOM
            configs = [(self._fresh(), origin) for _ in range(self.params.tau)]
        else:
            configs = self._offspring()
        self._pending = [Candidate(c, o, self.generation, i) for i, (c, o) in enumerate(configs)]
        return list(self._pending)

    def tell(self, fitness) -> None:
        """Feed back fitness for the first ``len(fitness)`` asked candidates.

        Fewer values than candidates is allowed (an exhausted budget); the
        rest are dropped.
        """
        if self._pending is None:
            raise RuntimeError("tell without ask")
        done = self._pending[:len(fitness)]
        self._pending = None
        if not done:
            return
        for cand, f in zip(done, fitness):
            cand.fitness = np.asarray(f, dtype=float)
        self.history.append(np.max([c.fitness for c in done], axis=0))
        if self._restart_next or not self.population:
            pool = done
            self._restart_next = False
        else:
            pool = self.population + done
        keep = select_next_generation([c.fitness for c in pool], self.params.tau)
        self.population = [pool[i] for i in keep]
        self._annotate()
        if check_restart(self.history, self.params.restart_stagnation):
            self.restarts.append(self.generation)
            self.history = []
            self._restart_next = True
        self.generation += 1

    def _annotate(self) -> None:
        ranks, crowd = rank_and_crowd([c.fitness for c in self.population])
        for c, r, d in zip(self.population, ranks, crowd):
            c.rank, c.crowding = int(r), float(d)

    def _remember(self, config: ScenarioConfig) -> bool:
        key = fingerprint(config)
        if key in self.seen:
            return False
        self.seen.add(key)
        return True

    def _fresh(self) -> ScenarioConfig:
        for _ in range(MAX_ATTEMPTS):
            cfg = random_config(self.road, self.rng, self.params.npc_count, self.params.max_frames)
            if self._remember(cfg):
                return cfg
        raise GenerationError(f"no unseen random configuration in {MAX_ATTEMPTS} attempts")

    def _tournament(self) -> Candidate:
        i, j = self.rng.integers(len(self.population), size=2)
        a, b = self.population[i], self.population[j]
        return a if (a.rank, -a.crowding) <= (b.rank, -b.crowding) else b

    def _offspring(self) -> list[tuple[ScenarioConfig, str]]:
        n = self.params.offspring
        n_cross = (n // 2) // 2 * 2 if len(self.population) > 1 else 0
        out: list[tuple[ScenarioConfig, str]] = []
        attempts = 0
        while len(out) < n - n_cross:
            attempts += 1
            if attempts > MAX_ATTEMPTS * n:
                raise GenerationError("mutation keeps producing seen configurations")
            try:
                child = mutate(self._tournament().config, self.road, self.rng)
            except MutationError:
                continue
            if self._remember(child):
                out.append((child, MUTATION))
        while len(out) < n:
            attempts += 1
            if attempts > MAX_ATTEMPTS * n:
                raise GenerationError("crossover keeps producing seen configurations")
            try:
                kids = crossover(self._tournament().config, self._tournament().config, self.rng, self.road)
            except CrossoverError:
                continue
            for child in kids:
                if len(out) < n and self._remember(child):
                    out.append((child, CROSSOVER))
        return out
