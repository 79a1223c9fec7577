from .config import (CHROMOSOMES, ScenarioConfig, Weather, config_problems, crossover, fingerprint, mutate,
                     random_config, validate_config)
from .fitness import FitnessWeights, evaluate_fitness
from .ga import Candidate, ScenarioSearch, SearchParams, check_restart
from .nsga import crowding_distance, dominates, non_dominated_sort, rank_and_crowd, select_next_generation

__all__ = [
    "CHROMOSOMES", "Candidate", "FitnessWeights", "ScenarioConfig", "ScenarioSearch", "SearchParams", "Weather",
    "check_restart", "config_problems", "crossover", "crowding_distance", "dominates", "evaluate_fitness",
    "fingerprint", "mutate", "non_dominated_sort", "random_config", "rank_and_crowd", "select_next_generation",
    "validate_config",
]
