"""
One scenario from configuration to verdict
==========================================

Sample a random configuration, drive it with the baseline EGO, score it
on the three objectives and ask who is liable for any collision.
"""

import numpy as np

from advfuzz import execute_scenario, load_road
from advfuzz.liability import assign_liability
from advfuzz.search import evaluate_fitness, random_config

road = load_road("urban2")

# %%
# Look for a seed that ends in a collision so there is something to judge.
for seed in range(50):
    config = random_config(road, np.random.default_rng(seed))
    record = execute_scenario(road, config, seed=seed)
    if record.outcome == "CollisionStopped":
        break

print("seed", seed, "->", record.outcome, "after", len(record.frames), "frames")
print("EGO start", tuple(config.ego_start), "NPCs", [tuple(p) for p in config.npc_starts])
for event in record.violations:
    print(f"  {event.kind:22s} frame {event.frame:3d}  {event.participants}")

f1, f2, f3 = evaluate_fitness(record, config, road)
print(f"fitness: destination gap {f1:.1f} m, closeness {f2:.1f}, line pressure {f3:.2f}")

for verdict in assign_liability(record):
    print(f"verdict: {verdict.verdict} ({verdict.rule}); x = {verdict.x:.2f} m, "
          f"lanes EGO {verdict.ego_lane} / NPC {verdict.npc_lane}, NPC doing {verdict.npc_maneuver}")
