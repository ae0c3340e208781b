"""A swarm at a T junction, with and without chemistry.

Run with ``python demos/01_single_t_junction.py``. Each trial takes a couple
of seconds, so this keeps the counts small; the CLI ``truth-table`` command
runs the full thing.
"""
from collections import Counter
from dataclasses import replace

import numpy as np

from physarum_routing.experiments import TrialConfig, combo_inputs, run_trial
from physarum_routing.geometry import build_t_junction

# The arena: a vertical input channel meeting a horizontal bar, with a pad at
# the far end of each arm.
arena = build_t_junction()
print("grid", arena.shape, "zones", sorted(arena.zones))

# No chemistry: the trail alone should pull the swarm into one arm.
base = TrialConfig()
outcomes = Counter()
for seed in range(6):
    res = run_trial(replace(base, inputs=combo_inputs("NN"), seed=seed))
    outcomes[res.outcome.value] += 1
print("NN", dict(outcomes))

# Attractant on the left pad only.
for combo in ("AN", "AA", "AI"):
    res = run_trial(TrialConfig(inputs=combo_inputs(combo), seed=1))
    print(combo, res.outcome.value, f"advanced {res.advancement:.1f} mm")

# A crude ASCII look at the last trail, shaded by trail relative to the
# occupancy threshold ('@' is at or above it); blank is void.
res = run_trial(TrialConfig(inputs=combo_inputs("AN"), seed=2))
theta = res.config.occupancy_threshold
shade = np.array(list(".:-=+*#%@"))
level = np.clip(res.trail / theta * (len(shade) - 1), 0, len(shade) - 1).astype(int)
rows = np.where(arena.traversable, shade[level], " ")
print(f"occupied cells {int(res.occupancy.sum())}, max trail {res.trail.max():.0f} (theta {theta:.0f})")
for r in rows[::3]:
    print("".join(r[::2]))

# Most of the swarm ends up packed into a few cells at the pad: the trail
# there is hundreds of times the threshold, while the arm it walked along
# has faded back below it.
