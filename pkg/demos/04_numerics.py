"""Checks on the diffusion stepper and the MST routine.

Quick, no swarm involved.
"""
import math

import numpy as np

from physarum_routing.chemistry import ChemicalSpecies, Field, StabilityError, step_field
from physarum_routing.geometry import AGAR, Arena
from physarum_routing.mst import mst_length

arena = Arena("grid", 1.0, np.full((31, 31), AGAR), {})

# reflecting walls, no decay: total mass is constant
sp = ChemicalSpecies("x", 1.0, 0.25, 0.0, 0.0)
f = Field(sp, np.zeros(arena.shape))
f.conc[15, 15] = 100.0
for _ in range(2000):
    f = step_field(f, arena)
print("mass after 2000 steps", math.fsum(f.conc.ravel()))

# first-order decay follows (1 - lambda)^n
sp = ChemicalSpecies("y", 1.0, 0.25, 0.02, 0.0)
g = Field(sp, np.ones(arena.shape))
for _ in range(100):
    g = step_field(g, arena)
print("decay", g.conc.sum() / arena.shape[0] ** 2, "vs", 0.98 ** 100)

# past r = D dt / h^2 = 1/4 the explicit step is unstable and is refused
try:
    ChemicalSpecies("z", 1.0, 0.3, 0.0, 0.0).check_stability(arena.cell_size)
except StabilityError as exc:
    print("refused:", exc)

# unit square: MST is three sides
print("unit square MST", mst_length([(0, 0), (1, 0), (1, 1), (0, 1)]))
