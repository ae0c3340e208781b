"""Calibrated model defaults shared by the trial runner and the CLI.

None of these numbers are measured quantities. They were tuned so the swarm
reproduces the routing statistics of the wet-lab experiments; see the demo
scripts for how each one shows up in behaviour.
"""
from .plasmodium import MotionParams

N_AGENTS = 2000
# occupancy threshold as a fraction of deposit / trail_evap, the steady trail
# of a cell crossed once per step. A quarter of that lets the occasional
# straggler light up the unchosen arm when no chemical is present.
OCC_FRACTION = 1.0
# diffusion sub-steps per swarm step, so vapour crosses a 40 mm arm within
# the first fifth of a trial at a stable explicit step
FIELD_SUBSTEPS = 4
W_EFF = 3.0

# Trail weight, stall level and sensor noise set how firmly the swarm commits
# to one arm without chemistry; the retreat slope is tiny because stimulus
# values are in the thousands near a repellent pad.
MOTION = MotionParams(trail_evap=0.005, trail_gain=0.2, stall_threshold=1.0, retreat_prob_slope=5e-5,
                      sensor_noise=1.0)
