"""Two junctions in series: can the swarm route to a pad two turns away?

The compound arena has a central T whose arms each end in a second T, four
terminal pads C1..C4 and two pads C5/C6 at the ends of the central arms.
"""
from dataclasses import replace

from physarum_routing.experiments import TrialConfig, expected_route, run_compound_scenario

base = TrialConfig()

for assignment in ({"C4": "A"}, {"C6": "A", "C4": "A"}, {"C5": "A", "C6": "A"}):
    rep = run_compound_scenario(assignment, 4, base)
    central, terminal = expected_route(rep.assignment)
    print(assignment, "expected", central, sorted(terminal or ()))
    print("   central", rep.central_histogram, "terminal", rep.terminal_histogram,
          f"success {rep.success_fraction:.2f}")

# Same thing with a longer run, to see whether the swarm gets past the first pad.
rep = run_compound_scenario({"C6": "A", "C4": "A"}, 2, replace(base, steps=10000))
print("long run terminal", rep.terminal_histogram)

# With C4 alone the swarm finds its way through both junctions. Adding C6
# gives it a nearer attractant pad on the way, and it settles there instead
# of carrying on to C4.
