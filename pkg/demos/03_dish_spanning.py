"""Open dish: a network between four pads, compared with the shortest tree.

The ratio printed is the network length (occupied area over an effective
tube width) divided by the Euclidean MST length of the pads it touches.
"""
from physarum_routing.experiments import TrialConfig, run_spanning
from physarum_routing.geometry import COMPASS, build_open_dish
from physarum_routing.mst import mst_length

dish = build_open_dish()
centres = {p: dish.zone_cells(p).mean(axis=0) for p in COMPASS}
print("pad centres (row, col)", {p: c.round(1).tolist() for p, c in centres.items()})
print("MST of the four pads", round(mst_length(list(centres.values())), 1), "mm")

base = TrialConfig()
for r in run_spanning("NSEW", 3, base):
    print(sorted(r.pads_occupied), "connected" if r.all_connected else "not connected",
          f"L={r.effective_length:.0f} mm ratio={r.ratio:.2f}")

# Without pads the swarm just spreads; does it reach the rim?
reps = run_spanning("", 3, base)
print("rim reached", sum(r.rim_reached for r in reps), "of", len(reps))

# The swarm forms one cord that wanders between pads rather than a tree, so
# the four pads are rarely all lit and connected at the same moment.
