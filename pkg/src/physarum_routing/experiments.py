"""Trial runner, outcome classifiers and Monte Carlo harnesses.

A trial builds its arena, inoculates the swarm, runs a chemical-free
warm-up, then switches the pads on and steps fields and swarm to the step
budget. Outcomes are read from the final occupancy grid.
"""
from __future__ import annotations

import enum
import math
import os
from collections import Counter, namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from . import calibration
from .chemistry import (LABEL_SPECIES, Field, default_species, diffuse_into, source_mask,
                        validate_assignment)
from .geometry import (COMPASS, COMPOUND_PADS, INOCULATION, Arena, build_compound_t,
                       build_open_dish, build_t_junction)
from .frames import write_frame
from .mst import mst_length
from .plasmodium import MotionParams, init_inoculum, step_swarm


class Outcome(str, enum.Enum):
    SUPPRESSED = "Suppressed"
    LEFT = "Left"
    RIGHT = "Right"
    SPLIT = "Split"


OutputVector = namedtuple("OutputVector", "left right")

_OUTCOMES = {
    (0, 0): Outcome.SUPPRESSED,
    (1, 0): Outcome.LEFT,
    (0, 1): Outcome.RIGHT,
    (1, 1): Outcome.SPLIT,
}

COMBOS = ("II", "IA", "AI", "IN", "NI", "NN", "AN", "NA", "AA")

# Table 1: expected outcome(s) and reported success rate per input pair
EXPECTED = {
    "II": {Outcome.SUPPRESSED},
    "IA": {Outcome.SUPPRESSED},
    "AI": {Outcome.SUPPRESSED},
    "IN": {Outcome.SUPPRESSED},
    "NI": {Outcome.SUPPRESSED},
    "NN": {Outcome.LEFT, Outcome.RIGHT},
    "AN": {Outcome.LEFT},
    "NA": {Outcome.RIGHT},
    "AA": {Outcome.SPLIT},
}
PAPER_SUCCESS = {"II": 1.0, "IA": 1.0, "AI": 1.0, "IN": 1.0, "NI": 1.0,
                 "NN": 1.0, "AN": 0.9, "NA": 0.9, "AA": 0.8}
SIGNAL_INPUT = {"A": 1, "I": -1, "N": 0}


@dataclass(frozen=True)
class ArenaSpec:
    kind: str = "t_junction"
    cell_size: float = 1.0
    arm_length: float | None = None
    channel_width: float | None = None
    diameter: float = 90.0
    pad_positions: tuple = COMPASS

    def build(self) -> Arena:
        kw = {}
        if self.arm_length is not None:
            kw["arm_length"] = self.arm_length
        if self.channel_width is not None:
            kw["channel_width"] = self.channel_width
        if self.kind == "t_junction":
            return build_t_junction(self.cell_size, **kw)
        if self.kind == "compound_t":
            return build_compound_t(self.cell_size, **kw)
        if self.kind == "open_dish":
            return build_open_dish(self.cell_size, self.diameter, self.pad_positions)
        raise ValueError(f"unknown arena kind {self.kind!r}")


@dataclass(frozen=True)
class TrialConfig:
    arena: ArenaSpec = ArenaSpec()
    inputs: dict = field(default_factory=lambda: {"OutL": "N", "OutR": "N"})
    species: dict = field(default_factory=default_species)
    motion: MotionParams = field(default_factory=lambda: calibration.MOTION)
    n_agents: int = calibration.N_AGENTS
    steps: int = 5000
    seed: int = 0
    theta_occ: float | None = None
    warmup_fraction: float = 0.1
    pad_fraction: float = 0.1
    w_eff: float = calibration.W_EFF
    field_substeps: int = calibration.FIELD_SUBSTEPS
    any_time: bool = False
    frames_every: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.n_agents < 1:
            raise ValueError("n_agents must be at least 1")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ValueError("warmup_fraction must be in [0, 1]")
        if self.field_substeps < 1:
            raise ValueError("field_substeps must be at least 1")
        if not 0.0 < self.pad_fraction <= 1.0:
            raise ValueError("pad_fraction must be in (0, 1]")

    @property
    def occupancy_threshold(self) -> float:
        if self.theta_occ is not None:
            return self.theta_occ
        return calibration.OCC_FRACTION * self.motion.deposit / self.motion.trail_evap

    @property
    def warmup_steps(self) -> int:
        return int(round(self.warmup_fraction * self.steps))

    def with_inputs(self, **inputs) -> "TrialConfig":
        return replace(self, inputs=dict(inputs))


@dataclass
class TrialResult:
    config: TrialConfig
    arena: Arena
    occupancy: np.ndarray
    trail: np.ndarray
    bits: dict
    outcome: object
    advancement: float
    frames: list = field(default_factory=list)
    detail: object = None
    ever_bits: dict | None = None


def occupied(trail: np.ndarray, theta: float) -> np.ndarray:
    return (trail > 0) & (trail >= theta)


def pad_bits(occupancy: np.ndarray, arena: Arena, frac: float = 0.10) -> dict:
    """Bit per pad: 1 iff at least ``frac`` of its cells are occupied."""
    return {p: int(occupancy[arena.zones[p]].mean() >= frac) for p in arena.pads}


def classify_t_outcome(occupancy: np.ndarray, arena: Arena, frac: float = 0.10):
    if arena.kind not in ("t_junction", "compound_t"):
        raise ValueError(f"cannot classify a T outcome on a {arena.kind} arena")
    if arena.kind == "t_junction":
        bits = pad_bits(occupancy, arena, frac)
        vec = OutputVector(bits["OutL"], bits["OutR"])
    else:
        vec = OutputVector(*central_bits(occupancy, arena, frac))
    return vec, _OUTCOMES[tuple(vec)]


def central_bits(occupancy, arena, frac=0.10):
    """Whether the signal reached the left / right replicate T.

    A side counts when its secondary junction is occupied or any pad of
    that replicate T is lit; a pad can only be reached through its junction.
    """
    bits = pad_bits(occupancy, arena, frac)
    out = []
    for junction, pads in (("junction_L", LEFT_SIDE), ("junction_R", RIGHT_SIDE)):
        out.append(int(occupancy[arena.regions[junction]].mean() >= frac or any(bits[p] for p in pads)))
    return tuple(out)


def advancement_distance(occupancy: np.ndarray, arena: Arena) -> float:
    """Furthest occupied input-channel cell, in mm past the inoculation zone."""
    if arena.channel_distance is None:
        raise ValueError(f"{arena.kind} arena has no input channel")
    hit = occupancy & arena.regions["input_channel"]
    if not hit.any():
        return 0.0
    return float(arena.channel_distance[hit].max())


@dataclass
class SpanningReport:
    pads_occupied: frozenset
    all_connected: bool
    network_area: float
    effective_length: float
    mst_length: float
    ratio: float
    rim_reached: bool = False

    @property
    def spans(self):
        return self.all_connected


def classify_spanning(occupancy, arena: Arena, pads_with_A, frac: float = 0.10, w_eff: float = 3.0):
    pads_with_A = [p for p in arena.pads if p in set(pads_with_A)]
    bits = pad_bits(occupancy, arena, frac)
    occ_pads = frozenset(p for p, b in bits.items() if b)
    area = float(occupancy.sum()) * arena.cell_size ** 2
    eff = area / w_eff

    connected = False
    lit = [p for p in pads_with_A if p in occ_pads]
    if lit and occupancy.any():
        labels, _ = ndimage.label(occupancy)
        for lab in np.unique(labels[arena.zones[INOCULATION]]):
            if lab == 0:
                continue
            comp = labels == lab
            if all((comp & arena.zones[p]).any() for p in lit):
                connected = True
                break
    sites = [arena.zone_center(p) for p in pads_with_A] + [arena.zone_center(INOCULATION)]
    mst = mst_length(sites) if len(sites) >= 2 else 0.0
    ratio = eff / mst if mst > 0 else math.nan
    rim = arena.regions.get("rim")
    rim_reached = bool((occupancy & rim).any()) if rim is not None else False
    return SpanningReport(occ_pads, connected, area, eff, mst, ratio, rim_reached)


def run_trial(config: TrialConfig) -> TrialResult:
    arena = config.arena.build()
    assignment = validate_assignment(config.inputs, arena, config.species)
    active = sorted({name for name in assignment.values() if name != "N"})
    fields = [Field.zeros(config.species[name], arena) for name in active]
    for f in fields:
        f.species.check_stability(arena.cell_size)
    sources = [np.flatnonzero(source_mask(arena, assignment, f.species.name)) for f in fields]
    buffers = [np.empty(arena.shape) for _ in fields]

    theta = config.occupancy_threshold
    state = init_inoculum(arena, config.n_agents, config.seed)
    chem = np.zeros(arena.shape)
    warm = config.warmup_steps
    frames = []
    ever = {p: 0 for p in arena.pads} if config.any_time else None

    for t in range(config.steps):
        if t >= warm and fields:
            chem = np.zeros(arena.shape)
            for k, f in enumerate(fields):
                f.conc.ravel()[sources[k]] += f.species.emission
                for _ in range(config.field_substeps):
                    diffuse_into(f.conc, buffers[k], f.species, arena.cell_size)
                    f.conc, buffers[k] = buffers[k], f.conc
                chem += f.species.weight * f.conc
        step_swarm(state, chem, arena, config.motion, in_place=True)
        if ever is not None:
            for p, b in pad_bits(occupied(state.trail, theta), arena, config.pad_fraction).items():
                ever[p] |= b
        if config.frames_every and (t + 1) % config.frames_every == 0:
            frames.extend(_snapshot(t + 1, fields, state.trail, theta))

    occ = occupied(state.trail, theta)
    bits = pad_bits(occ, arena, config.pad_fraction)
    advancement = advancement_distance(occ, arena) if arena.channel_distance is not None else 0.0
    detail = None
    if arena.kind == "t_junction":
        _, outcome = classify_t_outcome(occ, arena, config.pad_fraction)
    elif arena.kind == "compound_t":
        _, outcome = classify_t_outcome(occ, arena, config.pad_fraction)
    else:
        with_a = [p for p, name in assignment.items() if name != "N" and config.species[name].weight > 0]
        detail = classify_spanning(occ, arena, with_a, config.pad_fraction, config.w_eff)
        outcome = detail
    return TrialResult(config, arena, occ, state.trail.copy(), bits, outcome, advancement, frames, detail, ever)


def _snapshot(step, fields, trail, theta):
    out = [(step, f.species.name, f.conc.copy()) for f in fields]
    out.append((step, "trail", trail.copy()))
    out.append((step, "occupancy", occupied(trail, theta)))
    return out


def save_frames(frames, directory):
    """Write the (step, kind, grid) snapshots of a trial as PGM frames."""
    os.makedirs(directory, exist_ok=True)
    return [write_frame(directory, kind, step, values) for step, kind, values in frames]


def _run_and_save(config, frames_dir):
    res = run_trial(config)
    if frames_dir and res.frames:
        save_frames(res.frames, frames_dir)
    return res


def _map_trials(fn, configs, jobs):
    if jobs is None or jobs <= 1 or len(configs) <= 1:
        return [fn(c) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, configs))


# ---------------------------------------------------------------- truth table

@dataclass
class TrialRow:
    trial_id: int
    combo: str
    outcome: str
    left_bit: int
    right_bit: int
    advancement_mm: float
    steps: int
    seed: int


@dataclass
class ComboStats:
    combo: str
    trials: int
    histogram: dict
    expected: tuple
    success: float
    advancement_mean: float
    advancement_sd: float
    left_fraction: float | None = None

    @property
    def advancement_se(self):
        return self.advancement_sd / math.sqrt(self.trials) if self.trials else math.nan


@dataclass
class TruthTableReport:
    combos: dict
    rows: list
    inhibitor: str = "I"

    def __getitem__(self, combo):
        return self.combos[combo]


def _trial_row(args):
    trial_id, combo, config, frames_dir = args
    res = _run_and_save(config, frames_dir and os.path.join(frames_dir, f"{combo}_{config.seed}"))
    vec, outcome = classify_t_outcome(res.occupancy, res.arena, config.pad_fraction)
    return TrialRow(trial_id, combo, outcome.value, vec.left, vec.right,
                    res.advancement, config.steps, config.seed)


def combo_inputs(combo: str, inhibitor: str = "I") -> dict:
    """'AI' -> {'OutL': 'A', 'OutR': 'I'}, with I replaced by ``inhibitor``."""
    if len(combo) != 2 or any(c not in "AIN" for c in combo):
        raise ValueError(f"bad input combination {combo!r}")
    lab = [inhibitor if c == "I" else c for c in combo]
    return {"OutL": lab[0], "OutR": lab[1]}


def run_truth_table(base: TrialConfig, trials_per_combo: int, *, combos=COMBOS, inhibitor: str = "I",
                    jobs: int = 1, trials_override: dict | None = None, frames_dir=None) -> TruthTableReport:
    """All input pairs on the simple T; trial k of every combo uses seed base.seed + k."""
    trials_override = trials_override or {}
    work = []
    tid = 0
    for combo in combos:
        for k in range(trials_override.get(combo, trials_per_combo)):
            cfg = replace(base, arena=replace(base.arena, kind="t_junction"),
                          inputs=combo_inputs(combo, inhibitor), seed=base.seed + k)
            work.append((tid, combo, cfg, frames_dir))
            tid += 1
    rows = _map_trials(_trial_row, work, jobs)
    rows.sort(key=lambda r: r.trial_id)
    stats = {}
    for combo in combos:
        rs = [r for r in rows if r.combo == combo]
        hist = Counter(r.outcome for r in rs)
        expected = tuple(sorted(o.value for o in EXPECTED[combo]))
        ok = sum(hist[o] for o in expected)
        adv = np.array([r.advancement_mm for r in rs])
        left = None
        if combo == "NN":
            lr = hist[Outcome.LEFT.value] + hist[Outcome.RIGHT.value]
            left = hist[Outcome.LEFT.value] / lr if lr else math.nan
        stats[combo] = ComboStats(combo, len(rs), {o.value: hist.get(o.value, 0) for o in Outcome}, expected,
                                  ok / len(rs) if rs else math.nan, float(adv.mean()) if rs else math.nan,
                                  float(adv.std(ddof=1)) if len(rs) > 1 else 0.0, left)
    return TruthTableReport(stats, rows, inhibitor)


# ---------------------------------------------------------- compound junction

@dataclass
class CompoundTrial:
    trial_id: int
    seed: int
    central: str
    bits: dict
    success: bool | None


@dataclass
class CompoundReport:
    assignment: dict
    expected_central: str | None
    expected_terminal: frozenset | None
    trials: list
    central_histogram: dict
    terminal_histogram: dict

    @property
    def success_fraction(self):
        judged = [t.success for t in self.trials if t.success is not None]
        return sum(judged) / len(judged) if judged else math.nan


LEFT_SIDE = ("C1", "C2", "C5")
RIGHT_SIDE = ("C3", "C4", "C6")
TERMINAL = ("C1", "C2", "C3", "C4")


def expected_route(assignment: dict):
    """(central outcome, set of terminal pads) implied by where activator sits."""
    a = {p for p, lab in assignment.items() if lab == "A"}
    left, right = bool(a & set(LEFT_SIDE)), bool(a & set(RIGHT_SIDE))
    if not (left or right):
        return None, None
    central = {(True, True): Outcome.SPLIT, (True, False): Outcome.LEFT, (False, True): Outcome.RIGHT}[(left, right)]
    return central.value, frozenset(a & set(TERMINAL))


def _compound_trial(args):
    trial_id, config, expected, frames_dir = args
    res = _run_and_save(config, frames_dir and os.path.join(frames_dir, f"trial_{config.seed}"))
    _, central = classify_t_outcome(res.occupancy, res.arena, config.pad_fraction)
    success = None
    if expected[0] is not None:
        lit = frozenset(p for p in TERMINAL if res.bits[p])
        success = central.value == expected[0] and lit == expected[1]
    return CompoundTrial(trial_id, config.seed, central.value, res.bits, success)


def run_compound_scenario(assignment: dict, trials: int, base: TrialConfig | None = None,
                          *, jobs: int = 1, frames_dir=None) -> CompoundReport:
    base = base or TrialConfig()
    full = {p: assignment.get(p, "N") for p in COMPOUND_PADS}
    expected = expected_route(full)
    work = [(k, replace(base, arena=replace(base.arena, kind="compound_t"), inputs=full, seed=base.seed + k),
             expected, frames_dir) for k in range(trials)]
    results = _map_trials(_compound_trial, work, jobs)
    results.sort(key=lambda r: r.trial_id)
    central = Counter(r.central for r in results)
    terminal = Counter("".join(p for p in TERMINAL if r.bits[p]) or "-" for r in results)
    return CompoundReport(full, expected[0], expected[1], results, dict(central), dict(terminal))


# ------------------------------------------------------------------ spanning

def _spanning_trial(args):
    config, frames_dir = args
    return _run_and_save(config, frames_dir and os.path.join(frames_dir, f"trial_{config.seed}")).detail


def run_spanning(active_pads, trials: int, base: TrialConfig | None = None, *, jobs: int = 1,
                 frames_dir=None) -> list:
    """Open dish with pads at all four compass points, activator on ``active_pads``."""
    base = base or TrialConfig()
    active = set(active_pads)
    inputs = {p: ("A" if p in active else "N") for p in COMPASS}
    arena = replace(base.arena, kind="open_dish", pad_positions=COMPASS)
    work = [(replace(base, arena=arena, inputs=inputs, seed=base.seed + k), frames_dir) for k in range(trials)]
    return _map_trials(_spanning_trial, work, jobs)
