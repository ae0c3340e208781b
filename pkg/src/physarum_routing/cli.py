"""Batch front-end: ``python -m physarum_routing <command> ...``.

Commands: ``run`` (one trial), ``truth-table``, ``compound``, ``spanning``
and ``mst``. Parameters come from an optional JSON config; command-line
flags override config keys. Exit codes: 0 ok, 1 invalid input, 2 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field, replace

from . import calibration
from .chemistry import LABEL_SPECIES, ChemicalSpecies, StabilityError, default_species
from .experiments import (COMBOS, EXPECTED, PAPER_SUCCESS, ArenaSpec, TrialConfig, run_compound_scenario,
                          run_spanning, run_trial, run_truth_table, save_frames)
from .geometry import COMPASS, GeometryError
from .mst import mst_length
from .plasmodium import MotionParams

EXPERIMENTS = ("trial", "truth-table", "compound", "spanning")
COMMAND_EXPERIMENT = {"run": "trial", "truth-table": "truth-table", "compound": "compound", "spanning": "spanning"}
DEFAULT_KIND = {"trial": "t_junction", "truth-table": "t_junction", "compound": "compound_t", "spanning": "open_dish"}
DEFAULT_COMPOUND = {"C4": "A", "C6": "A"}

TOP_KEYS = {"experiment", "arena", "inputs", "active_pads", "species", "motion", "n_agents", "steps", "seed",
            "trials", "theta_occ", "frames_every", "out", "jobs", "warmup_fraction", "pad_fraction",
            "field_substeps", "w_eff", "combos", "inhibitor", "any_time"}
ARENA_KEYS = {f.name for f in dataclasses.fields(ArenaSpec)}
MOTION_KEYS = {f.name for f in dataclasses.fields(MotionParams)}
SPECIES_KEYS = {"weight", "diffusivity", "decay", "emission"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str = "truth-table"
    trial: TrialConfig = field(default_factory=TrialConfig)
    trials: int = 50
    out: str = "results"
    jobs: int | None = None
    active_pads: tuple = COMPASS
    combos: tuple = COMBOS
    inhibitor: str = "I"


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object, got {type(d).__name__}")
    bad = sorted(set(d) - allowed)
    if bad:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(map(repr, bad))}")


def _num(d, key, kind, where):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not float(v).is_integer()):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__}, got {v!r}")
    return kind(v)


def _species_table(raw) -> dict:
    table = default_species()
    _check_keys(raw, set(raw), "species")
    for label, over in raw.items():
        name = LABEL_SPECIES.get(label, label)
        where = f"species.{label}"
        _check_keys(over, SPECIES_KEYS, where)
        vals = {k: _num(over, k, float, where) for k in over}
        if name in table:
            table[name] = replace(table[name], **vals)
        else:
            missing = SPECIES_KEYS - set(vals)
            if missing:
                raise ConfigError(f"{where}: new species needs {', '.join(sorted(missing))}")
            table[name] = ChemicalSpecies(name, **vals)
    return table


def build_config(raw: dict, experiment: str | None = None) -> RunConfig:
    """Validate a decoded config dict and fill in defaults."""
    _check_keys(raw, TOP_KEYS, "config")
    exp = raw.get("experiment", experiment or "truth-table")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"config.experiment: must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")
    if experiment is not None:
        exp = experiment
    try:
        arena_raw = dict(raw.get("arena", {}))
        _check_keys(arena_raw, ARENA_KEYS, "arena")
        arena_raw.setdefault("kind", DEFAULT_KIND[exp])
        if "pad_positions" in arena_raw:
            arena_raw["pad_positions"] = tuple(arena_raw["pad_positions"])
        for k in ("cell_size", "arm_length", "channel_width", "diameter"):
            if k in arena_raw and arena_raw[k] is not None:
                arena_raw[k] = _num(arena_raw, k, float, "arena")
        arena = ArenaSpec(**arena_raw)

        motion_raw = raw.get("motion", {})
        _check_keys(motion_raw, MOTION_KEYS, "motion")
        motion = replace(calibration.MOTION, **{k: _num(motion_raw, k, float, "motion") for k in motion_raw})
        species = _species_table(raw.get("species", {}))

        kw = {}
        for k, kind in (("n_agents", int), ("steps", int), ("seed", int), ("frames_every", int),
                        ("field_substeps", int), ("warmup_fraction", float), ("pad_fraction", float),
                        ("w_eff", float)):
            if k in raw:
                kw[k] = _num(raw, k, kind, "config")
        if raw.get("theta_occ") is not None:
            kw["theta_occ"] = _num(raw, "theta_occ", float, "config")
        if "any_time" in raw:
            kw["any_time"] = bool(raw["any_time"])
        if "seed" not in kw and os.environ.get("PHYSARUM_SEED"):
            kw["seed"] = int(os.environ["PHYSARUM_SEED"])
        if exp == "trial":
            kw["inputs"] = dict(raw.get("inputs", {"OutL": "N", "OutR": "N"}))
        elif exp == "compound":
            kw["inputs"] = dict(raw.get("inputs", DEFAULT_COMPOUND))
        if kw.get("frames_every", 0) < 0:
            raise ConfigError("config.frames_every: must be >= 0")
        trial = TrialConfig(arena=arena, species=species, motion=motion, **kw)

        run = RunConfig(experiment=exp, trial=trial)
        if "trials" in raw:
            run.trials = _num(raw, "trials", int, "config")
        if "jobs" in raw:
            run.jobs = _num(raw, "jobs", int, "config")
        if "out" in raw:
            run.out = str(raw["out"])
        if "active_pads" in raw:
            run.active_pads = tuple(raw["active_pads"])
        if "combos" in raw:
            run.combos = tuple(raw["combos"])
        if "inhibitor" in raw:
            run.inhibitor = str(raw["inhibitor"])
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    validate(run)
    return run


def validate(run: RunConfig):
    """Checks that need the built arena: pads, labels and explicit-scheme stability."""
    t = run.trial
    if run.trials < 1:
        raise ConfigError("trials must be at least 1")
    if run.jobs is not None and run.jobs < 1:
        raise ConfigError("jobs must be at least 1")
    try:
        arena = t.arena.build()
    except (GeometryError, ValueError) as exc:
        raise ConfigError(f"arena: {exc}") from exc
    for sp in t.species.values():
        try:
            sp.check_stability(arena.cell_size)
        except StabilityError as exc:
            raise ConfigError(f"species: {exc}") from exc
    if run.experiment == "trial":
        full = {p: t.inputs.get(p, "N") for p in arena.pads}
        extra = set(t.inputs) - set(arena.pads)
        if extra:
            raise ConfigError(f"inputs: unknown pad(s) {sorted(extra)}")
        run.trial = replace(t, inputs=full)
    if run.experiment == "compound":
        extra = set(t.inputs) - {f"C{k}" for k in range(1, 7)}
        if extra:
            raise ConfigError(f"inputs: unknown compound pad(s) {sorted(extra)}")
    for label in set(run.trial.inputs.values()) | {run.inhibitor}:
        if label != "N" and LABEL_SPECIES.get(label, label) not in t.species:
            raise ConfigError(f"unknown input label {label!r}")
    bad = set(run.active_pads) - set(COMPASS)
    if bad:
        raise ConfigError(f"active_pads: unknown pad(s) {sorted(bad)}")
    bad = [c for c in run.combos if c not in COMBOS]
    if bad:
        raise ConfigError(f"combos: unknown combination(s) {bad}")


def parse_config(path, experiment: str | None = None) -> RunConfig:
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        text = fh.read()
    if not text.strip():
        raise ConfigError(f"{path}: empty config file")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return build_config(raw, experiment)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# ------------------------------------------------------------------ outputs

def _dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def format_table1(report) -> str:
    lines = [f"{'input':<6}{'expected':<14}{'paper':>7}{'observed':>10}  {'histogram (S/L/R/X)':<21}{'advance mm':>14}"]
    for combo, st in report.combos.items():
        h = st.histogram
        hist = f"{h['Suppressed']}/{h['Left']}/{h['Right']}/{h['Split']}"
        exp = "|".join(st.expected)
        lines.append(f"{combo:<6}{exp:<14}{PAPER_SUCCESS[combo]:>7.0%}{st.success:>10.0%}  {hist:<21}"
                     f"{st.advancement_mean:>7.1f} ± {st.advancement_sd:<5.1f}")
        if st.left_fraction is not None:
            lines[-1] += f"  left {st.left_fraction:.2f}"
    return "\n".join(lines)


def cmd_run(run: RunConfig):
    res = run_trial(run.trial)
    os.makedirs(run.out, exist_ok=True)
    if res.frames:
        save_frames(res.frames, os.path.join(run.out, "frames"))
    summary = {"seed": run.trial.seed, "steps": run.trial.steps, "inputs": run.trial.inputs,
               "bits": res.bits, "advancement_mm": res.advancement}
    if res.detail is not None:
        summary["outcome"] = "spanning"
        summary["spanning"] = _spanning_dict(res.detail)
    else:
        summary["outcome"] = res.outcome.value
    if res.ever_bits is not None:
        summary["ever_bits"] = res.ever_bits
    _dump_json(summary, os.path.join(run.out, "trial.json"))
    print(f"outcome {summary['outcome']}  bits {res.bits}  advancement {res.advancement:g} mm")


def cmd_truth_table(run: RunConfig):
    os.makedirs(run.out, exist_ok=True)
    frames = os.path.join(run.out, "frames") if run.trial.frames_every else None
    rep = run_truth_table(run.trial, run.trials, combos=run.combos, inhibitor=run.inhibitor,
                          jobs=run.jobs, frames_dir=frames)
    _write_csv(os.path.join(run.out, "table1.csv"),
               ["trial_id", "combo", "outcome", "left_bit", "right_bit", "advancement_mm", "steps"],
               [[r.trial_id, r.combo, r.outcome, r.left_bit, r.right_bit, repr(r.advancement_mm), r.steps]
                for r in rep.rows])
    summary = {combo: {"trials": st.trials, "histogram": st.histogram, "expected": list(st.expected),
                       "success": st.success, "paper_success": PAPER_SUCCESS[combo],
                       "advancement_mean_mm": st.advancement_mean, "advancement_sd_mm": st.advancement_sd,
                       "left_fraction": st.left_fraction}
               for combo, st in rep.combos.items()}
    _dump_json({"seed": run.trial.seed, "steps": run.trial.steps, "inhibitor": run.inhibitor, "combos": summary},
               os.path.join(run.out, "summary.json"))
    print(format_table1(rep))


def cmd_compound(run: RunConfig):
    os.makedirs(run.out, exist_ok=True)
    frames = os.path.join(run.out, "frames") if run.trial.frames_every else None
    rep = run_compound_scenario(run.trial.inputs, run.trials, run.trial, jobs=run.jobs, frames_dir=frames)
    pads = sorted(rep.assignment)
    _write_csv(os.path.join(run.out, "compound.csv"), ["trial_id", "seed", "central"] + pads + ["success"],
               [[t.trial_id, t.seed, t.central] + [t.bits[p] for p in pads] + ["" if t.success is None else int(t.success)]
                for t in rep.trials])
    summary = {"assignment": rep.assignment, "expected_central": rep.expected_central,
               "expected_terminal": sorted(rep.expected_terminal) if rep.expected_terminal is not None else None,
               "central_histogram": rep.central_histogram, "terminal_histogram": rep.terminal_histogram,
               "success_fraction": rep.success_fraction if rep.expected_central else None}
    _dump_json(summary, os.path.join(run.out, "summary.json"))
    print(f"assignment {rep.assignment}")
    print(f"central  {rep.central_histogram}")
    print(f"terminal {rep.terminal_histogram}")
    if rep.expected_central:
        print(f"expected {rep.expected_central} then {sorted(rep.expected_terminal) or 'no terminal pad'}: "
              f"success {rep.success_fraction:.0%}")


def _spanning_dict(r):
    return {"pads_occupied": sorted(r.pads_occupied), "all_connected": r.all_connected,
            "network_area_mm2": r.network_area, "effective_length_mm": r.effective_length,
            "mst_length_mm": r.mst_length, "ratio": None if r.ratio != r.ratio else r.ratio,
            "rim_reached": r.rim_reached}


def cmd_spanning(run: RunConfig):
    os.makedirs(run.out, exist_ok=True)
    frames = os.path.join(run.out, "frames") if run.trial.frames_every else None
    reps = run_spanning(run.active_pads, run.trials, run.trial, jobs=run.jobs, frames_dir=frames)
    rows = []
    for k, r in enumerate(reps):
        d = _spanning_dict(r)
        rows.append([k, run.trial.seed + k, "".join(d["pads_occupied"]), int(r.all_connected),
                     repr(r.network_area), repr(r.effective_length), repr(r.mst_length),
                     "" if d["ratio"] is None else repr(r.ratio), int(r.rim_reached)])
    _write_csv(os.path.join(run.out, "spanning.csv"),
               ["trial_id", "seed", "pads_occupied", "all_connected", "network_area_mm2", "effective_length_mm",
                "mst_length_mm", "ratio", "rim_reached"], rows)
    want = set(run.active_pads)
    spans = [r for r in reps if want and want <= r.pads_occupied and r.all_connected]
    n = len(reps)
    summary = {"active_pads": sorted(want), "trials": n,
               "spanning_fraction": len(spans) / n,
               "ratio_ok_fraction": (sum(r.ratio <= 2.0 for r in spans) / len(spans)) if spans else None,
               "rim_fraction": sum(r.rim_reached for r in reps) / n}
    _dump_json(summary, os.path.join(run.out, "summary.json"))
    if want:
        print(f"spanning {len(spans)}/{n}", end="")
        if spans:
            print(f"  ratio<=2 in {summary['ratio_ok_fraction']:.0%} of them", end="")
        print()
    print(f"rim reached {sum(r.rim_reached for r in reps)}/{n}")


def cmd_mst(points):
    pts = []
    for p in points:
        try:
            x, y = p.split(",")
            pts.append((float(x), float(y)))
        except ValueError:
            raise ConfigError(f"bad point {p!r}, expected x,y") from None
    if len(pts) < 2:
        raise ConfigError("need at least two points")
    print(f"{mst_length(pts, max_points=max(8, len(pts))):.12g}")


def build_parser():
    ap = argparse.ArgumentParser(prog="physarum-routing", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "single trial"), ("truth-table", "all nine input pairs on the simple T"),
                        ("compound", "compound T scenario"), ("spanning", "open dish spanning trials")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON run config")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--steps", type=int)
        p.add_argument("--out")
        p.add_argument("--frames-every", type=int, help="frame cadence in steps, 0 for none")
        p.add_argument("--jobs", type=int, help="worker processes (default: all processors)")
    p = sub.add_parser("mst", help="Euclidean MST length of x,y points")
    p.add_argument("points", nargs="+")
    return ap


def resolve(args) -> RunConfig:
    exp = COMMAND_EXPERIMENT[args.command]
    run = parse_config(args.config, exp) if args.config else build_config({}, exp)
    t = run.trial
    if args.seed is not None:
        t = replace(t, seed=args.seed)
    if args.steps is not None:
        t = replace(t, steps=args.steps)
    if args.frames_every is not None:
        if args.frames_every < 0:
            raise ConfigError("--frames-every must be >= 0")
        t = replace(t, frames_every=args.frames_every)
    run.trial = t
    if args.trials is not None:
        run.trials = args.trials
    if args.out is not None:
        run.out = args.out
    if args.jobs is not None:
        run.jobs = args.jobs
    if run.jobs is None:
        run.jobs = os.cpu_count() or 1
    validate(run)
    return run


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "mst":
            cmd_mst(args.points)
            return 0
        run = resolve(args)
        {"run": cmd_run, "truth-table": cmd_truth_table, "compound": cmd_compound,
         "spanning": cmd_spanning}[args.command](run)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
