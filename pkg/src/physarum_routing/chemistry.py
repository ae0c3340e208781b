"""Volatile chemical fields: pad sources, explicit diffusion, first-order decay.

Vapour diffuses over the whole grid, void cells included, with a reflecting
(zero-flux) border. Agents only ever walk on agar, but they smell the
headspace above the walls as well.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .geometry import Arena


class StabilityError(ValueError):
    """Explicit scheme would be unstable: 4 * diffusivity > cell_size**2."""


@dataclass(frozen=True)
class ChemicalSpecies:
    name: str
    weight: float        # signed chemotactic strength, + attractant / - repellent
    diffusivity: float   # mm^2 per step
    decay: float         # fraction lost per step
    emission: float      # concentration units per step per pad cell

    def __post_init__(self):
        if not -1.0 <= self.weight <= 1.0:
            raise ValueError(f"{self.name}: weight {self.weight} outside [-1, 1]")
        if self.diffusivity < 0:
            raise ValueError(f"{self.name}: negative diffusivity")
        if not 0.0 <= self.decay < 1.0:
            raise ValueError(f"{self.name}: decay must be in [0, 1)")
        if self.emission < 0:
            raise ValueError(f"{self.name}: negative emission")

    def check_stability(self, cell_size: float):
        if 4.0 * self.diffusivity > cell_size ** 2:
            raise StabilityError(
                f"{self.name}: 4*diffusivity = {4 * self.diffusivity:g} exceeds cell_size^2 = {cell_size ** 2:g}")


# Strongest first. cis-3-hexenyl acetate closes the attractant ranking but is
# used as the weak inhibitor in the routing experiments, so it is listed once,
# as a repellent, at the weak end.
ATTRACTANT_RANKING = (
    "farnesene", "beta-myrcene", "tridecane", "limonene", "p-cymene",
    "3-octanone", "beta-pinene", "m-cresol", "benzylacetate",
)
REPELLENT_RANKING = (
    "nonanal", "benzaldehyde", "methylbenzoate", "linalool", "methyl-p-benzoquinone",
    "eugenol", "benzyl alcohol", "geraniol", "2-phenylethanol", "cis-3-hexenyl acetate",
)

# Transport per diffusion sub-step. Emissions are in the same units as the
# trail seen by the agents (trail_gain * trail): attractant pads have to
# outweigh the trail at a junction, and the repellents out-emit farnesene so
# that a -0.3 weight still dominates it.
DEFAULT_TRANSPORT = dict(diffusivity=0.25, decay=4e-4, emission=1000.0)
INHIBITOR_TRANSPORT = dict(diffusivity=0.25, decay=4e-4, emission=5000.0)

LABEL_SPECIES = {"A": "farnesene", "I": "cis-3-hexenyl acetate", "S": "nonanal"}


def _ranked_weights(names, sign, pinned):
    n = len(names)
    out = {}
    for k, name in enumerate(names):
        # linear in rank, strictly inside (0, 1)
        out[name] = sign * (n - k) / (n + 1)
    out.update({k: v for k, v in pinned.items() if k in out})
    return out


def default_species() -> dict:
    """Species table keyed by name, with the calibrated defaults."""
    weights = _ranked_weights(ATTRACTANT_RANKING, +1.0, {"farnesene": 1.0})
    weights.update(_ranked_weights(REPELLENT_RANKING, -1.0, {"nonanal": -1.0, "cis-3-hexenyl acetate": -0.3}))
    table = {}
    for name, w in weights.items():
        transport = INHIBITOR_TRANSPORT if w < 0 else DEFAULT_TRANSPORT
        table[name] = ChemicalSpecies(name, w, **transport)
    return table


def species_from_dict(d: dict) -> ChemicalSpecies:
    return ChemicalSpecies(d["name"], float(d["weight"]), float(d["diffusivity"]),
                           float(d["decay"]), float(d["emission"]))


class Field:
    """Concentration grid of one species, aligned with an arena."""

    def __init__(self, species: ChemicalSpecies, conc):
        conc = np.asarray(conc, dtype=np.float64)
        if conc.ndim != 2:
            raise ValueError("concentration grid must be 2-D")
        if (conc < 0).any():
            raise ValueError("negative concentration")
        self.species = species
        self.conc = conc

    @classmethod
    def zeros(cls, species: ChemicalSpecies, arena: Arena) -> "Field":
        return cls(species, np.zeros(arena.shape))

    def copy(self) -> "Field":
        return Field(self.species, self.conc.copy())

    @property
    def mass(self) -> float:
        return float(self.conc.sum())

    def __repr__(self):
        return f"Field({self.species.name!r}, shape={self.conc.shape}, mass={self.mass:.4g})"


def _check_aligned(field: Field, arena: Arena):
    if field.conc.shape != arena.shape:
        raise ValueError(f"field shape {field.conc.shape} does not match arena {arena.shape}")


def validate_assignment(assignment: dict, arena: Arena, species: dict) -> dict:
    """Every arena pad gets exactly one label; labels are N, A/I/S or a species name."""
    missing = set(arena.pads) - set(assignment)
    extra = set(assignment) - set(arena.pads)
    if missing or extra:
        raise ValueError(f"assignment pads mismatch: missing {sorted(missing)}, unknown {sorted(extra)}")
    out = {}
    for pad, label in assignment.items():
        if label == "N" or label is None:
            out[pad] = "N"
            continue
        name = LABEL_SPECIES.get(label, label)
        if name not in species:
            raise ValueError(f"pad {pad}: unknown input label {label!r}")
        out[pad] = name
    return out


def source_mask(arena: Arena, assignment: dict, species_name: str) -> np.ndarray:
    mask = np.zeros(arena.shape, dtype=bool)
    for pad, label in assignment.items():
        if LABEL_SPECIES.get(label, label) == species_name:
            mask |= arena.zones[pad]
    return mask


def emit_sources(field: Field, assignment: dict, arena: Arena) -> Field:
    """Add the species' emission to every cell of every pad labelled with it."""
    _check_aligned(field, arena)
    mask = source_mask(arena, assignment, field.species.name)
    conc = field.conc.copy()
    conc[mask] += field.species.emission
    return Field(field.species, conc)


@njit(cache=True)
def _diffuse(src, dst, r, keep):
    # missing neighbours mirror the centre value (zero flux); pairs are summed
    # commutatively so mirrored inputs give bit-identical mirrored outputs
    H, W = src.shape
    centre = 1.0 - 4.0 * r
    for i in range(H):
        for j in range(W):
            c = src[i, j]
            up = src[i - 1, j] if i > 0 else c
            dn = src[i + 1, j] if i < H - 1 else c
            lf = src[i, j - 1] if j > 0 else c
            rt = src[i, j + 1] if j < W - 1 else c
            dst[i, j] = keep * (centre * c + r * ((up + dn) + (lf + rt)))


def diffuse_into(conc, out, species: ChemicalSpecies, cell_size: float):
    """One explicit step from ``conc`` into the preallocated ``out``."""
    _diffuse(conc, out, species.diffusivity / cell_size ** 2, 1.0 - species.decay)


def step_field(field: Field, arena: Arena) -> Field:
    """conc' = (1 - decay) * (conc + D/h^2 * laplacian(conc)), reflecting border."""
    _check_aligned(field, arena)
    field.species.check_stability(arena.cell_size)
    out = np.empty_like(field.conc)
    diffuse_into(field.conc, out, field.species, arena.cell_size)
    return Field(field.species, out)


def stimulus(fields, pos) -> float:
    """Signed stimulus sum(weight_i * conc_i) at cell ``pos = (row, col)``."""
    return float(sum(f.species.weight * f.conc[pos] for f in fields))


def stimulus_grid(fields, shape) -> np.ndarray:
    out = np.zeros(shape)
    for f in fields:
        out += f.species.weight * f.conc
    return out


def with_overrides(sp: ChemicalSpecies, **kw) -> ChemicalSpecies:
    return replace(sp, **kw)
