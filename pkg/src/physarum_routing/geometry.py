"""Discrete arenas: simple T-junction, compound T-junction and open dish.

Grids are indexed ``[row, col]`` with row 0 at the top (north) of the dish.
Physical coordinates are millimetres with ``x`` growing with the column and
``y`` growing with the row, so ``cell = (int(y // cell_size), int(x // cell_size))``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

VOID, AGAR, PAD = 0, 1, 2

INOCULATION = "Inoculation"
T_PADS = ("OutL", "OutR")
COMPOUND_PADS = ("C1", "C2", "C3", "C4", "C5", "C6")
COMPASS = ("N", "S", "E", "W")

# one character per zone in text dumps
ZONE_CHARS = {
    INOCULATION: "P",
    "OutL": "L",
    "OutR": "R",
    **{f"C{i}": str(i) for i in range(1, 7)},
    **{c: c for c in COMPASS},
}


class GeometryError(ValueError):
    """Raised when requested dimensions do not yield a valid arena."""


class CellClass(enum.Enum):
    VOID = VOID
    AGAR = AGAR
    SOURCE_PAD = PAD


def _read_only(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Arena:
    """Immutable grid of cell classes plus named zones.

    ``zones`` maps a zone id (``Inoculation``, ``OutL``, ``C3``, ``N`` ...) to a
    boolean mask. ``regions`` holds auxiliary masks used by the classifiers
    (input channel, junction squares, rim). ``channel_distance`` gives, for
    input channel cells, the distance in mm from the inoculation zone's far
    edge to the far edge of the cell; it is NaN elsewhere.
    """

    kind: str
    cell_size: float
    cells: np.ndarray
    zones: dict
    regions: dict = field(default_factory=dict)
    channel_distance: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "cells", _read_only(self.cells.astype(np.int8)))
        object.__setattr__(self, "zones", {k: _read_only(v.astype(bool)) for k, v in self.zones.items()})
        object.__setattr__(self, "regions", {k: _read_only(v.astype(bool)) for k, v in self.regions.items()})
        if self.channel_distance is not None:
            object.__setattr__(self, "channel_distance", _read_only(self.channel_distance))
        self._validate()

    def _validate(self):
        for name, mask in self.zones.items():
            if mask.shape != self.cells.shape:
                raise GeometryError(f"zone {name} has shape {mask.shape}, grid is {self.cells.shape}")
            if not mask.any():
                raise GeometryError(f"zone {name} is empty")
        inoc = self.zones.get(INOCULATION)
        if inoc is not None and not (self.cells[inoc] == AGAR).all():
            raise GeometryError("inoculation zone must lie on agar")
        pads = [self.zones[p] for p in self.pads]
        if pads:
            stacked = np.sum(pads, axis=0)
            if stacked.max() > 1:
                raise GeometryError("pad zones overlap")
            if not (self.cells[stacked > 0] == PAD).all():
                raise GeometryError("pad zone cells must be source pads")

    @property
    def height_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def width_cells(self) -> int:
        return self.cells.shape[1]

    @property
    def shape(self):
        return self.cells.shape

    @property
    def extent(self):
        """(width, height) of the grid in mm."""
        return self.width_cells * self.cell_size, self.height_cells * self.cell_size

    @property
    def pads(self) -> tuple:
        return tuple(z for z in self.zones if z != INOCULATION)

    @property
    def traversable(self) -> np.ndarray:
        return self.cells != VOID

    def cell_class(self, row: int, col: int) -> CellClass:
        return CellClass(int(self.cells[row, col]))

    def pad_at(self, row: int, col: int) -> str | None:
        for name in self.pads:
            if self.zones[name][row, col]:
                return name
        return None

    def zone_cells(self, name: str) -> np.ndarray:
        """(k, 2) array of (row, col) indices of a zone."""
        return np.argwhere(self.zones[name])

    def zone_center(self, name: str) -> np.ndarray:
        """Centroid of a zone in mm as ``(x, y)``."""
        rc = self.zone_cells(name)
        return (rc[:, ::-1].mean(axis=0) + 0.5) * self.cell_size

    def to_text(self) -> str:
        """One character per cell: ``#`` void, ``.`` agar, zone letters otherwise."""
        chars = np.where(self.cells == VOID, "#", ".").astype("<U1")
        for name, mask in self.zones.items():
            chars[mask] = ZONE_CHARS.get(name, "?")
        return "\n".join("".join(row) for row in chars) + "\n"

    def mirrored(self) -> "Arena":
        """Left-right reflection with left/right zone names swapped."""
        swap = {"OutL": "OutR", "OutR": "OutL", "E": "W", "W": "E",
                "C1": "C4", "C4": "C1", "C2": "C3", "C3": "C2", "C5": "C6", "C6": "C5",
                "arm_L": "arm_R", "arm_R": "arm_L", "junction_L": "junction_R", "junction_R": "junction_L"}
        flip = lambda d: {swap.get(k, k): v[:, ::-1] for k, v in d.items()}
        cd = None if self.channel_distance is None else self.channel_distance[:, ::-1]
        return Arena(self.kind, self.cell_size, self.cells[:, ::-1], flip(self.zones), flip(self.regions), cd)


def _ncells(mm: float, cell_size: float, what: str) -> int:
    n = int(round(mm / cell_size))
    if n < 1:
        raise GeometryError(f"{what} of {mm} mm is below one cell at cell_size={cell_size}")
    return n


class _Canvas:
    """Rectangle painter used by the builders."""

    def __init__(self, h, w):
        if h <= 0 or w <= 0:
            raise GeometryError("empty grid")
        self.cells = np.full((h, w), VOID, dtype=np.int8)
        self.zones = {}
        self.regions = {}

    def rect(self, r0, c0, h, w):
        H, W = self.cells.shape
        if r0 < 0 or c0 < 0 or r0 + h > H or c0 + w > W or h <= 0 or w <= 0:
            raise GeometryError(f"rectangle rows {r0}:{r0 + h} cols {c0}:{c0 + w} exceeds {H}x{W} grid")
        m = np.zeros_like(self.cells, dtype=bool)
        m[r0:r0 + h, c0:c0 + w] = True
        return m

    def agar(self, mask):
        self.cells[mask & (self.cells == VOID)] = AGAR

    def pad(self, name, mask):
        if (self.cells[mask] == PAD).any():
            raise GeometryError(f"pad {name} overlaps another pad")
        self.cells[mask] = PAD
        self.zones[name] = mask


def build_t_junction(cell_size: float = 1.0, arm_length: float = 40.0, channel_width: float = 10.0,
                     *, pad_size: float = 10.0, inoculation_length: float = 10.0, margin: float = 5.0) -> Arena:
    """Simple T: a vertical input channel joining two horizontal arms.

    The inoculation block sits at the base of the input channel, below an
    input segment of ``arm_length``. Each horizontal arm is ``arm_length``
    long and ends in a square filter-paper pad (OutL / OutR) abutting the
    arm terminus.
    """
    if cell_size <= 0:
        raise GeometryError("cell_size must be positive")
    if arm_length < 2 * channel_width:
        raise GeometryError("arm_length must be at least twice the channel width")
    cw = _ncells(channel_width, cell_size, "channel_width")
    arm = _ncells(arm_length, cell_size, "arm_length")
    pad = _ncells(pad_size, cell_size, "pad_size")
    inoc = _ncells(inoculation_length, cell_size, "inoculation_length")
    m = int(round(margin / cell_size))

    band = max(pad, cw)
    arm_r0 = m + (band - cw) // 2
    pad_r0 = m + (band - pad) // 2
    jc0 = m + pad + arm
    width = jc0 + cw + arm + pad + m
    chan_r0 = arm_r0 + cw
    inoc_r0 = chan_r0 + arm
    height = max(inoc_r0 + inoc, m + band) + m

    cv = _Canvas(height, width)
    arm_l = cv.rect(arm_r0, m + pad, cw, arm)
    arm_r = cv.rect(arm_r0, jc0 + cw, cw, arm)
    junction = cv.rect(arm_r0, jc0, cw, cw)
    channel = cv.rect(chan_r0, jc0, arm, cw)
    inoculation = cv.rect(inoc_r0, jc0, inoc, cw)
    for mask in (arm_l, arm_r, junction, channel, inoculation):
        cv.agar(mask)
    cv.pad("OutL", cv.rect(pad_r0, m, pad, pad))
    cv.pad("OutR", cv.rect(pad_r0, jc0 + cw + arm, pad, pad))
    cv.zones[INOCULATION] = inoculation
    cv.regions.update(input_channel=channel, junction=junction, arm_L=arm_l, arm_R=arm_r)

    dist = np.full(cv.cells.shape, np.nan)
    rows = np.arange(height)[:, None] * np.ones((1, width))
    dist[channel] = (inoc_r0 - rows[channel]) * cell_size
    return Arena("t_junction", float(cell_size), cv.cells, cv.zones, cv.regions, dist)


def build_compound_t(cell_size: float = 1.0, arm_length: float = 16.0, channel_width: float = 8.0,
                     *, pad_size: float = 10.0, inoculation_length: float = 10.0, margin: float = 5.0) -> Arena:
    """Central T whose horizontal arms each end in a vertical replicate T.

    Pads: C1 top-left, C2 bottom-left, C3 bottom-right, C4 top-right at the
    ends of the secondary arms; C5 / C6 abut the outer side of the left /
    right secondary junction, i.e. the termini of the central arms.
    """
    if cell_size <= 0:
        raise GeometryError("cell_size must be positive")
    if arm_length < 2 * channel_width:
        raise GeometryError("arm_length must be at least twice the channel width")
    cw = _ncells(channel_width, cell_size, "channel_width")
    arm = _ncells(arm_length, cell_size, "arm_length")
    pad = _ncells(pad_size, cell_size, "pad_size")
    inoc = _ncells(inoculation_length, cell_size, "inoculation_length")
    m = int(round(margin / cell_size))
    off = (cw - pad) // 2  # pad offset relative to the channel it caps

    jr0 = m + pad + arm
    sl0 = m + pad                   # left secondary junction column
    cc0 = sl0 + cw + arm            # central junction column
    sr0 = cc0 + cw + arm            # right secondary junction column
    width = sr0 + cw + pad + m
    height = jr0 + cw + arm + max(pad, inoc) + m
    if sl0 + off < 0 or jr0 + off < 0:
        raise GeometryError("pads exceed the grid")

    cv = _Canvas(height, width)
    regions = {
        "junction": cv.rect(jr0, cc0, cw, cw),
        "arm_L": cv.rect(jr0, sl0 + cw, cw, arm),
        "arm_R": cv.rect(jr0, cc0 + cw, cw, arm),
        "junction_L": cv.rect(jr0, sl0, cw, cw),
        "junction_R": cv.rect(jr0, sr0, cw, cw),
        "input_channel": cv.rect(jr0 + cw, cc0, arm, cw),
    }
    inoculation = cv.rect(jr0 + cw + arm, cc0, inoc, cw)
    secondary = []
    for c0 in (sl0, sr0):
        up = cv.rect(jr0 - arm, c0, arm, cw)
        down = cv.rect(jr0 + cw, c0, arm, cw)
        secondary.append(up | down)
        for mask in (up, down):
            cv.agar(mask)
    for mask in list(regions.values()) + [inoculation]:
        cv.agar(mask)

    pads = {
        "C1": cv.rect(jr0 - arm - pad, sl0 + off, pad, pad),
        "C2": cv.rect(jr0 + cw + arm, sl0 + off, pad, pad),
        "C3": cv.rect(jr0 + cw + arm, sr0 + off, pad, pad),
        "C4": cv.rect(jr0 - arm - pad, sr0 + off, pad, pad),
        "C5": cv.rect(jr0 + off, sl0 - pad, pad, pad),
        "C6": cv.rect(jr0 + off, sr0 + cw, pad, pad),
    }
    # the secondary Ts (arms + their pads) must not touch each other or the input line
    left_t = secondary[0] | regions["junction_L"] | pads["C1"] | pads["C2"] | pads["C5"]
    right_t = secondary[1] | regions["junction_R"] | pads["C3"] | pads["C4"] | pads["C6"]
    stem = regions["input_channel"] | inoculation | regions["junction"]
    if (_dilate(left_t) & right_t).any():
        raise GeometryError("secondary T-junctions overlap")
    if (_dilate(stem) & (left_t | right_t)).any():
        raise GeometryError("secondary T-junction overlaps the input channel")
    for name, mask in pads.items():
        cv.pad(name, mask)
    cv.zones[INOCULATION] = inoculation

    dist = np.full(cv.cells.shape, np.nan)
    rows = np.arange(height)[:, None] * np.ones((1, width))
    ch = regions["input_channel"]
    dist[ch] = (jr0 + cw + arm - rows[ch]) * cell_size
    return Arena("compound_t", float(cell_size), cv.cells, cv.zones, regions, dist)


def _dilate(mask):
    out = mask.copy()
    out[1:] |= mask[:-1]
    out[:-1] |= mask[1:]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def build_open_dish(cell_size: float = 1.0, diameter: float = 90.0, pad_positions=COMPASS,
                    *, pad_size: float = 10.0, pad_inset: float = 10.0, inoculation_size: float = 10.0) -> Arena:
    """Agar disc with a central inoculation square and pads at compass points.

    Pad centres sit ``pad_inset`` inside the rim, so with the defaults they
    are 35 mm from the dish centre.
    """
    if cell_size <= 0:
        raise GeometryError("cell_size must be positive")
    requested = set(pad_positions)
    unknown = requested - set(COMPASS)
    pad_positions = tuple(p for p in COMPASS if p in requested)
    if unknown:
        raise GeometryError(f"unknown pad positions {sorted(unknown)}")
    n = _ncells(diameter, cell_size, "diameter")
    pad = _ncells(pad_size, cell_size, "pad_size")
    inoc = _ncells(inoculation_size, cell_size, "inoculation_size")
    offset = int(round((diameter / 2 - pad_inset) / cell_size))

    centre = n * cell_size / 2
    yy, xx = (np.indices((n, n)) + 0.5) * cell_size
    disc = (xx - centre) ** 2 + (yy - centre) ** 2 <= (diameter / 2) ** 2

    cv = _Canvas(n, n)
    cv.agar(disc)
    c = n // 2
    inoculation = cv.rect(c - inoc // 2, c - inoc // 2, inoc, inoc)
    cv.zones[INOCULATION] = inoculation
    centres = {"N": (c - offset, c), "S": (c + offset, c), "E": (c, c + offset), "W": (c, c - offset)}
    for name in pad_positions:
        r, col = centres[name]
        mask = cv.rect(r - pad // 2, col - pad // 2, pad, pad)
        if (mask & _dilate(inoculation)).any():
            raise GeometryError(f"pad {name} overlaps the inoculation zone")
        if not disc[mask].all():
            raise GeometryError(f"pad {name} extends beyond the dish rim")
        cv.pad(name, mask)
    rim = disc & _dilate(~disc | _edge(disc.shape))
    cv.regions["rim"] = rim
    cv.regions["disc"] = disc
    return Arena("open_dish", float(cell_size), cv.cells, cv.zones, cv.regions)


def _edge(shape):
    e = np.zeros(shape, dtype=bool)
    e[0, :] = e[-1, :] = e[:, 0] = e[:, -1] = True
    return e
