"""Trail-laying sensor-agent swarm standing in for the plasmodium.

Each agent carries a continuous position (mm) and a heading. Per step it
samples the combined stimulus (chemistry plus weighted trail) at three
points ahead. A negative reading straight ahead may make it retreat (turn
back and step without laying trail); otherwise it turns toward the largest
reading and moves or stalls through a logistic gate on the reading in its
new direction. Forward moves deposit trail, the trail evaporates once per
swarm step, and thresholding it gives occupancy.

Randomness is drawn per step as an ``(n_agents, 4)`` block of uniforms
(tie-break, move gate, retreat, wall re-draw) plus an ``(n_agents, 3)``
block of standard normals for sensor noise, consumed row by row in agent
order. Any object with ``random(shape)`` and ``standard_normal(shape)``
methods can act as the stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from numba import njit

from .geometry import INOCULATION, Arena

TWO_PI = 2.0 * math.pi

# column layout of the per-step uniform block
U_TIE, U_MOVE, U_RETREAT, U_HEADING = range(4)


@dataclass(frozen=True)
class MotionParams:
    sensor_offset: float = 3.0
    sensor_angle: float = math.pi / 4
    rotate_angle: float = math.pi / 4
    step_len: float = 0.5
    deposit: float = 1.0
    trail_evap: float = 0.01
    trail_gain: float = 0.0
    stimulus_gain: float = 1.0
    stall_threshold: float = 0.0
    retreat_prob_slope: float = 0.0
    sensor_noise: float = 0.0

    def __post_init__(self):
        for name in ("sensor_offset", "step_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.sensor_angle <= 0 or self.rotate_angle <= 0:
            raise ValueError("angles must be positive")
        if not 0.0 <= self.trail_evap < 1.0:
            raise ValueError("trail_evap must be in [0, 1)")
        if self.deposit < 0 or self.sensor_noise < 0 or self.retreat_prob_slope < 0:
            raise ValueError("deposit, sensor_noise and retreat_prob_slope must be non-negative")

    def as_dict(self):
        return asdict(self)


@dataclass
class Agent:
    x: float
    y: float
    heading: float


class PlasmodiumState:
    """Agent arrays, trail grid and the random stream that drives them."""

    def __init__(self, x, y, heading, trail, rng):
        # own copies: the kernel updates positions in place
        self.x = np.array(x, dtype=np.float64)
        self.y = np.array(y, dtype=np.float64)
        heading = np.asarray(heading, dtype=np.float64)
        # headings are carried as unit vectors; the angle is derived on demand
        self.dx = np.cos(heading)
        self.dy = np.sin(heading)
        self.trail = np.array(trail, dtype=np.float64)
        self.rng = rng

    @property
    def heading(self) -> np.ndarray:
        return np.arctan2(self.dy, self.dx) % TWO_PI

    @property
    def n_agents(self) -> int:
        return self.x.size

    def agents(self):
        return [Agent(float(a), float(b), float(c)) for a, b, c in zip(self.x, self.y, self.heading)]

    def cells(self, cell_size: float) -> np.ndarray:
        """(n, 2) integer (row, col) of every agent."""
        return np.stack([np.floor(self.y / cell_size), np.floor(self.x / cell_size)], axis=1).astype(np.int64)

    def copy(self, rng=None) -> "PlasmodiumState":
        out = PlasmodiumState.__new__(PlasmodiumState)
        out.x, out.y, out.dx, out.dy = self.x.copy(), self.y.copy(), self.dx.copy(), self.dy.copy()
        out.trail = self.trail.copy()
        out.rng = self.rng if rng is None else rng
        return out


def init_inoculum(arena: Arena, n_agents: int, seed) -> PlasmodiumState:
    """Agents uniform over the inoculation zone with uniform headings."""
    if n_agents < 1:
        raise ValueError("n_agents must be at least 1")
    if INOCULATION not in arena.zones:
        raise ValueError("arena has no inoculation zone")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cells = arena.zone_cells(INOCULATION)
    pick = cells[rng.integers(len(cells), size=n_agents)]
    offs = rng.random((n_agents, 2))
    h = arena.cell_size
    x = (pick[:, 1] + offs[:, 0]) * h
    y = (pick[:, 0] + offs[:, 1]) * h
    heading = rng.random(n_agents) * TWO_PI
    return PlasmodiumState(x, y, heading, np.zeros(arena.shape), rng)


@njit(cache=True, inline="always")
def _cell(v, h, n):
    k = int(math.floor(v / h))
    if k < 0:
        return 0
    if k >= n:
        return n - 1
    return k


@njit(cache=True, inline="always")
def _sample(chem, trail, gain, x, y, h):
    r = _cell(y, h, chem.shape[0])
    c = _cell(x, h, chem.shape[1])
    return chem[r, c] + gain * trail[r, c]


@njit(cache=True)
def _swarm_step(x, y, hx, hy, trail, chem, trav, u, z, h,
                so, sa, ra, step, deposit, gain, sgain, stall, slope, noise):
    H, W = trail.shape
    csa, ssa = math.cos(sa), math.sin(sa)
    cra, sra = math.cos(ra), math.sin(ra)
    moved = 0
    for i in range(x.size):
        ct, st = hx[i], hy[i]
        # sensor directions: heading rotated by -sa / 0 / +sa
        s_l = _sample(chem, trail, gain, x[i] + so * (ct * csa + st * ssa), y[i] + so * (st * csa - ct * ssa), h)
        s_f = _sample(chem, trail, gain, x[i] + so * ct, y[i] + so * st, h)
        s_r = _sample(chem, trail, gain, x[i] + so * (ct * csa - st * ssa), y[i] + so * (st * csa + ct * ssa), h)
        if slope > 0.0 and s_f < 0.0 and u[i, 2] < -slope * s_f:
            # retreat from what lies ahead: reverse and step back regardless
            # of the gate, laying no trail
            dx, dy = -ct, -st
            go = True
            lay = 0.0
        else:
            n_l = s_l + noise * z[i, 0]
            n_f = s_f + noise * z[i, 1]
            n_r = s_r + noise * z[i, 2]
            if n_f >= n_l and n_f >= n_r:
                turn = 0
            elif n_l > n_r:
                turn = -1
            elif n_r > n_l:
                turn = 1
            elif u[i, 0] < 0.5:
                turn = -1
            else:
                turn = 1
            ahead = s_f
            dx, dy = ct, st
            if turn == -1:
                ahead = s_l
                dx, dy = ct * cra + st * sra, st * cra - ct * sra
            elif turn == 1:
                ahead = s_r
                dx, dy = ct * cra - st * sra, st * cra + ct * sra
            go = u[i, 1] * (1.0 + math.exp(stall - sgain * ahead)) < 1.0
            lay = deposit

        if go:
            nx = x[i] + step * dx
            ny = y[i] + step * dy
            c = int(math.floor(nx / h))
            r = int(math.floor(ny / h))
            if r < 0 or c < 0 or r >= H or c >= W or not trav[r, c]:
                a = TWO_PI * u[i, 3]
                dx, dy = math.cos(a), math.sin(a)
            else:
                x[i] = nx
                y[i] = ny
                trail[r, c] += lay
                moved += 1
        hx[i] = dx
        hy[i] = dy
    return moved


def draw(rng, n_agents: int, noise: bool):
    u = rng.random((n_agents, 4))
    z = rng.standard_normal((n_agents, 3)) if noise else _NO_NOISE[:n_agents]
    return u, z


_NO_NOISE = np.zeros((1 << 16, 3))


def step_swarm(state: PlasmodiumState, chem: np.ndarray, arena: Arena, params: MotionParams,
               *, in_place: bool = False) -> PlasmodiumState:
    """Advance every agent once in index order, then evaporate the trail.

    ``chem`` is the combined chemical stimulus grid (see
    ``chemistry.stimulus_grid``); the trail contribution is added while
    sensing.
    """
    s = state if in_place else state.copy()
    u, z = draw(s.rng, s.n_agents, params.sensor_noise > 0)
    _swarm_step(s.x, s.y, s.dx, s.dy, s.trail, np.ascontiguousarray(chem, dtype=np.float64),
                arena.traversable, u, z, arena.cell_size,
                params.sensor_offset, params.sensor_angle, params.rotate_angle, params.step_len,
                params.deposit, params.trail_gain, params.stimulus_gain, params.stall_threshold,
                params.retreat_prob_slope, params.sensor_noise)
    s.trail *= 1.0 - params.trail_evap
    return s


def sense(state: PlasmodiumState, chem: np.ndarray, arena: Arena, params: MotionParams, i: int):
    """Noise-free (left, forward, right) readings for agent ``i``."""
    so, sa = params.sensor_offset, params.sensor_angle
    x, y, t = state.x[i], state.y[i], state.heading[i]
    out = []
    for a in (t - sa, t, t + sa):
        out.append(float(_sample(chem, state.trail, params.trail_gain,
                                 x + so * math.cos(a), y + so * math.sin(a), arena.cell_size)))
    return tuple(out)


def agent_step(state: PlasmodiumState, chem: np.ndarray, arena: Arena, params: MotionParams, i: int,
               u=None, z=None) -> PlasmodiumState:
    """Apply the update rule to agent ``i`` alone (in place) and return the state.

    ``u`` / ``z`` are that agent's uniform and normal draws; they are taken
    from the state's stream when omitted.
    """
    if u is None:
        u = state.rng.random(4)
    if z is None:
        z = state.rng.standard_normal(3) if params.sensor_noise > 0 else np.zeros(3)
    sl = slice(i, i + 1)
    _swarm_step(state.x[sl], state.y[sl], state.dx[sl], state.dy[sl], state.trail,
                np.ascontiguousarray(chem, dtype=np.float64), arena.traversable,
                np.asarray(u, dtype=np.float64).reshape(1, 4), np.asarray(z, dtype=np.float64).reshape(1, 3),
                arena.cell_size, params.sensor_offset, params.sensor_angle, params.rotate_angle,
                params.step_len, params.deposit, params.trail_gain, params.stimulus_gain,
                params.stall_threshold, params.retreat_prob_slope, params.sensor_noise)
    return state


def move_probability(ahead: float, params: MotionParams) -> float:
    return 1.0 / (1.0 + math.exp(-(params.stimulus_gain * ahead - params.stall_threshold)))


def occupancy(state: PlasmodiumState, theta_occ: float) -> np.ndarray:
    """Cells whose trail is positive and at least ``theta_occ``."""
    return (state.trail >= theta_occ) & (state.trail > 0)
