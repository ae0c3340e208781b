import math

import numpy as np
import pytest

from physarum_routing.geometry import AGAR, INOCULATION, PAD, VOID, Arena, build_t_junction
from physarum_routing.plasmodium import (MotionParams, PlasmodiumState, agent_step, init_inoculum,
                                         move_probability, occupancy, sense, step_swarm)

T = build_t_junction()
ZERO = np.zeros(T.shape)


def box(h=12, w=12):
    cells = np.full((h, w), AGAR)
    cells[0, :] = cells[-1, :] = cells[:, 0] = cells[:, -1] = VOID
    inoc = np.zeros((h, w), bool)
    inoc[4:8, 4:8] = True
    return Arena("box", 1.0, cells, {INOCULATION: inoc})


def one_agent(arena, x, y, heading, trail=None):
    trail = np.zeros(arena.shape) if trail is None else trail
    return PlasmodiumState([x], [y], [heading], trail, np.random.default_rng(0))


def test_inoculum_placement():
    s = init_inoculum(T, 1000, 3)
    rc = s.cells(T.cell_size)
    assert T.zones[INOCULATION][rc[:, 0], rc[:, 1]].all()
    assert ((s.heading >= 0) & (s.heading < 2 * math.pi)).all()
    assert not s.trail.any()
    t = init_inoculum(T, 1000, 3)
    assert np.array_equal(s.x, t.x) and np.array_equal(s.heading, t.heading)
    assert not occupancy(s, 0.5).any()


def test_inoculum_errors():
    with pytest.raises(ValueError):
        init_inoculum(T, 0, 1)
    cells = np.where(np.eye(3, dtype=bool), PAD, AGAR)
    no_inoc = Arena("bare", 1.0, cells, {"pad": np.eye(3, dtype=bool)})
    with pytest.raises(ValueError):
        init_inoculum(no_inoc, 5, 1)


def test_motion_params_validation():
    with pytest.raises(ValueError):
        MotionParams(step_len=0)
    with pytest.raises(ValueError):
        MotionParams(trail_evap=1.0)
    with pytest.raises(ValueError):
        MotionParams(sensor_angle=-0.1)


def test_sense():
    a = box(20, 20)
    p = MotionParams(sensor_offset=3)
    s = one_agent(a, 10.5, 10.5, 0.0)
    assert sense(s, np.full(a.shape, 2.0), a, p, 0) == (2.0, 2.0, 2.0)
    assert sense(s, np.zeros(a.shape), a, p, 0) == (0.0, 0.0, 0.0)
    # heading +x; with rows growing downward the "left" sensor sits at lower row numbers
    grad = np.repeat(np.arange(20.0)[::-1, None], 20, axis=1)
    left, fwd, right = sense(s, grad, a, p, 0)
    assert left > fwd > right


def test_sample_points_clamped():
    a = box(10, 10)
    s = one_agent(a, 1.5, 5.5, math.pi)
    grid = np.arange(100.0).reshape(10, 10)
    left, fwd, right = sense(s, grid, a, MotionParams(sensor_offset=10), 0)
    assert fwd == grid[5, 0]
    assert (left, right) == (grid[9, 0], grid[0, 0])


def test_move_probability():
    p = MotionParams()
    assert move_probability(0.0, p) == 0.5
    assert move_probability(50.0, p) > 0.999999
    assert move_probability(-50.0, p) < 1e-6
    assert move_probability(2.0, MotionParams(stall_threshold=2.0)) == 0.5


def test_gate_at_zero_stimulus():
    a = box(20, 20)
    p = MotionParams()
    moved = agent_step(one_agent(a, 10.5, 10.5, 0.3), np.zeros(a.shape), a, p, 0, u=[0.9, 0.49, 0.9, 0.1])
    assert moved.x[0] == pytest.approx(10.5 + 0.5 * math.cos(0.3))
    assert moved.heading[0] == pytest.approx(0.3)  # no rotation on a flat field
    assert moved.trail.sum() == p.deposit
    stay = agent_step(one_agent(a, 10.5, 10.5, 0.3), np.zeros(a.shape), a, p, 0, u=[0.9, 0.51, 0.9, 0.1])
    assert (stay.x[0], stay.y[0]) == (10.5, 10.5)
    assert stay.heading[0] == pytest.approx(0.3)
    assert stay.trail.sum() == 0.0


def test_wall_redraws_heading_without_moving():
    a = box(12, 12)
    s = one_agent(a, 10.9, 5.5, 0.0)  # facing the void column at x = 11
    chem = np.full(a.shape, 100.0)  # gate is wide open
    agent_step(s, chem, a, MotionParams(), 0, u=[0.0, 0.0, 0.9, 0.25])
    assert (s.x[0], s.y[0]) == (10.9, 5.5)
    assert s.heading[0] == pytest.approx(math.pi / 2)
    assert not s.trail.any()


def test_turns_toward_stronger_reading():
    a = box(20, 20)
    grad = np.repeat(np.arange(20.0)[:, None], 20, axis=1)  # grows with y
    s = one_agent(a, 10.5, 10.5, 0.0)
    agent_step(s, grad, a, MotionParams(), 0, u=[0.5, 0.0, 0.9, 0.0])
    assert s.heading[0] == pytest.approx(math.pi / 4)
    assert s.y[0] > 10.5


def test_retreat_reverses_without_trail():
    a = box(20, 20)
    chem = np.full(a.shape, -5.0)
    s = one_agent(a, 10.5, 10.5, 0.0)
    agent_step(s, chem, a, MotionParams(retreat_prob_slope=0.1), 0, u=[0.5, 0.99, 0.4, 0.0])
    assert s.x[0] == pytest.approx(10.0)
    assert s.heading[0] == pytest.approx(math.pi)
    assert not s.trail.any()


def test_swarm_confined_and_deterministic():
    p = MotionParams(trail_gain=0.01, trail_evap=0.01)
    runs = []
    for _ in range(2):
        s = init_inoculum(T, 300, 11)
        for _ in range(400):
            s = step_swarm(s, ZERO, T, p, in_place=True)
            rc = s.cells(T.cell_size)
            assert T.traversable[rc[:, 0], rc[:, 1]].all()
        runs.append(s)
    a, b = runs
    assert np.array_equal(a.x, b.x) and np.array_equal(a.trail, b.trail)
    assert (a.trail >= 0).all()
    occ = occupancy(a, 1.0)
    assert not (occ & ~T.traversable).any()


def test_step_swarm_copy_semantics():
    s = init_inoculum(T, 50, 2)
    out = step_swarm(s, ZERO, T, MotionParams())
    assert out is not s and not s.trail.any() and out.trail.any()


def test_evaporation():
    s = one_agent(box(), 5.5, 5.5, 0.0, trail=np.full((12, 12), 2.0))
    step_swarm(s, np.full((12, 12), -100.0), box(), MotionParams(trail_evap=0.25), in_place=True)
    assert s.trail[1, 1] == 1.5


class Stream:
    """Replays pre-drawn blocks; ``mirror`` maps them onto the reflected system."""

    def __init__(self, blocks, mirror=False):
        self.blocks = list(blocks)
        self.mirror = mirror

    def random(self, shape):
        u = self.blocks.pop(0).copy()
        if self.mirror:
            u[:, 0] = 1.0 - u[:, 0]                   # tie-break side
            u[:, 3] = np.mod(0.5 - u[:, 3], 1.0)      # heading theta -> pi - theta
        return u

    def standard_normal(self, shape):
        z = self.blocks.pop(0).copy()
        return z[:, ::-1] if self.mirror else z


def test_mirror_equivariance():
    arena = T
    W = arena.width_cells * arena.cell_size
    p = MotionParams(trail_gain=0.05, sensor_noise=0.01, retreat_prob_slope=0.05, stall_threshold=0.5)
    rng = np.random.default_rng(9)
    n, steps = 60, 120
    blocks = []
    for _ in range(steps):
        blocks += [rng.random((n, 4)), rng.standard_normal((n, 3))]
    init = init_inoculum(arena, n, 4)
    chem = np.random.default_rng(1).random(arena.shape) - 0.5
    chem = chem + chem[:, ::-1]  # symmetric field plus a deterministic asymmetric part
    chem[:, :40] += 0.3
    a = PlasmodiumState(init.x, init.y, init.heading, np.zeros(arena.shape), Stream(blocks))
    b = PlasmodiumState(W - init.x, init.y, np.pi - init.heading, np.zeros(arena.shape), Stream(blocks, True))
    m = arena.mirrored()
    for _ in range(steps):
        step_swarm(a, chem, arena, p, in_place=True)
        step_swarm(b, chem[:, ::-1], m, p, in_place=True)
    np.testing.assert_allclose(b.x, W - a.x, atol=1e-9)
    np.testing.assert_allclose(b.y, a.y, atol=1e-9)
    np.testing.assert_allclose(b.trail, a.trail[:, ::-1], atol=1e-9)


def channel():
    h, w = 10, 40
    cells = np.full((h, w), AGAR)
    inoc = np.zeros((h, w), bool)
    inoc[:, :5] = True
    return Arena("channel", 1.0, cells, {INOCULATION: inoc})


def _source_field(arena, sign):
    # steady profile of a source at the far (right) end
    x = np.arange(arena.width_cells) + 0.5
    return np.repeat((sign * np.exp(-(arena.width_cells - x) / 15.0))[None, :], arena.height_cells, axis=0)


def test_chemotaxis_toward_attractant():
    a = channel()
    p = MotionParams(trail_gain=0.0, retreat_prob_slope=0.2, stimulus_gain=2.0)
    chem = _source_field(a, +1.0)
    wins = 0
    for seed in range(50):
        s = init_inoculum(a, 100, seed)
        x0 = s.x.mean()
        for _ in range(2000):
            step_swarm(s, chem, a, p, in_place=True)
        wins += s.x.mean() > x0
    assert wins >= 0.99 * 50


def test_repellent_reduces_advance():
    a = channel()
    p = MotionParams(trail_gain=0.0, retreat_prob_slope=0.2, stimulus_gain=2.0)
    chem = _source_field(a, -1.0)
    better = 0
    for seed in range(50):
        far = []
        for field in (np.zeros(a.shape), chem):
            s = init_inoculum(a, 100, seed)
            for _ in range(2000):
                step_swarm(s, field, a, p, in_place=True)
            far.append(s.x.mean())
        better += far[1] < far[0]
    assert better >= 0.95 * 50
