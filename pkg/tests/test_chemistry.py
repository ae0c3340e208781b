import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.signal import convolve2d

from physarum_routing.chemistry import (ATTRACTANT_RANKING, LABEL_SPECIES, REPELLENT_RANKING, ChemicalSpecies,
                                        Field, StabilityError, default_species, diffuse_into, emit_sources,
                                        step_field, stimulus, stimulus_grid, validate_assignment)
from physarum_routing.geometry import AGAR, INOCULATION, PAD, Arena, build_t_junction

T = build_t_junction()


def species(d=0.2, decay=0.0, e=1.0, w=1.0, name="x"):
    return ChemicalSpecies(name, w, d, decay, e)


def grid_arena(h, w):
    cells = np.full((h, w), AGAR)
    inoc = np.zeros((h, w), bool)
    inoc[:, -1] = True
    return Arena("grid", 1.0, cells, {INOCULATION: inoc})


def test_species_validation():
    with pytest.raises(ValueError):
        species(w=1.5)
    with pytest.raises(ValueError):
        species(d=-1)
    with pytest.raises(ValueError):
        species(decay=1.0)
    with pytest.raises(StabilityError):
        species(d=0.3).check_stability(1.0)
    species(d=0.25).check_stability(1.0)
    species(d=1.0).check_stability(2.0)


def test_default_table():
    sp = default_species()
    assert sp[LABEL_SPECIES["A"]].weight == 1.0
    assert sp[LABEL_SPECIES["I"]].weight == -0.3
    assert sp[LABEL_SPECIES["S"]].weight == -1.0
    att = [sp[n].weight for n in ATTRACTANT_RANKING]
    rep = [sp[n].weight for n in REPELLENT_RANKING if n != LABEL_SPECIES["I"]]
    assert att == sorted(att, reverse=True) and all(0 < w <= 1 for w in att)
    assert rep == sorted(rep) and all(-1 <= w < 0 for w in rep)
    for s in sp.values():
        s.check_stability(1.0)


def test_emission():
    f = Field.zeros(species(e=0.5), T)
    assert emit_sources(f, {"OutL": "N", "OutR": "N"}, T).mass == 0.0
    sp = {"x": f.species}
    one = emit_sources(f, validate_assignment({"OutL": "x", "OutR": "N"}, T, sp), T)
    assert one.mass == 100 * 0.5
    assert np.array_equal(one.conc > 0, T.zones["OutL"])
    two = emit_sources(f, {"OutL": "x", "OutR": "x"}, T)
    assert two.mass == 200 * 0.5
    assert f.mass == 0.0  # input untouched
    with pytest.raises(ValueError):
        emit_sources(Field(f.species, np.zeros((3, 3))), {}, T)


def test_assignment_validation():
    sp = default_species()
    assert validate_assignment({"OutL": "A", "OutR": "N"}, T, sp) == {"OutL": "farnesene", "OutR": "N"}
    with pytest.raises(ValueError):
        validate_assignment({"OutL": "A"}, T, sp)
    with pytest.raises(ValueError):
        validate_assignment({"OutL": "A", "OutR": "Q"}, T, sp)


def test_zero_field_fixed_point():
    f = step_field(Field.zeros(species(), T), T)
    assert not f.conc.any()


def test_stability_checked_on_step():
    with pytest.raises(StabilityError):
        step_field(Field.zeros(species(d=0.5), T), T)


def test_mass_conserved_without_decay():
    rng = np.random.default_rng(0)
    conc = rng.random((21, 21))
    out = np.empty_like(conc)
    sp = species(d=0.25)
    m0 = conc.sum()
    prev = m0
    worst = 0.0
    for _ in range(10_000):
        diffuse_into(conc, out, sp, 1.0)
        conc, out = out, conc
        m = conc.sum()
        worst = max(worst, abs(m - prev) / prev)
        prev = m
    assert worst < 1e-9
    assert abs(prev - m0) / m0 < 1e-9


def test_decayed_mass_closed_form():
    lam = 0.003
    conc = np.zeros((21, 21))
    conc[10, 10] = 1.0
    out = np.empty_like(conc)
    sp = species(d=0.2, decay=lam)
    for n in range(1, 2001):
        diffuse_into(conc, out, sp, 1.0)
        conc, out = out, conc
        if n % 500 == 0:
            assert math.fsum(conc.ravel()) == pytest.approx((1 - lam) ** n, rel=1e-12, abs=0)


def test_mass_with_sources_closed_form():
    lam, e = 0.01, 0.25
    sp = species(d=0.25, decay=lam, e=e)
    f = Field.zeros(sp, T)
    assign = {"OutL": "x", "OutR": "N"}
    for k in range(1, 301):
        f = step_field(emit_sources(f, assign, T), T)
    expected = 100 * e * math.fsum((1 - lam) ** j for j in range(1, 301))
    assert f.mass == pytest.approx(expected, rel=1e-12)


def test_impulse_matches_convolution_oracle():
    r = 0.23
    kernel = np.array([[0, r, 0], [r, 1 - 4 * r, r], [0, r, 0]])
    conc = np.zeros((21, 21))
    conc[10, 10] = 1.0
    oracle = conc.copy()
    out = np.empty_like(conc)
    sp = species(d=r)
    for _ in range(9):  # support stays clear of the border
        diffuse_into(conc, out, sp, 1.0)
        conc, out = out, conc
        oracle = convolve2d(oracle, kernel, mode="same")
    assert np.abs(conc - oracle).max() <= 1e-12
    assert conc[0].max() == 0.0 and conc[1].max() > 0.0


def test_reflecting_border_matches_mirror_padding():
    rng = np.random.default_rng(5)
    conc = rng.random((6, 9))
    out = np.empty_like(conc)
    r = 0.2
    diffuse_into(conc, out, species(d=r), 1.0)
    p = np.pad(conc, 1, mode="edge")
    lap = p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4 * conc
    np.testing.assert_allclose(out, conc + r * lap, rtol=0, atol=1e-14)


def test_left_right_symmetry_bit_exact():
    f = Field.zeros(species(d=0.25, decay=1e-3), T)
    assign = {"OutL": "x", "OutR": "x"}
    for _ in range(400):
        f = step_field(emit_sources(f, assign, T), T)
    assert np.array_equal(f.conc, f.conc[:, ::-1])


def test_monotone_gradient_in_dead_end_channel():
    a = grid_arena(3, 40)
    cells = a.cells.copy()
    pad = np.zeros(a.shape, bool)
    pad[:, :3] = True
    cells[pad] = PAD
    a = Arena("channel", 1.0, cells, {**a.zones, "src": pad})
    f = Field.zeros(species(d=0.25, decay=0.01, e=1.0), a)
    for _ in range(6000):
        f = step_field(emit_sources(f, {"src": "x"}, a), a)
    profile = f.conc[1, 3:]
    assert np.all(np.diff(profile) < 0)
    assert np.allclose(f.conc[0], f.conc[2])


def test_stimulus_linear_combination():
    a = grid_arena(2, 2)
    fa = Field(species(w=1.0, name="a"), np.full((2, 2), 0.5))
    fi = Field(species(w=-0.3, name="i"), np.full((2, 2), 1.0))
    assert stimulus([fa, fi], (0, 1)) == pytest.approx(0.2)
    assert stimulus([], (0, 0)) == 0.0
    g = stimulus_grid([fi], a.shape)
    assert (g <= 0).all()


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 0.25), st.floats(0, 0.5), st.integers(0, 2**32 - 1))
def test_non_negativity(d, decay, seed):
    conc = np.random.default_rng(seed).random((8, 11)) ** 4
    out = np.empty_like(conc)
    diffuse_into(conc, out, species(d=d, decay=decay), 1.0)
    assert (out >= 0).all()
    f = Field(species(d=d, decay=decay), conc)
    assert (f.copy().conc == conc).all()
    with pytest.raises(ValueError):
        Field(f.species, -conc - 1)
