import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spme import barenblatt as b
from spme.grid import Grid, SpeciesState, mass, species_sum, support_interval


def test_mass_constant_field():
    g = Grid(0.0, 1.0, 10)
    assert mass(g, np.ones(10)) == pytest.approx(1.0, abs=1e-15)
    assert mass(g, np.zeros(10)) == 0.0


def test_mass_of_sampled_barenblatt():
    g = Grid(-3.0, 3.0, 4000)
    c = b.constants(2.0, 1)
    f = b.radial_profile(c, 1.0, np.abs(g.centers), 1.0)
    assert abs(mass(g, f) - 1.0) <= 1e-4


def test_mass_length_mismatch():
    with pytest.raises(ValueError):
        mass(Grid(0.0, 1.0, 10), np.ones(9))


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-5, 5), bb=st.floats(-5, 5), seed=st.integers(0, 2 ** 16),
       radial=st.booleans())
def test_mass_linear(a, bb, seed, radial):
    rng = np.random.default_rng(seed)
    g = Grid(0.0, 2.0, 64, "radial", 3) if radial else Grid(-1.0, 1.0, 64)
    f, h = rng.random(64), rng.random(64)
    lhs = mass(g, a * f + bb * h)
    rhs = a * mass(g, f) + bb * mass(g, h)
    scale = abs(a) * mass(g, f) + abs(bb) * mass(g, h) + 1e-300
    assert abs(lhs - rhs) <= 1e-13 * scale


def test_grid_geometry():
    g = Grid(-1.0, 1.0, 4)
    np.testing.assert_allclose(g.centers, [-0.75, -0.25, 0.25, 0.75])
    np.testing.assert_allclose(g.faces, [-1, -0.5, 0, 0.5, 1])
    assert g.d_eff == 1 and g.half_width == 1.0 and g.center == 0.0


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_radial_weights_are_exact(dim):
    g = Grid(0.0, 2.0, 7, "radial", dim)
    assert g.weights.sum() == pytest.approx(2.0 ** dim / dim, rel=1e-14)
    # ball volume
    vol = b.sphere_surface(dim) * 2.0 ** dim / dim
    assert mass(g, np.ones(7)) == pytest.approx(vol, rel=1e-14)
    assert g.face_areas[0] == (1.0 if dim == 1 else 0.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(1.0, 0.0, 10)
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 0)
    with pytest.raises(ValueError):
        Grid(-1.0, 1.0, 10, "radial", 2)
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 10, "sphere")


def test_support_interval_cases():
    g = Grid(-3.0, 3.0, 600)
    c = b.constants(2.0, 1)
    f = b.radial_profile(c, 1.0, np.abs(g.centers), 1.0)
    rng = support_interval(g, f)
    inside = np.flatnonzero(np.abs(g.centers) < 2.0801)
    assert rng == range(inside[0], inside[-1] + 1)
    assert len(support_interval(g, np.zeros(600))) == 0
    one = np.zeros(600)
    one[17] = 0.5
    assert support_interval(g, one) == range(17, 18)
    gapped = np.zeros(600)
    gapped[[5, 9]] = 1.0
    assert support_interval(g, gapped) == range(5, 10)
    assert support_interval(g, gapped, threshold=1.0) == range(0)
    with pytest.raises(ValueError):
        support_interval(g, gapped, threshold=-1.0)


def test_species_state_total_is_exact_sum():
    rng = np.random.default_rng(3)
    fields = rng.random((3, 50))
    s = SpeciesState(0.5, fields)
    expect = (fields[0] + fields[1]) + fields[2]
    assert np.array_equal(s.total, expect)
    assert np.array_equal(species_sum(fields), expect)
    s.update(0.7, fields * 0.3)
    assert np.array_equal(s.total, (fields[0] * 0.3 + fields[1] * 0.3) + fields[2] * 0.3)
    assert s.t == 0.7 and s.k_species == 3 and s.n_cells == 50


def test_species_state_is_read_only():
    s = SpeciesState(0.0, np.ones((2, 5)))
    with pytest.raises(ValueError):
        s.fields[0, 0] = 3.0
    with pytest.raises(ValueError):
        s.total[0] = 3.0
    c = s.copy()
    assert np.array_equal(c.fields, s.fields) and c.fields is not s.fields


def test_species_masses():
    g = Grid(0.0, 1.0, 4)
    s = SpeciesState(0.0, [[1, 1, 0, 0], [0, 0, 2, 2]])
    np.testing.assert_allclose(s.species_masses(g), [0.5, 1.0])
    assert s.total_mass(g) == pytest.approx(1.5)
    assert math.isclose(sum(s.species_masses(g)), s.total_mass(g))
