import numpy as np
import pytest

from spme import barenblatt as b
from spme import oracle
from spme.grid import Grid
from spme.initial import InitialData
from spme.solver import RunConfig, run


def _pme_config(n=200, t_end=1.3, snaps=(1.3,)):
    return RunConfig(2.0, Grid(-6.0, 6.0, n), InitialData("barenblatt(1, 1)"), 1.0, t_end, list(snaps))


def test_zero_data_gives_zero_trajectory():
    cfg = RunConfig(2.0, Grid(-1.0, 1.0, 20), np.zeros((2, 20)), 0.0, 1.0, [0.5, 1.0])
    ref = oracle.reference_run(cfg, 2)
    assert [s.t for s in ref.snapshots] == [0.0, 0.5, 1.0]
    assert all(np.all(s.fields == 0) for s in ref.snapshots)


def test_same_resolution_agrees_with_solver():
    cfg = RunConfig(2.0, Grid(-3.0, 3.0, 120), InitialData("box(0, 0.8, 1.25)", "left-right"),
                    0.05, 0.3, [0.1, 0.3])
    main = run(cfg)
    ref = oracle.reference_run(cfg, 1)
    assert main.step_count == ref.step_count
    for a, bb in zip(main.snapshots, ref.snapshots):
        assert a.t == bb.t
        assert np.max(np.abs(a.fields - bb.fields)) <= 1e-12


def test_refined_initial_data():
    cfg = _pme_config()
    ref = oracle.reference_run(cfg, 4)
    assert ref.config.grid.n_cells == 800
    assert ref.snapshots[0].total_mass(ref.config.grid) == pytest.approx(1.0, abs=1e-5)
    explicit = RunConfig(2.0, Grid(-1.0, 1.0, 10), np.eye(10)[4:5] * 0.0 + 1.0, 0.0, 0.0)
    assert oracle.reference_run(explicit, 2).snapshots[0].fields.shape == (1, 20)


def test_reference_rejects_bad_input():
    cfg = _pme_config()
    with pytest.raises(ValueError):
        oracle.reference_run(cfg, 3)
    h = RunConfig(2.0, cfg.grid, cfg.initial_data, 1.0, 1.1, face_average="harmonic")
    with pytest.raises(ValueError):
        oracle.reference_run(h, 2)


def test_restrict():
    fine = np.arange(8.0)
    np.testing.assert_array_equal(oracle.restrict(fine, 4), [1.5, 5.5])
    np.testing.assert_array_equal(oracle.restrict(fine, 1), fine)


def test_quadrature_examples():
    c = b.constants(2.0, 1)
    rho = b.support_radius(c, 1.0, 1.0)
    f = lambda x: b.radial_profile(c, 1.0, abs(x), 1.0)
    assert oracle.quadrature_mass(f, -3.0, 3.0, 1e-12, breaks=(-rho, rho)) == pytest.approx(1.0, abs=1e-10)
    assert oracle.quadrature_mass(lambda x: 3 * f(x), -3.0, 3.0, 1e-12, breaks=(-rho, rho)) == \
        pytest.approx(3.0, abs=3e-10)
    assert oracle.quadrature_mass(lambda x: 0.0, -1.0, 1.0) == 0.0
    c3 = b.constants(3.0, 1)
    rho3 = b.support_radius(c3, 1.0, 1.0)
    g3 = lambda x: b.radial_profile(c3, 1.0, abs(x), 1.0)
    assert oracle.quadrature_mass(g3, -rho3, rho3, 1e-12, breaks=(0.0,)) == pytest.approx(1.0, abs=1e-10)


def test_quadrature_errors():
    with pytest.raises(ValueError):
        oracle.quadrature_mass(lambda x: 1.0, 0.0, 1.0, tol=0.0)
    # a kink left unsplit with a tiny subdivision cap cannot reach the tolerance
    c = b.constants(3.0, 1)
    f = lambda x: b.radial_profile(c, 1.0, abs(x), 1.0)
    with pytest.raises(oracle.QuadratureError):
        oracle.quadrature_mass(f, -5.0, 5.0, tol=1e-14, max_subdivisions=3)


def test_self_convergence_order():
    cfg = RunConfig(2.0, Grid(-6.0, 6.0, 100), InitialData("barenblatt(1, 1)"), 1.0, 1.5)
    sc = oracle.self_convergence(cfg, factor=4)
    assert sc["gap_h"] > sc["gap_h2"] > 0
    assert sc["ratio"] >= 1.5 and sc["order"] >= 0.8
