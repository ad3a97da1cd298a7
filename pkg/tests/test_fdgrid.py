import numpy as np
import pytest

from stackel_dn.fdgrid import Grid3, ScalarField3, divergence_operator, solve_dirichlet


def test_grid_minimum():
    with pytest.raises(ValueError):
        Grid3(4, 8, 8)
    g = Grid3.cube(8, 2.0)
    assert g.shape == (9, 8, 8) and g.spacing[0] == 0.25


def test_save_load_roundtrip(tmp_path, rng):
    g = Grid3(8, 10, 12, 1.5)
    f = ScalarField3(g, rng.standard_normal(g.shape), "u")
    f.save(tmp_path / "u")
    h = ScalarField3.load(tmp_path / "u")
    assert h.grid == g and np.array_equal(h.values, f.values)
    raw = np.fromfile(tmp_path / "u.bin", dtype="<f8")
    assert raw.size == 9 * 10 * 12 and raw[1] == f.values[0, 0, 1]


def test_csv_export(tmp_path):
    g = Grid3.cube(8)
    f = ScalarField3(g, np.arange(np.prod(g.shape), dtype=float).reshape(g.shape))
    f.to_csv(tmp_path / "u.csv")
    lines = (tmp_path / "u.csv").read_text().splitlines()
    assert lines[0] == "i,j,k,value" and lines[2] == "0,0,1,1"


def test_operator_symmetric_and_constants_harmonic(rng):
    g = Grid3(8, 9, 10)
    coef = [1 + rng.random(g.shape) for _ in range(3)]
    K = divergence_operator(g, coef)
    assert abs(K - K.T).max() < 1e-12
    m = g.N2 * g.N3
    assert np.max(np.abs(K @ np.ones(K.shape[0]))[m:-m]) < 1e-12


def test_solve_linear_profile():
    g = Grid3.cube(8)
    K = divergence_operator(g, [np.ones(g.shape)] * 3)
    sol = solve_dirichlet(g, K, np.zeros((8, 8)), np.ones((8, 8)))
    x = g.axes()[0]
    assert np.max(np.abs(sol.values - x[:, None, None])) < 1e-12
