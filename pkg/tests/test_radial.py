import numpy as np
import pytest

from stackel_dn.errors import PoleAtDirichletEigenvalue
from stackel_dn.fixtures import load_fixture
from stackel_dn.radial import RadialRow, bvp_derivative_map, fss, wt, wt_batch


@pytest.fixture(scope="module")
def row1(f1):
    return f1.radial_row()


def test_f1_zero_pair_solutions(row1):
    x, yc, ys = row1.trajectories(0.0, 0.0)
    assert np.allclose(yc[:, 0], 1.0) and np.allclose(ys[:, 0], x)
    w = wt(fss(row1, 0.0, 0.0))
    assert np.allclose([w.Delta, w.D, w.E, w.M, w.N], [1, 1, -1, -1, -1], atol=1e-12)


def test_f1_sinh_solution(row1):
    x, yc, ys = row1.trajectories(2.0, 1.0)
    assert np.max(np.abs(ys[:, 0] - np.sinh(np.sqrt(3) * x) / np.sqrt(3))) < 1e-10
    w = wt(fss(row1, 2.0, 1.0))
    k = np.sqrt(3)
    assert abs(w.Delta - np.sinh(k) / k) < 1e-12
    assert abs(w.M + k / np.tanh(k)) < 1e-12 and abs(w.N + k / np.tanh(k)) < 1e-12


def test_f1_oscillatory_and_pole(row1):
    x, yc, ys = row1.trajectories(-np.pi**2 / 2, -np.pi**2 / 2)
    assert np.max(np.abs(ys[:, 0] - np.sin(np.pi * x) / np.pi)) < 1e-10
    w = wt(fss(row1, -np.pi**2 / 2, -np.pi**2 / 2))
    assert w.is_pole and np.isnan(w.M)
    with pytest.raises(PoleAtDirichletEigenvalue):
        wt(fss(row1, -np.pi**2 / 2, -np.pi**2 / 2), raise_on_pole=True)


def test_bvp_map_f1(row1):
    B = bvp_derivative_map(wt(fss(row1, 0.0, 0.0)))
    # u = 1 − x: (u'(0), u'(1)) = (−1, −1); u ≡ 1 gives zero
    assert np.allclose(B @ [1, 0], [-1, -1]) and np.allclose(B @ [1, 1], [0, 0], atol=1e-12)
    k = np.sqrt(3)
    B = bvp_derivative_map(wt(fss(row1, 2.0, 1.0)))
    assert np.allclose(B @ [1, 0], [-k / np.tanh(k), -k / np.sinh(k)], atol=1e-12)


def test_bvp_map_against_trajectory(f2):
    row = f2.radial_row()
    w = wt(fss(row, 7.0, 3.0))
    B = bvp_derivative_map(w)
    x, yc, ys = row.trajectories(7.0, 3.0)
    a, b = 0.7, -1.3
    # u = a c0 + β s0 with u(A) = b
    beta = (b - a * yc[-1, 0]) / ys[-1, 0]
    u = a * yc + beta * ys
    assert np.allclose(B @ [a, b], [u[0, 1], u[-1, 1]], rtol=1e-10)


def test_realness_below_first_dirichlet(f2):
    row = f2.radial_row()
    for w in wt_batch(row, np.array([-3.0, 0.5, 10.0]) + 0j, np.array([-1.0, 2.0, 4.0]) + 0j):
        for v in (w.Delta, w.D, w.E, w.M, w.N):
            assert abs(np.imag(v)) <= 1e-10 * (1 + abs(v))


def test_cauchy_riemann(f2, rng):
    row = f2.radial_row()
    h = 1e-4
    for mu in rng.uniform(-4, 4, 20) + 1j * rng.uniform(-4, 4, 20):
        nu2 = 1.3
        f = lambda m: wt(fss(row, m * m, nu2)).Delta
        dx = (f(mu + h) - f(mu - h)) / (2 * h)
        dy = (f(mu + 1j * h) - f(mu - 1j * h)) / (2 * h)
        assert abs(dy - 1j * dx) <= 1e-6 * (1 + abs(dx))


def test_m_decreasing_f1(row1):
    k = np.linspace(0.0, 20.0, 50)
    M = np.array([w.M.real for w in wt_batch(row1, k**2 + 0j, np.zeros(50) + 0j)])
    assert np.all(np.diff(M) < 0)


def test_weyl_solutions_vanish(f2):
    row = f2.radial_row()
    w = wt(fss(row, 5.0, 2.0))
    x, psi, phi = w.weyl_solutions(row)
    assert abs(psi[-1, 0]) < 1e-8 and abs(phi[0, 0]) < 1e-8


def test_continuity(f2):
    row = f2.radial_row()
    a = wt(fss(row, 4.0 + 1j, 2.0))
    b = wt(fss(row, 4.0 + 1j + 1e-7, 2.0))
    assert abs(a.M - b.M) < 1e-5


def test_batch_equals_single(f2):
    row = f2.radial_row()
    mu2 = np.array([1.0, 50.0, -20.0 + 3j])
    nu2 = np.array([0.5, 10.0, 1j])
    for a, b, w in zip(mu2, nu2, wt_batch(row, mu2, nu2)):
        s = wt(fss(row, a, b))
        assert s.M == w.M and s.Delta_m == w.Delta_m


def test_scaled_representation():
    row = RadialRow(1.0, 1.0, 0.0, 1.0)
    w = wt(fss(row, 1e6 + 0j, 0j))
    assert w.log_scale > 900
    assert abs(w.M + 1000) < 1e-6
