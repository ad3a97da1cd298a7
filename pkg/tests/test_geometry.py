import numpy as np
import pytest

from stackel_dn.errors import SingularGauge
from stackel_dn.fixtures import load_fixture
from stackel_dn.geometry import (ConformallyStackelMetric, StackelMatrix, column_gauge,
                                 first_column_shift, metric_eval, normalizing_gauge,
                                 radial_normal_form, reparam, robertson_potentials,
                                 separability_defect, validate_stackel)
from stackel_dn.univariate import parse_expression


def _const_matrix(rows):
    return StackelMatrix(tuple(tuple(parse_expression(float(v), periodic=i > 0) for v in r)
                               for i, r in enumerate(rows)), 1.0)


def test_f1_validates(f1):
    rep = validate_stackel(f1.S)
    assert rep.valid
    cof, det = f1.S.cofactors(0.3, 1.0, 2.0)
    assert np.allclose(cof.ravel(), [1, 3, 2]) and np.isclose(det, 2)
    assert np.isclose(rep.c1, 0.5) and np.isclose(rep.c2, 1.0)


def test_identity_invalid():
    rep = validate_stackel(_const_matrix(np.eye(3)))
    assert not rep.valid
    assert any("s12" in f for f in rep.failures())


def test_equal_rows_invalid():
    rep = validate_stackel(_const_matrix([[2, 1, 1], [0, -1, 1], [0, -1, 1]]))
    assert not rep.valid


def test_metric_eval_f1(f1):
    me = metric_eval(f1.S, 1.0, f1.phi, (0.4, 1.0, 2.0))
    assert np.allclose(me.h_sq.ravel(), [2, 2 / 3, 1])
    assert np.allclose(me.gamma, 0) and np.allclose(me.Gamma, 0)
    assert np.isclose(me.r_factor, 3**0.25)
    me2 = metric_eval(f1.S, 2.0, f1.phi, (0.4, 1.0, 2.0))
    assert np.allclose(me2.H_sq, 16 * me.h_sq)


def test_r_factor_one_when_cofactor_product_is_det():
    S = _const_matrix([[6, 1, 1], [0, -1, 1], [0, 1, -2]])
    cof, det = S.cofactors(0.0, 0.0, 0.0)
    assert np.isclose(np.prod(cof), det)
    assert np.isclose(metric_eval(S, 1.0).r_factor, 1.0)


def _h2(S, n=16):
    t1 = np.linspace(0, S.A, n)
    ta = np.linspace(0, 2 * np.pi, n, endpoint=False)
    X = np.meshgrid(t1, ta, ta, indexing="ij")
    c, d = S.cofactors(*X)
    return d[None] / c


@pytest.mark.parametrize("G", [np.eye(2), np.diag([2.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]),
                               np.array([[1.0, 0.3], [-0.2, 1.5]])])
def test_column_gauge_keeps_metric(f3, G):
    Sh = column_gauge(f3.S, G)
    assert np.max(np.abs(_h2(Sh) / _h2(f3.S) - 1)) < 1e-12


def test_column_gauge_entries(f1):
    Sh = column_gauge(f1.S, np.diag([2.0, 1.0]))
    for i in range(3):
        assert np.isclose(Sh.rows[i][1].const, f1.S.rows[i][1].const / 2)
        assert Sh.rows[i][2].const == f1.S.rows[i][2].const


def test_column_swap_flips_sign_flags(f1):
    Sh = column_gauge(f1.S, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not validate_stackel(Sh).valid
    assert np.max(np.abs(_h2(Sh) / _h2(f1.S) - 1)) < 1e-12
    Sn, G = normalizing_gauge(Sh)
    assert validate_stackel(Sn).valid


def test_singular_gauge(f1):
    with pytest.raises(SingularGauge):
        column_gauge(f1.S, np.ones((2, 2)))


@pytest.mark.parametrize("C", [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.7, -0.4)])
def test_first_column_shift(f2, C):
    Sh = first_column_shift(f2.S, *C)
    assert np.max(np.abs(_h2(Sh) / _h2(f2.S) - 1)) < 1e-12


def test_first_column_shift_f1(f1):
    Sh = first_column_shift(f1.S, 1.0, 0.0)
    assert [Sh.rows[i][0].const for i in range(3)] == [3.0, -1.0, 1.0]
    Sh = first_column_shift(f1.S, 0.0, 1.0)
    assert [Sh.rows[i][0].const for i in range(3)] == [3.0, 1.0, -2.0]


def test_reparam_identity_and_constant(f1):
    r = reparam(f1.S, f1.phi, (1.0, None, None))
    assert r.S is not None and r.S.A == f1.A
    phi = (parse_expression("0.3*sin(pi*x)"), 0.0, 0.0)
    r = reparam(f1.S, phi, (4.0, None, None))
    assert np.isclose(r.S.A, 2.0)
    y = np.linspace(0, 2, 7)
    assert np.allclose(r.S.rows[0][1](y), 0.25)
    assert np.allclose(r.phi[0](y), phi[0](y / 2) / 4)


def test_reparam_potential_against_finite_differences(f1):
    phi1 = parse_expression("0.3*sin(pi*x)")
    f = parse_expression("1+x^2/2")
    r = reparam(f1.S, (phi1, 0.0, 0.0), (f, None, None))
    mp = r.maps[0]
    y = np.linspace(0.1, mp.total - 0.1, 9)
    x = mp.x(y)
    # φ̄ = φ/f − L̇²/16 − L̈/4, with L = log f and dots in y, by finite differences
    h = 1e-4
    L = lambda yy: np.log(f(mp.x(yy)))
    Ld = (L(y + h) - L(y - h)) / (2 * h)
    Ldd = (L(y + h) - 2 * L(y) + L(y - h)) / h**2
    ref = phi1(x) / f(x) - Ld**2 / 16 - Ldd / 4
    assert np.max(np.abs(r.phi[0](y) - ref)) < 1e-6


def test_radial_normal_form_examples(f1):
    nf = radial_normal_form(f1.S, 0.0)
    assert np.isclose(nf.Abar, 1.0)
    assert np.allclose(nf.s13bar(np.linspace(0, 1, 5)), 1.0)
    assert np.allclose(nf.phi1bar(np.linspace(0, 1, 5)), 0.0)
    fx = load_fixture("link-const")
    nf = radial_normal_form(fx.S, 0.0)
    assert np.isclose(nf.Abar, 2.0)
    assert np.allclose(nf.s13bar(np.linspace(0, 2, 5)), 1.0)
    fx = load_fixture("link-exp")
    nf = radial_normal_form(fx.S, 0.0)
    assert np.isclose(nf.Abar, np.e - 1, rtol=1e-12)
    # L = log s12 = 2x, L̇ = 2e^{−x}, L̈ = −2e^{−2x}: φ̄₁ = −L̇²/16 − L̈/4 = e^{−2x}/4
    u = np.linspace(0.1, nf.Abar - 0.1, 5)
    x = nf.x_of_u(u)
    assert np.allclose(nf.phi1bar(u), np.exp(-2 * x) / 4, atol=1e-10)
    xs = np.linspace(0, 1, 100)
    assert np.max(np.abs(nf.x_of_u(nf.u_of_x(xs)) - xs)) < 1e-10


def test_log_r_gradient_matches_gamma(f2):
    m = ConformallyStackelMetric(f2.S, f2.phi, 1.0)
    x = np.array([0.37, 1.1, 2.3])
    me = m.eval(*x)
    for i in range(3):
        for d in (1e-3, 5e-4):
            e = np.zeros(3)
            e[i] = d
            g = (np.log(m.eval(*(x + e)).r_factor) - np.log(m.eval(*(x - e)).r_factor)) / (2 * d)
        assert abs(g - 0.5 * me.Gamma[i]) < 1e-6


def test_robertson_potentials_make_constant_conformal(f2):
    phis, defect = robertson_potentials(f2.S)
    assert defect < 1e-8
    assert separability_defect(f2.S) >= 0
