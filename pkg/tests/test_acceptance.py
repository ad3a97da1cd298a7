"""The eleven acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line (also collected into the pytest terminal
summary). Run directly with ``python tests/test_acceptance.py`` for the lines only.
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, f1_pairs
from stackel_dn.angular import commutator_norm, cone_density, joint_spectrum_dense, joint_spectrum_oracle
from stackel_dn.conformal import alpha_refinement, solve_conformal
from stackel_dn.fdgrid import Grid3
from stackel_dn.fixtures import load_fixture, s13_bump
from stackel_dn.geometry import StackelMatrix, radial_normal_form
from stackel_dn.liouville import cam_F, fit_envelope_growth, liouville_wt, omega_form
from stackel_dn.oracle import compare_dn, constant_datum, mode_data
from stackel_dn.radial import fss_batch, wt_batch
from stackel_dn.suites import (SuiteConfig, _equivalent, asymptotic_table, f4_fan, recover_boundary,
                               spectrum_for, suite_gauge)
from stackel_dn.univariate import parse_expression


def record(n, ok, detail, t0):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {detail} ({time.time() - t0:.1f} s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def test_criterion_01_wronskian():
    t0 = time.time()
    rng = np.random.default_rng(0)
    mu = 20 * np.sqrt(rng.uniform(0, 1, 200)) * np.exp(2j * np.pi * rng.uniform(0, 1, 200))
    nu = 20 * np.sqrt(rng.uniform(0, 1, 200)) * np.exp(2j * np.pi * rng.uniform(0, 1, 200))
    worst = 0.0
    for name in ("f1", "f2", "link-mixed"):
        row = load_fixture(name).radial_row()
        for d in fss_batch(row, mu**2, nu**2):
            worst = max(worst, abs(d.wronskian0 - 1), abs(d.wronskian1 - 1))
    ok = worst <= 1e-10
    record(1, ok, f"max |W - 1| = {worst:.2e} over 200 pairs x 3 fixtures (tol 1e-10)", t0)
    assert ok


def test_criterion_02_f1_closed_forms(f1):
    t0 = time.time()
    rng = np.random.default_rng(1)
    mu2 = rng.uniform(-30, 60, 49) + 1j * rng.uniform(-20, 20, 49)
    nu2 = rng.uniform(-30, 60, 49) + 1j * rng.uniform(-20, 20, 49)
    # near-pole pair: k² = −π² + 1e-6
    mu2 = np.append(mu2, -np.pi**2 + 1e-6)
    nu2 = np.append(nu2, 0.0)
    row = f1.radial_row()
    worst = 0.0
    for a, b, w in zip(mu2, nu2, wt_batch(row, mu2, nu2)):
        k = np.sqrt(complex(a + b))
        D_ref = np.sinh(k) / k
        M_ref = -k * np.cosh(k) / np.sinh(k)
        worst = max(worst, abs(w.Delta - D_ref) / abs(D_ref), abs(w.M - M_ref) / abs(M_ref),
                    abs(w.N - M_ref) / abs(M_ref))
    w0 = wt_batch(row, np.array([0j]), np.array([0j]))[0]
    zero = max(abs(w0.Delta - f1.A), abs(w0.M + 1 / f1.A))
    ok = worst <= 1e-8 and zero <= 1e-10
    record(2, ok, f"max rel err {worst:.2e} at 50 pairs (tol 1e-8); |Delta(0,0)-A|,|M(0,0)+1/A| "
                  f"<= {zero:.1e} (tol 1e-10)", t0)
    assert ok


def test_criterion_03_joint_spectrum(f1):
    t0 = time.time()
    ops = f1.angular()
    exact = np.array(f1_pairs(20), float)
    shoot = spectrum_for(f1.S, f1.phi, 20)
    e_shoot = np.max(np.abs(np.array([[p.mu2, p.nu2] for p in shoot]) - exact))
    N = 64
    orc = joint_spectrum_oracle(ops, N, 20)
    e_orc = np.max(np.abs(np.array([[p.mu2, p.nu2] for p in orc]) - exact))
    sizes = (16, 24, 32, 48)
    norms = [commutator_norm(ops, n, "fd") for n in sizes]
    floor = max(norms) <= 1e-12
    order = np.polyfit(np.log(1.0 / np.array(sizes)), np.log(np.maximum(norms, 1e-300)), 1)[0]
    comm_ok = floor or order >= 1.7
    ok = len(shoot) == 20 and e_shoot <= 1e-8 and e_orc <= 5 / N**2 and comm_ok
    comm = f"commutator at round-off floor (max {max(norms):.1e})" if floor else f"commutator order {order:.2f}"
    record(3, ok, f"shooting err {e_shoot:.1e} (tol 1e-8); oracle N=64 err {e_orc:.1e} "
                  f"(tol {5 / N**2:.1e}); {comm}", t0)
    assert ok


def test_criterion_04_dn_vs_oracle(f1, f2):
    t0 = time.time()
    details, ok = [], True
    for fx in (f1, f2):
        spec = spectrum_for(fx.S, fx.phi, 64)
        conv = compare_dn(fx.metric, mode_data((1, 2, 3, 4, 5)), spec, (16, 24, 32))
        lo, hi = float(np.min(conv.orders)), float(np.max(conv.orders))
        ok &= bool(np.all((conv.orders >= 1.7) & (conv.orders <= 2.3)))
        details.append(f"{fx.name} orders [{lo:.2f}, {hi:.2f}]")
    const = compare_dn(f1.metric, [constant_datum(1.0, 0.0), constant_datum(1.0, 1.0)],
                       spectrum_for(f1.S, f1.phi, 64), (16, 24, 32))
    cmax = float(np.max(const.errors))
    ok &= cmax <= 1e-10
    record(4, ok, "; ".join(details) + f" (range [1.7, 2.3]); F1 constant data {cmax:.1e} (tol 1e-10)", t0)
    assert ok


def test_criterion_05_gauge_invariance(f1, f2):
    t0 = time.time()
    parts, ok = [], True
    for fx in (f1, f2):
        rep = suite_gauge(fx, SuiteConfig(grid=16))
        ok &= rep.passed
        for c in rep.checks:
            parts.append(f"{fx.name} {c.name.split()[0]} {c.status}")
        dn = max(r[2] for r in rep.tables["gauge"][1])
        metric = np.nanmax([r[1] for r in rep.tables["gauge"][1]])
        parts.append(f"{fx.name} max metric {metric:.1e} max DN {dn:.1e}")
    record(5, ok, "; ".join(parts) + " (tol 1e-12 / 1e-10 / 1e-6)", t0)
    assert ok


def test_criterion_06_liouville_links():
    t0 = time.time()
    worst, worst_w = 0.0, 0.0
    rng = np.random.default_rng(2)
    for name in ("link-exp", "link-mixed", "f2"):
        fx = load_fixture(name)
        nf = radial_normal_form(fx.S, fx.phi[0])
        for p in spectrum_for(fx.S, fx.phi, 20):
            _, _, res = liouville_wt(nf, p.mu2, p.nu2)
            worst = max(worst, res.max())
        for y, yp in rng.uniform(-15, 15, (20, 2)):
            om = omega_form(fx.S, fx.phi[0], y, yp)
            worst_w = max(worst_w, om.residuals.delta, om.residuals.d)
    ok = worst <= 1e-8 and worst_w <= 1e-8
    record(6, ok, f"link residual {worst:.1e}, omega-form residual {worst_w:.1e} "
                  f"(3 fixtures x 20 pairs, tol 1e-8)", t0)
    assert ok


def test_criterion_07_asymptotic_bounds():
    t0 = time.time()
    fx = load_fixture("link-mixed")
    exps = [max(gd, gD) for *_, gd, gD, _ in asymptotic_table(fx)]
    g_max = max(exps)
    om = np.geomspace(10.0, 300.0, 160)
    th = np.linspace(0.1, np.pi / 2 - 0.1, 5)
    f4 = []
    for a, b in (("f1", "f1-phi"), ("f2", "link-mixed")):
        _, _, v = f4_fan(load_fixture(a).radial_row(), load_fixture(b).radial_row(), om, th)
        f4.append(fit_envelope_growth(om, v.max(axis=1)))
    ok = g_max <= 0.1 and max(f4) <= 0.1
    record(7, ok, f"max growth exponent of (Delta, D) residuals {g_max:.3f} over 9 rays (tol 0.1); "
                  f"|F(iy,iy')|*omega growth {', '.join(f'{x:.3f}' for x in f4)} (tol 0.1)", t0)
    assert ok


def test_criterion_08_cam(f1, f2):
    t0 = time.time()
    worst = 0.0
    for fx, other in ((f1, f1), (f2, f2), (f1, _equivalent(f1)), (f2, _equivalent(f2))):
        sp = spectrum_for(fx.S, fx.phi, 30)
        ev = cam_F(fx.radial_row(), other.radial_row(), np.array([p.mu2 for p in sp]) + 0j,
                   np.array([p.nu2 for p in sp]) + 0j)
        worst = max(worst, max(c.relative for c in ev))
    sp = spectrum_for(f1.S, f1.phi, 30)
    ev = cam_F(f1.radial_row(), s13_bump(f1, 0.1).radial_row(),
               np.array([p.mu2 for p in sp]) + 0j, np.array([p.nu2 for p in sp]) + 0j)
    bump = max(c.relative for c in ev)
    ok = worst <= 1e-8 and bump >= 1e-3
    record(8, ok, f"identical/equivalent max |F|/scale {worst:.1e} (tol 1e-8); s13 bump "
                  f"{bump:.2e} (need >= 1e-3)", t0)
    assert ok


def _alpha_fixture():
    S = load_fixture("f3").S
    r = S.rows[0]
    row1 = (r[0], parse_expression("1+0.3*x^2", "x"), parse_expression("1", "x"))
    return S.with_rows((row1,) + S.rows[1:])


def test_criterion_09_conformal(f1, f2):
    t0 = time.time()
    exact = 0.0
    for fx in (f1, f2):
        g = Grid3.cube(16, fx.A)
        for v in (1.0, 2.5):
            sol = solve_conformal(fx.S, (0.0, 0.0, 0.0) if fx is f1 else fx.phi, (v, v), g)
            exact = max(exact, float(np.max(np.abs(sol.c.values - v))))
    S = _alpha_fixture()
    eta = lambda x2, x3: 1.0 + 0.1 * np.sin(x2)
    study = alpha_refinement(S, (-1.0, 0.0, 0.0), (1.0, 1.0), (eta, eta), sizes=(16, 24, 32, 48))
    ok = exact <= 1e-12 and study.order >= 1.7
    record(9, ok, f"constant data max |c - eta| {exact:.1e}; alpha discrepancies "
                  f"{', '.join(f'{d:.1e}' for d in study.discrepancies)} at {study.grids}, "
                  f"order {study.order:.2f} (need >= 1.7)", t0)
    assert ok


def test_criterion_10_recovery():
    t0 = time.time()
    parts, ok = [], True
    for name in ("recovery", "recovery-slope"):
        fx = load_fixture(name)
        r = recover_boundary(fx)
        e12 = abs(r.s12 - fx.S.rows[0][1](0.0)) / fx.S.rows[0][1](0.0)
        e13 = abs(r.s13 - fx.S.rows[0][2](0.0)) / fx.S.rows[0][2](0.0)
        ok &= e12 <= 0.05 and e13 <= 0.05
        parts.append(f"{name} ({r.s12:.4f}, {r.s13:.4f}) rel err {max(e12, e13):.1e}")
    record(10, ok, "; ".join(parts) + " (tol 5%)", t0)
    assert ok


DENSITY_FLOOR = 0.05


def test_criterion_11_cone_density(f1):
    t0 = time.time()
    ops = f1.angular()
    c1, c2 = ops.cone()
    pairs = joint_spectrum_dense(ops, 250.0, 48)
    cd = cone_density(pairs, 0.05, c1, c2)
    inside = cd.ratios_within(c1, c2)
    ok = (abs(c1 - 0.5) < 1e-12 and abs(c2 - 1.0) < 1e-12 and inside and cd.h_min > 0
          and cd.density_curve[-1] > DENSITY_FLOOR)
    record(11, ok, f"[c1, c2] = [{c1:g}, {c2:g}], {len(pairs)} pairs all inside: {inside}; "
                   f"h_min {cd.h_min:.3f}; N(r)/r^2 {cd.density_curve[-1]:.3f} (floor {DENSITY_FLOOR})", t0)
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
