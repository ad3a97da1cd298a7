import numpy as np
import pytest

from stackel_dn.angular import (AngularOperators, commutator_norm, cone_density, hill_discriminants,
                                joint_spectrum_oracle, joint_spectrum_shooting, orthonormal_basis)
from stackel_dn.errors import InsufficientPairs
from stackel_dn.univariate import parse_expression


@pytest.fixture(scope="module")
def ops1(f1):
    return f1.angular()


def f1_closed_form(count):
    pts = sorted({(2 * j * j + k * k, j * j + k * k) for j in range(10) for k in range(10)})
    return pts[:count]


def test_hill_discriminants_f1(ops1):
    assert np.allclose(hill_discriminants(ops1, 0.0, 0.0), (2, 2), atol=1e-12)
    assert np.allclose(hill_discriminants(ops1, 2.0, 1.0), (2, 2), atol=1e-10)
    d2, d3 = hill_discriminants(ops1, 0.5, 0.5)
    # −w″ = (2ν² − µ²) w with 2ν² − µ² = 1/2 oscillates
    assert abs(d2 - 2) < 1e-12 and abs(d3 - 2 * np.cos(2 * np.pi * np.sqrt(0.5))) < 1e-9


def test_shooting_matches_closed_form(ops1):
    pairs = joint_spectrum_shooting(ops1, target_count=12)
    got = [(p.mu2, p.nu2) for p in pairs]
    assert np.allclose(got, f1_closed_form(12), atol=1e-10)
    for p in pairs:
        assert p.residual_v < 1e-8 and p.residual_w < 1e-8


def test_box_excluding_origin(ops1):
    pairs = joint_spectrum_shooting(ops1, search_box=((0.5, 10.0), (0.5, 10.0)))
    assert np.allclose((pairs[0].mu2, pairs[0].nu2), (1.0, 1.0), atol=1e-10)


def test_multiplicities(ops1):
    pairs = {(round(p.mu2), round(p.nu2)): p.multiplicity
             for p in joint_spectrum_shooting(ops1, target_count=8)}
    assert pairs[(0, 0)] == 1 and pairs[(1, 1)] == 2 and pairs[(3, 2)] == 4


def test_oracle_f1(ops1):
    pairs = joint_spectrum_oracle(ops1, 64, 6)
    got = np.array([(p.mu2, p.nu2) for p in pairs[:3]])
    assert np.max(np.abs(got - [(0, 0), (1, 1), (2, 1)])) < 1e-6
    assert {p.multiplicity for p in pairs if abs(p.mu2 - 3) < 1e-6} == {4}


def test_perturbed_potential_against_oracle(f1):
    phi2 = parse_expression("0.01*sin(x)", "x", periodic=True)
    ops = AngularOperators.from_stackel(f1.S, (0.0, phi2, 0.0))
    shoot = joint_spectrum_shooting(ops, target_count=8)
    orc = joint_spectrum_oracle(ops, 64, 8)
    for a, b in zip(shoot, orc):
        assert abs(a.mu2 - b.mu2) + abs(a.nu2 - b.nu2) < 1e-4
    # the perturbation splits degenerate pairs; each stays near a lattice point
    base = np.array(f1_closed_form(20))
    for p in shoot:
        assert np.min(np.abs(base - (p.mu2, p.nu2)).sum(axis=1)) < 0.05


def test_weighted_orthonormality(f2):
    ops = f2.angular()
    pairs = joint_spectrum_shooting(ops, target_count=12)
    Y, idx, quad = orthonormal_basis(pairs, ops, 48, 48)
    G = np.tensordot(Y * quad, Y, axes=([1, 2], [1, 2]))
    assert np.max(np.abs(G - np.eye(len(Y)))) < 1e-6


def test_shift_gauge(f2):
    ops = f2.angular()
    B1, B2 = 0.7, -0.3
    base = joint_spectrum_shooting(ops, target_count=10)
    shifted = joint_spectrum_shooting(ops.shifted(B1, B2), target_count=10)
    for a, b in zip(base, shifted):
        assert abs(b.mu2 - a.mu2 - B1) < 1e-8 and abs(b.nu2 - a.nu2 - B2) < 1e-8
    Ya, _, _ = orthonormal_basis(base, ops, 32, 32)
    Yb, _, _ = orthonormal_basis(shifted, ops.shifted(B1, B2), 32, 32)
    # same eigenfunctions up to sign (non-degenerate pairs only)
    for k, p in enumerate(base[:4]):
        if p.multiplicity == 1:
            assert min(np.max(np.abs(Ya[k] - Yb[k])), np.max(np.abs(Ya[k] + Yb[k]))) < 1e-8


def test_commutator_decreases(f2):
    ops = f2.angular()
    c = [commutator_norm(ops, n, "fd") for n in (16, 32)]
    assert c[1] <= max(c[0] / 3, 1e-10)


def test_cone_density_f1(ops1):
    c1, c2 = ops1.cone()
    assert (c1, c2) == (0.5, 1.0)
    pts = [(2 * j * j + k * k, j * j + k * k) for j in range(40) for k in range(40)
           if 2 * j * j + k * k <= 900]
    rep = cone_density(pts, 0.05, c1, c2)
    assert rep.ratios_within(0.5, 1.0) and rep.h_min > 0
    assert rep.density_curve[-1] > 0.1
    with pytest.raises(InsufficientPairs):
        cone_density(pts, 0.25, c1, c2)
