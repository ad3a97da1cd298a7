import warnings

import numpy as np
import pytest

from stackel_dn.angular import JointEigenpair
from stackel_dn.dn import apply_dn, assemble_dn, block_eigen, export_dn, make_blocks, mode_datum
from stackel_dn.errors import PoleInSpectrum, TruncationWarning
from stackel_dn.radial import fss, wt

R2 = np.sqrt(2)


@pytest.fixture(scope="module")
def op1(f1):
    return assemble_dn(f1.metric, M_max=20, N2=16, N3=16)


def test_zero_block_action(op1):
    g0, g1 = apply_dn(op1, 1.0, 0.0)
    assert np.allclose(g0, 1 / R2, atol=1e-12) and np.allclose(g1, -1 / R2, atol=1e-12)
    g0, g1 = apply_dn(op1, 0.0, 1.0)
    assert np.allclose(g0, -1 / R2, atol=1e-12) and np.allclose(g1, 1 / R2, atol=1e-12)


def test_constants_and_zero(op1):
    for f in ((1.0, 1.0), (0.0, 0.0)):
        g0, g1 = apply_dn(op1, *f)
        assert np.max(np.abs(g0)) < 1e-12 and np.max(np.abs(g1)) < 1e-12


def test_block_eigen_f1(f1):
    w = wt(fss(f1.radial_row(), 0.0, 0.0))
    op, om, xp, xm = block_eigen(w)
    assert abs(op) < 1e-12 and abs(om + 2) < 1e-12
    k = np.sqrt(3)
    op, om, xp, xm = block_eigen(wt(fss(f1.radial_row(), 2.0, 1.0)))
    assert abs(op - (-k / np.tanh(k) + k / np.sinh(k))) < 1e-12
    assert abs(om - (-k / np.tanh(k) - k / np.sinh(k))) < 1e-12
    assert np.allclose(np.abs(xp), 1 / R2) and np.allclose(np.abs(xm), 1 / R2)


def test_blocks_symmetric(op1):
    for b in op1.blocks:
        assert abs(b.block[0, 1] - b.block[1, 0]) < 1e-12
        M = np.array([[b.wt.M.real, b.wt.inv_Delta.real], [b.wt.inv_Delta.real, b.wt.N.real]])
        for om, x in ((b.omega_plus, b.x_plus), (b.omega_minus, b.x_minus)):
            assert np.linalg.norm(M @ x - om * x) < 1e-12 * (1 + abs(om))


def test_single_harmonic_stays_on_harmonic(f2):
    op = assemble_dn(f2.metric, M_max=20, N2=24, N3=24)
    k = 3
    g = apply_dn(op, *mode_datum(op, k))
    for side in (0, 1):
        pre = op.prefactors["R0" if side == 0 else "RA"]
        coef, _ = op.project(g[side] / pre)
        off = np.delete(coef, k)
        assert np.linalg.norm(off) <= 1e-8 * np.linalg.norm(coef)


def test_truncation_warning(op1):
    x = np.arange(16) * 2 * np.pi / 16
    rough = np.sign(np.sin(7 * x))[:, None] * np.ones(16)
    with pytest.warns(TruncationWarning):
        apply_dn(op1, rough, 0.0)


def test_pole_in_spectrum(f1):
    bad = JointEigenpair(-np.pi**2 / 2, -np.pi**2 / 2, 1)
    with pytest.raises(PoleInSpectrum):
        make_blocks(f1.radial_row(), [bad])
    blocks, poles = make_blocks(f1.radial_row(), [bad], strict=False)
    assert blocks == [None] and poles == [bad]


def test_export(op1, tmp_path):
    export_dn(op1, tmp_path / "b.csv", tmp_path / "b.json")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "m,mu2,nu2,b00,b01,b10,b11,omega_plus,omega_minus"
    assert len(lines) == 21
    assert '"truncation": 20' in (tmp_path / "b.json").read_text()
