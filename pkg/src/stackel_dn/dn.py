"""Separated Dirichlet-to-Neumann map.

A harmonic function with boundary values f = (f⁰, f¹) is written
u = R Σ_m u_m(x¹) Y_m(x², x³), where Y_m are joint eigenfunctions of the
angular operators and u_m solves the radial equation at (µ_m², ν_m²) with
u_m(0) = φ⁰_m, u_m(A) = φ¹_m, the coefficients of f/R in the s^{11}-weighted
basis. With ∂₁ log R = Γ₁/2 the outward normal derivatives are

    Λf|₀ = −(R/H₁)(Γ₁/2 · f/R + Σ u_m′(0) Y_m)
    Λf|_A = +(R/H₁)(Γ₁/2 · f/R + Σ u_m′(A) Y_m)

and (u_m′(0), u_m′(A)) = B_m (φ⁰_m, φ¹_m) with B_m = [[M, 1/Δ], [−1/Δ, −N]].
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .angular import JointEigenpair, joint_spectrum_shooting, orthonormal_basis
from .errors import PoleInSpectrum, TruncationWarning
from .geometry import ConformallyStackelMetric
from .radial import RadialRow, WTData, bvp_derivative_map, fss_batch, wt

TRUNCATION_RESIDUAL = 1e-3
DEFAULT_HARMONICS = 64


@dataclass
class DnBlock:
    pair: JointEigenpair
    wt: WTData
    bvp: np.ndarray     # (φ⁰, φ¹) ↦ (u′(0), u′(A))
    block: np.ndarray   # (φ⁰, φ¹) ↦ (−u′(0), u′(A)), symmetric
    omega_plus: float
    omega_minus: float
    x_plus: np.ndarray
    x_minus: np.ndarray


def block_eigen(b):
    """Eigen-data of [[M, 1/Δ], [1/Δ, N]] for a DnBlock or a WTData.

    Returns (ω₊, ω₋, x₊, x₋) with ω± = (M+N)/2 ± √(((M−N)/2)² + Δ⁻²).
    """
    w = b.wt if isinstance(b, DnBlock) else b
    M, N, q = float(np.real(w.M)), float(np.real(w.N)), float(np.real(w.inv_Delta))
    r = np.hypot(0.5 * (M - N), q)
    th = 0.5 * np.arctan2(2 * q, M - N)
    xp = np.array([np.cos(th), np.sin(th)])
    xm = np.array([-np.sin(th), np.cos(th)])
    return 0.5 * (M + N) + r, 0.5 * (M + N) - r, xp, xm


@dataclass
class DnOperator:
    metric: ConformallyStackelMetric
    pairs: List[JointEigenpair]
    blocks: List[DnBlock]
    N2: int
    N3: int
    Y: np.ndarray
    index: np.ndarray
    quad: np.ndarray
    prefactors: dict
    poles: list = field(default_factory=list)
    last_residual: float = 0.0

    @property
    def truncation(self) -> int:
        return len(self.pairs)

    def block_matrices(self) -> np.ndarray:
        return np.array([b.bvp for b in self.blocks])

    def project(self, phi: np.ndarray) -> tuple:
        """Weighted coefficients of phi and the relative projection residual."""
        coef = np.tensordot(self.Y, self.quad * phi, axes=([1, 2], [0, 1]))
        rec = np.tensordot(coef, self.Y, axes=(0, 0))
        nrm = np.sqrt(np.sum(self.quad * phi * phi))
        res = np.sqrt(np.sum(self.quad * (phi - rec) ** 2))
        return coef, (res / nrm if nrm > 0 else 0.0)

    def synthesize(self, coef: np.ndarray) -> np.ndarray:
        return np.tensordot(coef, self.Y, axes=(0, 0))


def _real_block(w: WTData) -> np.ndarray:
    B = bvp_derivative_map(w)
    if np.max(np.abs(B.imag)) > 1e-9 * (1 + np.max(np.abs(B.real))):
        raise ValueError("radial data not real at a real spectral pair")
    return B.real


def make_blocks(row: RadialRow, pairs: Sequence[JointEigenpair], strict: bool = True):
    mu2 = np.array([p.mu2 for p in pairs], dtype=complex)
    nu2 = np.array([p.nu2 for p in pairs], dtype=complex)
    blocks, poles = [], []
    for p, d in zip(pairs, fss_batch(row, mu2, nu2)):
        w = wt(d)
        if w.is_pole:
            msg = f"joint eigenvalue ({p.mu2:.6g}, {p.nu2:.6g}) is a radial Dirichlet eigenvalue"
            if strict:
                raise PoleInSpectrum(msg)
            poles.append(p)
            blocks.append(None)
            continue
        B = _real_block(w)
        blk = np.diag([-1.0, 1.0]) @ B
        op, om, xp, xm = block_eigen(w)
        blocks.append(DnBlock(p, w, B, blk, op, om, xp, xm))
    return blocks, poles


def assemble_dn(metric: ConformallyStackelMetric, spectrum: Sequence[JointEigenpair] = None,
                M_max: int = DEFAULT_HARMONICS, N2: int = 32, N3: int = 32,
                strict: bool = True) -> DnOperator:
    """Block-diagonal DN operator on an N2×N3 boundary grid."""
    from .angular import AngularOperators

    ops = AngularOperators.from_stackel(metric.S, metric.phi)
    if spectrum is None:
        spectrum = joint_spectrum_shooting(ops, target_count=M_max)
    pairs = list(spectrum)[:M_max]
    row = RadialRow.from_stackel(metric.S, metric.phi[0])
    blocks, poles = make_blocks(row, pairs, strict)
    Y, idx, quad = orthonormal_basis(pairs, ops, N2, N3)
    pre = metric.boundary_prefactors(N2, N3)
    return DnOperator(metric, pairs, blocks, N2, N3, Y, idx, quad, pre, poles)


def apply_dn(op: DnOperator, f0, f1, warn: bool = True):
    """Normal derivatives (Λf|₀, Λf|_A) of the harmonic extension of (f0, f1)."""
    f0 = np.broadcast_to(np.asarray(f0, dtype=float), (op.N2, op.N3))
    f1 = np.broadcast_to(np.asarray(f1, dtype=float), (op.N2, op.N3))
    pre = op.prefactors
    phi0, phi1 = f0 / pre["R0"], f1 / pre["RA"]
    a0, r0 = op.project(phi0)
    a1, r1 = op.project(phi1)
    op.last_residual = max(r0, r1)
    if warn and op.last_residual > TRUNCATION_RESIDUAL:
        warnings.warn(f"projection residual {op.last_residual:.2e} exceeds "
                      f"{TRUNCATION_RESIDUAL:g}; increase the truncation", TruncationWarning,
                      stacklevel=2)
    d0 = np.zeros_like(a0)
    d1 = np.zeros_like(a1)
    for k, m in enumerate(op.index):
        blk = op.blocks[m]
        if blk is None:
            continue
        B = blk.bvp
        d0[k] = B[0, 0] * a0[k] + B[0, 1] * a1[k]
        d1[k] = B[1, 0] * a0[k] + B[1, 1] * a1[k]
    du0 = op.synthesize(d0)
    du1 = op.synthesize(d1)
    g0 = -(pre["R0"] / pre["H10"]) * (0.5 * pre["Gamma10"] * phi0 + du0)
    g1 = (pre["RA"] / pre["H1A"]) * (0.5 * pre["Gamma1A"] * phi1 + du1)
    return g0, g1


def mode_datum(op: DnOperator, k: int, side: int = 0):
    """Boundary datum R·Y_k on one torus and zero on the other."""
    Rk = op.prefactors["R0" if side == 0 else "RA"]
    f = Rk * op.Y[k]
    z = np.zeros_like(f)
    return (f, z) if side == 0 else (z, f)


def boundary_inner(op: DnOperator, g, f) -> float:
    """⟨g, f⟩ on both tori with the induced area element."""
    pre = op.prefactors
    dA = (2 * np.pi / op.N2) * (2 * np.pi / op.N3)
    return float(np.sum(g[0] * f[0] * pre["area0"]) * dA + np.sum(g[1] * f[1] * pre["areaA"]) * dA)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------
def export_dn(op: DnOperator, csv_path, json_path) -> None:
    header = {"truncation": op.truncation, "fixture_hash": op.metric.fingerprint(),
              "fixture": op.metric.name, "grid": [op.N2, op.N3], "poles": len(op.poles)}
    with open(json_path, "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(csv_path, "w") as fh:
        fh.write("m,mu2,nu2,b00,b01,b10,b11,omega_plus,omega_minus\n")
        for m, b in enumerate(op.blocks):
            if b is None:
                continue
            v = [b.pair.mu2, b.pair.nu2, *b.block.ravel(), b.omega_plus, b.omega_minus]
            fh.write(f"{m}," + ",".join(f"{x:.12e}" for x in v) + "\n")
