"""Conformal factor: the Dirichlet problem −Δ_g c + V c = 0 and the α-equation.

V = −Σ h_i^{-2}(φ_i + γ_i²/4 − ∂_iγ_i/2) with γ_i the contracted symbols of
the Stäckel metric g. The discrete operator is assembled in divergence form
with weights √|g| g^{ii}, which keeps it symmetric and gives a discrete
maximum principle when V ≤ 0.

For α = c⁴ det S the conformal equation is linear in β = α^{1/4}:
−Δ_{g0}β + Qβ = 0 for g0 = diag(1/s^{11}, 1/s^{21}, 1/s^{31}), with a Q that
depends on (S, φ) only. ``alpha_pde_check`` computes Q = −Δ_{g0}β/β from two
solutions with different boundary data and measures their agreement.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import DivisionNearZero, NonPositiveSolution
from .fdgrid import Grid3, ScalarField3, divergence_operator, solve_dirichlet
from .geometry import TWO_PI, StackelMatrix, _cof_det, log_volume_jet
from .univariate import UnivariateFn


def _phis(phi):
    return tuple(UnivariateFn._lift(p) for p in phi)


@dataclass
class ZerothOrder:
    field: ScalarField3
    nonnegative: bool
    min_value: float


def zeroth_order_coefficient(S: StackelMatrix, phi, grid: Grid3) -> ZerothOrder:
    """V on the grid and whether V ≥ 0 holds everywhere."""
    X1, X2, X3 = grid.mesh()
    jet = log_volume_jet(S, X1, X2, X3)
    phi = _phis(phi)
    V = np.zeros(grid.shape)
    for i, Xi in enumerate((X1, X2, X3)):
        g = -0.5 * jet.dlog[i]
        dg = -0.5 * jet.d2log[i]
        V -= jet.cof[i] / jet.det * (phi[i](Xi) + 0.25 * g * g - 0.5 * dg)
    vmin = float(V.min())
    ok = vmin >= -1e-14
    if not ok:
        warnings.warn(f"zeroth-order coefficient negative somewhere (min {vmin:.3e})", stacklevel=2)
    return ZerothOrder(ScalarField3(grid, V, "V"), ok, vmin)


def conformal_system(S: StackelMatrix, phi, grid: Grid3):
    """Sparse matrix of √|g|(−Δ_g + V) on all nodes, the √|g| field and V."""
    X1, X2, X3 = grid.mesh()
    cof, det = S.cofactors(X1, X2, X3)
    sqrtg = np.sqrt(det**3 / (cof[0] * cof[1] * cof[2]))
    coef = [sqrtg * cof[i] / det for i in range(3)]
    V = zeroth_order_coefficient(S, phi, grid)
    K = divergence_operator(grid, coef, sqrtg * V.field.values)
    return K, sqrtg, V


def _boundary_values(eta, grid: Grid3):
    """Boundary data as two (N2, N3) arrays from constants, arrays or callables of (x2, x3)."""
    _, t2, t3 = grid.axes()
    X2, X3 = np.meshgrid(t2, t3, indexing="ij")
    out = []
    for e in eta:
        if callable(e):
            out.append(np.asarray(e(X2, X3), dtype=float) * np.ones_like(X2))
        else:
            out.append(np.broadcast_to(np.asarray(e, dtype=float), X2.shape).copy())
    return out


@dataclass
class ConformalSolution:
    c: ScalarField3
    residual: float
    iterations: int
    max_principle: bool
    V: ZerothOrder


def solve_conformal(S: StackelMatrix, phi, eta, grid: Grid3, tol: float = 1e-10,
                    method: str = "cg") -> ConformalSolution:
    """Positive solution c of the conformal equation with c = η on the two boundary tori.

    ``eta`` is a pair (η at x¹ = 0, η at x¹ = A); each entry is a constant,
    an (N2, N3) array or a callable of (x2, x3).
    """
    e0, e1 = _boundary_values(eta, grid)
    if min(e0.min(), e1.min()) <= 0:
        raise NonPositiveSolution("boundary data must be positive")
    K, _, V = conformal_system(S, phi, grid)
    sol = solve_dirichlet(grid, K, e0, e1, tol=tol, method=method)
    c = sol.values
    if np.any(c <= 0):
        raise NonPositiveSolution(f"conformal factor not positive (min {c.min():.3e})")
    mp = True
    if np.max(V.field.values) <= 1e-14:
        lo, hi = min(e0.min(), e1.min()), max(e0.max(), e1.max())
        mp = bool(c.min() >= lo - 1e-9 and c.max() <= hi + 1e-9)
        if not mp:
            raise NonPositiveSolution("discrete maximum principle violated")
    return ConformalSolution(ScalarField3(grid, c, "c"), sol.residual, sol.iterations, mp, V)


# ---------------------------------------------------------------------------
# α-equation
# ---------------------------------------------------------------------------
@dataclass
class AlphaData:
    alpha: ScalarField3
    g0: np.ndarray
    Q: ScalarField3


def _central(u, h, axis, periodic):
    if periodic:
        up, um = np.roll(u, -1, axis), np.roll(u, 1, axis)
        return (up - um) / (2 * h), (up - 2 * u + um) / h**2
    d1 = np.full_like(u, np.nan)
    d2 = np.full_like(u, np.nan)
    d1[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    d2[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
    return d1, d2


def alpha_data(S: StackelMatrix, c: ScalarField3, power: float = 0.25) -> AlphaData:
    """α = c⁴ det S and Q = −Δ_{g0}(α^power)/α^power at interior nodes (NaN on the boundary)."""
    grid = c.grid
    X1, X2, X3 = grid.mesh()
    cof, det = S.cofactors(X1, X2, X3)
    alpha = c.values**4 * det
    if np.min(np.abs(alpha)) < 1e-12:
        raise DivisionNearZero("α too close to zero")
    beta = alpha**power
    h = grid.spacing
    lap = np.zeros(grid.shape)
    for i in range(3):
        d = [0, 0, 0]
        d[i] = 1
        cof1, _ = _cof_det(S.eval(X1, X2, X3, d))
        # p_i = ∂_i log(s^{11}s^{21}s^{31}); ∂_i s^{i1} = 0
        p = sum(cof1[j] / cof[j] for j in range(3) if j != i)
        b1, b2 = _central(beta, h[i], i, periodic=i > 0)
        lap += cof[i] * (b2 - 0.5 * p * b1)
    Q = -lap / beta
    return AlphaData(ScalarField3(grid, alpha, "alpha"), 1.0 / cof, ScalarField3(grid, Q, "Q"))


@dataclass
class AlphaCheck:
    grid: Grid3
    Q1: np.ndarray
    Q2: np.ndarray
    discrepancy: float
    relative: float


def alpha_pde_check(S: StackelMatrix, phi, c1: ScalarField3, c2: ScalarField3,
                    power: float = 0.25) -> AlphaCheck:
    """η-independence of Q computed from two conformal solutions on the same grid.

    Q is computed from the fields alone; ``phi`` only identifies the solves.
    """
    if c1.grid != c2.grid:
        raise ValueError("fields must share a grid")
    Q1 = alpha_data(S, c1, power).Q.values[1:-1]
    Q2 = alpha_data(S, c2, power).Q.values[1:-1]
    diff = float(np.max(np.abs(Q1 - Q2)))
    return AlphaCheck(c1.grid, Q1, Q2, diff, diff / (1.0 + float(np.max(np.abs(Q1)))))


def fit_order(hs, errs) -> float:
    """Slope of log err against log h."""
    hs = np.asarray(hs, float)
    errs = np.maximum(np.asarray(errs, float), 1e-300)
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


@dataclass
class AlphaStudy:
    grids: list
    discrepancies: list
    order: float


def alpha_refinement(S: StackelMatrix, phi, eta1, eta2, sizes=(12, 16, 24, 32),
                     power: float = 0.25, phi_second=None) -> AlphaStudy:
    """max|Q₁ − Q₂| for two boundary data on a sequence of cubic grids.

    With ``phi_second`` the second solve uses different potentials, which
    should make the discrepancy stall instead of decay.
    """
    out = []
    for n in sizes:
        g = Grid3.cube(n, S.A)
        s1 = solve_conformal(S, phi, eta1, g, tol=1e-13)
        s2 = solve_conformal(S, phi if phi_second is None else phi_second, eta2, g, tol=1e-13)
        out.append(alpha_pde_check(S, phi, s1.c, s2.c, power).discrepancy)
    hs = [S.A / n for n in sizes]
    return AlphaStudy(list(sizes), out, fit_order(hs, out))


# ---------------------------------------------------------------------------
# conformal factor from a sampled field
# ---------------------------------------------------------------------------
class FieldConformal:
    """Conformal factor interpolated from a grid solution (periodic in the angles)."""

    def __init__(self, c: ScalarField3):
        self.field = c
        g = c.grid
        t1, t2, t3 = g.axes()
        ext2 = np.append(t2, TWO_PI)
        ext3 = np.append(t3, TWO_PI)
        v = c.values
        grads = np.gradient(v, *g.spacing, edge_order=2)
        # periodic derivatives in the angles
        for ax in (1, 2):
            grads[ax] = (np.roll(v, -1, ax) - np.roll(v, 1, ax)) / (2 * g.spacing[ax])

        def wrap(a):
            a = np.concatenate([a, a[:, :1]], axis=1)
            return np.concatenate([a, a[:, :, :1]], axis=2)

        axes = (t1, ext2, ext3)
        self._c = RegularGridInterpolator(axes, wrap(v), method="cubic")
        self._g = [RegularGridInterpolator(axes, wrap(d), method="linear") for d in grads]

    def _pts(self, x1, x2, x3):
        x1, x2, x3 = np.broadcast_arrays(*(np.asarray(v, float) for v in (x1, x2, x3)))
        return np.stack([x1, np.mod(x2, TWO_PI), np.mod(x3, TWO_PI)], axis=-1), x1.shape

    def __call__(self, x1, x2, x3):
        p, shape = self._pts(x1, x2, x3)
        return self._c(p.reshape(-1, 3)).reshape(shape)

    def grad_log(self, x1, x2, x3):
        p, shape = self._pts(x1, x2, x3)
        flat = p.reshape(-1, 3)
        c = self._c(flat)
        return np.stack([(gi(flat) / c).reshape(shape) for gi in self._g])

    def describe(self):
        return f"field:{self.field.name}:{self.field.grid.shape}"
