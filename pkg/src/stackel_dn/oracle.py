"""Finite-difference oracle for the Laplace–Beltrami Dirichlet problem and its DN map.

Seven-point divergence-form stencil with face-averaged √|G| G^{ii} =
H₁H₂H₃/H_i², periodic in the angles, Dirichlet rows at i ∈ {0, N1}. The
normal derivative uses a three-point one-sided difference scaled by ∓1/H₁.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np

from .conformal import fit_order
from .dn import DnOperator, apply_dn, assemble_dn
from .fdgrid import Grid3, ScalarField3, divergence_operator, one_sided_normal, solve_dirichlet
from .geometry import ConformallyStackelMetric


@dataclass
class DiscreteLaplaceSystem:
    grid: Grid3
    K: object
    sqrtG: np.ndarray
    H1: np.ndarray

    def symmetry_defect(self) -> float:
        d = abs(self.K - self.K.T)
        return float(d.max() / abs(self.K).max())

    def row_sum_defect(self) -> float:
        m = self.grid.N2 * self.grid.N3
        s = np.asarray(self.K.sum(axis=1)).ravel()[m:-m]
        return float(np.max(np.abs(s)) / abs(self.K).max())


def laplace_system(metric: ConformallyStackelMetric, grid: Grid3) -> DiscreteLaplaceSystem:
    if abs(grid.A - metric.A) > 1e-14 * max(1.0, metric.A):
        raise ValueError("grid length does not match the metric")
    X1, X2, X3 = grid.mesh()
    me = metric.eval(X1, X2, X3)
    H = np.sqrt(me.H_sq)
    vol = H[0] * H[1] * H[2]
    coef = [vol / me.H_sq[i] for i in range(3)]
    return DiscreteLaplaceSystem(grid, divergence_operator(grid, coef), vol, H[0])


def solve_laplace(metric: ConformallyStackelMetric, grid: Grid3, f0, f1, tol: float = 1e-12,
                  method: str = "cg", system: DiscreteLaplaceSystem = None) -> ScalarField3:
    sysm = system or laplace_system(metric, grid)
    shape = (grid.N2, grid.N3)
    f0 = np.broadcast_to(np.asarray(f0, float), shape)
    f1 = np.broadcast_to(np.asarray(f1, float), shape)
    sol = solve_dirichlet(grid, sysm.K, f0, f1, tol=tol, method=method)
    out = ScalarField3(grid, sol.values, "u")
    out.residual = sol.residual
    out.iterations = sol.iterations
    return out


def dn_oracle(metric: ConformallyStackelMetric, grid: Grid3, f0, f1, tol: float = 1e-12,
              system: DiscreteLaplaceSystem = None, method: str = "cg"):
    """(Λf|₀, Λf|_A) from the discrete harmonic extension."""
    sysm = system or laplace_system(metric, grid)
    u = solve_laplace(metric, grid, f0, f1, tol, method, sysm).values
    d0, dA = one_sided_normal(u, grid.spacing[0])
    return -d0 / sysm.H1[0], dA / sysm.H1[-1]


# ---------------------------------------------------------------------------
# comparison harness
# ---------------------------------------------------------------------------
Datum = Callable[[DnOperator], tuple]


def mode_data(indices: Sequence[int] = (1, 2, 3, 4, 5)) -> List[Datum]:
    """Single-harmonic data R·Y_k on x¹ = 0 and on x¹ = A for each k."""
    out = []
    for k in indices:
        for side in (0, 1):
            def d(op, k=k, side=side):
                R = op.prefactors["R0" if side == 0 else "RA"]
                f = R * op.Y[k]
                z = np.zeros_like(f)
                return (f, z) if side == 0 else (z, f)

            d.__name__ = f"mode{k}_side{side}"
            out.append(d)
    return out


def constant_datum(value0: float = 1.0, value1: float = 0.0) -> Datum:
    def d(op):
        return (np.full((op.N2, op.N3), value0), np.full((op.N2, op.N3), value1))

    d.__name__ = f"const_{value0:g}_{value1:g}"
    return d


def _norm2(pre, g) -> float:
    return float(np.sum(pre["area0"] * g[0] ** 2) + np.sum(pre["areaA"] * g[1] ** 2))


def rel_l2(g, ref, op: DnOperator, data=None) -> float:
    """Area-weighted ‖g − ref‖/‖ref‖ on both tori.

    When ref vanishes relative to the boundary data (e.g. constants mapped to
    zero), the data norm is used instead so the ratio stays meaningful.
    """
    pre = op.prefactors
    num = _norm2(pre, (g[0] - ref[0], g[1] - ref[1]))
    den = _norm2(pre, ref)
    if data is not None:
        dn = _norm2(pre, data)
        if den <= 1e-16 * dn:
            den = dn
    return float(np.sqrt(num / den)) if den > 0 else float(np.sqrt(num))


@dataclass
class ConvergenceReport:
    grids: List[int]
    names: List[str]
    errors: np.ndarray          # (datum, grid)
    orders: np.ndarray          # per datum, NaN when errors sit at round-off
    rows: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("grid,datum_id,rel_err,fitted_order\n")
            for i, name in enumerate(self.names):
                for j, n in enumerate(self.grids):
                    fh.write(f"{n},{name},{self.errors[i, j]:.6e},{self.orders[i]:.4f}\n")


ROUNDOFF_FLOOR = 1e-10


def compare_dn(metric: ConformallyStackelMetric, data: Sequence[Datum], spectrum,
               sizes: Sequence[int] = (16, 24, 32), tol: float = 1e-12) -> ConvergenceReport:
    """Relative L² discrepancy between the separated and the oracle DN maps on cubic grids."""
    errs = np.zeros((len(data), len(sizes)))
    for j, n in enumerate(sizes):
        grid = Grid3.cube(n, metric.A)
        op = assemble_dn(metric, spectrum, M_max=len(spectrum), N2=n, N3=n)
        sysm = laplace_system(metric, grid)
        for i, d in enumerate(data):
            f = d(op)
            sep = apply_dn(op, *f)
            orc = dn_oracle(metric, grid, *f, tol=tol, system=sysm)
            errs[i, j] = rel_l2(orc, sep, op, f)
    hs = [metric.A / n for n in sizes]
    orders = np.array([fit_order(hs, e) if np.max(e) > ROUNDOFF_FLOOR else np.nan for e in errs])
    return ConvergenceReport(list(sizes), [d.__name__ for d in data], errs, orders)
