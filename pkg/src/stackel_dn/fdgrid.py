"""Tensor grids on [0, A]×T² and divergence-form finite-difference operators."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .errors import SolverDiverged
from .geometry import TWO_PI


@dataclass(frozen=True)
class Grid3:
    N1: int
    N2: int
    N3: int
    A: float = 1.0

    def __post_init__(self):
        if min(self.N1, self.N2, self.N3) < 8:
            raise ValueError("grid dimensions must be at least 8")

    @classmethod
    def cube(cls, N: int, A: float = 1.0) -> "Grid3":
        return cls(N, N, N, A)

    @property
    def shape(self):
        return (self.N1 + 1, self.N2, self.N3)

    @property
    def spacing(self):
        return (self.A / self.N1, TWO_PI / self.N2, TWO_PI / self.N3)

    def axes(self):
        return (np.linspace(0.0, self.A, self.N1 + 1), np.arange(self.N2) * self.spacing[1],
                np.arange(self.N3) * self.spacing[2])

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")


class ScalarField3:
    """Real field on a Grid3, periodic in the two angular indices."""

    def __init__(self, grid: Grid3, values: np.ndarray, name: str = "field"):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        self.grid = grid
        self.values = values
        self.name = name

    @property
    def boundary(self):
        """Values on the tori x¹ = 0 and x¹ = A."""
        return self.values[0], self.values[-1]

    def save(self, path) -> None:
        path = Path(path)
        self.values.astype("<f8").tofile(path.with_suffix(".bin"))
        meta = {"name": self.name, "shape": list(self.grid.shape), "A": self.grid.A,
                "spacing": list(self.grid.spacing), "order": "row-major (i,j,k)",
                "dtype": "float64 little-endian", "boundary_rows": [0, self.grid.N1]}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "ScalarField3":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        n1, n2, n3 = meta["shape"]
        vals = np.fromfile(path.with_suffix(".bin"), dtype="<f8").reshape(n1, n2, n3)
        return cls(Grid3(n1 - 1, n2, n3, meta["A"]), vals, meta.get("name", "field"))

    def to_csv(self, path) -> None:
        I, J, K = np.indices(self.values.shape)
        with open(path, "w") as fh:
            fh.write("i,j,k,value\n")
            for i, j, k, v in zip(I.ravel(), J.ravel(), K.ravel(), self.values.ravel()):
                fh.write(f"{i},{j},{k},{v:.17g}\n")


def face_average(a: np.ndarray, axis: int, periodic: bool) -> np.ndarray:
    if periodic:
        return 0.5 * (a + np.roll(a, -1, axis=axis))
    sl_lo = [slice(None)] * a.ndim
    sl_hi = [slice(None)] * a.ndim
    sl_lo[axis] = slice(0, -1)
    sl_hi[axis] = slice(1, None)
    return 0.5 * (a[tuple(sl_lo)] + a[tuple(sl_hi)])


def divergence_operator(grid: Grid3, coef, zeroth=None) -> sp.csr_matrix:
    """Matrix of −Σ_i ∂_i(a_i ∂_i u) + z u on all nodes (face-averaged a_i).

    Rows at i = 0, N1 are assembled like interior rows with the missing
    neighbours dropped; callers use only interior rows.
    """
    n1, n2, n3 = grid.shape
    h = grid.spacing
    idx = np.arange(n1 * n2 * n3).reshape(grid.shape)
    rows, cols, vals = [], [], []
    diag = np.zeros(grid.shape)
    for ax in range(3):
        periodic = ax > 0
        af = face_average(coef[ax], ax, periodic) / h[ax] ** 2
        if periodic:
            lo, hi = idx, np.roll(idx, -1, axis=ax)
            w = af
        else:
            lo, hi = idx[:-1], idx[1:]
            w = af
        rows += [lo.ravel(), hi.ravel()]
        cols += [hi.ravel(), lo.ravel()]
        vals += [-w.ravel(), -w.ravel()]
        if periodic:
            diag += w + np.roll(w, 1, axis=ax)
        else:
            diag[:-1] += w
            diag[1:] += w
    if zeroth is not None:
        diag = diag + zeroth
    rows.append(idx.ravel())
    cols.append(idx.ravel())
    vals.append(diag.ravel())
    K = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(idx.size, idx.size))
    return K


@dataclass
class DirichletSolve:
    values: np.ndarray
    residual: float
    iterations: int


def solve_dirichlet(grid: Grid3, K: sp.csr_matrix, f0: np.ndarray, f1: np.ndarray,
                    tol: float = 1e-10, maxiter: int = 100000, method: str = "cg") -> DirichletSolve:
    """Solve K u = 0 at interior nodes with u = f0, f1 on the boundary tori.

    The initial guess interpolates the boundary data linearly in x¹, which
    is already the discrete solution for data constant in the angles on
    constant-coefficient fixtures.
    """
    n1, n2, n3 = grid.shape
    m = n2 * n3
    t = np.linspace(0.0, 1.0, n1)[:, None, None]
    guess = (1 - t) * f0[None] + t * f1[None]
    u = guess.reshape(-1).copy()
    interior = slice(m, (n1 - 1) * m)
    Kii = K[interior, interior]
    rhs = -(K[interior, :m] @ u[:m] + K[interior, (n1 - 1) * m:] @ u[(n1 - 1) * m:])
    x0 = u[interior]
    bnorm = np.linalg.norm(rhs)
    if method == "direct":
        from scipy.sparse.linalg import spsolve

        x = spsolve(Kii.tocsc(), rhs)
        its = 1
    else:
        d = Kii.diagonal()
        Minv = sp.diags(1.0 / d)
        its = [0]

        def cb(_):
            its[0] += 1

        r0 = np.linalg.norm(rhs - Kii @ x0)
        if bnorm == 0 or r0 <= tol * max(bnorm, 1e-300):
            x, info = x0, 0
        else:
            x, info = cg(Kii, rhs, x0=x0, rtol=tol * bnorm / r0 if r0 > 0 else tol,
                         atol=0.0, maxiter=maxiter, M=Minv, callback=cb)
        if info != 0:
            raise SolverDiverged(f"CG did not converge ({info})")
        its = its[0]
    u[interior] = x
    res = float(np.linalg.norm(Kii @ x - rhs) / max(bnorm, 1e-300)) if bnorm > 0 else \
        float(np.linalg.norm(Kii @ x - rhs))
    return DirichletSolve(u.reshape(grid.shape), res, its)


def one_sided_normal(u: np.ndarray, h1: float):
    """Second-order one-sided ∂₁u at x¹ = 0 and x¹ = A."""
    d0 = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h1)
    dA = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h1)
    return d0, dA
