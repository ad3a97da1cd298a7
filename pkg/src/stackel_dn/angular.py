"""Angular operators (H, L) on the torus and their joint spectrum.

The separated angular equations are

    −v'' + (µ² s22 + ν² s23 − φ₂) v = 0   (x² ∈ [0, 2π])
    −w'' + (µ² s32 + ν² s33 − φ₃) w = 0   (x³ ∈ [0, 2π])

and (µ², ν²) is a joint eigenvalue when both admit a 2π-periodic solution,
i.e. when both monodromy matrices have eigenvalue one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import EigsolverFailure, InsufficientPairs, IntegratorFailure, NewtonStall
from .geometry import StackelMatrix, TWO_PI
from .integrators import prefix_states, stage_nodes, step_matrices
from .radial import SeparatedRow
from .univariate import UnivariateFn

HILL_STEP_FACTOR = 0.05
HILL_MIN_STEPS = 256
DEDUP_TOL = 1e-6
MULT_TOL = 1e-6
CSTEP = 1e-20


class AngularOperators:
    """T-block [[s22, s23], [s32, s33]], potentials φ₂, φ₃ and a spectral shift (B₁, B₂).

    The shift adds B₁ to H and B₂ to L; it is realised by adding
    B₁ s_{i2} + B₂ s_{i3} to φ_i, which leaves the eigenfunctions unchanged.
    """

    def __init__(self, T_block, phi2=0.0, phi3=0.0, shift=(0.0, 0.0),
                 step_factor: float = HILL_STEP_FACTOR, min_steps: int = HILL_MIN_STEPS):
        (s22, s23), (s32, s33) = T_block
        lift = UnivariateFn._lift
        self.T = ((lift(s22), lift(s23)), (lift(s32), lift(s33)))
        self.phi_base = (lift(phi2), lift(phi3))
        self.shift = (float(shift[0]), float(shift[1]))
        B1, B2 = self.shift
        (s22, s23), (s32, s33) = self.T
        self.phi2 = self.phi_base[0] + s22 * B1 + s23 * B2 if (B1 or B2) else self.phi_base[0]
        self.phi3 = self.phi_base[1] + s32 * B1 + s33 * B2 if (B1 or B2) else self.phi_base[1]
        self.rows = (SeparatedRow(s22, s23, -self.phi2, TWO_PI, "x2", step_factor, min_steps),
                     SeparatedRow(s32, s33, -self.phi3, TWO_PI, "x3", step_factor, min_steps))

    @classmethod
    def from_stackel(cls, S: StackelMatrix, phi, shift=(0.0, 0.0), **kw) -> "AngularOperators":
        return cls(((S.rows[1][1], S.rows[1][2]), (S.rows[2][1], S.rows[2][2])),
                   phi[1], phi[2], shift, **kw)

    def shifted(self, B1: float, B2: float) -> "AngularOperators":
        return AngularOperators(self.T, self.phi_base[0], self.phi_base[1],
                                (self.shift[0] + B1, self.shift[1] + B2),
                                self.rows[0].step_factor, self.rows[0].min_steps)

    def weight(self, x2, x3):
        """s^{11}(x², x³) = s22 s33 − s23 s32."""
        (s22, s23), (s32, s33) = self.T
        x2, x3 = np.broadcast_arrays(np.asarray(x2, float), np.asarray(x3, float))
        return s22(x2) * s33(x3) - s23(x2) * s32(x3)

    def cone(self, samples: int = 256):
        t = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        (s22, s23), (s32, s33) = self.T
        return float(np.max(-s32(t) / s33(t))), float(np.min(-s22(t) / s23(t)))

    # monodromy ------------------------------------------------------------
    def monodromy(self, mu2, nu2):
        """Monodromy matrices (M₂, M₃) at arrays of pairs, shape [..., 2, 2] each."""
        out = []
        for row in self.rows:
            P, ls, _ = row.transfer(mu2, nu2)
            if np.any(~np.isfinite(P)):
                raise IntegratorFailure("non-finite monodromy")
            out.append(P * np.exp(ls)[..., None, None])
        return out


def hill_discriminants(ops: AngularOperators, mu2: float, nu2: float):
    """Traces (d₂, d₃) of the two monodromy matrices."""
    M2, M3 = ops.monodromy(mu2, nu2)
    return float(np.trace(M2[0]).real), float(np.trace(M3[0]).real)


# ---------------------------------------------------------------------------
# joint eigenpairs
# ---------------------------------------------------------------------------
@dataclass
class JointEigenpair:
    """A joint eigenvalue with its separated eigenfunctions.

    ``v_init``/``w_init`` hold Cauchy data (value, derivative) at 0 of a basis
    of periodic solutions of each factor; the product basis is ordered with
    the x² index varying slowest (cc, cs, sc, ss for multiplicity four).
    """

    mu2: float
    nu2: float
    multiplicity: int
    v_init: list = field(default_factory=list)
    w_init: list = field(default_factory=list)
    residual_v: float = np.nan
    residual_w: float = np.nan
    source: str = "shooting"
    Y_grid: Optional[np.ndarray] = None  # oracle eigenvectors, shape (mult, N, N)

    @property
    def key(self):
        return (self.mu2, self.nu2)

    def sample_factors(self, ops: AngularOperators, N2: int, N3: int):
        v = [_sample_periodic(ops.rows[0], self.mu2, self.nu2, y0, N2) for y0 in self.v_init]
        w = [_sample_periodic(ops.rows[1], self.mu2, self.nu2, y0, N3) for y0 in self.w_init]
        return v, w


def _sample_periodic(row: SeparatedRow, mu2, nu2, y0, N: int) -> np.ndarray:
    n = row.nsteps(mu2, nu2)
    sub = -(-n // N)
    a1, a2, a0, h = row.stage_values(N * sub)
    Q = mu2 * a1 + nu2 * a2 + a0
    states = prefix_states(step_matrices(Q, h), np.asarray(y0, dtype=float))
    return states[:-1:sub, 0].real


def _fine_residual(row: SeparatedRow, mu2, nu2, y0, N: int = 256) -> float:
    """Relative discrete-L² residual of the ODE for a sampled solution (spectral second derivative)."""
    v = _sample_periodic(row, mu2, nu2, y0, N)
    k = np.fft.fftfreq(N, 1.0 / N)
    d2 = np.fft.ifft(-(k**2) * np.fft.fft(v)).real
    x = np.arange(N) * (TWO_PI / N)
    q = mu2 * row.a1(x) + nu2 * row.a2(x) + row.a0(x)
    res = -d2 + q * v
    scale = (1.0 + np.max(np.abs(q))) * np.linalg.norm(v)
    return float(np.linalg.norm(res) / scale) if scale > 0 else 0.0


def orthonormal_basis(pairs: Sequence[JointEigenpair], ops: AngularOperators, N2: int, N3: int):
    """Sampled eigenfunctions Y on an N2×N3 grid, orthonormal in the s^{11}-weighted trapezoid product.

    Returns (Y[K, N2, N3], index) where index[k] is the position of the pair in ``pairs``.
    """
    x2 = np.arange(N2) * (TWO_PI / N2)
    x3 = np.arange(N3) * (TWO_PI / N3)
    wgt = ops.weight(x2[:, None], x3[None, :]) * (TWO_PI / N2) * (TWO_PI / N3)
    Ys, idx = [], []
    for m, p in enumerate(pairs):
        if p.Y_grid is not None and p.Y_grid.shape[1:] == (N2, N3):
            block = [y for y in p.Y_grid]
        else:
            v, w = p.sample_factors(ops, N2, N3)
            block = [np.outer(a, b) for a in v for b in w]
        # modified Gram–Schmidt inside the eigenspace
        basis = []
        for y in block:
            for b in basis:
                y = y - np.sum(wgt * b * y) * b
            nrm = np.sqrt(np.sum(wgt * y * y))
            if nrm < 1e-10:
                continue
            basis.append(y / nrm)
        Ys.extend(basis)
        idx.extend([m] * len(basis))
    return np.array(Ys), np.array(idx, dtype=int), wgt


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------
def _pencil_step(A1, B1, C1, A2, B2, C2, trust):
    """Smallest real solution of det(A_i + λB_i + ηC_i) = 0, i = 1, 2 (operator determinants)."""
    D0 = np.kron(B1, C2) - np.kron(C1, B2)
    D1 = np.kron(C1, A2) - np.kron(A1, C2)
    D2 = np.kron(A1, B2) - np.kron(B1, A2)
    try:
        lam, Z = scipy.linalg.eig(D1, D0)
    except (np.linalg.LinAlgError, ValueError):
        return None
    best = None
    for j in range(4):
        if not np.isfinite(lam[j]):
            continue
        z = Z[:, j]
        d0z = D0 @ z
        den = np.vdot(d0z, d0z)
        if abs(den) == 0:
            continue
        eta = np.vdot(d0z, D2 @ z) / den
        step = np.array([lam[j], eta])
        if np.max(np.abs(step.imag)) > 1e-6 * (1 + np.max(np.abs(step.real))):
            continue
        step = step.real
        nrm = np.hypot(*step)
        if best is None or nrm < best[1]:
            best = (step, nrm)
    if best is None:
        return None
    step, nrm = best
    if nrm > trust:
        step = step * (trust / nrm)
    return step


def _adj(A):
    return np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]])


def _scalar_newton_step(A1, B1, C1, A2, B2, C2, trust):
    """Newton step on (det A₁, det A₂) = (2 − tr M₂, 2 − tr M₃)."""
    f = np.array([np.linalg.det(A1), np.linalg.det(A2)])
    J = np.array([[np.trace(_adj(A1) @ B1), np.trace(_adj(A1) @ C1)],
                  [np.trace(_adj(A2) @ B2), np.trace(_adj(A2) @ C2)]])
    try:
        step = -np.linalg.lstsq(J, f, rcond=1e-12)[0]
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(step)):
        return None
    nrm = np.hypot(*step)
    return step * (trust / nrm) if nrm > trust else step


def _jacobian_data(ops: AngularOperators, a: np.ndarray, b: np.ndarray):
    """(M, ∂_a M, ∂_b M) for both factors by complex-step differentiation."""
    Ma = ops.monodromy(a + 1j * CSTEP, b + 0j)
    Mb = ops.monodromy(a + 0j, b + 1j * CSTEP)
    out = []
    for f in range(2):
        out.append((Ma[f].real, Ma[f].imag / CSTEP, Mb[f].imag / CSTEP))
    return out


def _newton(ops: AngularOperators, seeds: np.ndarray, max_iter: int = 50, tol: float = 1e-12,
            box=None, patience: int = 12):
    """Vectorised pencil-Newton from many seeds; returns (points, converged mask).

    Seeds leaving ``box`` (enlarged by a margin) or failing to reduce their
    residual for ``patience`` consecutive iterations are abandoned.
    """
    p = np.array(seeds, dtype=float).reshape(-1, 2)
    active = np.ones(len(p), dtype=bool)
    conv = np.zeros(len(p), dtype=bool)
    best = np.full(len(p), np.inf)
    stale = np.zeros(len(p), dtype=int)
    eye = np.eye(2)
    if box is not None:
        (a0, a1), (b0, b1) = box
        ma, mb = 0.25 * (a1 - a0) + 1.0, 0.25 * (b1 - b0) + 1.0
        box = ((a0 - ma, a1 + ma), (b0 - mb, b1 + mb))
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        (M2, B2, C2), (M3, B3, C3) = _jacobian_data(ops, p[idx, 0], p[idx, 1])
        for j, g in enumerate(idx):
            A2 = M2[j] - eye
            A3 = M3[j] - eye
            sc2 = 1.0 + np.linalg.norm(M2[j])
            sc3 = 1.0 + np.linalg.norm(M3[j])
            res = max(np.linalg.svd(A2, compute_uv=False)[-1] / sc2,
                      np.linalg.svd(A3, compute_uv=False)[-1] / sc3)
            if res < 0.5 * best[g]:
                best[g], stale[g] = res, 0
            else:
                stale[g] += 1
                if stale[g] > patience:
                    active[g] = False
                    continue
            trust = 0.5 * (1.0 + np.hypot(*p[g]) ** 0.5)
            step = _pencil_step(A2 / sc2, B2[j] / sc2, C2[j] / sc2,
                                A3 / sc3, B3[j] / sc3, C3[j] / sc3, trust)
            if step is None:
                step = _scalar_newton_step(A2, B2[j], C2[j], A3, B3[j], C3[j], trust)
            if step is None:
                active[g] = False
                continue
            p[g] = p[g] + step
            small = np.hypot(*step) < 1e-9 * (1 + np.hypot(*p[g]))
            if res < tol and small:
                conv[g] = True
                active[g] = False
            elif np.hypot(*step) < 1e-14 * (1 + np.hypot(*p[g])):
                conv[g] = res < 1e3 * tol
                active[g] = False
            elif box is not None and not (box[0][0] <= p[g, 0] <= box[0][1]
                                          and box[1][0] <= p[g, 1] <= box[1][1]):
                active[g] = False
    return p, conv


def _finalize(ops: AngularOperators, pts: np.ndarray) -> List[JointEigenpair]:
    out = []
    if len(pts) == 0:
        return out
    M2, M3 = ops.monodromy(pts[:, 0] + 0j, pts[:, 1] + 0j)
    eye = np.eye(2)
    for j, (a, b) in enumerate(pts):
        inits, mults, res = [], [], []
        for f, M in enumerate((M2[j].real, M3[j].real)):
            U, s, Vt = np.linalg.svd(M - eye)
            scale = 1.0 + np.linalg.norm(M)
            if s[0] < MULT_TOL * scale:
                basis = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
            else:
                n = Vt[-1]
                k = int(np.argmax(np.abs(n) > 1e-12))
                basis = [n * np.sign(n[k])]
            inits.append(basis)
            mults.append(len(basis))
            res.append(max(_fine_residual(ops.rows[f], a, b, y0) for y0 in basis))
        out.append(JointEigenpair(float(a), float(b), min(4, mults[0] * mults[1]),
                                  inits[0], inits[1], res[0], res[1]))
    return out


def _dedupe(pts: np.ndarray) -> np.ndarray:
    if len(pts) == 0:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = []
    for p in pts:
        if not any(np.hypot(*(p - q)) < DEDUP_TOL * (1 + np.hypot(*q)) for q in keep):
            keep.append(p)
    return np.array(keep)


def lattice_seeds(ops: AngularOperators, mu2_max: float, spacing: float = 0.5):
    """Seeds on a lattice inside the cone ν²/µ² ∈ [c1, c2] plus the axes."""
    c1, c2 = ops.cone()
    lo, hi = min(c1, c2), max(c1, c2)
    seeds = []
    for a in np.arange(0.0, mu2_max + spacing / 2, spacing):
        blo, bhi = lo * a - 1.0, hi * a + 1.0
        for b in np.arange(np.floor(blo / spacing) * spacing, bhi + spacing / 2, spacing):
            seeds.append((a, b))
        seeds.append((a, 0.0))
    for b in np.arange(0.0, hi * mu2_max + 1.0, spacing):
        seeds.append((0.0, b))
    return np.unique(np.round(np.array(seeds), 12), axis=0)


def joint_spectrum_shooting(ops: AngularOperators, search_box=None, target_count: int = 20,
                            seeds="oracle", spacing: float = 0.5, oracle_grid: int = 32,
                            report=None) -> List[JointEigenpair]:
    """Joint eigenpairs by two-parameter Newton on the monodromy matrices.

    Each Newton step solves the linearised two-parameter pencil
    det(M_i − I + δa ∂_a M_i + δb ∂_b M_i) = 0, which keeps quadratic
    convergence at coexistence points where M_i = I.

    ``seeds`` is "oracle" (low eigenvalues of a coarse discretisation),
    "lattice" (points inside the cone plus the axes, restricted to
    ``search_box``) or an explicit array of (µ², ν²). ``search_box`` is
    ((µ²_min, µ²_max), (ν²_min, ν²_max)). Seeds that stall are recorded in
    ``report`` (a list) instead of raising.
    """
    if isinstance(seeds, str) and seeds == "lattice":
        if search_box is None:
            raise ValueError("lattice seeding needs a search box")
        seeds = lattice_seeds(ops, float(search_box[0][1]), spacing)
        sel = [(search_box[1][0] - 1 <= b <= search_box[1][1] + 1) and a >= search_box[0][0] - 1
               for a, b in seeds]
        seeds = seeds[np.array(sel)]
        box = search_box
    elif isinstance(seeds, str) and seeds == "oracle":
        count = max(target_count, 8)
        while True:
            approx = joint_spectrum_oracle(ops, oracle_grid, count + 8)
            seeds = np.array([[q.mu2, q.nu2] for q in approx])
            pts, conv = _newton(ops, seeds)
            _record(report, seeds, conv)
            pairs = _finalize(ops, _dedupe(pts[conv]))
            pairs = _in_box(pairs, search_box)
            if search_box is not None or len(pairs) >= target_count:
                return pairs if search_box is not None else pairs[:target_count]
            count *= 2
    else:
        seeds = np.asarray(seeds, dtype=float)
        box = search_box
    pts, conv = _newton(ops, seeds, box=box)
    _record(report, seeds, conv)
    return _in_box(_finalize(ops, _dedupe(pts[conv])), search_box)


def _record(report, seeds, conv):
    if report is not None:
        report.extend(NewtonStall(f"seed {tuple(np.round(s, 6))} did not converge")
                      for s, c in zip(seeds, conv) if not c)


def sort_key(p):
    return (round(p.mu2, 7), round(p.nu2, 7))


def _in_box(pairs, box):
    pairs = sorted(pairs, key=sort_key)
    if box is None:
        return pairs
    (a0, a1), (b0, b1) = box
    return [p for p in pairs if a0 <= p.mu2 <= a1 and b0 <= p.nu2 <= b1]


def polish(ops: AngularOperators, approx: Sequence[JointEigenpair]) -> List[JointEigenpair]:
    """Refine approximate pairs (e.g. from the oracle) by shooting; keeps multiplicities of the refinement."""
    seeds = np.array([[p.mu2, p.nu2] for p in approx])
    pts, conv = _newton(ops, seeds)
    if not np.all(conv):
        bad = seeds[~conv]
        raise NewtonStall(f"{len(bad)} oracle seeds did not converge, e.g. {tuple(bad[0])}")
    return sorted(_finalize(ops, _dedupe(pts)), key=sort_key)


def refine_pairs(ops: AngularOperators, approx: Sequence[JointEigenpair]) -> List[JointEigenpair]:
    """Like ``polish`` but silently drops seeds that do not converge."""
    if len(approx) == 0:
        return []
    seeds = np.array([[p.mu2, p.nu2] for p in approx])
    pts, conv = _newton(ops, seeds)
    return sorted(_finalize(ops, _dedupe(pts[conv])), key=sort_key)


# ---------------------------------------------------------------------------
# discretised-operator oracle
# ---------------------------------------------------------------------------
def fourier_d2(N: int) -> np.ndarray:
    """Fourier pseudospectral second-derivative matrix on N equispaced points of [0, 2π)."""
    k = np.fft.fftfreq(N, 1.0 / N)
    sym = -(k**2)
    if N % 2 == 0:
        sym[N // 2] = -(N / 2) ** 2
    F = np.fft.fft(np.eye(N), axis=0)
    return np.real(np.fft.ifft(sym[:, None] * F, axis=0))


def fd_d2(N: int) -> np.ndarray:
    """Second-order periodic finite-difference second derivative."""
    h = TWO_PI / N
    D = -2.0 * np.eye(N) + np.eye(N, k=1) + np.eye(N, k=-1)
    D[0, -1] = D[-1, 0] = 1.0
    return D / h**2


def discrete_operators(ops: AngularOperators, N: int, scheme: str = "fourier"):
    """Symmetric stiffness matrices K_H, K_L and diagonal weight W (s^{11}) on an N×N grid.

    H Y = µ² Y and L Y = ν² Y become K_H y = µ² W y and K_L y = ν² W y with
    K_H = −K₂⊗S33 + S23⊗K₃ and K_L = K₂⊗S32 − S22⊗K₃, K_i = −D² − φ_i.
    """
    x = np.arange(N) * (TWO_PI / N)
    D2 = fourier_d2(N) if scheme == "fourier" else fd_d2(N)
    D2 = 0.5 * (D2 + D2.T)
    (s22, s23), (s32, s33) = ops.T
    K2 = -D2 - np.diag(ops.phi2(x))
    K3 = -D2 - np.diag(ops.phi3(x))
    S22, S23 = np.diag(s22(x)), np.diag(s23(x))
    S32, S33 = np.diag(s32(x)), np.diag(s33(x))
    KH = -np.kron(K2, S33) + np.kron(S23, K3)
    KL = np.kron(K2, S32) - np.kron(S22, K3)
    W = (np.outer(s22(x), s33(x)) - np.outer(s23(x), s32(x))).ravel()
    return KH, KL, W


def commutator_norm(ops: AngularOperators, N: int, scheme: str = "fourier") -> float:
    """Relative Frobenius norm of HL − LH for H = W⁻¹K_H, L = W⁻¹K_L."""
    KH, KL, W = discrete_operators(ops, N, scheme)
    H = KH / W[:, None]
    L = KL / W[:, None]
    C = H @ L - L @ H
    return float(np.linalg.norm(C) / (np.linalg.norm(H) * np.linalg.norm(L)))


def _cluster(vals: np.ndarray, tol: float):
    groups, cur = [], [0]
    for i in range(1, len(vals)):
        if abs(vals[i] - vals[cur[-1]]) <= tol * (1 + abs(vals[i])):
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    return groups


def _compress(vals, vecs, groups, sq, KL, N, tol):
    """Diagonalise L on each eigenspace of H; returns oracle JointEigenpairs."""
    pairs = []
    for g in groups:
        X = vecs[:, g] / sq[:, None]  # W-orthonormal
        C = X.T @ KL @ X
        C = 0.5 * (C + C.T)
        nv, U = np.linalg.eigh(C)
        for sub in _cluster(nv, tol):
            Y = (X @ U[:, sub]).T.reshape(len(sub), N, N)
            pairs.append(JointEigenpair(float(np.mean(vals[g])), float(np.mean(nv[sub])),
                                        len(sub), source="oracle", Y_grid=Y))
    return pairs


def joint_spectrum_oracle(ops: AngularOperators, N: int = 64, count: int = 20,
                          scheme: str = "fourier", tol: float = 1e-6) -> List[JointEigenpair]:
    """Low joint spectrum of the discretised (H, L).

    Eigenspaces of H (generalised symmetric problem with weight W) are
    clustered and L is diagonalised on each. Eigenvalue computations use
    shift-invert Lanczos with a dense LU factorisation.
    """
    if N < 8:
        raise ValueError("grid too small")
    from scipy.sparse.linalg import LinearOperator, eigsh

    KH, KL, W = discrete_operators(ops, N, scheme)
    sq = np.sqrt(W)
    B = KH / sq[:, None] / sq[None, :]
    B = 0.5 * (B + B.T)
    n = B.shape[0]
    # K_H minus its zeroth-order part is positive semi-definite, so this shift
    # lies below the spectrum and shift-invert returns the lowest eigenvalues
    x = np.arange(N) * (TWO_PI / N)
    (s22, s23), (s32, s33) = ops.T
    pot = np.outer(ops.phi2(x), s33(x)) - np.outer(s23(x), ops.phi3(x))
    sigma = min(0.0, float(np.min(pot.ravel() / W))) - 1.0
    k = min(n - 2, int(count * 2 + 16))
    pairs = None
    for attempt in range(4):
        try:
            lu = scipy.linalg.lu_factor(B - sigma * np.eye(n), check_finite=False)
            op = LinearOperator((n, n), matvec=lambda v: scipy.linalg.lu_solve(lu, v, check_finite=False),
                                dtype=float)
            vals, vecs = eigsh(B, k=k, sigma=sigma, OPinv=op, which="LM", tol=1e-13)
        except Exception as exc:  # ARPACK failure
            raise EigsolverFailure(str(exc)) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        groups = _cluster(vals, tol)[:-1]  # the top cluster may be incomplete
        pairs = _compress(vals, vecs, groups, sq, KL, N, tol)
        if len(pairs) >= count or k >= n - 2:
            break
        k = min(n - 2, 2 * k)
    pairs.sort(key=sort_key)
    return pairs[:count] if len(pairs) >= count else pairs


def joint_spectrum_dense(ops: AngularOperators, mu2_max: float, N: int = 48,
                         refine: bool = True, tol: float = 1e-6) -> List[JointEigenpair]:
    """All joint pairs with µ² ≤ mu2_max from a dense discretisation, optionally refined by shooting.

    N must resolve the eigenfunctions: the highest Fourier mode on the grid
    is N/2, so pairs whose factors oscillate faster are not reliable.
    """
    KH, KL, W = discrete_operators(ops, N, "fourier")
    sq = np.sqrt(W)
    B = KH / sq[:, None] / sq[None, :]
    B = 0.5 * (B + B.T)
    try:
        vals, vecs = scipy.linalg.eigh(B, subset_by_value=(-np.inf, mu2_max * (1 + 1e-9) + 1e-9),
                                       driver="evr")
    except Exception as exc:
        raise EigsolverFailure(str(exc)) from exc
    pairs = _compress(vals, vecs, _cluster(vals, tol), sq, KL, N, tol)
    pairs.sort(key=sort_key)
    return polish(ops, pairs) if refine else pairs


# ---------------------------------------------------------------------------
# cone density
# ---------------------------------------------------------------------------
@dataclass
class ConeDensityReport:
    epsilon: float
    c1: float
    c2: float
    pairs_in_cone: np.ndarray
    h_min: float
    radii: np.ndarray
    density_curve: np.ndarray
    slope_bounds: tuple
    all_ratios: np.ndarray

    def ratios_within(self, lo, hi, tol=1e-9):
        r = self.all_ratios[np.isfinite(self.all_ratios)]
        return bool(np.all((r >= lo - tol) & (r <= hi + tol)))


def cone_density(pairs, epsilon: float, c1: float, c2: float, min_pairs: int = 50,
                 n_radii: int = 10) -> ConeDensityReport:
    """Cone membership, minimal separation, N(r)/r² and linear bounds of the pair set."""
    mu2 = np.array([p.mu2 if hasattr(p, "mu2") else p[0] for p in pairs], dtype=float)
    nu2 = np.array([p.nu2 if hasattr(p, "nu2") else p[1] for p in pairs], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mu2 > 0, nu2 / mu2, np.nan)
    lo, hi = c1 + epsilon, c2 - epsilon
    inside = (mu2 > 0) & (ratio >= lo) & (ratio <= hi)
    if lo >= hi or inside.sum() < min_pairs:
        raise InsufficientPairs(f"{int(inside.sum())} pairs in the cone, need {min_pairs}")
    pts = np.sqrt(np.column_stack([mu2[inside], np.maximum(nu2[inside], 0.0)]))
    from scipy.spatial import cKDTree

    dist, _ = cKDTree(pts).query(pts, k=2)
    h_min = float(np.min(dist[:, 1]))
    rad = np.hypot(pts[:, 0], pts[:, 1])
    radii = np.linspace(rad.max() / n_radii, rad.max(), n_radii)
    dens = np.array([np.sum(rad <= r) / r**2 for r in radii])
    # linear bounds ν² ≷ C µ² + D through envelope fits
    order = np.argsort(mu2)
    bins = np.array_split(order, max(2, min(20, len(order) // 5)))
    cen = np.array([mu2[b].mean() for b in bins])
    low = np.array([nu2[b].min() for b in bins])
    up = np.array([nu2[b].max() for b in bins])
    C1 = float(np.polyfit(cen, low, 1)[0])
    C2 = float(np.polyfit(cen, up, 1)[0])
    D1 = float(np.min(nu2 - C1 * mu2))
    D2 = float(np.max(nu2 - C2 * mu2))
    return ConeDensityReport(epsilon, c1, c2, pts, h_min, radii, dens, (C1, D1, C2, D2), ratio)
