"""Radial ODE: fundamental systems, characteristic and Weyl–Titchmarsh functions.

The radial separated equation is

    −u'' + (µ² s12 + ν² s13 − φ₁) u = 0   on [0, A].

All quantities are obtained from the forward transfer matrix
P = [[c0, s0], [c0', s0']](A), so that

    Δ = s0(A),  D = c0(A),  E = −s0'(A),  M = −D/Δ,  N = E/Δ,

which avoids the cancellation of endpoint Wronskians of large solutions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import IntegratorOverflow, PoleAtDirichletEigenvalue
from .geometry import RadialNormalForm, StackelMatrix, radial_normal_form
from .integrators import chain_product, prefix_states, stage_nodes, step_matrices
from .univariate import UnivariateFn

STEP_FACTOR = 0.05
MIN_STEPS = 256
OVERFLOW_LOG = np.log(1e280)
POLE_REL = 1e-8


class RadialRow:
    """Q(x) = p₁ a₁(x) + p₂ a₂(x) + a₀(x) on [0, length]; radial row has a = (s12, s13), a₀ = −φ₁."""

    def __init__(self, a1, a2, a0, length: float, name: str = "",
                 step_factor: float = STEP_FACTOR, min_steps: int = MIN_STEPS):
        self.step_factor = step_factor
        self.min_steps = min_steps
        self.a1 = UnivariateFn._lift(a1)
        self.a2 = UnivariateFn._lift(a2)
        self.a0 = UnivariateFn._lift(a0)
        self.length = float(length)
        self.name = name
        t = np.linspace(0.0, self.length, 257)
        self._bounds = tuple(float(np.max(np.abs(f(t)))) for f in (self.a1, self.a2, self.a0))
        self._cache = {}

    @classmethod
    def from_stackel(cls, S: StackelMatrix, phi1) -> "RadialRow":
        phi1 = UnivariateFn._lift(phi1)
        return cls(S.rows[0][1], S.rows[0][2], -phi1, S.A)

    @classmethod
    def normal_form(cls, nf: RadialNormalForm) -> "RadialRow":
        return cls(1.0, nf.s13bar, -nf.phi1bar, nf.Abar)

    def nsteps(self, mu2, nu2) -> int:
        b1, b2, b0 = self._bounds
        k = np.sqrt(abs(mu2) * b1 + abs(nu2) * b2 + b0)
        n = int(np.ceil(self.length * (1.0 + k) / self.step_factor))
        n = max(n, self.min_steps)
        # bucket to a fixed ladder so that batching never changes results
        return _ladder(n)

    def stage_values(self, n: int):
        if n not in self._cache:
            xs, h = stage_nodes(self.length, n)
            self._cache[n] = (self.a1(xs), self.a2(xs), self.a0(xs), h)
        return self._cache[n]

    def transfer(self, mu2, nu2):
        """Forward transfer data for arrays of pairs: (mantissa[...,2,2], logscale, logdet)."""
        mu2 = np.atleast_1d(np.asarray(mu2, dtype=complex))
        nu2 = np.atleast_1d(np.asarray(nu2, dtype=complex))
        mu2, nu2 = np.broadcast_arrays(mu2, nu2)
        shape = mu2.shape
        mu2, nu2 = mu2.ravel(), nu2.ravel()
        P = np.empty((mu2.size, 2, 2), dtype=complex)
        ls = np.empty(mu2.size)
        ld = np.empty(mu2.size, dtype=complex)
        steps = np.array([self.nsteps(a, b) for a, b in zip(mu2, nu2)], dtype=int)
        for n in np.unique(steps):
            idx = np.nonzero(steps == n)[0]
            a1, a2, a0, h = self.stage_values(int(n))
            chunk = max(1, int(4e5 // (3 * n)))
            for s in range(0, idx.size, chunk):
                sl = idx[s:s + chunk]
                Q = mu2[sl, None, None] * a1 + nu2[sl, None, None] * a2 + a0
                m, l, d = chain_product(step_matrices(Q, h))
                P[sl], ls[sl], ld[sl] = m, l, d
        return P.reshape(shape + (2, 2)), ls.reshape(shape), ld.reshape(shape)

    def trajectories(self, mu2, nu2, n: Optional[int] = None):
        """Grid x and values of (c0, c0', s0, s0') for a single pair."""
        n = n or self.nsteps(mu2, nu2)
        a1, a2, a0, h = self.stage_values(n)
        Q = complex(mu2) * a1 + complex(nu2) * a2 + a0
        P = step_matrices(Q, h)
        yc = prefix_states(P, np.array([1.0, 0.0], dtype=complex))
        ys = prefix_states(P, np.array([0.0, 1.0], dtype=complex))
        x = np.linspace(0.0, self.length, n + 1)
        return x, yc, ys


SeparatedRow = RadialRow


def _ladder(n: int) -> int:
    """Round up to the next value of the form m·2^e with m ∈ {8..15}."""
    e = max(0, int(np.floor(np.log2(n))) - 3)
    m = -(-n // (1 << e))
    return m << e


@dataclass
class FssData:
    """Fundamental systems at a spectral pair.

    Endpoint values are stored as mantissas multiplied by exp(log_scale).
    ``P`` is the forward transfer matrix [[c0, s0], [c0', s0']](A).
    """

    mu2: complex
    nu2: complex
    length: float
    P: np.ndarray
    log_scale: float
    log_wronskian: complex

    @property
    def scaled(self) -> bool:
        return self.log_scale > OVERFLOW_LOG

    def _v(self, z):
        return z * np.exp(self.log_scale)

    # forward solutions at A
    @property
    def c0_A(self):
        return self._v(self.P[0, 0])

    @property
    def dc0_A(self):
        return self._v(self.P[1, 0])

    @property
    def s0_A(self):
        return self._v(self.P[0, 1])

    @property
    def ds0_A(self):
        return self._v(self.P[1, 1])

    # backward solutions at 0 (inverse transfer matrix, unit determinant)
    @property
    def c1_0(self):
        return self._v(self.P[1, 1])

    @property
    def dc1_0(self):
        return -self._v(self.P[1, 0])

    @property
    def s1_0(self):
        return -self._v(self.P[0, 1])

    @property
    def ds1_0(self):
        return self._v(self.P[0, 0])

    @property
    def wronskian0(self) -> complex:
        """W(c0, s0), accumulated as the product of step determinants."""
        return complex(np.exp(self.log_wronskian))

    @property
    def wronskian1(self) -> complex:
        """W(c1, s1) for the backward system obtained by inverting the same flow."""
        return complex(np.exp(-self.log_wronskian))

    def wronskian_direct(self) -> complex:
        """c0 s0' − c0' s0 at A from endpoint values (subject to cancellation)."""
        P = self.P
        return complex((P[0, 0] * P[1, 1] - P[1, 0] * P[0, 1]) * np.exp(2 * self.log_scale))


def fss(row: RadialRow, mu2, nu2, allow_scaled: bool = True) -> FssData:
    P, ls, ld = row.transfer(mu2, nu2)
    data = FssData(complex(mu2), complex(nu2), row.length, P[0], float(ls[0]), complex(ld[0]))
    if data.scaled and not allow_scaled:
        raise IntegratorOverflow(f"solutions exceed 1e280 at (µ², ν²) = ({mu2}, {nu2})")
    return data


def fss_batch(row: RadialRow, mu2, nu2):
    P, ls, ld = row.transfer(mu2, nu2)
    mu2, nu2 = np.broadcast_arrays(np.atleast_1d(mu2), np.atleast_1d(nu2))
    return [FssData(complex(a), complex(b), row.length, P.reshape(-1, 2, 2)[i],
                    float(ls.ravel()[i]), complex(ld.ravel()[i]))
            for i, (a, b) in enumerate(zip(mu2.ravel(), nu2.ravel()))]


@dataclass
class WTData:
    """Characteristic and Weyl–Titchmarsh data; Δ, D, E scaled by exp(log_scale)."""

    mu2: complex
    nu2: complex
    Delta_m: complex
    D_m: complex
    E_m: complex
    log_scale: float
    M: complex
    N: complex
    is_pole: bool
    dc0_m: complex = 0j

    @property
    def Delta(self):
        return self.Delta_m * np.exp(self.log_scale)

    @property
    def D(self):
        return self.D_m * np.exp(self.log_scale)

    @property
    def E(self):
        return self.E_m * np.exp(self.log_scale)

    @property
    def inv_Delta(self):
        return np.exp(-self.log_scale) / self.Delta_m

    def weyl_solutions(self, row: RadialRow):
        """Ψ = c0 + M s0 and Φ = c1 − N s1 on the step grid; Ψ(A) = 0 and Φ(0) = 0.

        Uses Φ = Φ'(0) s0 with Φ'(0) = c1'(0) − N s1'(0) = −c0'(A) − N D.
        Only meaningful for unscaled data.
        """
        x, yc, ys = row.trajectories(self.mu2, self.nu2)
        psi = yc + self.M * ys
        phi = (-self.dc0_m * np.exp(self.log_scale) - self.N * self.D) * ys
        return x, psi, phi


def wt(data: FssData, raise_on_pole: bool = False) -> WTData:
    P = data.P
    Delta_m, D_m, E_m = P[0, 1], P[0, 0], -P[1, 1]
    thresh = POLE_REL * (np.exp(-data.log_scale) + abs(D_m) + abs(E_m))
    pole = bool(abs(Delta_m) < thresh)
    if pole:
        if raise_on_pole:
            raise PoleAtDirichletEigenvalue(f"Δ ≈ 0 at (µ², ν²) = ({data.mu2}, {data.nu2})")
        M = N = complex("nan")
    else:
        M = complex(-D_m / Delta_m)
        N = complex(E_m / Delta_m)
    return WTData(data.mu2, data.nu2, complex(Delta_m), complex(D_m), complex(E_m),
                  data.log_scale, M, N, pole, complex(P[1, 0]))


def wt_batch(row: RadialRow, mu2, nu2):
    return [wt(d) for d in fss_batch(row, mu2, nu2)]


def bvp_derivative_map(w: WTData) -> np.ndarray:
    """Matrix taking (u(0), u(A)) to (u'(0), u'(A)) for the radial solution."""
    if w.is_pole:
        raise PoleAtDirichletEigenvalue(f"Δ ≈ 0 at (µ², ν²) = ({w.mu2}, {w.nu2})")
    inv = w.inv_Delta
    return np.array([[w.M, inv], [-inv, -w.N]], dtype=complex)
