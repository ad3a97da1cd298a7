"""Gauss–Legendre propagators for y'' = Q(x) y.

The three-stage Gauss–Legendre Runge–Kutta method (order 6) preserves
quadratic invariants, so the one-step maps of the first-order system
y' = [[0, 1], [Q, 0]] y have unit determinant up to round-off. Products of
step maps are formed by a pairwise tree with per-level renormalisation, which
keeps exponentially growing solutions representable as (mantissa, log-scale).
"""
from __future__ import annotations

import numpy as np

_S15 = np.sqrt(15.0)
GL_C = np.array([0.5 - _S15 / 10, 0.5, 0.5 + _S15 / 10])
GL_A = np.array([
    [5 / 36, 2 / 9 - _S15 / 15, 5 / 36 - _S15 / 30],
    [5 / 36 + _S15 / 24, 2 / 9, 5 / 36 - _S15 / 24],
    [5 / 36 + _S15 / 30, 2 / 9 + _S15 / 15, 5 / 36],
])
GL_B = np.array([5 / 18, 4 / 9, 5 / 18])
_A2 = GL_A @ GL_A
_BA = GL_B @ GL_A


def stage_nodes(length: float, nsteps: int, start: float = 0.0):
    """Stage abscissae, shape (nsteps, 3), and the step size."""
    h = length / nsteps
    left = start + h * np.arange(nsteps)
    return left[:, None] + h * GL_C[None, :], h


def step_matrices(Q: np.ndarray, h: float) -> np.ndarray:
    """One-step maps for stage values Q[..., n, 3] and step h; returns [..., n, 2, 2].

    Eliminating the first components of the stage slopes reduces the 6×6
    stage system to (I − h² diag(Q) A²) k = Q (y₁ + h c y₂), a 3×3 system
    solved here by the adjugate formula, elementwise over the batch.
    """
    Q = np.asarray(Q)
    h = float(h)
    q = [(h * h) * Q[..., s] for s in range(3)]
    m = [[(1.0 if s == t else 0.0) - q[s] * _A2[s, t] for t in range(3)] for s in range(3)]
    (a, b, c), (d, e, f), (g, k, l) = m
    adj = [[e * l - f * k, c * k - b * l, b * f - c * e],
           [f * g - d * l, a * l - c * g, c * d - a * f],
           [d * k - e * g, b * g - a * k, a * e - b * d]]
    det = a * adj[0][0] + b * adj[1][0] + c * adj[2][0]
    # u = bᵀ m⁻¹ and v = (bA)ᵀ m⁻¹ (up to 1/det), contracted with the right-hand sides
    u = [sum(GL_B[s] * adj[s][t] for s in range(3)) for t in range(3)]
    v = [sum(_BA[s] * adj[s][t] for s in range(3)) for t in range(3)]
    Qs = [Q[..., t] for t in range(3)]
    bK0 = sum(u[t] * Qs[t] for t in range(3)) / det
    bK1 = h * sum(u[t] * Qs[t] * GL_C[t] for t in range(3)) / det
    vK0 = sum(v[t] * Qs[t] for t in range(3)) / det
    vK1 = h * sum(v[t] * Qs[t] * GL_C[t] for t in range(3)) / det
    P = np.empty(Q.shape[:-1] + (2, 2), dtype=np.result_type(Q, float))
    P[..., 0, 0] = 1 + h * h * vK0
    P[..., 0, 1] = h + h * h * vK1
    P[..., 1, 0] = h * bK0
    P[..., 1, 1] = 1 + h * bK1
    return P


def chain_product(P: np.ndarray):
    """Ordered product P[..., n-1] ⋯ P[..., 0] as (mantissa, log-scale).

    Also returns Σ log det P_n, the Wronskian of the discrete flow.
    """
    P = np.asarray(P)
    det = P[..., 0, 0] * P[..., 1, 1] - P[..., 0, 1] * P[..., 1, 0]
    logdet = np.sum(np.log(det.astype(complex)), axis=-1)
    logscale = np.zeros(P.shape[:-3])
    cur = P
    lvl_scale = np.zeros(P.shape[:-2])
    while cur.shape[-3] > 1:
        n = cur.shape[-3]
        if n % 2:
            eye = np.broadcast_to(np.eye(2, dtype=cur.dtype), cur.shape[:-3] + (1, 2, 2))
            cur = np.concatenate([cur, eye], axis=-3)
            lvl_scale = np.concatenate([lvl_scale, np.zeros(lvl_scale.shape[:-1] + (1,))], axis=-1)
        prod = cur[..., 1::2, :, :] @ cur[..., 0::2, :, :]
        lvl_scale = lvl_scale[..., 1::2] + lvl_scale[..., 0::2]
        m = np.max(np.abs(prod), axis=(-2, -1))
        m = np.where(m > 0, m, 1.0)
        prod = prod / m[..., None, None]
        lvl_scale = lvl_scale + np.log(m)
        cur = prod
    logscale = lvl_scale[..., 0]
    return cur[..., 0, :, :], logscale, logdet


def prefix_states(P: np.ndarray, y0: np.ndarray) -> np.ndarray:
    """States y_n = P_{n-1}⋯P_0 y0 for n = 0..N; P[..., N, 2, 2], y0[..., 2]."""
    N = P.shape[-3]
    out = np.empty(P.shape[:-3] + (N + 1, 2), dtype=np.result_type(P, y0))
    y = np.asarray(y0, dtype=out.dtype)
    out[..., 0, :] = y
    for n in range(N):
        y = np.einsum("...ij,...j->...i", P[..., n, :, :], y)
        out[..., n + 1, :] = y
    return out
