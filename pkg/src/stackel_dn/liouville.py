"""Liouville normal forms of the radial equation, the ω-form, asymptotics and F.

Under y = ∫√f, U = f^{1/4} u, the equation −u'' + (λ f + Q) u = 0 becomes
−Ü + (λ + Q/f + L̈/4 + L̇²/16) U = 0 with L = log f and dots d/dy. For the
radial row with f = s12 this gives the potential q_ν = ν² s̄13 − φ̄₁, and
endpoint data transform as

    Δ = Δ_q / (f(0) f(A))^{1/4}
    D = (f(0)/f(A))^{1/4} D_q + ¼ f'(0) f(0)^{-5/4} f(A)^{-1/4} Δ_q
    M = −¼ (log f)'(0) + √f(0) M_q
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import RadialNormalForm, StackelMatrix, radial_normal_form
from .radial import RadialRow, WTData, fss, fss_batch, wt
from .univariate import MonotoneMap, UnivariateFn


@dataclass
class LinkResiduals:
    delta: float
    d: float
    m: float

    def max(self):
        return max(self.delta, self.d, self.m)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def link_prediction(f0, f0p, fA, wq: WTData):
    """(Δ, D, M) predicted from normal-form data by the link identities, scaled by wq.log_scale."""
    Delta = wq.Delta_m / (f0 * fA) ** 0.25
    D = (f0 / fA) ** 0.25 * wq.D_m + 0.25 * f0p * f0 ** -1.25 * fA ** -0.25 * wq.Delta_m
    M = -0.25 * f0p / f0 + np.sqrt(f0) * wq.M
    return Delta, D, M


def scaled_pair(w: WTData, ref: float):
    """(Δ, D) rescaled to exp(ref)."""
    s = np.exp(w.log_scale - ref)
    return w.Delta_m * s, w.D_m * s


def liouville_wt(nf: RadialNormalForm, mu2, nu2, row: RadialRow = None, nrow: RadialRow = None):
    """Normal-form data (Δ_q, D_q, M_q) and residuals of the three link identities."""
    row = row or RadialRow(nf.s12, nf.s13, -nf.phi1, nf.A)
    nrow = nrow or RadialRow.normal_form(nf)
    w = wt(fss(row, mu2, nu2))
    wq = wt(fss(nrow, mu2, nu2))
    f0, fA = float(nf.s12(0.0)), float(nf.s12(nf.A))
    f0p = float(nf.s12.d(0.0))
    Dl, DDl, Ml = link_prediction(f0, f0p, fA, wq)
    ref = w.log_scale
    sD, sDD = np.exp(wq.log_scale - ref), 1.0
    res = LinkResiduals(_rel(w.Delta_m, Dl * sD), _rel(w.D_m, DDl * sD),
                        _rel(w.M, Ml) if not (w.is_pole or wq.is_pole) else np.nan)
    return wq, w, res


# ---------------------------------------------------------------------------
# ω-form: µ = iy, ν = iy'
# ---------------------------------------------------------------------------
@dataclass
class OmegaForm:
    y: float
    yp: float
    omega: float
    r: UnivariateFn
    Cbar: float
    q: UnivariateFn
    row: RadialRow
    wq: WTData
    w: WTData
    residuals: LinkResiduals

    @property
    def Delta_q(self):
        return self.wq.Delta

    @property
    def D_q(self):
        return self.wq.D


def omega_potential(r: UnivariateFn, phi1: UnivariateFn) -> UnivariateFn:
    """q = −φ₁/r + L̇²/16 + L̈/4 in the variable w = ∫√r, returned as a function of x."""

    def val(x):
        f, f1, f2 = r.jet(x)
        return -phi1(x) / f + f2 / (4 * f**2) - 5.0 * f1**2 / (16 * f**3)

    return UnivariateFn(val, label="q_omega")


def omega_form(S: StackelMatrix, phi1, y: float, yp: float) -> OmegaForm:
    s12, s13 = S.rows[0][1], S.rows[0][2]
    phi1 = UnivariateFn._lift(phi1)
    om2 = y * y + yp * yp
    if om2 == 0:
        raise ValueError("(y, y') must be non-zero")
    omega = float(np.sqrt(om2))
    r = (s12 * (y * y) + s13 * (yp * yp)) / om2
    if r.is_constant and r.const == 1.0:
        mp = None
        Cbar = S.A
        q = -phi1
        qrow = RadialRow(1.0, 0.0, -phi1, S.A)
    else:
        mp = MonotoneMap(r, S.A)
        Cbar = mp.total
        q = omega_potential(r, phi1)
        qrow = RadialRow(1.0, 0.0, mp.compose(q), Cbar)
    # −Ẅ + q W = ω² W  ⇔  −Ẅ + (q − ω²) W = 0, i.e. p₁ = −ω²
    wq = wt(fss(qrow, -om2, 0.0))
    row = RadialRow.from_stackel(S, phi1)
    w = wt(fss(row, -y * y, -yp * yp))
    r0, rA, r0p = float(r(0.0)), float(r(S.A)), float(r.d(0.0))
    Dl, DDl, _ = link_prediction(r0, r0p, rA, wq)
    sc = np.exp(wq.log_scale - w.log_scale)
    res = LinkResiduals(abs(w.Delta_m - Dl * sc) / max(abs(w.Delta_m), abs(w.D_m), 1e-300),
                        abs(w.D_m - DDl * sc) / max(abs(w.D_m), abs(w.Delta_m), 1e-300), 0.0)
    return OmegaForm(y, yp, omega, r, Cbar, q, qrow, wq, w, res)


# ---------------------------------------------------------------------------
# asymptotic residuals
# ---------------------------------------------------------------------------
@dataclass
class AsymptoticTable:
    mu: np.ndarray
    nu: complex
    r_delta: np.ndarray
    r_d: np.ndarray

    def growth_exponents(self):
        """Envelope growth exponents of (r_Δ, r_D) in |µ|."""
        t = np.abs(self.mu)
        return fit_envelope_growth(t, self.r_delta), fit_envelope_growth(t, self.r_d)


def fit_envelope_growth(t, r, bins: int = 12) -> float:
    """Growth exponent of the upper envelope of r(t).

    Samples are split into log-spaced bins; the slope is fitted to the
    per-bin maxima, which ignores the oscillation of r between its peaks.
    """
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    if np.all(r == 0):
        return 0.0
    edges = np.geomspace(t.min(), t.max() * (1 + 1e-12), bins + 1)
    bt, br = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (t >= lo) & (t < hi)
        if np.any(sel):
            k = np.argmax(np.where(sel, r, -np.inf))
            bt.append(t[k])
            br.append(max(r[k], 1e-300))
    if len(bt) < 2:
        return 0.0
    return float(np.polyfit(np.log(bt), np.log(br), 1)[0])


def fit_growth(t, r) -> float:
    """Least-squares slope of log r against log t (0 for identically vanishing r)."""
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    if np.all(r == 0):
        return 0.0
    r = np.maximum(r, 1e-300)
    return float(np.polyfit(np.log(t), np.log(r), 1)[0])


def asymptotic_residuals(nf: RadialNormalForm, nu, mu, nrow: RadialRow = None) -> AsymptoticTable:
    """r_Δ = |Δ_q − sinh(Āµ)/µ|·|µ|² e^{−|Re µ|Ā}, r_D = |D_q − cosh(Āµ)|·|µ| e^{−|Re µ|Ā}.

    Evaluated in scaled form so that large |Re µ| never overflows.
    """
    nrow = nrow or RadialRow.normal_form(nf)
    mu = np.asarray(mu, dtype=complex)
    data = fss_batch(nrow, mu**2, np.full(mu.shape, complex(nu) ** 2))
    Ab = nf.Abar
    rD, rDD = np.empty(mu.size), np.empty(mu.size)
    for i, (m, d) in enumerate(zip(mu, data)):
        w = wt(d)
        a = abs(m.real) * Ab
        s = np.exp(w.log_scale - a)
        # e^{−a} sinh(Āµ) and e^{−a} cosh(Āµ) without overflow
        ep = np.exp(Ab * m - a)
        em = np.exp(-Ab * m - a)
        sh, ch = 0.5 * (ep - em), 0.5 * (ep + em)
        rD[i] = abs(w.Delta_m * s - sh / m) * abs(m) ** 2
        rDD[i] = abs(w.D_m * s - ch) * abs(m)
    return AsymptoticTable(mu, complex(nu), rD, rDD)


# ---------------------------------------------------------------------------
# the function F = D Δ̃ − D̃ Δ
# ---------------------------------------------------------------------------
@dataclass
class CamEvaluation:
    mu2: complex
    nu2: complex
    F_m: complex
    log_scale: float
    scale_m: float
    Abar: float = np.nan
    Bbar: float = np.nan

    @property
    def F(self):
        return self.F_m * np.exp(self.log_scale)

    @property
    def relative(self) -> float:
        """|F| / (|D||Δ̃| + |D̃||Δ|)."""
        return float(abs(self.F_m) / self.scale_m) if self.scale_m > 0 else 0.0


def cam_F(row1: RadialRow, row2: RadialRow, mu2, nu2):
    """F at arrays of pairs; returns a list of CamEvaluation."""
    d1 = fss_batch(row1, mu2, nu2)
    d2 = d1 if row2 is row1 else fss_batch(row2, mu2, nu2)
    out = []
    for a, b in zip(d1, d2):
        w1, w2 = wt(a), wt(b)
        F = w1.D_m * w2.Delta_m - w2.D_m * w1.Delta_m
        sc = abs(w1.D_m) * abs(w2.Delta_m) + abs(w2.D_m) * abs(w1.Delta_m)
        out.append(CamEvaluation(a.mu2, a.nu2, complex(F), a.log_scale + b.log_scale, float(sc)))
    return out


def envelope_constants(row: RadialRow):
    """Ā = ∫√a₁ and B̄ = ∫√a₂ for a radial row (the exponential types in µ and ν)."""
    x = np.linspace(0.0, row.length, 2001)
    return (float(np.trapezoid(np.sqrt(np.abs(row.a1(x))), x)),
            float(np.trapezoid(np.sqrt(np.abs(row.a2(x))), x)))
