"""Stäckel matrices, conformally Stäckel metrics and their gauge transformations.

Coordinates are x¹ ∈ [0, A] (radial) and x², x³ ∈ [0, 2π) (angular).
Row i of the Stäckel matrix depends on x^i only. Since the determinant and
the first-column cofactors are linear in each row, their partial derivatives
are obtained exactly by replacing a row with its derivative.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (NonPositiveCoefficient, NonPositiveReparam, NonSmoothEntry,
                     SingularGauge, ConfigError)
from .univariate import MonotoneMap, UnivariateFn

TWO_PI = 2.0 * np.pi


def _cof_det(S: np.ndarray):
    """First-column cofactors s^{11}, s^{21}, s^{31} and det of S[..., 3, 3]."""
    c11 = S[..., 1, 1] * S[..., 2, 2] - S[..., 1, 2] * S[..., 2, 1]
    c21 = S[..., 0, 2] * S[..., 2, 1] - S[..., 0, 1] * S[..., 2, 2]
    c31 = S[..., 0, 1] * S[..., 1, 2] - S[..., 0, 2] * S[..., 1, 1]
    det = S[..., 0, 0] * c11 + S[..., 1, 0] * c21 + S[..., 2, 0] * c31
    return np.stack([c11, c21, c31]), det


@dataclass(frozen=True)
class StackelMatrix:
    """3×3 matrix of univariate entries; ``rows[i][j]`` is s_{i+1, j+1}(x^{i+1})."""

    rows: tuple
    A: float = 1.0

    def __post_init__(self):
        rows = tuple(tuple(UnivariateFn._lift(e) for e in r) for r in self.rows)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("a Stäckel matrix needs three rows of three entries")
        rows = (rows[0],) + tuple(tuple(e.with_periodic(True) for e in r) for r in rows[1:])
        object.__setattr__(self, "rows", rows)
        if not self.A > 0:
            raise ValueError("radial length A must be positive")

    def entry(self, i: int, j: int) -> UnivariateFn:
        return self.rows[i][j]

    def eval(self, x1, x2, x3, deriv: Sequence[int] = (0, 0, 0)) -> np.ndarray:
        xs = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, x3)))
        out = np.empty(xs[0].shape + (3, 3))
        for i in range(3):
            for j in range(3):
                out[..., i, j] = self.rows[i][j].d(xs[i], deriv[i])
        return out

    def cofactors(self, x1, x2, x3):
        """(s^{11}, s^{21}, s^{31}) stacked on axis 0, and det S."""
        return _cof_det(self.eval(x1, x2, x3))

    def with_rows(self, rows=None, A=None) -> "StackelMatrix":
        return StackelMatrix(self.rows if rows is None else rows, self.A if A is None else A)

    def describe(self) -> str:
        return "|".join(",".join(e.label for e in r) for r in self.rows) + f"|A={self.A!r}"


@dataclass
class LogVolumeJet:
    """Cofactors, det and first/second partials of log ρ, ρ = det S/(s^{11}s^{21}s^{31})."""

    cof: np.ndarray
    det: np.ndarray
    dlog: np.ndarray   # ∂_i log ρ, shape (3, ...)
    d2log: np.ndarray  # ∂_ii log ρ


def log_volume_jet(S: StackelMatrix, x1, x2, x3) -> LogVolumeJet:
    cof, det = S.cofactors(x1, x2, x3)
    dlog = np.empty((3,) + det.shape)
    d2log = np.empty_like(dlog)
    for i in range(3):
        d1 = [0, 0, 0]
        d1[i] = 1
        c1, det1 = _cof_det(S.eval(x1, x2, x3, d1))
        d1[i] = 2
        c2, det2 = _cof_det(S.eval(x1, x2, x3, d1))
        g = det1 / det
        gg = det2 / det - g**2
        for j in range(3):
            if j == i:
                continue  # ∂_i s^{i1} = 0
            r = c1[j] / cof[j]
            g = g - r
            gg = gg - (c2[j] / cof[j] - r**2)
        dlog[i] = g
        d2log[i] = gg
    return LogVolumeJet(cof, det, dlog, d2log)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------
@dataclass
class CheckItem:
    name: str
    passed: bool
    margin: float


@dataclass
class ValidationReport:
    items: list = field(default_factory=list)
    cofactor_min: tuple = ()
    c1: float = np.nan
    c2: float = np.nan

    @property
    def valid(self) -> bool:
        return all(it.passed for it in self.items)

    def failures(self):
        return [it.name for it in self.items if not it.passed]

    def item(self, name) -> CheckItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    def __str__(self):
        lines = [f"{'PASS' if it.passed else 'FAIL'}  {it.name:<16s} margin={it.margin:.6g}"
                 for it in self.items]
        return "\n".join(lines)


_SIGNS = {(0, 1): 1, (0, 2): 1, (1, 1): -1, (1, 2): 1, (2, 1): 1, (2, 2): -1}


def validate_stackel(S: StackelMatrix, samples: int = 16) -> ValidationReport:
    """Check non-singularity, the sign normalisation, the cone and periodicity."""
    t1 = np.linspace(0.0, S.A, samples)
    ta = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    per_axis = (t1, ta, ta)
    vals = {}
    for i in range(3):
        for j in range(3):
            e = S.rows[i][j]
            try:
                v = [e.d(per_axis[i], k) for k in range(3)]
            except Exception as exc:  # evaluator blew up
                raise NonSmoothEntry(f"entry s{i + 1}{j + 1}: {exc}") from exc
            if not all(np.all(np.isfinite(a)) for a in v):
                raise NonSmoothEntry(f"entry s{i + 1}{j + 1} is not finite on the sample grid")
            vals[i, j] = v[0]

    rep = ValidationReport()
    for (i, j), sgn in _SIGNS.items():
        m = float(np.min(sgn * vals[i, j]))
        rep.items.append(CheckItem(f"sign s{i + 1}{j + 1}", m > 0, m))

    X1, X2, X3 = np.meshgrid(t1, ta, ta, indexing="ij")
    cof, det = S.cofactors(X1, X2, X3)
    for k, nm in enumerate(("s^11", "s^21", "s^31")):
        m = float(np.min(cof[k]))
        rep.items.append(CheckItem(f"cofactor {nm}", m > 0, m))
    rep.cofactor_min = tuple(float(np.min(c)) for c in cof)
    rep.items.append(CheckItem("det nonzero", bool(np.min(np.abs(det)) > 1e-13),
                               float(np.min(np.abs(det)))))
    rep.items.append(CheckItem("det positive", bool(np.min(det) > 0), float(np.min(det))))

    with np.errstate(divide="ignore", invalid="ignore"):
        c1 = float(np.max(-vals[2, 1] / vals[2, 2]))
        c2 = float(np.min(-vals[1, 1] / vals[1, 2]))
    rep.c1, rep.c2 = c1, c2
    gap = c2 - c1 if np.isfinite(c2 - c1) else -np.inf
    rep.items.append(CheckItem("cone c1<c2", gap > 0, gap))

    worst = 0.0
    for i in (1, 2):
        for j in range(3):
            e = S.rows[i][j]
            for k in range(3):
                a, b = e.d(np.array([0.0]), k), e.d(np.array([TWO_PI]), k)
                worst = max(worst, float(np.abs(a - b)[0]) / (1.0 + float(np.abs(a)[0])))
    rep.items.append(CheckItem("periodicity", worst < 1e-6, -worst))
    return rep


# ---------------------------------------------------------------------------
# conformal factors
# ---------------------------------------------------------------------------
class ConstantConformal:
    """c ≡ value."""

    def __init__(self, value: float = 1.0):
        if not value > 0:
            raise NonPositiveCoefficient("conformal factor must be positive")
        self.value = float(value)

    def __call__(self, x1, x2, x3):
        shape = np.broadcast_shapes(np.shape(x1), np.shape(x2), np.shape(x3))
        return np.full(shape, self.value)

    def grad_log(self, x1, x2, x3):
        shape = np.broadcast_shapes(np.shape(x1), np.shape(x2), np.shape(x3))
        return np.zeros((3,) + shape)

    def describe(self):
        return f"const:{self.value!r}"


class AnalyticConformal:
    """c given by a vectorised callable and its gradient."""

    def __init__(self, fn, grad, label="analytic"):
        self.fn = fn
        self.grad = grad
        self.label = label

    def __call__(self, x1, x2, x3):
        return np.asarray(self.fn(x1, x2, x3), dtype=float)

    def grad_log(self, x1, x2, x3):
        c = self(x1, x2, x3)
        return np.asarray(self.grad(x1, x2, x3), dtype=float) / c

    def describe(self):
        return self.label


def as_conformal(c):
    if c is None:
        return ConstantConformal(1.0)
    if isinstance(c, (int, float)):
        return ConstantConformal(float(c))
    return c


@dataclass
class MetricEval:
    point: tuple
    h_sq: np.ndarray
    H_sq: np.ndarray
    cofactors: np.ndarray
    detS: np.ndarray
    gamma: np.ndarray
    Gamma: np.ndarray
    r_factor: np.ndarray
    c: np.ndarray


def metric_eval(S: StackelMatrix, c_field=None, phi=None, x=(0.0, 0.0, 0.0)) -> MetricEval:
    """Evaluate h_i², H_i², γ_i, Γ_i and R at a point (or broadcast arrays).

    ``phi`` is accepted for signature symmetry with the conformal equation;
    the quantities returned here do not depend on it.
    """
    c_field = as_conformal(c_field)
    x1, x2, x3 = (np.asarray(v, dtype=float) for v in x)
    jet = log_volume_jet(S, x1, x2, x3)
    if np.any(jet.cof <= 0) or np.any(jet.det <= 0):
        raise NonPositiveCoefficient(f"h_i^2 not positive at {x}")
    h_sq = jet.det[None] / jet.cof
    c = c_field(x1, x2, x3)
    if np.any(c <= 0):
        raise NonPositiveCoefficient("conformal factor not positive")
    gamma = -0.5 * jet.dlog
    Gamma = gamma - 2.0 * c_field.grad_log(x1, x2, x3)
    R = (jet.cof[0] * jet.cof[1] * jet.cof[2] / (c**4 * jet.det)) ** 0.25
    return MetricEval(point=tuple(x), h_sq=h_sq, H_sq=c[None] ** 4 * h_sq, cofactors=jet.cof,
                      detS=jet.det, gamma=gamma, Gamma=Gamma, r_factor=R, c=c)


# ---------------------------------------------------------------------------
# gauges
# ---------------------------------------------------------------------------
def column_gauge(S: StackelMatrix, G2) -> StackelMatrix:
    """Return Ŝ with (ŝ_{i2}, ŝ_{i3}) G2 = (s_{i2}, s_{i3})."""
    G2 = np.asarray(G2, dtype=float)
    det = float(np.linalg.det(G2))
    if abs(det) < 1e-14:
        raise SingularGauge(f"|det G2| = {abs(det):.3e}")
    Ginv = np.linalg.inv(G2)
    rows = []
    for r in S.rows:
        a, b = r[1], r[2]
        rows.append((r[0], _lin(a, b, Ginv[0, 0], Ginv[1, 0]), _lin(a, b, Ginv[0, 1], Ginv[1, 1])))
    return S.with_rows(tuple(rows))


def _lin(a: UnivariateFn, b: UnivariateFn, p: float, q: float) -> UnivariateFn:
    if q == 0.0:
        return a if p == 1.0 else a * p
    if p == 0.0:
        return b if q == 1.0 else b * q
    return a * p + b * q


def first_column_shift(S: StackelMatrix, C1: float, C2: float) -> StackelMatrix:
    rows = tuple((r[0] + r[1] * C1 + r[2] * C2 if (C1 or C2) else r[0], r[1], r[2])
                 for r in S.rows)
    return S.with_rows(rows)


def normalizing_gauge(S: StackelMatrix, samples: int = 16):
    """Find a signed permutation G2 making the sign conditions hold.

    Returns (Ŝ, G2); raises ValueError when none of the eight candidates works.
    """
    cands = []
    for P in (np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]])):
        for s2 in (1.0, -1.0):
            for s3 in (1.0, -1.0):
                cands.append(P @ np.diag([s2, s3]))
    for G in cands:
        Sh = column_gauge(S, G)
        if validate_stackel(Sh, samples).valid:
            return Sh, G
    raise ValueError("no signed column permutation normalises this matrix")


# ---------------------------------------------------------------------------
# reparametrisation
# ---------------------------------------------------------------------------
def transformed_potential(phi: UnivariateFn, f: UnivariateFn) -> UnivariateFn:
    """φ/f − L̇²/16 − L̈/4 with L = log f and dots derivatives in y = ∫√f, as a function of x."""

    def val(x):
        fx, f1, f2 = f.jet(x)
        return phi(x) / fx - f2 / (4 * fx**2) + 5.0 * f1**2 / (16 * fx**3)

    return UnivariateFn(val, periodic=phi.periodic, label=f"bar({phi.label};{f.label})")


@dataclass
class ReparamResult:
    S: StackelMatrix
    phi: tuple
    maps: tuple  # MonotoneMap or None per coordinate


def reparam(S: StackelMatrix, phi, f, samples: int = 64) -> ReparamResult:
    """Change variables y^i = ∫√f_i; s̄_ij = s_ij/f_i, φ̄_i transformed accordingly.

    ``f`` holds three UnivariateFn or None (identity). Angular maps must keep
    the period 2π.
    """
    phi = tuple(UnivariateFn._lift(p) for p in phi)
    new_rows, new_phi, maps = [], [], []
    new_A = S.A
    for i in range(3):
        fi = f[i]
        if fi is None or (isinstance(fi, UnivariateFn) and fi.is_constant and fi.const == 1.0):
            new_rows.append(S.rows[i])
            new_phi.append(phi[i])
            maps.append(None)
            continue
        fi = UnivariateFn._lift(fi)
        L = S.A if i == 0 else TWO_PI
        t = np.linspace(0.0, L, samples)
        if np.min(fi(t)) <= 0:
            raise NonPositiveReparam(f"f_{i + 1} not positive")
        if fi.is_constant:
            k = fi.const
            scale = np.sqrt(k)
            if i > 0 and abs(scale - 1.0) > 1e-12:
                raise ConfigError("angular reparametrisation must preserve the period 2π", field=f"f{i + 1}")
            row = tuple(_scaled_arg(e, 1.0 / scale) * (1.0 / k) for e in S.rows[i])
            new_rows.append(row)
            new_phi.append(_scaled_arg(phi[i], 1.0 / scale) * (1.0 / k))
            maps.append(("scale", scale))
            if i == 0:
                new_A = S.A * scale
            continue
        mp = MonotoneMap(fi, L)
        if i > 0 and abs(mp.total - TWO_PI) > 1e-10:
            raise ConfigError("angular reparametrisation must preserve the period 2π", field=f"f{i + 1}")
        row = tuple(mp.compose(e / fi) for e in S.rows[i])
        new_rows.append(row)
        new_phi.append(mp.compose(transformed_potential(phi[i], fi)))
        maps.append(mp)
        if i == 0:
            new_A = mp.total
    return ReparamResult(StackelMatrix(tuple(new_rows), new_A), tuple(new_phi), tuple(maps))


def _scaled_arg(g: UnivariateFn, a: float) -> UnivariateFn:
    """x ↦ g(a x)."""
    if g.is_constant or a == 1.0:
        return g
    return UnivariateFn(lambda x: g(a * np.asarray(x)), lambda x: a * g.d(a * np.asarray(x)),
                        lambda x: a * a * g.d(a * np.asarray(x), 2), periodic=g.periodic,
                        label=f"{g.label}({a!r}x)")


@dataclass
class RadialNormalForm:
    """Radial row in the coordinate u¹ = ∫√s12 where s̄12 ≡ 1."""

    A: float
    Abar: float
    s12: UnivariateFn
    s13: UnivariateFn
    phi1: UnivariateFn
    s13bar: UnivariateFn
    phi1bar: UnivariateFn
    umap: Optional[MonotoneMap]

    def u_of_x(self, x):
        if self.umap is None:
            return np.asarray(x, dtype=float) * (self.Abar / self.A)
        return self.umap.y(x)

    def x_of_u(self, u):
        if self.umap is None:
            return np.asarray(u, dtype=float) * (self.A / self.Abar)
        return self.umap.x(u)


def radial_normal_form(S: StackelMatrix, phi1) -> RadialNormalForm:
    s12, s13 = S.rows[0][1], S.rows[0][2]
    phi1 = UnivariateFn._lift(phi1)
    if np.min(s12(np.linspace(0, S.A, 64))) <= 0:
        raise NonPositiveCoefficient("s12 must be positive on [0, A]")
    res = reparam(S, (phi1, 0.0, 0.0), (s12, None, None))
    row = res.S.rows[0]
    mp = res.maps[0]
    return RadialNormalForm(A=S.A, Abar=res.S.A, s12=s12, s13=s13, phi1=phi1,
                            s13bar=row[2], phi1bar=res.phi[0],
                            umap=mp if isinstance(mp, MonotoneMap) else None)


# ---------------------------------------------------------------------------
# conformally Stäckel metric
# ---------------------------------------------------------------------------
class ConformallyStackelMetric:
    """G = c⁴ g_S together with the potentials φ_i of the separated equations."""

    def __init__(self, S: StackelMatrix, phi=(0.0, 0.0, 0.0), c=None, name: str = ""):
        self.S = S
        self.phi = tuple(UnivariateFn._lift(p) for p in phi)
        self.phi = (self.phi[0],) + tuple(p.with_periodic(True) for p in self.phi[1:])
        self.c = as_conformal(c)
        self.name = name

    @property
    def A(self):
        return self.S.A

    def eval(self, x1, x2, x3) -> MetricEval:
        return metric_eval(self.S, self.c, self.phi, (x1, x2, x3))

    def angular_grid(self, N2: int, N3: int):
        return np.arange(N2) * (TWO_PI / N2), np.arange(N3) * (TWO_PI / N3)

    def boundary_prefactors(self, N2: int, N3: int) -> dict:
        """R, H1, Γ1 on both boundary tori and the s^{11} weight on the angular grid."""
        t2, t3 = self.angular_grid(N2, N3)
        X2, X3 = np.meshgrid(t2, t3, indexing="ij")
        out = {"x2": t2, "x3": t3}
        for tag, x1 in (("0", 0.0), ("A", self.A)):
            me = self.eval(np.full_like(X2, x1), X2, X3)
            out["R" + tag] = me.r_factor
            out["H1" + tag] = np.sqrt(me.H_sq[0])
            out["Gamma1" + tag] = me.Gamma[0]
            out["area" + tag] = np.sqrt(me.H_sq[1] * me.H_sq[2])
        out["weight"] = self.S.cofactors(0.0, X2, X3)[0][0]
        return out

    def fingerprint(self) -> str:
        txt = self.S.describe() + "|" + ",".join(p.label for p in self.phi) + "|" + \
            getattr(self.c, "describe", lambda: "c")()
        return hashlib.sha256(txt.encode()).hexdigest()[:16]


def robertson_potentials(S: StackelMatrix, ref=(0.0, 0.0, 0.0)):
    """Potentials φ_i = −∂_ii(ρ^{1/4})/ρ^{1/4} making c ≡ 1 a solution of the conformal equation.

    Valid when log ρ is additively separable; the returned ``defect`` is the
    largest mixed partial |∂_i∂_j log ρ| estimated on a sample grid and should
    be at round-off level.
    """
    phis = []
    for i in range(3):
        def val(t, i=i):
            t = np.asarray(t, dtype=float)
            xs = [np.full_like(t, ref[k]) for k in range(3)]
            xs[i] = t
            jet = log_volume_jet(S, *xs)
            return -(0.25 * jet.d2log[i] + jet.dlog[i] ** 2 / 16.0)

        phis.append(UnivariateFn(val, periodic=i > 0, label=f"robertson{i + 1}"))
    return tuple(phis), separability_defect(S)


def separability_defect(S: StackelMatrix, samples: int = 7) -> float:
    """max |∂_j (∂_i log ρ)|, i ≠ j, by centred differences."""
    t1 = np.linspace(0.1 * S.A, 0.9 * S.A, samples)
    ta = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    X = np.meshgrid(t1, ta, ta, indexing="ij")
    h = 1e-4
    worst = 0.0
    for j in range(3):
        Xp = [x.copy() for x in X]
        Xm = [x.copy() for x in X]
        Xp[j] += h
        Xm[j] -= h
        gp = log_volume_jet(S, *Xp).dlog
        gm = log_volume_jet(S, *Xm).dlog
        for i in range(3):
            if i != j:
                worst = max(worst, float(np.max(np.abs(gp[i] - gm[i]) / (2 * h))))
    return worst
