"""Smooth functions of a single coordinate with up to two derivatives.

Stäckel entries, potentials and reparametrisation maps are all
``UnivariateFn`` instances. Each carries a value evaluator and optional
analytic first/second derivative evaluators; missing derivatives fall back
to centred finite differences.
"""
from __future__ import annotations

import re
from typing import Callable, Optional

import numpy as np

Evaluator = Callable[[np.ndarray], np.ndarray]

_FD_STEP = (1e-5, 1e-3)


def _as_array(fn: Evaluator, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(fn(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape).copy()
    return y


class UnivariateFn:
    """Real function f(x) with derivatives up to order two.

    Parameters
    ----------
    f, df, d2f : callables
        Vectorised evaluators. ``df``/``d2f`` may be omitted, in which case
        centred finite differences are used.
    periodic : bool
        Marks an angular entry (period 2π).
    label : str
        Human readable description, used in fixture hashes and reprs.
    """

    __slots__ = ("_f", "_df", "_d2f", "periodic", "label", "const")

    def __init__(self, f: Evaluator, df: Optional[Evaluator] = None,
                 d2f: Optional[Evaluator] = None, periodic: bool = False,
                 label: str = "<fn>", const: Optional[float] = None):
        self._f = f
        self._df = df
        self._d2f = d2f
        self.periodic = periodic
        self.label = label
        self.const = const

    # evaluation -----------------------------------------------------------
    def __call__(self, x) -> np.ndarray:
        return _as_array(self._f, x)

    def d(self, x, order: int = 1) -> np.ndarray:
        if order == 0:
            return self(x)
        if order == 1:
            if self._df is not None:
                return _as_array(self._df, x)
            h = _FD_STEP[0]
            x = np.asarray(x, dtype=float)
            return (self(x + h) - self(x - h)) / (2 * h)
        if order == 2:
            if self._d2f is not None:
                return _as_array(self._d2f, x)
            x = np.asarray(x, dtype=float)
            if self._df is not None:
                h = _FD_STEP[0]
                return (self.d(x + h) - self.d(x - h)) / (2 * h)
            h = _FD_STEP[1]
            return (self(x + h) - 2 * self(x) + self(x - h)) / h**2
        raise ValueError("only derivatives up to order 2 are available")

    def jet(self, x):
        """Return (f, f', f'') at x."""
        return self(x), self.d(x, 1), self.d(x, 2)

    @property
    def is_constant(self) -> bool:
        return self.const is not None

    def with_periodic(self, periodic: bool = True) -> "UnivariateFn":
        return UnivariateFn(self._f, self._df, self._d2f, periodic, self.label, self.const)

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, value: float, periodic: bool = False) -> "UnivariateFn":
        v = float(value)
        zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return cls(lambda x: np.full_like(np.asarray(x, dtype=float), v), zero, zero,
                   periodic=periodic, label=repr(v), const=v)

    @classmethod
    def from_expr(cls, expr: str, var: str = "x", periodic: bool = False) -> "UnivariateFn":
        return parse_expression(expr, var=var, periodic=periodic)

    @classmethod
    def from_samples(cls, x, y, periodic: bool = False) -> "UnivariateFn":
        """Cubic spline through samples; periodic splines need y[0] == y[-1]."""
        from scipy.interpolate import CubicSpline

        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if periodic:
            cs = CubicSpline(x, y, bc_type="periodic")
            period = x[-1] - x[0]
            wrap = lambda t: x[0] + np.mod(np.asarray(t, dtype=float) - x[0], period)
            return cls(lambda t: cs(wrap(t)), lambda t: cs(wrap(t), 1),
                       lambda t: cs(wrap(t), 2), periodic=True, label="spline")
        cs = CubicSpline(x, y)
        return cls(cs, lambda t: cs(t, 1), lambda t: cs(t, 2), label="spline")

    # algebra --------------------------------------------------------------
    @staticmethod
    def _lift(other) -> "UnivariateFn":
        if isinstance(other, UnivariateFn):
            return other
        return UnivariateFn.constant(float(other))

    def __add__(self, other):
        o = self._lift(other)
        if self.is_constant and o.is_constant:
            return UnivariateFn.constant(self.const + o.const, self.periodic or o.periodic)
        return UnivariateFn(lambda x: self(x) + o(x), lambda x: self.d(x) + o.d(x),
                            lambda x: self.d(x, 2) + o.d(x, 2),
                            periodic=self.periodic or o.periodic,
                            label=f"({self.label})+({o.label})")

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if self.is_constant and o.is_constant:
            return UnivariateFn.constant(self.const * o.const, self.periodic or o.periodic)
        if o.is_constant:
            k = o.const
            return UnivariateFn(lambda x: k * self(x), lambda x: k * self.d(x),
                                lambda x: k * self.d(x, 2), periodic=self.periodic,
                                label=f"{k!r}*({self.label})")
        if self.is_constant:
            return o * self

        def d1(x):
            return self.d(x) * o(x) + self(x) * o.d(x)

        def d2(x):
            return (self.d(x, 2) * o(x) + 2 * self.d(x) * o.d(x) + self(x) * o.d(x, 2))

        return UnivariateFn(lambda x: self(x) * o(x), d1, d2,
                            periodic=self.periodic or o.periodic,
                            label=f"({self.label})*({o.label})")

    __rmul__ = __mul__

    def reciprocal(self) -> "UnivariateFn":
        if self.is_constant:
            return UnivariateFn.constant(1.0 / self.const, self.periodic)

        def d1(x):
            f = self(x)
            return -self.d(x) / f**2

        def d2(x):
            f, f1, f2 = self.jet(x)
            return 2 * f1**2 / f**3 - f2 / f**2

        return UnivariateFn(lambda x: 1.0 / self(x), d1, d2, periodic=self.periodic,
                            label=f"1/({self.label})")

    def __truediv__(self, other):
        o = self._lift(other)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __repr__(self):
        return f"UnivariateFn({self.label})"


# ---------------------------------------------------------------------------
# expression grammar: literals, + - * / ^, parentheses, sin cos exp log, pi
# ---------------------------------------------------------------------------
_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z][A-Za-z0-9]*)|(\*\*|[-+*/^()]))")
_FUNCS = {"sin", "cos", "exp", "log"}


def _check_tokens(expr: str, var: str) -> None:
    pos = 0
    expr = expr.rstrip()
    while pos < len(expr):
        m = _TOKEN.match(expr, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"unexpected character at position {pos} in {expr!r}")
        name = m.group(2)
        if name is not None and name not in _FUNCS and name not in {var, "pi"}:
            raise ValueError(f"unknown identifier {name!r} in {expr!r}")
        pos = m.end()


def parse_expression(expr, var: str = "x", periodic: bool = False) -> UnivariateFn:
    """Parse a fixture expression into a UnivariateFn with exact derivatives."""
    import sympy

    if isinstance(expr, (int, float)):
        return UnivariateFn.constant(float(expr), periodic=periodic)
    expr = str(expr)
    _check_tokens(expr, var)
    sym = sympy.Symbol(var, real=True)
    ns = {var: sym, "pi": sympy.pi, "sin": sympy.sin, "cos": sympy.cos,
          "exp": sympy.exp, "log": sympy.log}
    parsed = sympy.sympify(expr.replace("^", "**"), locals=ns)
    if parsed.free_symbols - {sym}:
        raise ValueError(f"expression {expr!r} depends on other symbols")
    if not parsed.free_symbols:
        return UnivariateFn(lambda x: np.full_like(np.asarray(x, float), float(parsed)),
                            lambda x: np.zeros_like(np.asarray(x, float)),
                            lambda x: np.zeros_like(np.asarray(x, float)),
                            periodic=periodic, label=expr, const=float(parsed))
    d1 = sympy.diff(parsed, sym)
    d2 = sympy.diff(d1, sym)
    fns = [sympy.lambdify(sym, e, modules="numpy") for e in (parsed, d1, d2)]
    return UnivariateFn(fns[0], fns[1], fns[2], periodic=periodic, label=expr)


class MonotoneMap:
    """Increasing map y(x) = ∫_0^x √f on [0, L] with its inverse.

    The integrand is interpolated by a Chebyshev series whose degree is
    increased until the trailing coefficients are at round-off level.
    """

    def __init__(self, f: UnivariateFn, length: float, tol: float = 1e-15):
        from numpy.polynomial import Chebyshev

        self.f = f
        self.length = float(length)
        dom = [0.0, self.length]
        for deg in (32, 64, 128, 256, 512):
            cheb = Chebyshev.interpolate(lambda t: np.sqrt(f(t)), deg, domain=dom)
            tail = np.max(np.abs(cheb.coef[-4:]))
            if tail < tol * max(1.0, np.max(np.abs(cheb.coef))):
                break
        self._sqrt_f = cheb
        self._y = cheb.integ(lbnd=0.0)
        self.total = float(self._y(self.length))

    def y(self, x) -> np.ndarray:
        return self._y(np.asarray(x, dtype=float))

    def x(self, y) -> np.ndarray:
        """Inverse map by safeguarded Newton iteration."""
        y = np.asarray(y, dtype=float)
        x = np.clip(y / self.total * self.length, 0.0, self.length)
        for _ in range(60):
            step = (self._y(x) - y) / self._sqrt_f(x)
            x = x - step
            if np.all(np.abs(step) < 1e-15 * (1 + self.length)):
                break
        return x

    def dx_dy(self, y):
        x = self.x(y)
        return 1.0 / np.sqrt(self.f(x))

    def compose(self, g: UnivariateFn, label: str = "") -> UnivariateFn:
        """Return g(x(y)) as a function of y with chain-rule derivatives."""
        f = self.f

        def val(y):
            return g(self.x(y))

        def d1(y):
            x = self.x(y)
            return g.d(x) / np.sqrt(f(x))

        def d2(y):
            x = self.x(y)
            fx, f1 = f(x), f.d(x)
            return g.d(x, 2) / fx - g.d(x) * f1 / (2 * fx**2)

        return UnivariateFn(val, d1, d2, periodic=g.periodic, label=label or f"{g.label}∘x(y)")
