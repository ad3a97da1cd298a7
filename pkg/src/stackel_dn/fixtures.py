"""Built-in fixtures and the JSON fixture loader.

JSON layout::

    {"name": "f2", "A": 1.0,
     "rows": [["2+0.5*sin(pi*x)", "1+0.3*x^2", "1"], ["0", "-1", "1"], ["0", "1", "-2"]],
     "phi": ["0", "0", "0"] | "robertson",
     "c": 1.0}

Row i is an expression in ``x`` (or ``x1``/``x2``/``x3``). ``"phi": "robertson"``
selects the potentials for which c ≡ 1 solves the conformal equation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .angular import AngularOperators
from .errors import ConfigError
from .geometry import (ConformallyStackelMetric, StackelMatrix, robertson_potentials,
                       validate_stackel)
from .radial import RadialRow
from .univariate import UnivariateFn, parse_expression


@dataclass
class Fixture:
    name: str
    S: StackelMatrix
    phi: tuple
    c: float = 1.0
    source: Optional[dict] = field(default=None, repr=False)

    @property
    def A(self):
        return self.S.A

    @property
    def metric(self) -> ConformallyStackelMetric:
        return ConformallyStackelMetric(self.S, self.phi, self.c, self.name)

    def radial_row(self) -> RadialRow:
        return RadialRow.from_stackel(self.S, self.phi[0])

    def angular(self, **kw) -> AngularOperators:
        return AngularOperators.from_stackel(self.S, self.phi, **kw)

    def with_matrix(self, S: StackelMatrix, phi=None, name=None) -> "Fixture":
        return Fixture(name or self.name, S, self.phi if phi is None else tuple(phi), self.c)


def _expr_row(row, i):
    per = i > 0
    out = []
    for e in row:
        var = "x"
        if isinstance(e, str) and f"x{i + 1}" in e:
            var = f"x{i + 1}"
        out.append(parse_expression(e, var, periodic=per))
    return tuple(out)


def from_dict(doc: dict, name: str = "fixture") -> Fixture:
    try:
        rows = doc["rows"]
    except KeyError:
        raise ConfigError("fixture needs 'rows'", field="rows") from None
    if len(rows) != 3 or any(len(r) != 3 for r in rows):
        raise ConfigError("'rows' must be a 3×3 array", field="rows")
    A = doc.get("A", 1.0)
    if not isinstance(A, (int, float)) or A <= 0:
        raise ConfigError("'A' must be a positive number", field="A")
    try:
        S = StackelMatrix(tuple(_expr_row(r, i) for i, r in enumerate(rows)), float(A))
    except ValueError as exc:
        raise ConfigError(str(exc), field="rows") from None
    phi = doc.get("phi", [0, 0, 0])
    if phi == "robertson":
        phi, _ = robertson_potentials(S)
    else:
        if len(phi) != 3:
            raise ConfigError("'phi' must have three entries", field="phi")
        try:
            phi = tuple(parse_expression(p, f"x{i + 1}" if isinstance(p, str) and f"x{i + 1}" in p
                                         else "x", periodic=i > 0) for i, p in enumerate(phi))
        except ValueError as exc:
            raise ConfigError(str(exc), field="phi") from None
    c = doc.get("c", 1.0)
    if not isinstance(c, (int, float)) or c <= 0:
        raise ConfigError("'c' must be a positive constant", field="c")
    return Fixture(doc.get("name", name), S, tuple(phi), float(c), doc)


def load_fixture(ref) -> Fixture:
    """Fixture from a JSON path or a built-in name ("f1", "builtin:f2", ...)."""
    if isinstance(ref, Fixture):
        return ref
    ref = str(ref)
    key = ref.split(":", 1)[1] if ref.startswith("builtin:") else ref
    if key in BUILTIN:
        return BUILTIN[key]()
    path = Path(ref)
    if not path.exists():
        raise ConfigError(f"fixture file not found: {ref}", field="fixture")
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", field="fixture", line=exc.lineno) from None
    return from_dict(doc, path.stem)


def validate_fixture(fx: Fixture, samples: int = 16):
    rep = validate_stackel(fx.S, samples)
    if not rep.valid:
        raise ConfigError(f"fixture {fx.name} fails validation: {rep.failures()}", field="fixture")
    return rep


# ---------------------------------------------------------------------------
# built-ins
# ---------------------------------------------------------------------------
_F1_ANGULAR = [["0", "-1", "1"], ["0", "1", "-2"]]


def f1(phi=("0", "0", "0"), A: float = 1.0) -> Fixture:
    """Constant matrix (2,1,1)/(0,−1,1)/(0,1,−2)."""
    return from_dict({"name": "f1", "A": A, "rows": [["2", "1", "1"]] + _F1_ANGULAR,
                      "phi": list(phi)})


def f2() -> Fixture:
    """Variable radial row with the potentials that make c ≡ 1 conformal."""
    return from_dict({"name": "f2", "A": 1.0,
                      "rows": [["2+0.5*sin(pi*x)", "1+0.3*x^2", "1+0.2*sin(pi*x)"]] + _F1_ANGULAR,
                      "phi": "robertson"})


def f3() -> Fixture:
    """Variable angular rows; the joint spectrum is no longer explicit."""
    return from_dict({"name": "f3", "A": 1.0,
                      "rows": [["2+0.5*sin(pi*x)", "1", "1"],
                               ["0", "-1-0.2*cos(x)", "1+0.1*sin(x)"],
                               ["0", "1+0.1*cos(x)", "-2+0.2*sin(x)"]],
                      "phi": "robertson"})


def recovery() -> Fixture:
    """s12 ≡ 4, s13 ≡ 1."""
    return from_dict({"name": "recovery", "A": 1.0, "rows": [["2", "4", "1"]] + _F1_ANGULAR})


def recovery_slope() -> Fixture:
    """s12 = e^x, so (log s12)′(0) = 1."""
    return from_dict({"name": "recovery-slope", "A": 1.0,
                      "rows": [["2", "exp(x)", "1+0.5*x"]] + _F1_ANGULAR})


def link_exp() -> Fixture:
    return from_dict({"name": "link-exp", "A": 1.0, "rows": [["2", "exp(2*x)", "1"]] + _F1_ANGULAR})


def link_mixed() -> Fixture:
    return from_dict({"name": "link-mixed", "A": 1.0,
                      "rows": [["2", "1+0.5*x", "1+0.5*cos(pi*x)"]] + _F1_ANGULAR,
                      "phi": ["0.3*sin(pi*x)", "0", "0"]})


def link_const() -> Fixture:
    return from_dict({"name": "link-const", "A": 1.0, "rows": [["2", "4", "4"]] + _F1_ANGULAR})


def f1_potential() -> Fixture:
    """F1 with φ₁ = 0.3 sin(πx)."""
    fx = f1(("0.3*sin(pi*x)", "0", "0"))
    fx.name = "f1-phi"
    return fx


def s13_bump(fx: Fixture, amplitude: float = 0.1) -> Fixture:
    """Add amplitude·sin⁴(πx/A) to s13 (vanishing to third order at both ends)."""
    A = fx.A
    bump = parse_expression(f"{amplitude}*sin(pi*x/{A})^4", "x")
    r = fx.S.rows[0]
    S = fx.S.with_rows(((r[0], r[1], r[2] + bump),) + fx.S.rows[1:])
    return fx.with_matrix(S, name=fx.name + "+bump")


def s33_perturbed(fx: Fixture, amplitude: float = 0.1) -> Fixture:
    """Perturb s33 by amplitude·cos x (keeps the sign conditions for small amplitude)."""
    r = fx.S.rows[2]
    S = fx.S.with_rows(fx.S.rows[:2] + ((r[0], r[1], r[2] + parse_expression(
        f"{amplitude}*cos(x)", "x", periodic=True)),))
    return fx.with_matrix(S, name=fx.name + "+s33")


def matched_reparam_profile(A: float = 1.0, amplitude: float = 0.5) -> UnivariateFn:
    """f₁ = 1 + a sin²(πx/A): f₁ = 1 and f₁′ = 0 at both ends."""
    return parse_expression(f"1+{amplitude}*sin(pi*x/{A})^2", "x")


BUILTIN = {
    "f1": f1,
    "f1-phi": f1_potential,
    "f2": f2,
    "f3": f3,
    "recovery": recovery,
    "recovery-slope": recovery_slope,
    "link-exp": link_exp,
    "link-mixed": link_mixed,
    "link-const": link_const,
}


def builtin_json(name: str) -> str:
    fx = BUILTIN[name]()
    doc = dict(fx.source)
    return json.dumps(doc, indent=2)


__all__ = ["Fixture", "from_dict", "load_fixture", "validate_fixture", "BUILTIN", "f1", "f2", "f3",
           "recovery", "recovery_slope", "link_exp", "link_mixed", "link_const", "s13_bump",
           "s33_perturbed", "matched_reparam_profile", "builtin_json"]
