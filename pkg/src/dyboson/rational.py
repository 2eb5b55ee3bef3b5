"""Exact rational functions of the spectral difference ``u`` and ``hbar``.

Thin wrapper over sympy's sparse fraction field ``QQ(u, hbar)``: the field
keeps numerator and denominator coprime with a monic-style normalisation, so
equality is structural.
"""
from __future__ import annotations

from fractions import Fraction

import sympy
from sympy.polys.domains import QQ

_FIELD, _U, _H = sympy.field("u,hbar", QQ)
_RING = _FIELD.ring
_RU, _RH = _RING.gens
U_SYMBOL, HBAR_SYMBOL = sympy.symbols("u hbar")


def _q(x) -> object:
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    return QQ(x)


class RationalFunction:
    __slots__ = ("_f",)

    def __init__(self, f):
        self._f = f

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, c) -> "RationalFunction":
        return cls(_FIELD(_q(c)))

    @classmethod
    def one(cls) -> "RationalFunction":
        return cls.const(1)

    @classmethod
    def zero(cls) -> "RationalFunction":
        return cls.const(0)

    @classmethod
    def u(cls) -> "RationalFunction":
        return cls(_U)

    @classmethod
    def hbar(cls) -> "RationalFunction":
        return cls(_H)

    @classmethod
    def linear(cls, u_coef, h_coef, const=0) -> "RationalFunction":
        """``u_coef*u + h_coef*hbar + const``."""
        return cls(_U * _q(u_coef) + _H * _q(h_coef) + _q(const))

    @classmethod
    def from_factors(cls, factors, coef=1) -> "RationalFunction":
        """Product of ``(u + s*hbar)**e`` over ``(s, e)`` pairs, times ``coef``."""
        f = _FIELD(_q(coef))
        for s, e in factors:
            f *= (_U + _H * _q(s)) ** e
        return cls(f)

    @classmethod
    def from_expr(cls, expr) -> "RationalFunction":
        return cls(_FIELD.from_expr(sympy.sympify(expr, locals={"u": U_SYMBOL, "hbar": HBAR_SYMBOL})))

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        return RationalFunction(self._f + _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RationalFunction(self._f - _coerce(other))

    def __rsub__(self, other):
        return RationalFunction(_coerce(other) - self._f)

    def __mul__(self, other):
        return RationalFunction(self._f * _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if not o:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self._f / o)

    def __rtruediv__(self, other):
        return RationalFunction(_coerce(other) / self._f)

    def __neg__(self):
        return RationalFunction(-self._f)

    def __pow__(self, n: int):
        return RationalFunction(self._f ** n)

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return self._f == other._f
        try:
            return self._f == _coerce(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self._f)

    def __bool__(self):
        return bool(self._f)

    # structure ------------------------------------------------------------
    @property
    def numer(self):
        return self._f.numer

    @property
    def denom(self):
        return self._f.denom

    def is_constant(self) -> bool:
        return self._f.numer.is_ground and self._f.denom.is_ground

    def negate_u(self) -> "RationalFunction":
        """Substitute ``u -> -u``."""
        n = self._f.numer.compose(_RU, -_RU)
        d = self._f.denom.compose(_RU, -_RU)
        return RationalFunction(_FIELD(n) / _FIELD(d))

    def shift_u(self, s) -> "RationalFunction":
        """Substitute ``u -> u + s*hbar``."""
        n = self._f.numer.compose(_RU, _RU + _RH * _q(s))
        d = self._f.denom.compose(_RU, _RU + _RH * _q(s))
        return RationalFunction(_FIELD(n) / _FIELD(d))

    def at_u(self, s) -> "RationalFunction":
        """Value at ``u = s*hbar`` as a function of hbar alone."""
        n = self._f.numer.compose(_RU, _RH * _q(s))
        d = self._f.denom.compose(_RU, _RH * _q(s))
        if not d:
            raise ZeroDivisionError(f"pole at u = {s}*hbar")
        return RationalFunction(_FIELD(n) / _FIELD(d))

    def u_poles(self) -> dict[Fraction, int]:
        """Roots of the denominator of the form ``u = s*hbar`` with multiplicities.

        Raises ``ValueError`` if the denominator has any other kind of factor
        depending on ``u``.
        """
        expr = self._f.denom.as_expr()
        poles: dict[Fraction, int] = {}
        _, factors = sympy.factor_list(expr, U_SYMBOL, HBAR_SYMBOL)
        for fac, mult in factors:
            p = sympy.Poly(fac, U_SYMBOL, HBAR_SYMBOL)
            if p.degree(U_SYMBOL) == 0:
                continue
            if p.total_degree() != 1:
                raise ValueError(f"non-linear denominator factor {fac}")
            cu = p.coeff_monomial(U_SYMBOL)
            ch = p.coeff_monomial(HBAR_SYMBOL)
            if p.coeff_monomial(1) != 0:
                raise ValueError(f"denominator factor {fac} is not homogeneous")
            root = -sympy.Rational(ch) / sympy.Rational(cu)
            poles[Fraction(int(root.p), int(root.q))] = int(mult)
        return poles

    def residue(self, s) -> "RationalFunction":
        """Residue at the simple pole ``u = s*hbar``."""
        mult = self.u_poles().get(Fraction(s), 0)
        if mult == 0:
            return RationalFunction.zero()
        if mult > 1:
            raise ValueError(f"pole of order {mult} at u = {s}*hbar")
        return (self * RationalFunction.linear(1, -Fraction(s))).at_u(s)

    # evaluation / display --------------------------------------------------
    def as_expr(self):
        return self._f.as_expr().subs({sympy.Symbol("u"): U_SYMBOL, sympy.Symbol("hbar"): HBAR_SYMBOL})

    def evaluate(self, u0: complex, hbar0: float) -> complex:
        n = _peval(self._f.numer, u0, hbar0)
        d = _peval(self._f.denom, u0, hbar0)
        return n / d

    def __str__(self) -> str:
        return format_rational(self)

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


def _peval(poly, u0: complex, h0: float) -> complex:
    total = 0j
    for (eu, eh), c in poly.terms():
        total += float(c) * (u0 ** eu) * (h0 ** eh)
    return total


def _coerce(x):
    if isinstance(x, RationalFunction):
        return x._f
    if isinstance(x, (int, Fraction)):
        return _FIELD(_q(x))
    raise TypeError(f"cannot coerce {type(x).__name__} to RationalFunction")


def _factor_key(fac):
    p = sympy.Poly(fac, U_SYMBOL, HBAR_SYMBOL)
    if p.degree(U_SYMBOL) == 1 and p.total_degree() == 1 and p.coeff_monomial(1) == 0:
        return (0, -sympy.Rational(p.coeff_monomial(HBAR_SYMBOL)) / sympy.Rational(p.coeff_monomial(U_SYMBOL)), "")
    return (1, 0, str(fac))


def _format_factor(fac) -> str:
    key = _factor_key(fac)
    if key[0] == 0:
        root = -key[1]
        if root == 0:
            return "u"
        mag = abs(root)
        h = "hbar" if mag == 1 else f"{mag}*hbar"
        return f"u {'+' if root > 0 else '-'} {h}"
    return sympy.sstr(fac, order="lex")


def _format_poly(expr) -> str:
    coef, factors = sympy.factor_list(expr, U_SYMBOL, HBAR_SYMBOL)
    parts = []
    for fac, mult in sorted(factors, key=lambda fm: _factor_key(fm[0])):
        body = _format_factor(fac)
        s = body if body.isidentifier() else f"({body})"
        parts.append(s if mult == 1 else f"{s}**{mult}")
    if not parts:
        return sympy.sstr(coef)
    body = "*".join(parts)
    if coef == 1:
        return body
    if coef == -1:
        return f"-{body}"
    return f"{sympy.sstr(coef)}*{body}"


def format_rational(r: RationalFunction) -> str:
    """Factored string over ``u`` and ``hbar``, factors ordered by root."""
    num = _format_poly(r.numer.as_expr().subs({sympy.Symbol("u"): U_SYMBOL, sympy.Symbol("hbar"): HBAR_SYMBOL}))
    den_expr = r.denom.as_expr().subs({sympy.Symbol("u"): U_SYMBOL, sympy.Symbol("hbar"): HBAR_SYMBOL})
    if den_expr == 1:
        return num
    den = _format_poly(den_expr)
    if not _is_atomic(den):
        den = f"({den})"
    return f"{num}/{den}"


def _is_atomic(s: str) -> bool:
    if s.isidentifier():
        return True
    if not (s.startswith("(") and s.endswith(")")):
        return False
    depth = 0
    for k, ch in enumerate(s):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0 and k != len(s) - 1:
            return False
    return True
