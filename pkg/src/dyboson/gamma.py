"""Regularized contraction integrals, Gamma products and their reduction.

Every contraction integral lands, after rotating ``t = -i*lam``, on a finite
sum ``sum_k c_k exp(-x_k*lam)/lam`` with rates ``x_k = u + s_k*hbar``.  Each
term is regularized through the contour formula

    int_C dlam ln(-lam)/(2 pi i lam) e^(-x lam)/(1 - e^(-lam/eta))
        = lnGamma(eta x) + (eta x - 1/2)(gamma - ln eta) - 1/2 ln 2pi

applied to ``e^(-x lam) = (e^(-x lam) - e^(-(x + 1/eta) lam)) / (1 - e^(-lam/eta))``
with ``eta = 1/(2 hbar)``.
"""
from __future__ import annotations

import cmath
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.special import loggamma

from .kernels import I_UNIT, ONE, Gauss, gauss, gauss_complex, gauss_key
from .rational import _FIELD, RationalFunction

EULER_GAMMA = 0.5772156649015329
POLE_TOLERANCE = 1e-6


class ContractionError(ValueError):
    """The contraction integral is ill-posed or not of Gamma type."""


class IrreducibleGammaError(ValueError):
    """A Gamma factor has no partner at an integer offset."""


class PoleProximityError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarConstant:
    """``coef * (2 hbar)**(p/2) * exp(g * gamma_E)``."""

    coef: Gauss = ONE
    two_hbar_half_power: int = 0
    gamma_power: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coef", gauss(self.coef))
        object.__setattr__(self, "gamma_power", Fraction(self.gamma_power))

    def __mul__(self, other: "ScalarConstant") -> "ScalarConstant":
        return ScalarConstant(self.coef * other.coef,
                              self.two_hbar_half_power + other.two_hbar_half_power,
                              self.gamma_power + other.gamma_power)

    def inverse(self) -> "ScalarConstant":
        return ScalarConstant(ONE / self.coef, -self.two_hbar_half_power, -self.gamma_power)

    def __truediv__(self, other):
        return self * other.inverse()

    def is_one(self) -> bool:
        return self == ScalarConstant()

    def key(self):
        return (gauss_key(self.coef), self.two_hbar_half_power, self.gamma_power)

    def __eq__(self, other):
        return isinstance(other, ScalarConstant) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def numeric(self, hbar0: float) -> complex:
        return (gauss_complex(self.coef) * (2 * hbar0) ** (self.two_hbar_half_power / 2)
                * np.exp(float(self.gamma_power) * EULER_GAMMA))

    def split(self) -> tuple[RationalFunction, "ScalarConstant"]:
        """Move the rational part (real coefficient, integer powers of 2 hbar) into a RationalFunction."""
        re, im = gauss_key(self.coef)
        p = self.two_hbar_half_power
        rest_p = p % 2
        r = RationalFunction.hbar() * 2
        r = r ** ((p - rest_p) // 2) if p != rest_p else RationalFunction.one()
        if im == 0:
            return r * re, ScalarConstant(ONE, rest_p, self.gamma_power)
        if re == 0:
            return r * im, ScalarConstant(I_UNIT, rest_p, self.gamma_power)
        return r, ScalarConstant(self.coef, rest_p, self.gamma_power)

    def __str__(self):
        parts = []
        re, im = gauss_key(self.coef)
        if (re, im) != (1, 0):
            parts.append(str(re) if im == 0 else f"({re}+{im}i)")
        p = Fraction(self.two_hbar_half_power, 2)
        if p:
            parts.append("(2*hbar)" if p == 1 else f"(2*hbar)^({p})")
        if self.gamma_power:
            g = self.gamma_power
            parts.append("exp(gamma)" if g == 1 else f"exp({g}*gamma)")
        return "*".join(parts) or "1"



@dataclass(frozen=True)
class GammaProduct:
    """``constant * prod Gamma(eta*u + s)**e`` over ``factors = ((s, e), ...)``."""

    constant: ScalarConstant = field(default_factory=ScalarConstant)
    factors: tuple[tuple[Fraction, int], ...] = ()

    @classmethod
    def make(cls, constant: ScalarConstant, factors: Iterable[tuple[Fraction, int]]) -> "GammaProduct":
        acc: dict[Fraction, int] = defaultdict(int)
        for s, e in factors:
            acc[Fraction(s)] += e
        return cls(constant, tuple(sorted((s, e) for s, e in acc.items() if e)))

    @classmethod
    def one(cls) -> "GammaProduct":
        return cls()

    def __mul__(self, other: "GammaProduct") -> "GammaProduct":
        return GammaProduct.make(self.constant * other.constant, self.factors + other.factors)

    def inverse(self) -> "GammaProduct":
        return GammaProduct.make(self.constant.inverse(), [(s, -e) for s, e in self.factors])

    def __str__(self):
        num = [f"Gamma[eta*u{_off(s)}]" + (f"^{e}" if e > 1 else "") for s, e in self.factors if e > 0]
        den = [f"Gamma[eta*u{_off(s)}]" + (f"^{-e}" if e < -1 else "") for s, e in self.factors if e < 0]
        body = "*".join(num) or "1"
        if den:
            body += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
        const = str(self.constant)
        return body if const == "1" else f"{body} * {const}"


def _off(s: Fraction) -> str:
    if s == 0:
        return ""
    return f" + {s}" if s > 0 else f" - {-s}"


@dataclass
class _MasterSum:
    """Accumulates regularized terms; transcendental pieces kept as linear forms in eta*u."""

    gammas: dict = field(default_factory=lambda: defaultdict(int))
    euler: list = field(default_factory=lambda: [Fraction(0), Fraction(0)])   # (coef of eta*u, const)
    log_eta: list = field(default_factory=lambda: [Fraction(0), Fraction(0)])
    log_2pi: Fraction = Fraction(0)

    def add_master(self, c: int, s: Fraction) -> None:
        """``c * F(x)`` with ``eta*x = eta*u + s``."""
        self.gammas[s] += c
        # (eta x - 1/2)(gamma - ln eta)
        self.euler[0] += c
        self.euler[1] += c * (s - Fraction(1, 2))
        self.log_eta[0] -= c
        self.log_eta[1] -= c * (s - Fraction(1, 2))
        self.log_2pi -= Fraction(c, 2)


def regularized_log_integral(integrand: Iterable[tuple[object, tuple[int, Fraction]]]) -> GammaProduct:
    """Exponentiated regularized integral of ``sum coef_k e^(-x_k lam)/lam``.

    ``integrand`` holds ``(coef, (u_coef, hbar_offset))`` with
    ``x = u_coef*u + hbar_offset*hbar``.
    """
    acc = _MasterSum()
    for coef, (u_coef, offset) in integrand:
        re, im = gauss_key(gauss(coef))
        if im != 0 or re.denominator != 1:
            raise ContractionError(f"non-integral coefficient {coef} in contraction integrand")
        c = int(re)
        if c == 0:
            continue
        if u_coef == 0:
            if offset == 0:
                raise ContractionError("rate identically zero: unregularizable divergence")
            raise ContractionError("rate without spectral dependence: contraction at coincident anchors")
        if u_coef != 1:
            raise ContractionError(f"unsupported rate coefficient {u_coef}")
        s = Fraction(offset) / 2
        acc.add_master(c, s)
        acc.add_master(-c, s + 1)
    if acc.euler[0] or acc.log_eta[0] or acc.log_2pi:
        raise ContractionError("regularization constants failed to cancel")
    # exp(b ln eta) = (2 hbar)^(-b)
    p = -2 * acc.log_eta[1]
    if p.denominator != 1:
        raise ContractionError("fractional power of eta")
    constant = ScalarConstant(ONE, int(p), acc.euler[1])
    return GammaProduct.make(constant, acc.gammas.items())


def laurent_integrand(laurent: dict) -> list:
    """Map ``sum c_k w^k`` (``w = e^(-hbar lam/2)``) to rate terms ``x = u + (k/2) hbar``."""
    return [(c, (1, Fraction(k, 2))) for k, c in sorted(laurent.items())]


def gamma_reduce(g: GammaProduct) -> tuple[RationalFunction, ScalarConstant]:
    classes: dict[Fraction, list] = defaultdict(list)
    for s, e in g.factors:
        classes[s - (s.numerator // s.denominator)].append((s, e))
    factors = []
    two_hbar_power = 0
    for residue_class, items in classes.items():
        if sum(e for _, e in items) != 0:
            raise IrreducibleGammaError(
                f"Gamma factors at offsets {[str(s) for s, _ in items]} do not cancel")
        base = min(s for s, _ in items)
        for s, e in items:
            # Gamma(z + s) = Gamma(z + base) * prod_{k < s-base} (z + base + k)
            for k in range(int(s - base)):
                v = base + k
                factors.append((2 * v, e))
                two_hbar_power -= e
    r = RationalFunction.from_factors(factors)
    if two_hbar_power:
        r = r * (RationalFunction.hbar() * 2) ** two_hbar_power
    return r, g.constant


def exchange_ratio(k_ab: GammaProduct, k_ba: GammaProduct) -> RationalFunction:
    """``reduce(k_ab)(u) / reduce(k_ba)(-u)``."""
    ra, ca = gamma_reduce(k_ab)
    rb, cb = gamma_reduce(k_ba)
    extra, rest = (ca / cb).split()
    if not rest.is_one():
        raise ContractionError(f"transcendental constant {rest} survives the exchange ratio")
    return ra * extra / rb.negate_u()


def numeric_eval(obj, u0: complex, hbar0: float) -> complex:
    """Floating-point value of a GammaProduct, RationalFunction or ScalarConstant."""
    if isinstance(obj, ScalarConstant):
        return obj.numeric(hbar0)
    if isinstance(obj, RationalFunction):
        den = RationalFunction(_as_field(obj.denom)).evaluate(u0, hbar0)
        scale = max(1.0, abs(u0), hbar0) ** max(1, obj.denom.degree())
        if abs(den) < POLE_TOLERANCE * scale:
            raise PoleProximityError(f"u0={u0} within tolerance of a pole")
        return obj.evaluate(u0, hbar0)
    if isinstance(obj, GammaProduct):
        eta = 1.0 / (2.0 * hbar0)
        z = eta * u0
        total = 0j
        for s, e in obj.factors:
            arg = z + float(s)
            if arg.real <= 0.5 and abs(arg - round(arg.real)) < POLE_TOLERANCE:
                raise PoleProximityError(f"Gamma argument {arg} near a pole")
            total += e * complex(loggamma(arg))
        return cmath.exp(total) * obj.constant.numeric(hbar0)
    raise TypeError(f"cannot evaluate {type(obj).__name__}")


def _as_field(poly):
    return _FIELD(poly)
