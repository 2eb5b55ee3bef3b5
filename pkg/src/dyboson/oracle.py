"""Floating-point cross-checks of the symbolic pipeline.

``quadrature_contraction`` integrates the rotated contraction integrand
directly from the kernel terms (no Laurent algebra, no Gamma bookkeeping) and
regularizes the ``1/lam`` divergence by subtracting ``C*e^(-lam)/lam``.
"""
from __future__ import annotations

import cmath
import math
from collections import defaultdict
from typing import Iterable

import numpy as np
from scipy.integrate import quad

from .gamma import EULER_GAMMA, GammaProduct, RationalFunction, gamma_reduce, numeric_eval
from .kernels import NEG, NORM, POS, ExponentKernel, gauss_complex
from .vertex import MU, NU, VertexExpression, contraction, word_product


def random_points(rng: np.random.Generator, n: int, u_scale: float = 4.0,
                  hbar_range: tuple[float, float] = (0.2, 1.5)) -> list[tuple[complex, float]]:
    """Sample ``(u, hbar)`` away from the real axis, where Gamma poles live."""
    pts = []
    for _ in range(n):
        re = rng.uniform(-u_scale, u_scale)
        im = rng.uniform(0.3, u_scale) * rng.choice((-1, 1))
        pts.append((complex(re, im), float(rng.uniform(*hbar_range))))
    return pts


def relative_error(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def gamma_vs_reduce(g: GammaProduct, points: Iterable[tuple[complex, float]]) -> float:
    """Largest relative error between a Gamma product and its rational reduction."""
    r, c = gamma_reduce(g)
    worst = 0.0
    for u0, h0 in points:
        lhs = numeric_eval(g, u0, h0)
        rhs = numeric_eval(r, u0, h0) * c.numeric(h0)
        worst = max(worst, relative_error(lhs, rhs))
    return worst


# --- quadrature ------------------------------------------------------------------

def _half_terms(k: ExponentKernel, half: str, anchor: str):
    out = []
    for x, h, t in k.terms:
        if h == half and t.anchor == anchor:
            out.append((x, gauss_complex(t.coef), float(t.shift), t.sh_power, t.hbar_power))
    return out


def quadrature_contraction(ka: ExponentKernel, kb: ExponentKernel, u0: complex, hbar0: float) -> complex:
    """Contraction prefactor of ``ka`` (at ``mu``) past ``kb`` (at ``nu``) at ``mu - nu = u0``.

    With ``t = -i*lam`` the integrand of ``int dt/t`` becomes
    ``-norm * A(lam) * B(lam) * sh(hbar lam)^2`` per oscillator, where
    ``A`` is the annihilation part of ``ka`` and ``B`` the creation part of
    ``kb`` evaluated at ``t' = -t``.
    """
    pos = _half_terms(ka, POS, MU)
    neg = _half_terms(kb, NEG, NU)
    pairs = []
    for x, ca, sa, da, pa in pos:
        for y, cb, sb, db, pb in neg:
            if x != y:
                continue
            if pa + pb != 2:
                raise ValueError("hbar powers do not cancel")
            # sh(i hbar t') at t' = -t is -sh(hbar lam); the product keeps sh^(2-da-db)
            sign = (-1) ** db
            pairs.append((-NORM[x.family] * ca * cb * sign, sa, sb, 2 - da - db))
    if not pairs:
        return 1.0 + 0j

    def f(lam: float) -> complex:
        # sh(hbar lam) = e^(hbar lam) (1 - e^(-2 hbar lam))/2, folded into one decaying exponential
        damp = (1.0 - math.exp(-2.0 * hbar0 * lam)) / 2.0
        total = 0j
        for c, sa, sb, p in pairs:
            total += c * damp ** p * cmath.exp(((sb - sa + p) * hbar0 - u0) * lam)
        return total

    C = sum(c for c, _, _, p in pairs if p == 0)

    def g(lam: float) -> complex:
        return (f(lam) - C * math.exp(-lam)) / lam

    def integral(part) -> float:
        a, _ = quad(lambda s: part(g(s)), 0.0, 1.0, limit=400, epsabs=1e-14, epsrel=1e-12)
        b, _ = quad(lambda s: part(g(s)), 1.0, np.inf, limit=400, epsabs=1e-14, epsrel=1e-12)
        return a + b

    value = integral(lambda z: z.real) + 1j * integral(lambda z: z.imag) - C * EULER_GAMMA
    return cmath.exp(value)


def contraction_vs_quadrature(ka: ExponentKernel, kb: ExponentKernel,
                              points: Iterable[tuple[complex, float]]) -> float:
    worst = 0.0
    for u0, h0 in points:
        g = GammaProduct.one()
        for pair, gp in contraction(ka, kb).items():
            g = g * gp
        worst = max(worst, relative_error(quadrature_contraction(ka, kb, u0, h0), numeric_eval(g, u0, h0)))
    return worst


# --- exchange relations ------------------------------------------------------------

def _numeric_product(a: VertexExpression, b: VertexExpression, u0: complex, h0: float) -> dict:
    """Normal-ordered coefficients of ``a(mu) b(nu)`` from unreduced Gamma products."""
    out: dict = defaultdict(complex)
    for ma in a.monomials:
        for mb in b.monomials:
            value = (numeric_eval(ma.coef, u0, h0) * numeric_eval(mb.coef, u0, h0)
                     * ma.const.numeric(h0) * mb.const.numeric(h0))
            for pair, g in contraction(ma.kernel, mb.kernel).items():
                value *= numeric_eval(g, u0 if pair == (MU, NU) else -u0, h0)
            word, phase = word_product(ma.zero_modes, mb.zero_modes)
            value *= gauss_complex(phase)
            out[(ma.kernel + mb.kernel, word)] += value
    return out


def exchange_numeric_error(a: VertexExpression, b: VertexExpression, R: RationalFunction, sign: int,
                           points: Iterable[tuple[complex, float]]) -> float:
    """Largest relative deviation from ``a b = sign*R(u) b a`` termwise."""
    worst = 0.0
    for u0, h0 in points:
        ab = _numeric_product(a, b, u0, h0)
        ba = _numeric_product(b, a, u0, h0)
        factor = sign * numeric_eval(R, u0, h0)
        for key, v in ab.items():
            worst = max(worst, relative_error(v, factor * ba.get(key, 0j)))
    return worst
