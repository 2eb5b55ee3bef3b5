"""Pairwise normal-ordering tables of the fundamental fields.

``expected_*`` give the closed forms as written for the field pairs; the
engine's own contraction is computed independently by ``engine_contraction``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .currents import c_field, lambda_field
from .gamma import GammaProduct, ScalarConstant, gamma_reduce
from .rational import RationalFunction
from .rootdata import SuperCartanData
from .vertex import MU, NU, VertexMonomial, contraction

BETAS = (Fraction(-1, 2), Fraction(0), Fraction(1, 2))


@dataclass(frozen=True)
class PairEntry:
    label: str
    left: VertexMonomial
    right: VertexMonomial
    expected: GammaProduct

    def computed(self) -> GammaProduct:
        return engine_contraction(self.left, self.right)

    def reduced(self) -> tuple[RationalFunction, ScalarConstant]:
        return gamma_reduce(self.computed())


def expected_lambda_pair(a_ij: int, beta1: Fraction, beta2: Fraction) -> GammaProduct:
    """``Gamma[z + (1+a)/2] / Gamma[z + (1-a)/2] * e^(a*gamma) / eta^a`` with ``z = eta*u - (b1+b2)/2``."""
    z0 = -(Fraction(beta1) + Fraction(beta2)) / 2
    const = ScalarConstant(1, 2 * a_ij, a_ij)
    return GammaProduct.make(const, [(z0 + Fraction(1 + a_ij, 2), 1), (z0 + Fraction(1 - a_ij, 2), -1)])


def expected_c_pair(i: int, j: int) -> GammaProduct:
    """``Gamma[eta*u + 1]/Gamma[eta*u] * e^gamma/eta`` on the diagonal, no contraction otherwise."""
    if i != j:
        return GammaProduct.one()
    return GammaProduct.make(ScalarConstant(1, 2, 1), [(Fraction(1), 1), (Fraction(0), -1)])


def engine_contraction(left: VertexMonomial, right: VertexMonomial) -> GammaProduct:
    out = GammaProduct.one()
    for pair, g in contraction(left.kernel, right.kernel).items():
        if pair != (MU, NU):
            raise ValueError(f"unexpected anchor pair {pair}")
        out = out * g
    return out


def contraction_pairs(data: SuperCartanData, betas=BETAS) -> list[PairEntry]:
    out = []
    for i in data.nodes:
        for j in data.nodes:
            for b1 in betas:
                for b2 in betas:
                    out.append(PairEntry(
                        f"lambda_{i}(mu;{b1}) lambda_{j}(nu;{b2})",
                        lambda_field(data, i, b1, anchor=MU),
                        lambda_field(data, j, b2, anchor=NU),
                        expected_lambda_pair(data.a(i, j), b1, b2)))
    for i in range(1, data.N + 2):
        for j in range(1, data.N + 2):
            out.append(PairEntry(f"c_{i}(mu;0) c_{j}(nu;0)", c_field(i, anchor=MU), c_field(j, anchor=NU),
                                 expected_c_pair(i, j)))
    return out
