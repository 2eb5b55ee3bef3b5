from fractions import Fraction

import numpy as np
import pytest

from dyboson.gamma import (
    ContractionError,
    GammaProduct,
    IrreducibleGammaError,
    PoleProximityError,
    ScalarConstant,
    exchange_ratio,
    gamma_reduce,
    numeric_eval,
    regularized_log_integral,
)
from dyboson.oracle import gamma_vs_reduce, random_points
from dyboson.rational import RationalFunction as RF

F = Fraction


def gp(const=ScalarConstant(), **factors):
    return GammaProduct.make(const, factors.items())


def test_empty_integrand():
    assert regularized_log_integral([]) == GammaProduct.one()


def test_single_term():
    # reg int e^(-x lam)/lam = -ln x - gamma, so coefficient +1 gives e^(-gamma)/x
    g = regularized_log_integral([(1, (1, F(-1)))])
    assert g.factors == ((F(-1, 2), 1), (F(1, 2), -1))
    r, c = gamma_reduce(g)
    extra, rest = c.split()
    assert r * extra == 1 / RF.linear(1, -1)
    assert rest == ScalarConstant(1, 0, -1)
    assert regularized_log_integral([(-1, (1, F(-1)))]) == g.inverse()


def test_unbalanced_integrand_rejected():
    with pytest.raises(ContractionError):
        regularized_log_integral([(1, (0, F(1)))])
    with pytest.raises(ContractionError):
        regularized_log_integral([(1, (0, F(0)))])


def test_reduce_examples():
    r, _ = gamma_reduce(GammaProduct.make(ScalarConstant(), [(F(1), 1), (F(0), -1)]))
    assert r == RF.u() / (RF.hbar() * 2)
    r, _ = gamma_reduce(GammaProduct.make(ScalarConstant(), [(F(3, 2), 1), (F(-1, 2), -1)]))
    assert r == RF.from_factors([(1, 1), (-1, 1)]) / (RF.hbar() * 2) ** 2
    r, c = gamma_reduce(GammaProduct.make(ScalarConstant(), [(F(1, 3), 1), (F(1, 3), -1)]))
    assert r == RF.one() and c.is_one()


def test_irreducible():
    with pytest.raises(IrreducibleGammaError):
        gamma_reduce(GammaProduct.make(ScalarConstant(), [(F(1, 2), 1), (F(0), -1)]))


def test_exchange_ratio_lambda_lambda():
    g = GammaProduct.make(ScalarConstant(1, 4, 2), [(F(1), 1), (F(-1), -1)])
    assert exchange_ratio(g, g) == RF.from_factors([(-2, 1), (2, -1)])


def test_exchange_ratio_symmetric_is_one():
    g = GammaProduct.make(ScalarConstant(1, 4, 2), [(F(3, 2), 1), (F(-1, 2), -1)])
    assert exchange_ratio(g, g) == RF.one()


def test_numeric_recurrence():
    g = GammaProduct.make(ScalarConstant(), [(F(1), 1), (F(0), -1)])
    u0, h0 = 1 + 0.5j, 0.3
    assert abs(numeric_eval(g, u0, h0) - u0 / (2 * h0)) <= 1e-10 * abs(u0 / (2 * h0))
    assert numeric_eval(GammaProduct.one(), 0.7, 0.2) == 1.0


def test_c_pair_numeric_sweep():
    g = GammaProduct.make(ScalarConstant(1, 2, 1), [(F(1), 1), (F(0), -1)])
    assert gamma_vs_reduce(g, random_points(np.random.default_rng(5), 100)) <= 1e-10


def test_pole_proximity():
    with pytest.raises(PoleProximityError):
        numeric_eval(1 / RF.u(), 0.0, 0.5)
    with pytest.raises(PoleProximityError):
        numeric_eval(GammaProduct.make(ScalarConstant(), [(F(0), 1)]), -2.0, 0.5)


def test_constant_algebra():
    c = ScalarConstant(2, 3, F(1, 2))
    assert (c * c.inverse()).is_one()
    r, rest = c.split()
    assert r == RF.hbar() * 4 and rest == ScalarConstant(1, 1, F(1, 2))
    assert str(ScalarConstant(1, 2, 1)) == "(2*hbar)*exp(gamma)"
