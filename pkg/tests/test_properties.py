"""Randomized algebraic properties; each suite draws at least 500 instances."""
from fractions import Fraction
from functools import lru_cache

from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from dyboson.currents import GRID, KINDS, build_currents, lambda_field
from dyboson.gamma import GammaProduct
from dyboson.kernels import (
    NEG,
    POS,
    ExponentKernel,
    KernelTerm,
    OscillatorId,
    Family,
    ZeroModeWord,
    gauss,
    kernel_canonicalize,
    word_product,
    zero_mode_exchange,
)
from dyboson.rational import RationalFunction as RF
from dyboson.relations import charge_balance, relation_catalog
from dyboson.rootdata import build_root_data
from dyboson.vertex import MU, NU, NonUniformExchange, contraction, exchange_relation, multiply

SIZES = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (2, 2)]
MANY = settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@lru_cache(maxsize=None)
def registry(mn):
    return build_currents(build_root_data(*mn))


@lru_cache(maxsize=None)
def exchange(mn, x, y):
    reg = registry(mn)
    try:
        return exchange_relation(reg.current(*x, anchor=MU), reg.current(*y, anchor=NU))
    except NonUniformExchange:
        return None


@st.composite
def current_pair(draw):
    mn = draw(st.sampled_from(SIZES))
    rank = mn[0] + mn[1] + 1
    x = (draw(st.sampled_from(KINDS)), draw(st.integers(1, rank)))
    y = (draw(st.sampled_from(KINDS)), draw(st.integers(1, rank)))
    return mn, x, y


@MANY
@given(current_pair())
def test_exchange_reciprocity(case):
    mn, x, y = case
    ab, ba = exchange(mn, x, y), exchange(mn, y, x)
    assume(ab is not None and ba is not None)
    assert ab.R * ba.R.negate_u() == RF.one()
    assert ab.sign * ba.sign == 1


oscillators = st.builds(OscillatorId, st.sampled_from(list(Family)), st.integers(1, 3))
words = st.builds(
    ZeroModeWord.make,
    st.dictionaries(oscillators, st.integers(-3, 3), max_size=4),
    st.dictionaries(oscillators, st.integers(-3, 3).map(Fraction), max_size=4),
)


@MANY
@given(words, words)
def test_zero_mode_phase_reciprocity(w1, w2):
    assert zero_mode_exchange(w1, w2) * zero_mode_exchange(w2, w1) == gauss(1)
    p12 = word_product(w1, w2)
    p21 = word_product(w2, w1)
    assert p12[0] == p21[0]
    assert p12[1] == zero_mode_exchange(w1, w2) * p21[1]


@lru_cache(maxsize=None)
def registry_with(mn, conv):
    return build_currents(build_root_data(*mn), conv)


@st.composite
def relation_case(draw):
    mn = draw(st.sampled_from(SIZES))
    conv = draw(st.sampled_from(GRID))
    spec = draw(st.sampled_from(relation_catalog(build_root_data(*mn), conv)))
    return registry_with(mn, conv), spec


@MANY
@given(relation_case())
def test_charge_conservation(case):
    reg, spec = case
    assert charge_balance(reg, spec)
    a, b = reg.current(*spec.a, anchor=MU), reg.current(*spec.b, anchor=NU)
    ab = multiply(a, b)
    assert len(ab.q_charges()) == 1
    assert ab.q_charges() == multiply(b, a).q_charges()
    for d in spec.expected_deltas:
        kind, node = d.target.split("_")
        assert ab.q_charges() == reg.current(kind, int(node)).q_charges()


@MANY
@given(current_pair())
def test_product_charges_add(case):
    mn, x, y = case
    reg = registry(mn)
    a, b = reg.current(*x, anchor=MU), reg.current(*y, anchor=NU)
    total = {}
    for e in (a, b):
        (q,) = e.q_charges()
        for osc, n in q:
            total[osc] = total.get(osc, 0) + n
    expected = tuple(sorted(((o, n) for o, n in total.items() if n), key=lambda e: e[0]))
    assert multiply(a, b).q_charges() == {expected}


terms = st.tuples(
    st.sampled_from([OscillatorId(Family.A, 1), OscillatorId(Family.B, 1), OscillatorId(Family.C, 2)]),
    st.sampled_from([POS, NEG]),
    st.builds(
        KernelTerm,
        st.integers(-3, 3).map(gauss),
        st.integers(0, 1),
        st.sampled_from([None, "mu", "nu"]),
        st.integers(-4, 4).map(lambda k: Fraction(k, 2)),
        st.integers(0, 1),
    ),
)


@MANY
@given(st.lists(terms, max_size=8), st.lists(terms, max_size=8))
def test_canonicalization(t1, t2):
    k1, k2 = kernel_canonicalize(t1), kernel_canonicalize(t2)
    assert kernel_canonicalize(k1) == k1
    assert kernel_canonicalize(t1 + t2) == k1 + k2
    assert k1 - k1 == ExponentKernel.empty()
    assert hash(kernel_canonicalize(list(reversed(t1)))) == hash(k1)


@st.composite
def lambda_triple(draw):
    mn = draw(st.sampled_from(SIZES))
    d = build_root_data(*mn)
    fields = []
    for anchor in ("x", "y", "z"):
        i = draw(st.integers(1, d.rank))
        beta = draw(st.sampled_from([Fraction(-1, 2), Fraction(0), Fraction(1, 2)]))
        inverse = draw(st.booleans())
        fields.append(lambda_field(d, i, beta, inverse, anchor=anchor).kernel)
    return fields


def _prefactor(*pairs):
    out = {}
    for left, right in pairs:
        for key, g in contraction(left, right).items():
            out[key] = out.get(key, GammaProduct.one()) * g
    return out


@MANY
@given(lambda_triple())
def test_triple_product_associativity(kernels):
    a, b, c = kernels
    left = _prefactor((a, b), (a + b, c))
    right = _prefactor((b, c), (a, b + c))
    assert left == right

