from fractions import Fraction

import pytest

from dyboson.currents import (
    GRID,
    AmbiguousConvention,
    ConventionSet,
    NoConsistentConvention,
    build_currents,
    calibrate,
    corrupt_prefactor,
    spectral_shift_transform,
    total_q_charge,
)
from dyboson.gamma import ScalarConstant
from dyboson.kernels import NEG, POS, I_UNIT, ZeroModeWord, kernel_canonicalize, osc
from dyboson.rational import RationalFunction as RF
from dyboson.rootdata import build_root_data


def test_psi_is_single_half_line_monomial(d11):
    (m,) = build_currents(d11).current("Psi+", 2).monomials
    assert not m.zero_modes
    assert {h for _, h, _ in m.kernel.terms} == {POS}
    assert all(t.coef == -2 * I_UNIT and t.hbar_power == 1 and t.sh_power == 0 for _, _, t in m.kernel.terms)
    (m,) = build_currents(d11).current("Psi-", 2).monomials
    assert {h for _, h, _ in m.kernel.terms} == {NEG}


def test_left_x_plus(d11):
    (m,) = build_currents(d11).current("X+", 1).monomials
    assert m.coef == RF.hbar() * 2
    assert m.const == ScalarConstant(1, 0, 1)
    assert m.zero_modes == ZeroModeWord.make({osc("a1"): 1, osc("a2"): -1}, {osc("a1"): 1})


def test_odd_x_plus_prefactor(d11):
    (m,) = build_currents(d11).current("X+", 2).monomials
    assert m.const == ScalarConstant(1, 1, Fraction(1, 2))
    assert m.zero_modes.p_map() == {osc("a1"): -1}


def test_right_x_has_difference_pair():
    d = build_root_data(0, 1)
    e = build_currents(d).current("X+", 2)
    assert len(e) == 2
    assert sorted(str(m.coef) for m in e.monomials) == ["-1", "1"]


def test_registry_invariants(data):
    reg = build_currents(data)
    F = data.fermionic_node
    for i in data.nodes:
        qp = total_q_charge(reg.current("X+", i))
        qm = total_q_charge(reg.current("X-", i))
        assert {x: -n for x, n in qp.items()} == qm
        for kind in ("Psi+", "Psi-"):
            (m,) = reg.current(kind, i).monomials
            assert not m.zero_modes
        for kind in ("X+", "X-"):
            e = reg.current(kind, i)
            assert e.parity() == (1 if i == F else 0)
            if i > data.M:
                assert len(e) <= 2
            for m in e.monomials:
                assert kernel_canonicalize(m.kernel) == m.kernel
                for x in m.kernel.oscillators() | set(m.zero_modes.q_map()):
                    top = data.M + 1 if x.family.value == "a" else data.N + 1
                    assert 1 <= x.index <= top


def test_convention_grid():
    assert len(GRID) == 32
    with pytest.raises(ValueError):
        ConventionSet(Fraction(3), Fraction(1, 2))
    with pytest.raises(ValueError):
        ConventionSet(delta_scale=2)


@pytest.mark.parametrize("mn", [(1, 1), (2, 1)])
def test_calibration_unique(mn):
    conv = calibrate(build_root_data(*mn))
    assert conv == ConventionSet(Fraction(1), Fraction(1, 2), 1)


def test_calibration_deterministic(d11):
    assert calibrate(d11) == calibrate(d11)


def test_calibration_fault_injection(d11):
    with pytest.raises(NoConsistentConvention) as info:
        calibrate(d11, mutate=corrupt_prefactor)
    assert not isinstance(info.value, AmbiguousConvention)
    assert len(info.value.diagnostics) == len(GRID)


def test_calibration_ambiguous_subgrid(d11):
    # a grid holding one candidate twice is ambiguous by construction
    with pytest.raises(AmbiguousConvention):
        calibrate(d11, grid=[ConventionSet(), ConventionSet()])


def test_spectral_shift_identity(d11):
    reg = build_currents(d11)
    assert spectral_shift_transform(reg, "identity") == reg


def test_spectral_shift_to_zhang():
    d = build_root_data(1, 1)
    reg = build_currents(d)
    z = spectral_shift_transform(reg, "to-Zhang")
    assert z.current("Psi+", 1) == reg.current("Psi+", 1)
    for i in (2, 3):
        assert z.current("Psi+", i) == reg.current("Psi+", i).shift_anchor("z", d.M - i)
        assert z.current("X-", i) == reg.current("X-", i).shift_anchor("z", d.M - i)
    with pytest.raises(ValueError):
        spectral_shift_transform(reg, "sideways")


def test_missing_current(d11):
    from dyboson.currents import empty_registry

    with pytest.raises(KeyError, match="missing current"):
        empty_registry(d11).current("X+", 1)
