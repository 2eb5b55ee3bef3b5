"""Level-one bosonized Drinfeld currents and calibration of notational constants.

Every current is stored at the placeholder spectral symbol ``"z"`` and renamed
on lookup.  Field envelopes:

* ``lambda_i(mu; beta)``: kernel ``-i*hbar/sh * lambda_hat_i * e^(i beta hbar |t|)``
  on both half-lines, zero modes ``e^(Q_lambda_i)``;
* ``c_j(mu; beta)``: the same with ``c_j``, zero modes ``e^(Q_c_j)``;
* ``Psi_i^+(mu)``: kernel ``-2i*hbar * lambda_hat_i`` on ``t > 0`` only,
  ``Psi_i^-(mu)``: ``+2i*hbar * lambda_hat_i`` on ``t < 0`` only.

Inverse fields negate kernel and Q-charge.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .gamma import ScalarConstant
from .kernels import (
    I_UNIT,
    NEG,
    POS,
    ExponentKernel,
    Family,
    OscillatorId,
    ZeroModeWord,
    gauss,
    lambda_hat_kernel,
    oscillator_kernel,
    q_charge_of_lambda,
)
from .rootdata import SuperCartanData
from .vertex import VertexExpression, VertexMonomial, difference_operator, normal_product

PLACEHOLDER = "z"
KINDS = ("X+", "X-", "Psi+", "Psi-")
GRID_VALUES = (Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2))
DELTA_SCALES = (1, -1)


class NoConsistentConvention(RuntimeError):
    """No calibration candidate passes; ``diagnostics`` maps candidates to failures."""

    def __init__(self, message: str, diagnostics: Mapping | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class AmbiguousConvention(NoConsistentConvention):
    pass


@dataclass(frozen=True, order=True)
class ConventionSet:
    """``sigma_D``: D_hbar shift; ``sigma_pm``: mu_pm = mu +- sigma_pm*hbar; ``delta_scale``: delta normalization."""

    sigma_D: Fraction = Fraction(1)
    sigma_pm: Fraction = Fraction(1, 2)
    delta_scale: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sigma_D", Fraction(self.sigma_D))
        object.__setattr__(self, "sigma_pm", Fraction(self.sigma_pm))
        if self.sigma_D not in GRID_VALUES or self.sigma_pm not in GRID_VALUES:
            raise ValueError(f"conventions outside the calibration grid: {self}")
        if self.delta_scale not in DELTA_SCALES:
            raise ValueError(f"delta_scale must be +1 or -1, got {self.delta_scale}")

    def __str__(self):
        return f"sigma_D={self.sigma_D}, sigma_pm={self.sigma_pm}, delta_scale={self.delta_scale:+d}"


GRID = tuple(ConventionSet(d, p, s) for d, p, s in itertools.product(GRID_VALUES, GRID_VALUES, DELTA_SCALES))


# --- fields ------------------------------------------------------------------

def _field(weight: ExponentKernel, q: Mapping[OscillatorId, int], beta: Fraction, inverse: bool,
           anchor: str = PLACEHOLDER) -> VertexMonomial:
    sign = -1 if inverse else 1
    kernel = weight.dress(coef=-I_UNIT * sign, hbar_power=1, anchor=anchor, beta=beta, inverse_sh=True)
    return VertexMonomial.make(kernel, ZeroModeWord.make({x: sign * n for x, n in q.items()}))


def lambda_field(data: SuperCartanData, i: int, beta=Fraction(0), inverse: bool = False,
                 anchor: str = PLACEHOLDER) -> VertexMonomial:
    return _field(lambda_hat_kernel(data, i), q_charge_of_lambda(data, i), Fraction(beta), inverse, anchor)


def c_field(j: int, beta=Fraction(0), inverse: bool = False, anchor: str = PLACEHOLDER) -> VertexMonomial:
    x = OscillatorId(Family.C, j)
    return _field(oscillator_kernel(x), {x: 1}, Fraction(beta), inverse, anchor)


def psi_field(data: SuperCartanData, i: int, sign: str, anchor: str = PLACEHOLDER) -> VertexMonomial:
    half, coef = (POS, -2 * I_UNIT) if sign == "+" else (NEG, 2 * I_UNIT)
    kernel = lambda_hat_kernel(data, i).dress(halves=(half,), coef=coef, hbar_power=1, anchor=anchor)
    return VertexMonomial.make(kernel)


def _klein(data: SuperCartanData, sign: int) -> ZeroModeWord:
    return ZeroModeWord.make(p={OscillatorId(Family.A, j): sign for j in range(1, data.M + 1)})


def _times_word(e: VertexExpression, word: ZeroModeWord) -> VertexExpression:
    return VertexExpression.of(normal_product(m, VertexMonomial.make(ExponentKernel.empty(), word))
                               for m in e.monomials)


def _product(parts: Iterable[VertexExpression | VertexMonomial]) -> VertexExpression:
    """Normal product distributed over sums."""
    exprs = [VertexExpression((p,)) if isinstance(p, VertexMonomial) else p for p in parts]
    out = []
    for combo in itertools.product(*(e.monomials for e in exprs)):
        out.append(normal_product(*combo))
    return VertexExpression.of(out)


def _x_current(data: SuperCartanData, i: int, sign: str, conv: ConventionSet) -> VertexExpression:
    F = data.fermionic_node
    plus = sign == "+"
    lam = lambda_field(data, i, Fraction(1, 2) if plus else Fraction(-1, 2), inverse=not plus)
    if i < F:
        word = ZeroModeWord.make(p={OscillatorId(Family.A, i): 1 if plus else -1})
        return VertexExpression((normal_product(lam, VertexMonomial.make(ExponentKernel.empty(), word,
                                                                        ScalarConstant(1, 2, 1))),))
    if i == F:
        pref = VertexMonomial.make(ExponentKernel.empty(), ZeroModeWord(), ScalarConstant(1, 1, Fraction(1, 2)))
        if plus:
            body = _product([lam, c_field(1), pref])
        else:
            body = _product([lam, difference_operator(VertexExpression((c_field(1, inverse=True),)), conv.sigma_D),
                             pref])
        return _times_word(body, _klein(data, -1 if plus else 1))
    j = i - data.M - 1
    if plus:
        d = difference_operator(VertexExpression((c_field(j, inverse=True),)), conv.sigma_D)
        return _product([lam, d, c_field(j + 1)])
    d = difference_operator(VertexExpression((c_field(j + 1, inverse=True),)), conv.sigma_D)
    return _product([lam, c_field(j), d])


# --- registry ----------------------------------------------------------------

@dataclass(frozen=True)
class CurrentRegistry:
    data: SuperCartanData
    conventions: ConventionSet
    currents: Mapping[tuple[str, int], VertexExpression] = field(default_factory=dict)

    def current(self, kind: str, i: int, anchor: str = PLACEHOLDER) -> VertexExpression:
        try:
            e = self.currents[(kind, i)]
        except KeyError:
            raise KeyError(f"missing current {kind}_{i}") from None
        return e if anchor == PLACEHOLDER else e.rename_anchor(PLACEHOLDER, anchor)

    def keys(self):
        return sorted(self.currents, key=lambda k: (k[1], KINDS.index(k[0])))

    def with_current(self, kind: str, i: int, expr: VertexExpression) -> "CurrentRegistry":
        new = dict(self.currents)
        new[(kind, i)] = expr
        return replace(self, currents=new)

    def __eq__(self, other):
        return (isinstance(other, CurrentRegistry) and self.data == other.data
                and self.conventions == other.conventions and dict(self.currents) == dict(other.currents))

    def __hash__(self):
        return hash((self.data, self.conventions, tuple(self.keys())))


def build_currents(data: SuperCartanData, conv: ConventionSet | None = None) -> CurrentRegistry:
    conv = conv or ConventionSet()
    out: dict = {}
    for i in data.nodes:
        out[("X+", i)] = _x_current(data, i, "+", conv)
        out[("X-", i)] = _x_current(data, i, "-", conv)
        out[("Psi+", i)] = VertexExpression((psi_field(data, i, "+"),))
        out[("Psi-", i)] = VertexExpression((psi_field(data, i, "-"),))
    return CurrentRegistry(data, conv, out)


def empty_registry(data: SuperCartanData, conv: ConventionSet | None = None) -> CurrentRegistry:
    return CurrentRegistry(data, conv or ConventionSet(), {})


def corrupt_prefactor(reg: CurrentRegistry, kind: str = "X+", i: int | None = None,
                      factor: int | Fraction = 2) -> CurrentRegistry:
    """Fault injection: scale the scalar prefactor of one current (all nodes if ``i`` is None)."""
    nodes = list(reg.data.nodes) if i is None else [i]
    for n in nodes:
        reg = reg.with_current(kind, n, reg.current(kind, n).times_const(ScalarConstant(gauss(Fraction(factor)))))
    return reg


def total_q_charge(e: VertexExpression) -> dict[OscillatorId, int]:
    charges = e.q_charges()
    if len(charges) != 1:
        raise ValueError("inhomogeneous Q-charge")
    return dict(charges.pop())


# --- calibration ---------------------------------------------------------------

def calibration_checks(data: SuperCartanData) -> list:
    """Catalog entries probed by calibration: diagonal brackets and all Psi-X conjugations."""
    from .relations import relation_catalog

    specs = relation_catalog(data)
    return [s for s in specs
            if (s.family == "XXbracket" and s.i == s.j) or s.family in ("PsiX-same", "PsiX-adjacent")]


def calibrate(data: SuperCartanData, mutate: Callable[[CurrentRegistry], CurrentRegistry] | None = None,
              grid: Iterable[ConventionSet] = GRID) -> ConventionSet:
    """Unique grid point under which the calibration relations all hold."""
    from .relations import verify

    if data.rank < 1:
        raise ValueError("calibration needs at least one node")
    checks = calibration_checks(data)
    passing = []
    diagnostics = {}
    built: dict = {}
    for conv in grid:
        # currents depend on sigma_D only
        if conv.sigma_D not in built:
            built[conv.sigma_D] = build_currents(data, ConventionSet(conv.sigma_D))
        reg = replace(built[conv.sigma_D], conventions=conv)
        if mutate is not None:
            reg = mutate(reg)
        failure = None
        for spec in checks:
            report = verify(reg, spec)
            if report.verdict != "pass":
                failure = f"{spec.id}: {report.detail}"
                break
        if failure is None:
            passing.append(conv)
        else:
            diagnostics[str(conv)] = failure
    if not passing:
        raise NoConsistentConvention("no convention on the grid satisfies the calibration relations", diagnostics)
    if len(passing) > 1:
        raise AmbiguousConvention(
            f"{len(passing)} conventions pass: " + "; ".join(str(c) for c in passing),
            {str(c): "pass" for c in passing})
    return passing[0]


# --- spectral shifts -----------------------------------------------------------

def zhang_offset(data: SuperCartanData, i: int) -> int:
    return i - 1 if i < data.fermionic_node else data.M - i


def spectral_shift_transform(reg: CurrentRegistry, mode: str = "identity") -> CurrentRegistry:
    if mode == "identity":
        return reg
    if mode != "to-Zhang":
        raise ValueError(f"unknown mode {mode!r}")
    out = {key: e.shift_anchor(PLACEHOLDER, zhang_offset(reg.data, key[1])) for key, e in reg.currents.items()}
    return replace(reg, currents=out)
