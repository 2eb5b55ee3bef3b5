"""Catalog of the defining relations and the verifier that checks them on a registry.

Exchange-type relations are compared through ``a(mu) b(nu) = sign*R(u) b(nu) a(mu)``:

* Psi-Psi relations ``B^-1 A = E A B^-1`` (or ``A B = E B A``) give ``E = R``;
* conjugations ``Psi(mu)^-1 X(nu) Psi(mu) = E X(nu)`` give ``E = 1/R``;
* X-X relations ``p(u) a b = q(u) b a`` give ``E = q/p = R``.

Bracket relations are compared term by term through their contact terms.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .currents import CurrentRegistry, build_currents, total_q_charge
from .gamma import ContractionError, IrreducibleGammaError
from .rational import RationalFunction
from .rootdata import SuperCartanData, node_sector
from .vertex import (
    MU,
    NU,
    HigherOrderPole,
    RelationFailure,
    VertexMonomial,
    commutator_delta_decomposition,
    exchange_relation,
    merged_operator_equals,
)

FAMILIES = (
    "PsiPsi-adjacent",
    "PsiPsi-same-node",
    "PsiPsi-fermionic",
    "PsiX-same",
    "PsiX-adjacent",
    "XX-same",
    "XX-adjacent",
    "XXbracket",
)
PASS, FAIL = "pass", "fail"


@dataclass(frozen=True)
class ExpectedDelta:
    """``residue * delta(u - pole*hbar) * target(nu + offset*hbar)``."""

    pole: Fraction
    residue: RationalFunction
    target: str
    offset: Fraction

    def __str__(self):
        return f"{_delta_text(self.pole, self.residue)}*{self.target}(nu{_hbar_offset(self.offset)})"


@dataclass(frozen=True)
class RelationSpec:
    family: str
    i: int
    j: int | None
    variant: str
    sector: str
    a: tuple[str, int]
    b: tuple[str, int]
    bracket: str                      # exchange | commutator | anticommutator
    form: str = "exchange"            # exchange | conjugation (bracket families ignore it)
    expected: RationalFunction | None = None
    expected_sign: int = 1
    expected_deltas: tuple[ExpectedDelta, ...] = ()
    note: str = ""

    @property
    def id(self) -> str:
        idx = f"{self.i}" if self.j is None else f"{self.i},{self.j}"
        return f"{self.family}[{self.variant}]({idx})"

    def sort_key(self):
        return (FAMILIES.index(self.family), self.i, self.j or 0, self.variant)

    def expected_text(self) -> str:
        if self.bracket == "exchange":
            return _exchange_text(self.expected, self.expected_sign)
        return " + ".join(str(d) for d in self.expected_deltas) or "0"


@dataclass
class VerificationReport:
    relation: str
    family: str
    i: int
    j: int | None
    verdict: str
    computed: str
    expected: str
    detail: str = ""
    seconds: float = field(default=0.0, compare=False)

    def as_json(self) -> dict:
        d = asdict(self)
        d.pop("seconds")
        return d


# --- expected values -------------------------------------------------------------

def _fac(*offsets_num, den=(), coef=1) -> RationalFunction:
    """Product of ``(u + k*hbar)`` over numerator offsets divided by the denominator ones."""
    return RationalFunction.from_factors([(k, 1) for k in offsets_num] + [(k, -1) for k in den], coef)


def _pm(factors_num, factors_den, shift: Fraction) -> RationalFunction:
    """Factors ``(mu_pm - nu + k*hbar)`` with ``mu_pm - nu = u + shift*hbar``."""
    return _fac(*(shift + k for k in factors_num), den=tuple(shift + k for k in factors_den))


def _psi_x_expected(data: SuperCartanData, i: int, psi: str, x: str, adjacent: bool, sigma: Fraction):
    """Displayed conjugation factor for ``Psi^psi_(i or i+1)`` around ``X^x_i``."""
    F = data.fermionic_node
    plus, minus = sigma, -sigma
    left = i < F
    if not adjacent:
        if i == F:
            return RationalFunction.one()
        table = {
            ("+", "+"): (plus, (-3,), (1,)),    # i > F form; i < F is the inverse
            ("-", "+"): (minus, (-1,), (3,)),
            ("+", "-"): (minus, (3,), (-1,)),
            ("-", "-"): (plus, (1,), (-3,)),
        }
        shift, num, den = table[(psi, x)]
        if left:
            num, den = den, num
        return _pm(num, den, shift)
    table = {
        ("+", "+"): (plus, (-2,), (0,)),    # i < F form; i >= F is the inverse
        ("-", "+"): (minus, (0,), (2,)),
        ("+", "-"): (minus, (2,), (0,)),
        ("-", "-"): (plus, (0,), (-2,)),
    }
    shift, num, den = table[(psi, x)]
    if not left:
        num, den = den, num
    return _pm(num, den, shift)


def relation_catalog(data: SuperCartanData, conventions=None) -> list[RelationSpec]:
    from .currents import ConventionSet

    conv = conventions or ConventionSet()
    sigma = conv.sigma_pm
    F = data.fermionic_node
    rank = data.rank
    two_h = RationalFunction.hbar() * 2
    out: list[RelationSpec] = []

    def sec(i):
        return node_sector(data, i).value

    for i in range(1, rank):
        # Psi_(i+1)^-(nu)^-1 Psi_i^+(mu) and Psi_(i+1)^+(nu)^-1 Psi_i^-(mu)
        shifted = _fac(-2, 2, den=(0, 0))
        e1 = shifted if i >= F else 1 / shifted
        e2 = shifted if i < F else 1 / shifted
        out.append(RelationSpec("PsiPsi-adjacent", i, i + 1, "Psi+/Psi-", sec(i), ("Psi+", i), ("Psi-", i + 1),
                                "exchange", expected=e1))
        out.append(RelationSpec("PsiPsi-adjacent", i, i + 1, "Psi-/Psi+", sec(i), ("Psi-", i), ("Psi+", i + 1),
                                "exchange", expected=e2))
    for i in data.nodes:
        if i == F:
            continue
        base = _fac(-3, 3, den=(1, -1))
        out.append(RelationSpec("PsiPsi-same-node", i, None, "Psi+/Psi-", sec(i), ("Psi+", i), ("Psi-", i),
                                "exchange", expected=base if i < F else 1 / base))
    out.append(RelationSpec("PsiPsi-fermionic", F, None, "Psi+/Psi-", sec(F), ("Psi+", F), ("Psi-", F),
                            "exchange", expected=RationalFunction.one()))
    for i in data.nodes:
        for psi in "+-":
            for x in "+-":
                out.append(RelationSpec("PsiX-same", i, None, f"Psi{psi}/X{x}", sec(i), (f"Psi{psi}", i),
                                        (f"X{x}", i), "exchange", "conjugation",
                                        _psi_x_expected(data, i, psi, x, False, sigma)))
    for i in range(1, rank):
        for psi in "+-":
            for x in "+-":
                out.append(RelationSpec("PsiX-adjacent", i, i + 1, f"Psi{psi}/X{x}", sec(i), (f"Psi{psi}", i + 1),
                                        (f"X{x}", i), "exchange", "conjugation",
                                        _psi_x_expected(data, i, psi, x, True, sigma)))
    for i in data.nodes:
        for x in "+-":
            if i == F:
                out.append(RelationSpec("XX-same", i, None, f"X{x}/X{x}", sec(i), (f"X{x}", i), (f"X{x}", i),
                                        "exchange", expected=RationalFunction.one(), expected_sign=-1,
                                        note="odd node: plain anticommutation"))
                continue
            # (u -+ 2hbar) X^-+ X^-+ = (u +- 2hbar) X^-+ X^-+ for i < F, reversed for i > F
            r = _fac(2, den=(-2,)) if x == "-" else _fac(-2, den=(2,))
            out.append(RelationSpec("XX-same", i, None, f"X{x}/X{x}", sec(i), (f"X{x}", i), (f"X{x}", i),
                                    "exchange", expected=r if i < F else 1 / r))
    for i in range(1, rank):
        for x in "+-":
            r = _fac(1, den=(-1,)) if x == "+" else _fac(-1, den=(1,))
            out.append(RelationSpec("XX-adjacent", i, i + 1, f"X{x}/X{x}", sec(i), (f"X{x}", i), (f"X{x}", i + 1),
                                    "exchange", expected=r if i < F else 1 / r))
    pairs = [(i, j) for i in data.nodes for j in data.nodes if i != F and j != F] + [(F, F)]
    for i, j in sorted(pairs):
        bracket = "anticommutator" if i == F else "commutator"
        s = 1 if i == F else -1
        deltas: tuple[ExpectedDelta, ...] = ()
        if i == j:
            deltas = (
                ExpectedDelta(-2 * sigma, -s * two_h, f"Psi+_{i}", -sigma),
                ExpectedDelta(2 * sigma, s * two_h, f"Psi-_{i}", sigma),
            )
        out.append(RelationSpec("XXbracket", i, j, "X+/X-", sec(i), ("X+", i), ("X-", j), bracket,
                                expected_deltas=deltas))
    return sorted(out, key=RelationSpec.sort_key)


# --- verification ------------------------------------------------------------------

def _hbar_offset(k: Fraction) -> str:
    if k == 0:
        return ""
    mag = "" if abs(k) == 1 else f"{abs(k)}*"
    return f" {'+' if k > 0 else '-'} {mag}hbar"


def _delta_text(pole: Fraction, residue) -> str:
    return f"({residue})*delta(u{_hbar_offset(-pole)})"


def _exchange_text(r: RationalFunction, sign: int) -> str:
    return f"{'-' if sign < 0 else ''}[{r}]"


def _fail(spec, computed, detail, t0) -> VerificationReport:
    return VerificationReport(spec.id, spec.family, spec.i, spec.j, FAIL, computed, spec.expected_text(),
                              detail, time.perf_counter() - t0)


def verify(reg: CurrentRegistry, spec: RelationSpec) -> VerificationReport:
    t0 = time.perf_counter()
    if spec.family in ("PsiX-same", "PsiX-adjacent", "XXbracket") and reg.conventions is not None:
        # expected values depend on sigma_pm; rebuild the entry under the registry's conventions
        spec = _respec(reg, spec)
    try:
        a = reg.current(*spec.a, anchor=MU)
        b = reg.current(*spec.b, anchor=NU)
    except KeyError as exc:
        return _fail(spec, "", exc.args[0], t0)
    try:
        if spec.bracket == "exchange":
            return _verify_exchange(spec, a, b, t0)
        return _verify_bracket(reg, spec, a, b, t0)
    except (RelationFailure, ContractionError, IrreducibleGammaError, HigherOrderPole, ValueError) as exc:
        return _fail(spec, "", f"{type(exc).__name__}: {exc}", t0)


def _respec(reg: CurrentRegistry, spec: RelationSpec) -> RelationSpec:
    for s in _catalog_cached(reg.data, reg.conventions):
        if s.id == spec.id:
            return s
    return spec


_CATALOGS: dict = {}


def _catalog_cached(data, conv):
    key = (data, conv.sigma_pm)
    if key not in _CATALOGS:
        _CATALOGS[key] = relation_catalog(data, conv)
    return _CATALOGS[key]


def _verify_exchange(spec, a, b, t0) -> VerificationReport:
    res = exchange_relation(a, b)
    value = res.R if spec.form == "exchange" else 1 / res.R
    computed = _exchange_text(value, res.sign)
    problems = []
    if value != spec.expected:
        problems.append(f"rational factor {value} != expected {spec.expected}")
    if res.sign != spec.expected_sign:
        problems.append(f"sign {res.sign:+d} != expected {spec.expected_sign:+d}")
    verdict = FAIL if problems else PASS
    return VerificationReport(spec.id, spec.family, spec.i, spec.j, verdict, computed, spec.expected_text(),
                              "; ".join(problems), time.perf_counter() - t0)


def _target(reg: CurrentRegistry, name: str, offset: Fraction) -> VertexMonomial:
    kind, node = name.split("_")
    e = reg.current(kind, int(node), anchor=NU).shift_anchor(NU, offset)
    (m,) = e.monomials
    return m


def _verify_bracket(reg, spec, a, b, t0) -> VerificationReport:
    terms = commutator_delta_decomposition(a, b, spec.bracket, reg.conventions.delta_scale)
    problems = []
    labels = []
    expected = {d.pole: d for d in spec.expected_deltas}
    for t in terms:
        label = "<operator>"
        exp = expected.get(t.pole)
        if exp is not None:
            target = _target(reg, exp.target, exp.offset)
            ok, report = merged_operator_equals(t.merged, target)
            if ok:
                label = f"{exp.target}(nu{_hbar_offset(exp.offset)})"
            else:
                problems.append(f"merged operator at u = {t.pole}*hbar differs from {exp.target}: {report}")
            if not t.const.is_one():
                problems.append(f"ScalarConstant prefactor {t.const} at u = {t.pole}*hbar, expected 1")
            elif t.residue != exp.residue:
                problems.append(f"residue {t.residue} at u = {t.pole}*hbar != expected {exp.residue} "
                                f"(ScalarConstant/rational prefactor mismatch)")
        else:
            problems.append(f"unexpected pole at u = {t.pole}*hbar")
        const = "" if t.const.is_one() else f"{t.const}*"
        labels.append(f"{const}{_delta_text(t.pole, t.residue)}*{label}")
    seen = {t.pole for t in terms}
    for pole in expected:
        if pole not in seen:
            problems.append(f"missing pole at u = {pole}*hbar")
    if not problems and spec.expected_deltas:
        # charge conservation: both sides of the bracket carry the charge of Psi (zero)
        q = {x: n for x, n in _sum_charges(a, b).items() if n}
        if q:
            problems.append(f"Q-charge not conserved: {q}")
    computed = " + ".join(labels) or "0"
    verdict = FAIL if problems else PASS
    return VerificationReport(spec.id, spec.family, spec.i, spec.j, verdict, computed, spec.expected_text(),
                              "; ".join(problems), time.perf_counter() - t0)


def _sum_charges(a, b) -> dict:
    out = dict(total_q_charge(a))
    for x, n in total_q_charge(b).items():
        out[x] = out.get(x, 0) + n
    return out


def charge_balance(reg: CurrentRegistry, spec: RelationSpec) -> bool:
    """Total Q-charge of the left side equals that of the right side."""
    a = reg.current(*spec.a)
    b = reg.current(*spec.b)
    lhs = {x: n for x, n in _sum_charges(a, b).items() if n}
    if spec.bracket == "exchange":
        rhs = {x: n for x, n in _sum_charges(b, a).items() if n}
        return lhs == rhs
    if not spec.expected_deltas:
        return True
    for d in spec.expected_deltas:
        kind, node = d.target.split("_")
        rhs = {x: n for x, n in total_q_charge(reg.current(kind, int(node))).items() if n}
        if lhs != rhs:
            return False
    return True


# --- batch runs -----------------------------------------------------------------

_WORKER: dict = {}


def _init_worker(data, conv):
    # sympy ring elements do not pickle reliably, so workers rebuild registry and catalog
    _WORKER["reg"] = build_currents(data, conv)
    _WORKER["specs"] = {s.id: s for s in relation_catalog(data, conv)}


def _verify_in_worker(spec_id: str):
    return verify(_WORKER["reg"], _WORKER["specs"][spec_id])


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("DYBOSON_JOBS", "1")))
    except ValueError:
        return 1


def verify_all(reg: CurrentRegistry, specs: list[RelationSpec] | None = None,
               jobs: int | None = None) -> list[VerificationReport]:
    specs = sorted(specs if specs is not None else relation_catalog(reg.data, reg.conventions),
                   key=RelationSpec.sort_key)
    jobs = default_jobs() if jobs is None else jobs
    if jobs > 1 and len(specs) > 1 and _rebuildable(reg, specs):
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(reg.data, reg.conventions)) as ex:
            return list(ex.map(_verify_in_worker, [s.id for s in specs]))
    return [verify(reg, s) for s in specs]


def _rebuildable(reg: CurrentRegistry, specs) -> bool:
    catalog = {s.id: s for s in relation_catalog(reg.data, reg.conventions)}
    return all(catalog.get(s.id) == s for s in specs) and reg == build_currents(reg.data, reg.conventions)


def summarize(reports: list[VerificationReport]) -> dict:
    passed = sum(r.verdict == PASS for r in reports)
    return {"pass": passed, "fail": len(reports) - passed}
