"""Normal-ordered vertex monomials, their products, exchange factors and contact terms.

Monomials carry a rational coefficient in ``u = mu - nu``; the two spectral
symbols are the fixed names ``"mu"`` and ``"nu"``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .gamma import (
    ContractionError,
    GammaProduct,
    ScalarConstant,
    gamma_reduce,
    laurent_integrand,
    regularized_log_integral,
)
from .kernels import (
    NEG,
    NORM,
    POS,
    ExponentKernel,
    Family,
    Gauss,
    ZeroModeWord,
    _laurent_add,
    gauss,
    laurent_mul,
    word_product,
)
from .rational import RationalFunction

MU, NU = "mu", "nu"


class RelationFailure(Exception):
    """An operator identity does not hold; ``args[0]`` is the mismatch report."""


class NonUniformExchange(RelationFailure):
    pass


class HigherOrderPole(ValueError):
    pass


class NoSpectralSlot(ValueError):
    pass


@dataclass(frozen=True)
class VertexMonomial:
    const: ScalarConstant
    coef: RationalFunction
    kernel: ExponentKernel
    zero_modes: ZeroModeWord

    @classmethod
    def make(cls, kernel: ExponentKernel, zero_modes: ZeroModeWord = ZeroModeWord(),
             const: ScalarConstant = ScalarConstant(), coef: RationalFunction | None = None) -> "VertexMonomial":
        r, rest = const.split()
        coef = r if coef is None else coef * r
        return cls(rest, coef, kernel, zero_modes)

    @classmethod
    def identity(cls) -> "VertexMonomial":
        return cls.make(ExponentKernel.empty())

    def key(self):
        return (self.kernel, self.zero_modes, self.const)

    def with_coef(self, coef: RationalFunction) -> "VertexMonomial":
        return VertexMonomial(self.const, coef, self.kernel, self.zero_modes)

    def operator(self) -> "VertexMonomial":
        """The bare normal-ordered operator: coefficient and constant stripped."""
        return VertexMonomial(ScalarConstant(), RationalFunction.one(), self.kernel, self.zero_modes)

    def q_charge(self) -> dict:
        return self.zero_modes.q_map()

    def __str__(self):
        from .kernels import format_kernel
        pre = []
        if not self.const.is_one():
            pre.append(str(self.const))
        if self.coef != 1:
            pre.append(f"[{self.coef}]")
        return " ".join(pre + [f":exp({format_kernel(self.kernel)}):", str(self.zero_modes)])


@dataclass(frozen=True)
class VertexExpression:
    monomials: tuple[VertexMonomial, ...] = ()

    @classmethod
    def of(cls, monomials: Iterable[VertexMonomial]) -> "VertexExpression":
        acc: dict = {}
        order = []
        for m in monomials:
            k = m.key()
            if k in acc:
                acc[k] = acc[k].with_coef(acc[k].coef + m.coef)
            else:
                acc[k] = m
                order.append(k)
        return cls(tuple(acc[k] for k in order if acc[k].coef))

    def __add__(self, other: "VertexExpression") -> "VertexExpression":
        return VertexExpression.of(self.monomials + other.monomials)

    def __neg__(self) -> "VertexExpression":
        return VertexExpression(tuple(m.with_coef(-m.coef) for m in self.monomials))

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c: RationalFunction | int | Fraction) -> "VertexExpression":
        return VertexExpression.of(m.with_coef(m.coef * c) for m in self.monomials)

    def times_const(self, c: ScalarConstant) -> "VertexExpression":
        return VertexExpression.of(VertexMonomial.make(m.kernel, m.zero_modes, m.const * c, m.coef)
                                   for m in self.monomials)

    def map_kernels(self, f) -> "VertexExpression":
        return VertexExpression.of(VertexMonomial(m.const, m.coef, f(m.kernel), m.zero_modes)
                                   for m in self.monomials)

    def rename_anchor(self, old: str, new: str, offset=Fraction(0)) -> "VertexExpression":
        return self.map_kernels(lambda k: k.rename_anchor(old, new, offset))

    def shift_anchor(self, anchor: str, offset) -> "VertexExpression":
        return self.map_kernels(lambda k: k.shift_anchor(anchor, offset))

    def anchors(self) -> set[str]:
        out: set[str] = set()
        for m in self.monomials:
            out |= m.kernel.anchors()
        return out

    def q_charges(self) -> set:
        return {tuple(sorted(m.q_charge().items(), key=lambda e: e[0])) for m in self.monomials}

    def parity(self) -> int:
        """Z2 grade read off the c-type Q-charge; all monomials must agree."""
        grades = {sum(n for x, n in m.zero_modes.q if x.family is Family.C) % 2 for m in self.monomials}
        if len(grades) > 1:
            raise ValueError("inhomogeneous grading")
        return grades.pop() if grades else 0

    def __len__(self):
        return len(self.monomials)

    def __bool__(self):
        return bool(self.monomials)

    def __str__(self):
        return " + ".join(str(m) for m in self.monomials) or "0"


def normal_product(*parts: VertexMonomial) -> VertexMonomial:
    """``:A B ...:`` -- kernels add, zero-mode charges add, no reordering phase."""
    kernel = ExponentKernel.empty()
    q: dict = defaultdict(int)
    p: dict = defaultdict(Fraction)
    const = ScalarConstant()
    coef = RationalFunction.one()
    for m in parts:
        kernel = kernel + m.kernel
        for x, n in m.zero_modes.q:
            q[x] += n
        for x, k in m.zero_modes.p:
            p[x] += k
        const = const * m.const
        coef = coef * m.coef
    return VertexMonomial.make(kernel, ZeroModeWord.make(q, p), const, coef)


def difference_operator(f: VertexExpression, sigma: Fraction | int = 1) -> VertexExpression:
    """``f(mu + sigma*hbar) - f(mu - sigma*hbar)`` on the single spectral slot of ``f``."""
    anchors = f.anchors()
    if not anchors:
        if all(not m.kernel for m in f.monomials):
            return VertexExpression()
        raise NoSpectralSlot("field has no spectral slot to shift")
    if len(anchors) != 1:
        raise NoSpectralSlot(f"ambiguous spectral slot among {sorted(anchors)}")
    (a,) = anchors
    return f.shift_anchor(a, Fraction(sigma)) - f.shift_anchor(a, -Fraction(sigma))


# --- contractions --------------------------------------------------------------

def contraction_laurent(ka: ExponentKernel, kb: ExponentKernel) -> dict[tuple[str, str], dict[int, Gauss]]:
    """Integrand of the contraction of ``ka``'s annihilation part with ``kb``'s creation part.

    Result per anchor pair: Laurent polynomial in ``w`` multiplying
    ``exp(-i(alpha - beta) t)/t`` on ``t > 0``.
    """
    out: dict = defaultdict(dict)
    neg_groups = defaultdict(list)
    for (x, half, anchor, hp), num in kb.groups():
        if half == NEG:
            neg_groups[x].append((anchor, hp, num))
    for (x, half, alpha, pa), na in ka.groups():
        if half != POS:
            continue
        for beta, pb, nb in neg_groups.get(x, ()):
            if alpha is None or beta is None:
                raise ContractionError("contraction of an anchor-free kernel")
            if pa + pb != 2:
                raise ContractionError(f"hbar power {pa + pb - 2} left in contraction integrand")
            # A(t) B(-t) * norm * sh^2/((i hbar)^2 t) with both kernels over one sh each
            nb_flipped = {-e: c for e, c in nb.items()}
            acc = out[(alpha, beta)]
            for k, c in laurent_mul(na, nb_flipped).items():
                _laurent_add(acc, k, gauss(NORM[x.family]) * c)
    return {k: v for k, v in out.items()}


def contraction(ka: ExponentKernel, kb: ExponentKernel) -> dict[tuple[str, str], GammaProduct]:
    return {pair: regularized_log_integral(laurent_integrand(lp))
            for pair, lp in contraction_laurent(ka, kb).items()}


def _pair_rational(pair: tuple[str, str], g: GammaProduct) -> tuple[RationalFunction, ScalarConstant]:
    r, c = gamma_reduce(g)
    if pair == (MU, NU):
        return r, c
    if pair == (NU, MU):
        return r.negate_u(), c
    raise ContractionError(f"contraction between anchors {pair}; only mu/nu supported")


def multiply_monomials(a: VertexMonomial, b: VertexMonomial) -> VertexMonomial:
    coef = a.coef * b.coef
    const = a.const * b.const
    for pair, g in contraction(a.kernel, b.kernel).items():
        r, c = _pair_rational(pair, g)
        coef = coef * r
        const = const * c
    word, phase = word_product(a.zero_modes, b.zero_modes)
    const = const * ScalarConstant(phase)
    return VertexMonomial.make(a.kernel + b.kernel, word, const, coef)


def multiply(a: VertexExpression, b: VertexExpression) -> VertexExpression:
    return VertexExpression.of(multiply_monomials(ma, mb) for ma in a.monomials for mb in b.monomials)


# --- exchange relations --------------------------------------------------------

@dataclass(frozen=True)
class ExchangeResult:
    R: RationalFunction
    sign: int

    @property
    def total(self) -> RationalFunction:
        return self.R * self.sign


def _by_key(e: VertexExpression) -> dict:
    return {m.key(): m.coef for m in e.monomials}


def exchange_relation(a: VertexExpression, b: VertexExpression) -> ExchangeResult:
    """``a(mu) b(nu) = sign * R(u) * b(nu) a(mu)``; ``sign`` is the Koszul sign."""
    ab = _by_key(multiply(a, b))
    ba = _by_key(multiply(b, a))
    if set(ab) != set(ba):
        raise NonUniformExchange(
            f"normal-ordered supports differ: {len(set(ab) - set(ba))} terms only in a*b, "
            f"{len(set(ba) - set(ab))} only in b*a")
    ratio = None
    for key, cab in ab.items():
        r = cab / ba[key]
        if ratio is None:
            ratio = r
        elif r != ratio:
            raise NonUniformExchange(f"exchange factor {r} differs from {ratio} on another term")
    if ratio is None:
        raise NonUniformExchange("empty product")
    sign = -1 if (a.parity() and b.parity()) else 1
    return ExchangeResult(ratio * sign, sign)


# --- contact terms -------------------------------------------------------------

@dataclass(frozen=True)
class DeltaTerm:
    """``residue * delta(u - pole*hbar) * merged`` with ``merged`` anchored at ``nu``."""

    pole: Fraction
    residue: RationalFunction
    const: ScalarConstant
    merged: VertexMonomial

    def __str__(self):
        c = "" if self.const.is_one() else f"{self.const}*"
        return f"{c}({self.residue}) delta(u - {self.pole}*hbar) {self.merged}"


def commutator_delta_decomposition(a: VertexExpression, b: VertexExpression,
                                   bracket: str = "commutator",
                                   delta_scale: int = 1) -> list[DeltaTerm]:
    """Contact terms of ``[a(mu), b(nu)]`` (or the anticommutator).

    Each normal-ordered term of ``a*b`` and ``b*a`` must carry the same rational
    coefficient up to the bracket sign; the two orderings are its two boundary
    values, whose difference is the sum over simple poles of residue times a
    formal delta.
    """
    if bracket not in ("commutator", "anticommutator"):
        raise ValueError(bracket)
    s = 1 if bracket == "commutator" else -1
    ab = {m.key(): m for m in multiply(a, b).monomials}
    ba = {m.key(): m for m in multiply(b, a).monomials}
    mismatch = []
    for key in set(ab) | set(ba):
        f = ab[key].coef if key in ab else RationalFunction.zero()
        g = ba[key].coef if key in ba else RationalFunction.zero()
        if f != g * s:
            mismatch.append(f"a*b coefficient {f} vs {'' if s == 1 else '-'}b*a coefficient {g * s}")
    if mismatch:
        raise RelationFailure("regular parts do not cancel: " + "; ".join(sorted(mismatch)))
    terms: dict = {}
    for key, m in ab.items():
        for pole, order in sorted(m.coef.u_poles().items()):
            if order != 1:
                raise HigherOrderPole(f"pole of order {order} at u = {pole}*hbar")
            res = m.coef.residue(pole) * delta_scale
            merged = VertexMonomial(ScalarConstant(), RationalFunction.one(),
                                    m.kernel.rename_anchor(MU, NU, pole), m.zero_modes)
            tkey = (pole, merged.key(), m.const)
            if tkey in terms:
                prev = terms[tkey]
                terms[tkey] = DeltaTerm(pole, prev.residue + res, prev.const, merged)
            else:
                terms[tkey] = DeltaTerm(pole, res, m.const, merged)
    return sorted((t for t in terms.values() if t.residue), key=lambda t: t.pole)


def merged_operator_equals(m: VertexMonomial, target: VertexMonomial) -> tuple[bool, str]:
    if m.const != target.const:
        return False, f"ScalarConstant {m.const} != {target.const}"
    if m.coef != target.coef:
        return False, f"coefficient {m.coef} != {target.coef}"
    if m.kernel != target.kernel:
        from .kernels import format_term
        left = set(m.kernel.terms)
        right = set(target.kernel.terms)
        diff = sorted(left ^ right, key=lambda e: (str(e[0]), e[1], e[2].sort_key()))
        first = diff[0]
        side = "computed" if first in left else "target"
        return False, f"KernelTerm {format_term(*first)} only in {side}"
    if m.zero_modes != target.zero_modes:
        return False, f"zero modes {m.zero_modes} != {target.zero_modes}"
    return True, "equal"
