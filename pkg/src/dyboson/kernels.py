"""Exponent kernels of vertex operators built from continuous-parameter bosons.

A vertex operator is ``exp(sum_x int K_x(t) x(t) dt)`` with the integral split
at ``t = 0``.  On each half-line ``K_x`` is a finite sum of terms

    coef * hbar**p * exp(-i*shift*hbar*t) * exp(-i*anchor*t) * sh(i*hbar*t)**(-d)

with ``d`` in ``{0, 1}``.  Writing ``w = exp(-i*hbar*t/2)`` every half-line
kernel is a Laurent polynomial in ``w`` over ``sh``, which is what the
canonical form below is built on.  ``t > 0`` carries annihilation modes and
``t < 0`` creation modes.
"""
from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from sympy.polys.domains import QQ, QQ_I

from .rootdata import SuperCartanData

Gauss = type(QQ_I(0, 0))
ZERO = QQ_I(0, 0)
ONE = QQ_I(1, 0)
I_UNIT = QQ_I(0, 1)


def gauss(x) -> Gauss:
    if isinstance(x, Gauss):
        return x
    if isinstance(x, complex):
        raise TypeError("floating point has no place in the symbolic path")
    if isinstance(x, Fraction):
        return QQ_I(QQ(x.numerator, x.denominator), 0)
    return QQ_I(x, 0)


def gauss_key(z: Gauss) -> tuple[Fraction, Fraction]:
    return (Fraction(int(z.x.numerator), int(z.x.denominator)),
            Fraction(int(z.y.numerator), int(z.y.denominator)))


def gauss_complex(z: Gauss) -> complex:
    return complex(float(z.x), float(z.y))


class Family(enum.Enum):
    A = "a"
    B = "b"
    C = "c"


# sign of [x(t), x(t')] relative to sh^2(i hbar t)/((i hbar)^2 t) delta(t+t')
NORM = {Family.A: 1, Family.B: -1, Family.C: 1}


@dataclass(frozen=True)
class OscillatorId:
    family: Family
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"oscillator index must be positive: {self}")

    def __str__(self) -> str:
        return f"{self.family.value}{self.index}"

    def __lt__(self, other):  # enum members are not orderable
        return (self.family.value, self.index) < (other.family.value, other.index)


def osc(name: str) -> OscillatorId:
    """``osc("a2")`` -> OscillatorId(A, 2)."""
    return OscillatorId(Family(name[0]), int(name[1:]))


def check_oscillator(data: SuperCartanData, x: OscillatorId) -> None:
    top = data.M + 1 if x.family is Family.A else data.N + 1
    if not 1 <= x.index <= top:
        raise ValueError(f"{x} not defined for sl({data.M + 1}|{data.N + 1})")


POS, NEG = "+", "-"


@dataclass(frozen=True)
class KernelTerm:
    coef: Gauss
    hbar_power: int
    anchor: str | None
    shift: Fraction
    sh_power: int

    def sort_key(self):
        return (self.anchor or "", self.shift, self.sh_power, self.hbar_power, gauss_key(self.coef))


# --- Laurent polynomials in w ------------------------------------------------

def _laurent_add(acc: dict, k: int, c) -> None:
    v = acc.get(k, ZERO) + c
    if v:
        acc[k] = v
    else:
        acc.pop(k, None)


def laurent_mul(p: Mapping[int, Gauss], q: Mapping[int, Gauss]) -> dict[int, Gauss]:
    out: dict[int, Gauss] = {}
    for i, a in p.items():
        for j, b in q.items():
            _laurent_add(out, i + j, a * b)
    return out


HALF = QQ_I(QQ(1, 2), 0)
# sh(i hbar t) = (w^-2 - w^2)/2
SH = {-2: HALF, 2: -HALF}


def sh_power(n: int) -> dict[int, Gauss]:
    out = {0: ONE}
    for _ in range(n):
        out = laurent_mul(out, SH)
    return out


def sh_multiple(p: int) -> dict[int, Gauss]:
    """Laurent expansion of sh(i p hbar t) in w."""
    if p == 0:
        return {}
    return {-2 * p: HALF, 2 * p: -HALF}


def exponent(x) -> int | Fraction:
    """Exact Laurent exponent; integral values are kept as ``int``."""
    f = Fraction(x)
    return f.numerator if f.denominator == 1 else f


def _divide_by_sh(num: Mapping[int, Gauss]) -> dict[int, Gauss] | None:
    """Exact quotient num / sh, or None if sh does not divide num."""
    if not num:
        return {}
    # sh only mixes exponents that differ by integers, so divide class by class
    classes: dict = defaultdict(dict)
    for e, c in num.items():
        classes[Fraction(e) % 1][e] = c
    two = QQ_I(2, 0)
    out: dict = {}
    for part in classes.values():
        lo = min(part)
        # part = w^lo * P(w);  sh = w^-2 (1 - w^4)/2;  quotient = 2 w^(lo+2) P/(1-w^4)
        hi = int(max(part) - lo)
        p = [part.get(exponent(lo + k), ZERO) for k in range(hi + 1)]
        q = [ZERO] * (hi + 1)
        for k in range(hi + 1):
            q[k] = p[k] + (q[k - 4] if k >= 4 else ZERO)
        # remainder must vanish: q has degree hi-4
        if any(q[k] for k in range(max(hi - 3, 0), hi + 1)):
            return None
        out.update({exponent(lo + 2 + k): two * c for k, c in enumerate(q[: hi - 3]) if c})
    return out


# --- kernels -------------------------------------------------------------------

GroupKey = tuple  # (OscillatorId, half, anchor, hbar_power)


class ExponentKernel:
    """Canonical exponent kernel; equality is equality of canonical forms."""

    __slots__ = ("_groups", "_terms", "_hash")

    def __init__(self, groups: Mapping[GroupKey, Mapping[int, Gauss]]):
        # groups: numerators over a common sh^1 denominator, keyed per oscillator/half/anchor/hbar power
        self._groups = {k: dict(v) for k, v in groups.items() if v}
        self._terms = self._canonical_terms()
        self._hash = hash(self._terms)

    @classmethod
    def empty(cls) -> "ExponentKernel":
        return cls({})

    @classmethod
    def from_terms(cls, items: Iterable[tuple[OscillatorId, str, KernelTerm]]) -> "ExponentKernel":
        groups: dict = defaultdict(dict)
        for x, half, term in items:
            if half not in (POS, NEG):
                raise ValueError(f"bad half-line {half!r}")
            if term.sh_power not in (0, 1):
                raise ValueError("sh_power must be 0 or 1")
            mono = {exponent(2 * term.shift): term.coef}
            if term.sh_power == 0:
                mono = laurent_mul(mono, SH)
            g = groups[(x, half, term.anchor, term.hbar_power)]
            for k, c in mono.items():
                _laurent_add(g, k, c)
        return cls(groups)

    def _canonical_terms(self):
        out = []
        for (x, half, anchor, hp), num in self._groups.items():
            q = _divide_by_sh(num)
            if q is not None:
                d, poly = 0, q
            else:
                d, poly = 1, num
            for k, c in poly.items():
                out.append((x, half, KernelTerm(c, hp, anchor, Fraction(k, 2), d)))
        out.sort(key=lambda e: ((e[0].family.value, e[0].index), e[1], e[2].sort_key()))
        return tuple(out)

    # views
    @property
    def terms(self) -> tuple[tuple[OscillatorId, str, KernelTerm], ...]:
        return self._terms

    def oscillators(self) -> set[OscillatorId]:
        return {x for x, _, _ in self._terms}

    def anchors(self) -> set[str]:
        return {t.anchor for _, _, t in self._terms if t.anchor is not None}

    def half(self, half: str) -> "ExponentKernel":
        return ExponentKernel({k: v for k, v in self._groups.items() if k[1] == half})

    def groups(self):
        return self._groups.items()

    # algebra
    def __add__(self, other: "ExponentKernel") -> "ExponentKernel":
        groups: dict = defaultdict(dict)
        for src in (self._groups, other._groups):
            for key, num in src.items():
                g = groups[key]
                for k, c in num.items():
                    _laurent_add(g, k, c)
        return ExponentKernel(groups)

    def __neg__(self) -> "ExponentKernel":
        return ExponentKernel({k: {e: -c for e, c in v.items()} for k, v in self._groups.items()})

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c) -> "ExponentKernel":
        c = gauss(c)
        return ExponentKernel({k: {e: c * v for e, v in num.items()} for k, num in self._groups.items()})

    def shift_anchor(self, anchor: str, offset: Fraction) -> "ExponentKernel":
        """Replace ``anchor`` by ``anchor + offset*hbar``."""
        shift = exponent(2 * Fraction(offset))
        groups = {}
        for key, num in self._groups.items():
            if key[2] == anchor:
                num = {exponent(e + shift): c for e, c in num.items()}
            groups[key] = num
        return ExponentKernel(groups)

    def rename_anchor(self, old: str, new: str, offset=Fraction(0)) -> "ExponentKernel":
        """Substitute ``old = new + offset*hbar``."""
        shift = exponent(2 * Fraction(offset))
        groups: dict = defaultdict(dict)
        for (x, half, anchor, hp), num in self._groups.items():
            if anchor == old:
                anchor_new, num = new, {exponent(e + shift): c for e, c in num.items()}
            else:
                anchor_new = anchor
            g = groups[(x, half, anchor_new, hp)]
            for k, c in num.items():
                _laurent_add(g, k, c)
        return ExponentKernel(groups)

    def dress(self, *, halves=(POS, NEG), coef=1, hbar_power=0, anchor=None,
              beta=Fraction(0), inverse_sh=False) -> "ExponentKernel":
        """Multiply an anchor-free weight kernel by a field envelope.

        The envelope is ``coef * hbar**hbar_power * exp(i*beta*hbar*|t|)
        * exp(-i*anchor*t) / sh(i*hbar*t)**inverse_sh`` restricted to ``halves``.
        """
        coef = gauss(coef)
        beta = Fraction(beta)
        groups: dict = defaultdict(dict)
        for (x, half, old_anchor, hp), num in self._groups.items():
            if half not in halves:
                continue
            if old_anchor is not None:
                raise ValueError("dress() expects an anchor-free weight kernel")
            # exp(i beta hbar |t|) = w^(-2 beta) for t>0 and w^(2 beta) for t<0
            s = exponent(-2 * beta if half == POS else 2 * beta)
            new = {exponent(e + s): coef * c for e, c in num.items()}
            if inverse_sh:
                # stored numerators sit over one power of sh already
                new = _divide_by_sh(new)
                if new is None:
                    raise ValueError("weight kernel must be sh-free")
            g = groups[(x, half, anchor, hp + hbar_power)]
            for k, c in new.items():
                _laurent_add(g, k, c)
        return ExponentKernel(groups)

    # identity
    def __eq__(self, other):
        return isinstance(other, ExponentKernel) and self._terms == other._terms

    def __hash__(self):
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"ExponentKernel({format_kernel(self)})"


def kernel_canonicalize(k: ExponentKernel | Iterable) -> ExponentKernel:
    """Canonical form of a kernel or of a raw ``(osc, half, KernelTerm)`` list."""
    if isinstance(k, ExponentKernel):
        return ExponentKernel.from_terms(k.terms)
    return ExponentKernel.from_terms(k)


def _fmt_coef(c: Gauss) -> str:
    re, im = gauss_key(c)
    if im == 0:
        return str(re)
    if re == 0:
        return f"{im}i"
    return f"({re}{'+' if im > 0 else '-'}{abs(im)}i)"


def format_term(x: OscillatorId, half: str, t: KernelTerm) -> str:
    parts = [_fmt_coef(t.coef)]
    if t.hbar_power:
        parts.append("hbar" if t.hbar_power == 1 else f"hbar^{t.hbar_power}")
    if t.anchor:
        parts.append(f"e^(-i{t.anchor}t)")
    if t.shift:
        parts.append(f"e^(-i({t.shift})hbar t)")
    body = "*".join(parts) + ("/sh" if t.sh_power else "")
    return f"[{half}]{x}:" + body


def format_kernel(k: ExponentKernel) -> str:
    return " + ".join(format_term(*e) for e in k.terms) or "0"


# --- lambda-hat combinations and bracket densities -------------------------------

def _weight(x: OscillatorId, sign: int, exponent_sign: int) -> list:
    """``sign * x * exp(exponent_sign * i*hbar*|t|/2)`` on both half-lines."""
    # exp(i e hbar |t|/2): shift -e/2 on t>0, +e/2 on t<0
    return [
        (x, POS, KernelTerm(gauss(sign), 0, None, Fraction(-exponent_sign, 2), 0)),
        (x, NEG, KernelTerm(gauss(sign), 0, None, Fraction(exponent_sign, 2), 0)),
    ]


def lambda_hat_kernel(data: SuperCartanData, i: int) -> ExponentKernel:
    """Oscillator content of the simple-root combination for node ``i``."""
    data._check(i)
    M = data.M
    A, B = Family.A, Family.B
    if i <= M:
        items = _weight(OscillatorId(A, i), 1, 1) + _weight(OscillatorId(A, i + 1), -1, -1)
    elif i == M + 1:
        items = _weight(OscillatorId(A, M + 1), 1, 1) + _weight(OscillatorId(B, 1), 1, 1)
    else:
        j = i - M - 1
        items = _weight(OscillatorId(B, j), -1, -1) + _weight(OscillatorId(B, j + 1), 1, 1)
    return ExponentKernel.from_terms(items)


def oscillator_kernel(x: OscillatorId) -> ExponentKernel:
    return ExponentKernel.from_terms(_weight(x, 1, 0))


def q_charge_of_lambda(data: SuperCartanData, i: int) -> dict[OscillatorId, int]:
    data._check(i)
    M = data.M
    A, B = Family.A, Family.B
    if i <= M:
        return {OscillatorId(A, i): 1, OscillatorId(A, i + 1): -1}
    if i == M + 1:
        return {OscillatorId(A, M + 1): 1, OscillatorId(B, 1): 1}
    j = i - M - 1
    return {OscillatorId(B, j): -1, OscillatorId(B, j + 1): 1}


@dataclass(frozen=True)
class BracketDensity:
    """``sum_k scale_k * sh(i p_k hbar t) sh(i q_k hbar t) / ((i hbar)^2 t) * delta(t+t')``.

    ``halves`` optionally carries an explicit Laurent numerator per half-line
    (numerator of ``1/((i hbar)^2 t)``) for densities built by bilinearity.
    """

    sh_pairs: tuple[tuple[int, int, Fraction], ...] = ()
    explicit: tuple[tuple[str, tuple[tuple[int, tuple[Fraction, Fraction]], ...]], ...] | None = None

    def laurent(self, half: str = POS) -> dict[int, Gauss]:
        if self.explicit is not None:
            for h, items in self.explicit:
                if h == half:
                    return {k: QQ_I(QQ(re.numerator, re.denominator), QQ(im.numerator, im.denominator))
                            for k, (re, im) in items}
            return {}
        out: dict[int, Gauss] = {}
        for p, q, scale in self.sh_pairs:
            for k, c in laurent_mul(sh_multiple(p), sh_multiple(q)).items():
                _laurent_add(out, k, gauss(scale) * c)
        return out

    def is_zero(self) -> bool:
        return not self.laurent(POS) and not self.laurent(NEG)

    def equals(self, other: "BracketDensity") -> bool:
        return all(self.laurent(h) == other.laurent(h) for h in (POS, NEG))


def oscillator_bracket(x: OscillatorId, y: OscillatorId) -> BracketDensity:
    if x != y:
        return BracketDensity()
    return BracketDensity(((1, 1, Fraction(NORM[x.family])),))


def cartan_density(a: int) -> BracketDensity:
    """``sh(i a hbar t) sh(i hbar t)/((i hbar)^2 t)``."""
    return BracketDensity(((a, 1, Fraction(1)),)) if a else BracketDensity()


def bracket_of_kernels(k1: ExponentKernel, k2: ExponentKernel) -> BracketDensity:
    """Bracket density of two anchor-free weight kernels by bilinearity.

    For the ``t > 0`` half this is the coefficient of ``delta(t+t')`` in
    ``[K1(t), K2(t')]`` with ``t' = -t`` read off ``k2``'s other half.
    """
    explicit = []
    for half, other in ((POS, NEG), (NEG, POS)):
        acc: dict[int, Gauss] = {}
        w1 = _weights(k1, half)
        w2 = _weights(k2, other)
        for x, p in w1.items():
            q = w2.get(x)
            if not q:
                continue
            # second factor is evaluated at -t: w -> 1/w
            q = {-e: c for e, c in q.items()}
            for k, c in laurent_mul(laurent_mul(p, q), sh_power(2)).items():
                _laurent_add(acc, k, gauss(NORM[x.family]) * c)
        explicit.append((half, tuple(sorted((k, gauss_key(c)) for k, c in acc.items()))))
    return BracketDensity(explicit=tuple(explicit))


def _weights(k: ExponentKernel, half: str) -> dict[OscillatorId, dict[int, Gauss]]:
    out: dict[OscillatorId, dict[int, Gauss]] = defaultdict(dict)
    for x, h, t in k.terms:
        if h != half:
            continue
        if t.anchor is not None or t.sh_power or t.hbar_power:
            raise ValueError("bracket_of_kernels expects plain weight kernels")
        _laurent_add(out[x], exponent(2 * t.shift), t.coef)
    return out


def lambda_hat_bracket(data: SuperCartanData, i: int, j: int) -> BracketDensity:
    return bracket_of_kernels(lambda_hat_kernel(data, i), lambda_hat_kernel(data, j))


# --- zero modes ---------------------------------------------------------------

@dataclass(frozen=True)
class ZeroModeWord:
    """``prod exp(n_x Q_x) * prod exp(i*pi*k_x * x(0))`` in canonical order.

    Q factors stand left of all momentum factors; within each block factors
    commute, so the word is determined by the two charge maps.
    """

    q: tuple[tuple[OscillatorId, int], ...] = ()
    p: tuple[tuple[OscillatorId, Fraction], ...] = ()

    @classmethod
    def make(cls, q: Mapping[OscillatorId, int] | None = None,
             p: Mapping[OscillatorId, Fraction] | None = None) -> "ZeroModeWord":
        qs = tuple(sorted(((x, n) for x, n in (q or {}).items() if n), key=lambda e: e[0]))
        ps = tuple(sorted(((x, Fraction(k)) for x, k in (p or {}).items() if k), key=lambda e: e[0]))
        return cls(qs, ps)

    def q_map(self) -> dict[OscillatorId, int]:
        return dict(self.q)

    def p_map(self) -> dict[OscillatorId, Fraction]:
        return dict(self.p)

    def inverse(self) -> "ZeroModeWord":
        return ZeroModeWord.make({x: -n for x, n in self.q}, {x: -k for x, k in self.p})

    def __bool__(self):
        return bool(self.q or self.p)

    def __str__(self):
        qs = [f"e^({n}Q_{x})" for x, n in self.q]
        ps = [f"e^({k}i*pi*{x}(0))" for x, k in self.p]
        return "*".join(qs + ps) or "1"


def _pairing_angle(p: Mapping[OscillatorId, Fraction], q: Mapping[OscillatorId, int]) -> Fraction:
    """Angle ``phi`` (units of pi) with exp(i pi k P) exp(n Q) = exp(n Q) exp(i pi k P) e^(i pi phi)."""
    total = Fraction(0)
    for x, k in p.items():
        n = q.get(x)
        if n:
            total += k * n * NORM[x.family]
    return total


def phase_value(angle: Fraction) -> Gauss:
    """exp(i*pi*angle) for angles in (1/2)Z."""
    a = Fraction(angle) % 2
    table = {Fraction(0): ONE, Fraction(1, 2): I_UNIT, Fraction(1): -ONE, Fraction(3, 2): -I_UNIT}
    if a not in table:
        raise ValueError(f"phase exp(i pi {angle}) is not a Gaussian rational")
    return table[a]


def word_product(w1: ZeroModeWord, w2: ZeroModeWord) -> tuple[ZeroModeWord, Gauss]:
    """Canonical form of ``w1*w2`` and the scalar produced by reordering."""
    angle = _pairing_angle(w1.p_map(), w2.q_map())
    q = defaultdict(int)
    p = defaultdict(Fraction)
    for w in (w1, w2):
        for x, n in w.q:
            q[x] += n
        for x, k in w.p:
            p[x] += k
    return ZeroModeWord.make(q, p), phase_value(angle)


def zero_mode_exchange(w1: ZeroModeWord, w2: ZeroModeWord) -> Gauss:
    """Scalar ``phi`` with ``w1*w2 = phi * w2*w1``."""
    a12 = _pairing_angle(w1.p_map(), w2.q_map())
    a21 = _pairing_angle(w2.p_map(), w1.q_map())
    return phase_value(a12 - a21)
