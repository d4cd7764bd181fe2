"""Certified evaluation of q-expansions, quasi-greedy expansions of 1 and
their inverse.

All bounds are exact rationals.  Long sums are evaluated with Horner's rule
in fixed point with outward rounding, so lower bounds stay lower bounds and
upper bounds stay upper bounds.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .words import (
    Alphabet,
    Concatenated,
    DigitSeq,
    DvkDoubling,
    EventuallyPeriodic,
    Finite,
    Ordering,
    ThueMorseLambda,
    Word,
    as_sequence,
    first_difference,
    lex_compare,
    shift,
)

DEFAULT_PRECISION = 128
VALIDATION_DEPTH = 256


class PrecisionExhausted(ArithmeticError):
    """A digit decision could not be certified at the available precision."""


class InvalidAlpha(ValueError):
    """The sequence is not the quasi-greedy expansion of 1 in any base."""


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "RationalInterval":
        return cls(Fraction(x), Fraction(x))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __float__(self):
        return float(self.mid)

    def __str__(self):
        return format_enclosure(self.lo, self.hi)


def format_enclosure(lo: Fraction, hi: Fraction, digits: int = 10) -> str:
    """Decimal midpoint with a power-of-ten radius, e.g. ``1.6180339887 ± 1e-10``.

    Wide intervals are printed as ``[lo, hi]``.
    """
    radius = (hi - lo) / 2
    if radius > Fraction(1, 1000):
        return f"[{float(lo):.6f}, {float(hi):.6f}]"
    exponent = -digits
    while Fraction(10) ** exponent < radius:
        exponent += 1
    places = max(0, -exponent)
    mid = (lo + hi) / 2
    return f"{float(mid):.{places}f} ± 1e{exponent:+03d}".replace("e+0", "e+").replace("e-0", "e-")


@dataclass(frozen=True)
class BaseEnclosure:
    """A base q given by a rational enclosure and, optionally, the sequence
    whose value is 1 at q."""

    alphabet: Alphabet
    interval: RationalInterval
    defining_seq: DigitSeq | None = None
    precision_bits: int = DEFAULT_PRECISION

    def __post_init__(self):
        M = self.alphabet.M
        if not (1 < self.interval.lo and self.interval.hi <= M + 1):
            raise ValueError(f"base enclosure {self.interval} outside (1, {M + 1}]")

    @classmethod
    def exact(cls, q, M, defining_seq=None) -> "BaseEnclosure":
        alphabet = M if isinstance(M, Alphabet) else Alphabet(M)
        return cls(alphabet, RationalInterval.point(Fraction(q)), defining_seq)

    @classmethod
    def around(cls, q, M, bits: int = DEFAULT_PRECISION) -> "BaseEnclosure":
        """Smallest dyadic interval of width 2^-bits around a float or rational."""
        alphabet = M if isinstance(M, Alphabet) else Alphabet(M)
        q = Fraction(q)
        scale = 1 << bits
        lo = Fraction(math.floor(q * scale), scale)
        hi = Fraction(math.ceil(q * scale), scale)
        return cls(alphabet, RationalInterval(max(lo, Fraction(1) + Fraction(1, scale)), min(hi, Fraction(alphabet.M + 1))),
                   None, bits)

    @property
    def M(self) -> int:
        return self.alphabet.M

    @property
    def lo(self) -> Fraction:
        return self.interval.lo

    @property
    def hi(self) -> Fraction:
        return self.interval.hi

    @property
    def mid(self) -> Fraction:
        return self.interval.mid

    def __float__(self):
        return float(self.interval.mid)

    def __str__(self):
        return str(self.interval)


# ---------------------------------------------------------------------------
# fixed point helpers


def _round_down(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction((x.numerator * scale) // x.denominator, scale)


def _round_up(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(-((-x.numerator * scale) // x.denominator), scale)


def _horner(digits, q: Fraction, bits: int, upward: bool) -> Fraction:
    """sum d_i q^-i over the given digits, rounded outward to 2^-bits steps."""
    scale = 1 << bits
    num, den = q.numerator, q.denominator
    s = 0
    for d in reversed(digits):
        t = (d * scale + s) * den
        s = -((-t) // num) if upward else t // num
    return Fraction(s, scale)


def _tail_bound(M: int, q: Fraction, n: int, bits: int) -> Fraction:
    """Upper bound for M / (q^n (q - 1))."""
    scale = 1 << bits
    num, den = q.numerator, q.denominator
    t = -((-M * scale * den) // (num - den))
    for _ in range(n):
        t = -((-t * den) // num)
    return Fraction(t, scale)


def terms_for(q_lo: Fraction, M: int, bits: int) -> int:
    """Number of terms making the tail smaller than 2^-(bits+8) at any q >= q_lo."""
    lq = math.log2(float(q_lo))
    head = math.log2(M / float(q_lo - 1))
    return max(1, math.ceil((bits + 8 + head) / lq))


def _periodic_value(x: EventuallyPeriodic, q: Fraction) -> Fraction:
    """Exact closed form of pi_q for an eventually periodic sequence."""
    pre, per = x.preamble, x.period
    head = Fraction(0)
    for d in reversed(pre):
        head = (head + d) / q
    rep = Fraction(0)
    for d in reversed(per):
        rep = (rep + d) / q
    r = q ** len(per)
    tail = rep * r / (r - 1)
    return head + tail / q ** len(pre)


@lru_cache(maxsize=4096)
def _periodic_polynomial(x: EventuallyPeriodic) -> tuple[int, ...]:
    """Integer coefficients (highest degree first) of a polynomial with the sign of pi_q(x) - 1.

    With A, B the digit polynomials of preamble and period,
    pi_q(x) - 1 = (A (q^R - 1) + B - q^P (q^R - 1)) / (q^P (q^R - 1)).
    """
    P, R = len(x.preamble), len(x.period)
    size = P + R + 1
    coeffs = [0] * size  # index = degree

    def add(poly, shift, sign):
        for k, c in enumerate(poly):
            coeffs[k + shift] += sign * c

    A = [x.preamble[P - 1 - k] for k in range(P)]  # A(q) = sum pre_i q^(P-i)
    B = [x.period[R - 1 - k] for k in range(R)]
    add(A, R, 1)
    add(A, 0, -1)
    add(B, 0, 1)
    coeffs[P + R] -= 1
    coeffs[P] += 1
    return tuple(reversed(coeffs))


def _periodic_enclosure(x: EventuallyPeriodic, q: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Fixed-point enclosure of pi_q(x) for an eventually periodic x."""
    P, R = len(x.preamble), len(x.period)

    def power_inv(k, upward):
        return _horner((0,) * (k - 1) + (1,), q, bits, upward) if k else Fraction(1)

    bounds = []
    for upward in (False, True):
        head = _horner(x.preamble, q, bits, upward) if P else Fraction(0)
        rep = _horner(x.period, q, bits, upward)
        t = power_inv(R, upward)
        bounds.append(head + power_inv(P, upward) * rep / (1 - t))
    return bounds[0], bounds[1]


def _polynomial_sign(coeffs: tuple[int, ...], q: Fraction) -> int:
    n, d = q.numerator, q.denominator
    s, dpow = 0, 1
    for c in coeffs:
        s = s * n + c * dpow
        dpow *= d
    # s = d^deg * f(n/d), hence has the sign of f(q)
    return (s > 0) - (s < 0)


def canonical(x):
    """Collapse concatenations with periodic tails into a single periodic form."""
    x = as_sequence(x)
    if isinstance(x, Concatenated):
        tail = canonical(x.tail)
        if isinstance(tail, EventuallyPeriodic):
            head = tuple(d for b in x.blocks for d in b.digits)
            return EventuallyPeriodic(x.alphabet, head + tail.preamble, tail.period)
        return Concatenated(x.blocks, tail)
    return x


def evaluate_pi(q: BaseEnclosure, x, terms: int | None = None) -> RationalInterval:
    x = canonical(x)
    M = x.M
    if isinstance(x, EventuallyPeriodic):
        return RationalInterval(_periodic_value(x, q.hi), _periodic_value(x, q.lo))
    bits = q.precision_bits + 32
    if terms is None:
        terms = terms_for(q.lo, M, q.precision_bits)
    if isinstance(x, Finite):
        digits = x.prefix(min(terms, len(x)))
        return RationalInterval(_horner(digits, q.hi, bits, False), _horner(digits, q.lo, bits, True))
    digits = x.prefix(terms)
    lower = _horner(digits, q.hi, bits, False)
    upper = _horner(digits, q.lo, bits, True) + _tail_bound(M, q.lo, terms, bits)
    return RationalInterval(lower, upper)


def value_range(q: BaseEnclosure) -> RationalInterval:
    M = q.M
    return RationalInterval(Fraction(M) / (q.hi - 1), Fraction(M) / (q.lo - 1))


# ---------------------------------------------------------------------------
# validity of alpha sequences


class Validity(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class AlphaCheck:
    validity: Validity
    witness: int | None = None

    def __bool__(self):
        return self.validity is Validity.YES


def is_valid_alpha(x, depth: int = VALIDATION_DEPTH) -> AlphaCheck:
    x = canonical(x)
    if isinstance(x, EventuallyPeriodic):
        if all(d == 0 for d in x.period):
            return AlphaCheck(Validity.NO, None)
        # shifts repeat after preamble + period, so this check is exhaustive
        for n in range(1, len(x.preamble) + len(x.period) + 1):
            if lex_compare(shift(x, n), x) is Ordering.GREATER:
                return AlphaCheck(Validity.NO, n)
        return AlphaCheck(Validity.YES)
    if isinstance(x, Finite):
        digits = x.prefix(len(x))
        for n in range(1, len(digits)):
            tail = digits[n:]
            if tail > digits[: len(tail)]:
                return AlphaCheck(Validity.NO, n)
        return AlphaCheck(Validity.UNKNOWN)
    digits = x.prefix(2 * depth)
    for n in range(1, depth + 1):
        i = first_difference(Finite(Word(x.alphabet, digits[n:n + depth])),
                             Finite(Word(x.alphabet, digits[:depth])), depth)
        if i is not None and digits[n + i - 1] > digits[i - 1]:
            return AlphaCheck(Validity.NO, n)
    if isinstance(x, (ThueMorseLambda, DvkDoubling)):
        # these closed forms never end in 0^inf
        return AlphaCheck(Validity.YES)
    return AlphaCheck(Validity.UNKNOWN)


# ---------------------------------------------------------------------------
# inversion


def _sign_at(x, q: Fraction, M: int, bits: int) -> int | None:
    """Sign of pi_q(x) - 1 at the rational point q; None if undecidable."""
    if isinstance(x, EventuallyPeriodic):
        lo, hi = _periodic_enclosure(x, q, bits + 64)
        if lo > 1:
            return 1
        if hi < 1:
            return -1
        return _polynomial_sign(_periodic_polynomial(x), q)
    enc = evaluate_pi(BaseEnclosure(Alphabet(M), RationalInterval.point(q), None, bits), x)
    if enc.lo > 1:
        return 1
    if enc.hi < 1:
        return -1
    if enc.lo == enc.hi == 1:
        return 0
    return None


def base_from_alpha(x, precision_bits: int = DEFAULT_PRECISION, check_depth: int = VALIDATION_DEPTH) -> BaseEnclosure:
    x = canonical(x)
    check = is_valid_alpha(x, check_depth)
    if check.validity is not Validity.YES:
        raise InvalidAlpha(f"{x} is not a quasi-greedy expansion of 1 ({check.validity.value}, witness {check.witness})")
    M = x.M
    alphabet = Alphabet(M)
    lo, hi = Fraction(1), Fraction(M + 1)
    if _sign_at(x, hi, M, precision_bits) == 0:
        return BaseEnclosure(alphabet, RationalInterval.point(hi), x, precision_bits)
    # pi_q(x) decreases in q: above 1 at lo, below 1 at hi
    target = Fraction(1, 1 << precision_bits)
    while hi - lo > target:
        mid = (lo + hi) / 2
        s = _sign_at(x, mid, M, precision_bits)
        if s is None:
            break
        if s == 0:
            lo = hi = mid
            break
        if s > 0:
            lo = mid
        else:
            hi = mid
    if lo == 1:
        lo = Fraction(1) + target / 2
    return BaseEnclosure(alphabet, RationalInterval(lo, hi), x, precision_bits)


def komornik_loreti(M, precision_bits: int = DEFAULT_PRECISION) -> BaseEnclosure:
    alphabet = M if isinstance(M, Alphabet) else Alphabet(M)
    return base_from_alpha(ThueMorseLambda(alphabet), precision_bits)


def refine(q: BaseEnclosure, precision_bits: int) -> BaseEnclosure:
    """Re-solve a base with a defining sequence at higher precision."""
    if q.defining_seq is None:
        raise PrecisionExhausted("a base without a defining sequence cannot be refined")
    if precision_bits <= q.precision_bits:
        return q
    return base_from_alpha(q.defining_seq, precision_bits)


# ---------------------------------------------------------------------------
# quasi-greedy digits


def _digit_below(v: Fraction, M: int) -> int:
    """Largest digit d <= M with d < v (0 when v <= 0)."""
    if v <= 0:
        return 0
    return min(M, math.ceil(v) - 1)


def quasi_greedy_alpha(q: BaseEnclosure, n: int) -> Word:
    """First n digits of the quasi-greedy expansion of 1 in base q.

    Digits are produced by the positive-remainder greedy recursion in
    interval arithmetic.  When the enclosure straddles a digit boundary the
    defining sequence, if any, settles the tie, after refining the enclosure
    until the remainder intervals are narrow.
    """
    if n < 1:
        raise ValueError("n must be positive")
    M = q.M
    defining = q.defining_seq
    if defining is not None:
        if not is_valid_alpha(defining):
            defining = None
        else:
            needed = math.ceil(n * math.log2(M + 1)) + 64
            if q.precision_bits < needed and q.interval.width > 0:
                q = refine(q, needed)
    bits = max(q.precision_bits, 64) + 32 + math.ceil(n * math.log2(M + 1))
    qlo, qhi = q.lo, q.hi
    xlo = xhi = Fraction(1)
    out = []
    for i in range(1, n + 1):
        a = _round_down(qlo * xlo, bits)
        b = _round_up(qhi * xhi, bits)
        dlo, dhi = _digit_below(a, M), _digit_below(b, M)
        if dlo == dhi:
            d = dlo
        elif defining is not None:
            d = defining.digit_at(i)
            if not dlo <= d <= dhi:
                raise PrecisionExhausted(f"defining digit {d} at index {i} outside certified range [{dlo}, {dhi}]")
        else:
            raise PrecisionExhausted(f"digit {i} undecided between {dlo} and {dhi} at {q}")
        out.append(d)
        xlo, xhi = max(a - d, Fraction(0)), b - d
    return Word(q.alphabet, tuple(out))


def alpha_sequence(q: BaseEnclosure) -> DigitSeq:
    """The defining sequence if there is one, else the longest certified prefix."""
    if q.defining_seq is not None:
        return canonical(q.defining_seq)
    if q.lo == q.hi == q.M + 1:
        return EventuallyPeriodic(q.alphabet, (), (q.M,))
    lo, hi = 1, 8
    best = None
    while True:
        try:
            best = quasi_greedy_alpha(q, hi)
        except PrecisionExhausted:
            break
        if hi > 4 * q.precision_bits:
            return Finite(best)
        lo, hi = hi, hi * 2
    if best is None:
        try:
            best = quasi_greedy_alpha(q, 1)
        except PrecisionExhausted:
            raise PrecisionExhausted(f"no digit of alpha can be certified at {q}") from None
        lo, hi = 1, 8
    # bisect for the exact certified length between lo and hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        try:
            best = quasi_greedy_alpha(q, mid)
            lo = mid
        except PrecisionExhausted:
            hi = mid
    return Finite(quasi_greedy_alpha(q, lo))


def two_sided_check(x, strict: bool, depth: int = VALIDATION_DEPTH) -> AlphaCheck:
    """Test complement(x) < shift^n(x) < x for all n >= 1 (<= when not strict).

    Exact for eventually periodic x; otherwise only a violation within
    ``depth`` shifts is conclusive.
    """
    x = canonical(x)
    bar = complement_seq(x)
    if isinstance(x, EventuallyPeriodic):
        shifts = range(1, len(x.preamble) + len(x.period) + 1)
    else:
        shifts = range(1, depth + 1)
    bad = (Ordering.EQUAL, Ordering.GREATER) if strict else (Ordering.GREATER,)
    undecided = False
    for n in shifts:
        s = shift(x, n)
        up = lex_compare(s, x, depth)
        down = lex_compare(bar, s, depth)
        if up in bad or down in bad:
            return AlphaCheck(Validity.NO, n)
        if Ordering.UNDECIDED in (up, down):
            undecided = True
    if isinstance(x, EventuallyPeriodic) and not undecided:
        return AlphaCheck(Validity.YES)
    if isinstance(x, (ThueMorseLambda, DvkDoubling)) and not undecided:
        # the doubling sequences are known members of the strict set
        return AlphaCheck(Validity.YES)
    return AlphaCheck(Validity.UNKNOWN)


def complement_seq(x: DigitSeq) -> DigitSeq:
    x = canonical(x)
    M = x.M
    if isinstance(x, EventuallyPeriodic):
        return EventuallyPeriodic(x.alphabet, tuple(M - d for d in x.preamble), tuple(M - d for d in x.period))
    if isinstance(x, Finite):
        return Finite(Word(x.alphabet, tuple(M - d for d in x.word.digits)))
    return _Complemented(x)


@dataclass(frozen=True)
class _Complemented(DigitSeq):
    base: DigitSeq

    @property
    def alphabet(self):
        return self.base.alphabet

    def digit_at(self, i):
        return self.M - self.base.digit_at(i)

    def _prefix(self, n):
        M = self.M
        return tuple(M - d for d in self.base.prefix(n))
