"""Alphabets, finite words, infinite digit sequences and lexicographic order.

Sequences are 1-indexed through ``digit_at``.  Every concrete sequence class
also offers ``prefix(n)`` which returns a tuple of the first ``n`` digits and
is cached, since most algorithms walk the same prefixes many times.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

DEFAULT_DEPTH = 4096


class AlphabetMismatch(ValueError):
    pass


class BoundaryDigit(ValueError):
    """Raised when the last digit cannot be incremented or decremented."""


@dataclass(frozen=True)
class Alphabet:
    M: int

    def __post_init__(self):
        if not isinstance(self.M, int) or self.M < 1:
            raise ValueError(f"alphabet size M must be a positive integer, got {self.M!r}")

    def __contains__(self, d) -> bool:
        return isinstance(d, int) and 0 <= d <= self.M


def _alphabet(M) -> Alphabet:
    return M if isinstance(M, Alphabet) else Alphabet(M)


def parse_digits(text: str) -> tuple[int, ...]:
    text = text.strip()
    if "," in text:
        return tuple(int(t) for t in text.split(",") if t.strip())
    if not text.isdigit():
        raise ValueError(f"not a digit string: {text!r}")
    return tuple(int(c) for c in text)


def format_digits(digits: Sequence[int], M: int) -> str:
    if M <= 9:
        return "".join(str(d) for d in digits)
    return ",".join(str(d) for d in digits)


@dataclass(frozen=True)
class Word:
    alphabet: Alphabet
    digits: tuple[int, ...]

    def __post_init__(self):
        if len(self.digits) < 1:
            raise ValueError("a word has length at least 1")
        for d in self.digits:
            if d not in self.alphabet:
                raise ValueError(f"digit {d} outside alphabet {{0..{self.alphabet.M}}}")

    @classmethod
    def of(cls, digits, M) -> "Word":
        if isinstance(digits, str):
            digits = parse_digits(digits)
        return cls(_alphabet(M), tuple(digits))

    @property
    def M(self) -> int:
        return self.alphabet.M

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, i):
        return self.digits[i]

    def __add__(self, other: "Word") -> "Word":
        if other.alphabet != self.alphabet:
            raise AlphabetMismatch("cannot concatenate words over different alphabets")
        return Word(self.alphabet, self.digits + other.digits)

    def __str__(self):
        return format_digits(self.digits, self.M)


def complement(w: Word) -> Word:
    return Word(w.alphabet, tuple(w.M - d for d in w.digits))


def increment_last(w: Word) -> Word:
    if w.digits[-1] >= w.M:
        raise BoundaryDigit(f"last digit of {w} is already M={w.M}")
    return Word(w.alphabet, w.digits[:-1] + (w.digits[-1] + 1,))


def decrement_last(w: Word) -> Word:
    if w.digits[-1] <= 0:
        raise BoundaryDigit(f"last digit of {w} is already 0")
    return Word(w.alphabet, w.digits[:-1] + (w.digits[-1] - 1,))


def thue_morse(i: int) -> int:
    return bin(i).count("1") & 1


def lambda_digit(M: int, i: int) -> int:
    k, odd = divmod(M, 2)
    if odd:
        return k + thue_morse(i)
    return k + thue_morse(i) - thue_morse(i - 1)


def lambda_prefix(M, n: int) -> Word:
    alphabet = _alphabet(M)
    if n < 1:
        raise ValueError("n must be positive")
    return Word(alphabet, tuple(lambda_digit(alphabet.M, i) for i in range(1, n + 1)))


# ---------------------------------------------------------------------------
# infinite sequences


class DigitSeq:
    """Base class for (possibly lazy) digit sequences over {0..M}."""

    alphabet: Alphabet

    @property
    def M(self) -> int:
        return self.alphabet.M

    def digit_at(self, i: int) -> int:
        raise NotImplementedError

    def prefix(self, n: int) -> tuple[int, ...]:
        return _cached_prefix(self, n)

    def _prefix(self, n: int) -> tuple[int, ...]:
        return tuple(self.digit_at(i) for i in range(1, n + 1))

    def __str__(self):
        return format_digits(self.prefix(24), self.M) + "..."


@lru_cache(maxsize=4096)
def _cached_prefix(seq: DigitSeq, n: int) -> tuple[int, ...]:
    return seq._prefix(n)


@dataclass(frozen=True)
class Finite(DigitSeq):
    """A finite prefix; reading past its end is an error."""

    word: Word

    @property
    def alphabet(self):
        return self.word.alphabet

    def __len__(self):
        return len(self.word)

    def digit_at(self, i):
        if i < 1 or i > len(self.word):
            raise IndexError(f"index {i} outside finite sequence of length {len(self.word)}")
        return self.word.digits[i - 1]

    def _prefix(self, n):
        if n > len(self.word):
            raise IndexError(f"prefix {n} longer than finite sequence")
        return self.word.digits[:n]

    def __str__(self):
        return str(self.word)


def _minimal_period(period: tuple[int, ...]) -> tuple[int, ...]:
    n = len(period)
    for p in range(1, n + 1):
        if n % p == 0 and period[:p] * (n // p) == period:
            return period[:p]
    return period


@dataclass(frozen=True, init=False)
class EventuallyPeriodic(DigitSeq):
    """preamble followed by period repeated forever, kept in canonical form."""

    alphabet: Alphabet
    preamble: tuple[int, ...]
    period: tuple[int, ...]

    def __init__(self, alphabet, preamble: Iterable[int], period: Iterable[int]):
        alphabet = _alphabet(alphabet)
        pre, per = tuple(preamble), tuple(period)
        if not per:
            raise ValueError("period must be nonempty")
        digits = pre + per
        if not set(map(type, digits)) <= {int} or min(digits) < 0 or max(digits) > alphabet.M:
            bad = next(d for d in digits if d not in alphabet)
            raise ValueError(f"digit {bad} outside alphabet {{0..{alphabet.M}}}")
        per = _minimal_period(per)
        # absorb the tail of the preamble into the period where possible
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = (per[-1],) + per[:-1]
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "preamble", pre)
        object.__setattr__(self, "period", per)

    def digit_at(self, i):
        if i <= len(self.preamble):
            return self.preamble[i - 1]
        return self.period[(i - len(self.preamble) - 1) % len(self.period)]

    def _prefix(self, n):
        p = len(self.preamble)
        if n <= p:
            return self.preamble[:n]
        reps = (n - p) // len(self.period) + 1
        return (self.preamble + self.period * reps)[:n]

    def __str__(self):
        M = self.M
        per = format_digits(self.period, M)
        if self.preamble:
            return f"{format_digits(self.preamble, M)}({per})^inf"
        return f"({per})^inf"


def periodic(period, M) -> EventuallyPeriodic:
    if isinstance(period, str):
        period = parse_digits(period)
    if isinstance(period, Word):
        period = period.digits
    return EventuallyPeriodic(M, (), period)


def eventually_periodic(preamble, period, M) -> EventuallyPeriodic:
    if isinstance(preamble, str):
        preamble = parse_digits(preamble)
    if isinstance(period, str):
        period = parse_digits(period)
    if isinstance(preamble, Word):
        preamble = preamble.digits
    if isinstance(period, Word):
        period = period.digits
    return EventuallyPeriodic(M, preamble, period)


@dataclass(frozen=True)
class ThueMorseLambda(DigitSeq):
    """The sequence lambda_1 lambda_2 ... built from Thue-Morse bits."""

    alphabet: Alphabet

    def __post_init__(self):
        object.__setattr__(self, "alphabet", _alphabet(self.alphabet))

    def digit_at(self, i):
        return lambda_digit(self.M, i)

    def __str__(self):
        return f"lambda(M={self.M})"


@dataclass(frozen=True)
class DvkDoubling(DigitSeq):
    """Doubling sequence started from ``seed`` (the block a+).

    theta_1..theta_m = seed and each further block of length 2^(k-1) m is the
    reflection of everything before it with its last digit raised by one.
    """

    seed: Word

    def __post_init__(self):
        if self.seed.digits[-1] == 0:
            raise ValueError("doubling seed must end in a nonzero digit")

    @property
    def alphabet(self):
        return self.seed.alphabet

    def digit_at(self, i):
        m, M = len(self.seed), self.M
        flips = 0
        bump = 0
        while i > m:
            block = m
            while 2 * block < i:
                block *= 2
            # i lies in (block, 2*block]
            if i == 2 * block:
                bump += 1 if flips % 2 == 0 else -1
            i -= block
            flips += 1
        d = self.seed.digits[i - 1]
        if flips % 2:
            d = M - d
        return d + bump

    def _prefix(self, n):
        out = list(self.seed.digits[:n])
        M = self.M
        while len(out) < n:
            ext = [M - d for d in out]
            ext[-1] += 1
            out.extend(ext)
        return tuple(out[:n])

    def __str__(self):
        return f"dvk({self.seed})"


@dataclass(frozen=True)
class Concatenated(DigitSeq):
    """Finite blocks followed by an infinite tail."""

    blocks: tuple[Word, ...]
    tail: DigitSeq

    @property
    def alphabet(self):
        return self.tail.alphabet

    def __post_init__(self):
        for b in self.blocks:
            if b.alphabet != self.tail.alphabet:
                raise AlphabetMismatch("blocks and tail use different alphabets")

    @property
    def head_length(self):
        return sum(len(b) for b in self.blocks)

    def digit_at(self, i):
        for b in self.blocks:
            if i <= len(b):
                return b.digits[i - 1]
            i -= len(b)
        return self.tail.digit_at(i)

    def _prefix(self, n):
        head = tuple(d for b in self.blocks for d in b.digits)
        if n <= len(head):
            return head[:n]
        return head + self.tail.prefix(n - len(head))


@dataclass(frozen=True)
class Shifted(DigitSeq):
    base: DigitSeq
    offset: int

    @property
    def alphabet(self):
        return self.base.alphabet

    def digit_at(self, i):
        return self.base.digit_at(i + self.offset)

    def _prefix(self, n):
        return self.base.prefix(n + self.offset)[self.offset:]


def as_sequence(x) -> DigitSeq:
    if isinstance(x, DigitSeq):
        return x
    if isinstance(x, Word):
        return Finite(x)
    raise TypeError(f"cannot view {type(x).__name__} as a digit sequence")


def shift(x: DigitSeq, n: int) -> DigitSeq:
    if n < 0:
        raise ValueError("shift amount must be nonnegative")
    if n == 0:
        return x
    if isinstance(x, EventuallyPeriodic):
        p = len(x.preamble)
        if n <= p:
            return EventuallyPeriodic(x.alphabet, x.preamble[n:], x.period)
        k = (n - p) % len(x.period)
        return EventuallyPeriodic(x.alphabet, (), x.period[k:] + x.period[:k])
    if isinstance(x, Finite):
        return Finite(Word(x.alphabet, x.word.digits[n:]))
    if isinstance(x, Shifted):
        return Shifted(x.base, x.offset + n)
    return Shifted(x, n)


# ---------------------------------------------------------------------------
# lexicographic order


class Ordering(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    UNDECIDED = "undecided"

    def flip(self) -> "Ordering":
        return {Ordering.LESS: Ordering.GREATER, Ordering.GREATER: Ordering.LESS}.get(self, self)


def _certified_length(x: DigitSeq, y: DigitSeq) -> int | None:
    """Number of digits after which agreement implies equality, if known."""
    if isinstance(x, EventuallyPeriodic) and isinstance(y, EventuallyPeriodic):
        return max(len(x.preamble), len(y.preamble)) + math.lcm(len(x.period), len(y.period))
    return None


def first_difference(x: DigitSeq, y: DigitSeq, depth: int = DEFAULT_DEPTH) -> int | None:
    """1-based index of the first differing digit within ``depth``, else None."""
    n = depth
    if isinstance(x, Finite):
        n = min(n, len(x))
    if isinstance(y, Finite):
        n = min(n, len(y))
    a, b = x.prefix(n), y.prefix(n)
    for i, (s, t) in enumerate(zip(a, b), start=1):
        if s != t:
            return i
    return None


def lex_compare(x, y, depth: int = DEFAULT_DEPTH) -> Ordering:
    x, y = as_sequence(x), as_sequence(y)
    if x.alphabet != y.alphabet:
        raise AlphabetMismatch(f"alphabets differ: M={x.M} vs M={y.M}")
    if depth < 1:
        raise ValueError("depth must be positive")
    certified = _certified_length(x, y)
    if certified is not None:
        depth = max(depth, certified)
    i = first_difference(x, y, depth)
    if i is not None:
        return Ordering.LESS if x.digit_at(i) < y.digit_at(i) else Ordering.GREATER
    if certified is not None:
        return Ordering.EQUAL
    if x == y:
        return Ordering.EQUAL
    return Ordering.UNDECIDED
