"""Block coding of sequences inside a plateau and the induced map to the
two-letter alphabet.

A plateau generated by the word ``a`` (length m) uses four m-blocks: a+, a,
~a and ~a+.  Sequences of X(J) are read block by block along a three-state
automaton; each block emits one bit.  The automaton is

    Start --a+/1--> A      A --~a/1--> A      A --~a+/0--> B
    B --a/0--> B           B --a+/1--> A
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .expansion import (
    BaseEnclosure,
    PrecisionExhausted,
    RationalInterval,
    Validity,
    _horner,
    alpha_sequence,
    base_from_alpha,
    canonical,
    two_sided_check,
)
from .words import (
    Alphabet,
    DigitSeq,
    DvkDoubling,
    EventuallyPeriodic,
    Finite,
    Ordering,
    ThueMorseLambda,
    Word,
    complement,
    increment_last,
    lex_compare,
)

BINARY = Alphabet(1)


class NotInXJ(ValueError):
    def __init__(self, position: int, message: str = ""):
        self.position = position
        super().__init__(message or f"no block matches at digit {position}")


class InvalidReference(ValueError):
    pass


class NotInV(ValueError):
    pass


class NotInVStar(ValueError):
    pass


class NotInPlateau(ValueError):
    pass


class Block(enum.Enum):
    A_PLUS = "a+"
    A = "a"
    A_BAR = "~a"
    A_PLUS_BAR = "~a+"

    @property
    def bit(self) -> int:
        return 1 if self in (Block.A_PLUS, Block.A_BAR) else 0


class State(enum.Enum):
    START = "Start"
    A = "A"
    B = "B"


# (state, block) -> next state; the emitted bit is Block.bit
TRANSITIONS = {
    (State.START, Block.A_PLUS): State.A,
    (State.A, Block.A_BAR): State.A,
    (State.A, Block.A_PLUS_BAR): State.B,
    (State.B, Block.A): State.B,
    (State.B, Block.A_PLUS): State.A,
}


@dataclass(frozen=True)
class PhiAutomaton:
    word: Word

    @property
    def m(self) -> int:
        return len(self.word)

    @property
    def M(self) -> int:
        return self.word.M

    def label(self, block: Block) -> tuple[int, ...]:
        return _labels(self.word)[block]

    def out_edges(self, state: State):
        """(block, bit, target) triples leaving ``state``."""
        return [(b, b.bit, t) for (s, b), t in TRANSITIONS.items() if s is state]

    def step_bit(self, state: State, bit: int) -> tuple[Block, State]:
        for block, b, target in self.out_edges(state):
            if b == bit:
                return block, target
        raise InvalidReference(f"no edge with bit {bit} from state {state.value}")


@lru_cache(maxsize=None)
def _labels(word: Word) -> dict:
    plus = increment_last(word)
    return {
        Block.A_PLUS: plus.digits,
        Block.A: word.digits,
        Block.A_BAR: complement(word).digits,
        Block.A_PLUS_BAR: complement(plus).digits,
    }


@lru_cache(maxsize=None)
def automaton(word: Word) -> PhiAutomaton:
    return PhiAutomaton(word)


@dataclass(frozen=True)
class BlockSeq:
    automaton: PhiAutomaton
    blocks: tuple[Block, ...]

    def __str__(self):
        return " ".join(b.value for b in self.blocks)

    def digits(self) -> tuple[int, ...]:
        return tuple(d for b in self.blocks for d in self.automaton.label(b))


def _parse_digits(digits, aut: PhiAutomaton, state: State = State.START, offset: int = 0):
    """Parse whole m-chunks of ``digits``; returns (blocks, states after each block)."""
    m = aut.m
    blocks, states = [], []
    for k in range(len(digits) // m):
        chunk = tuple(digits[k * m:(k + 1) * m])
        for block, _, target in aut.out_edges(state):
            if aut.label(block) == chunk:
                blocks.append(block)
                state = target
                states.append(state)
                break
        else:
            raise NotInXJ(offset + k * m + 1,
                          f"chunk {''.join(map(str, chunk))} at digit {offset + k * m + 1} matches no edge from {state.value}")
    return blocks, states


def parse_blocks(x, aut: PhiAutomaton, n_blocks: int) -> BlockSeq:
    if isinstance(x, Word):
        x = Finite(x)
    digits = x.prefix(n_blocks * aut.m)
    blocks, _ = _parse_digits(digits, aut)
    return BlockSeq(aut, tuple(blocks))


def phi_forward(b: BlockSeq) -> Finite:
    return Finite(Word(BINARY, tuple(block.bit for block in b.blocks)))


def phi_inverse(y, aut: PhiAutomaton, n_blocks: int) -> BlockSeq:
    if isinstance(y, Word):
        y = Finite(y)
    bits = y.prefix(n_blocks)
    if bits[0] != 1:
        raise InvalidReference("reference sequences start with 1")
    state = State.START
    blocks = []
    for bit in bits:
        block, state = aut.step_bit(state, bit)
        blocks.append(block)
    return BlockSeq(aut, tuple(blocks))


def pullback_plateau(ref_word: Word, J) -> Word:
    """Generating word of the child of J matching a reference plateau word."""
    aut = automaton(_word_of(J))
    if ref_word.M != 1:
        raise InvalidReference("reference words use the alphabet {0,1}")
    blocks = phi_inverse(Finite(ref_word), aut, len(ref_word))
    return Word(aut.word.alphabet, blocks.digits())


def _word_of(J) -> Word:
    if isinstance(J, Word):
        return J
    w = getattr(J, "generating_word", None)
    if w is None:
        raise NotInPlateau("the node has no generating word")
    return w


# ---------------------------------------------------------------------------
# whole sequences


def phi_sequence(x: DigitSeq, aut: PhiAutomaton, n_blocks: int = 256) -> DigitSeq:
    """Image of a digit sequence of X(J) under the block map.

    Periodic inputs give periodic outputs and the doubling sequence of a+
    maps to the reference doubling sequence; other inputs give a finite
    prefix of ``n_blocks`` bits (fewer for short finite inputs).
    """
    x = canonical(x)
    m = aut.m
    if isinstance(x, DvkDoubling) and x.seed == increment_last(aut.word):
        return ThueMorseLambda(BINARY)
    if isinstance(x, EventuallyPeriodic):
        P, R = len(x.preamble), len(x.period)
        k0 = -(-P // m)
        p = R // math.gcd(R, m)
        # one extra period checks the wrap-around transition
        blocks, _ = _parse_digits(x.prefix((k0 + 2 * p) * m), aut)
        bits = [b.bit for b in blocks]
        return EventuallyPeriodic(BINARY, bits[:k0], bits[k0:k0 + p])
    if isinstance(x, Finite):
        n_blocks = min(n_blocks, len(x) // m)
    blocks, _ = _parse_digits(x.prefix(n_blocks * m), aut)
    return Finite(Word(BINARY, tuple(b.bit for b in blocks)))


def phi_inverse_sequence(y: DigitSeq, aut: PhiAutomaton, n_blocks: int = 256) -> DigitSeq:
    y = canonical(y)
    if y.digit_at(1) != 1:
        raise InvalidReference("reference sequences start with 1")
    labels = {b: aut.label(b) for b in Block}
    if isinstance(y, ThueMorseLambda):
        return DvkDoubling(increment_last(aut.word))
    if isinstance(y, EventuallyPeriodic):
        P, R = len(y.preamble), len(y.period)
        # each block depends on the previous bit and the current one
        n = P + 1 + R
        blocks = phi_inverse(y, aut, n).blocks
        pre = tuple(d for b in blocks[:P + 1] for d in labels[b])
        per = tuple(d for b in blocks[P + 1:P + 1 + R] for d in labels[b])
        return EventuallyPeriodic(aut.word.alphabet, pre, per)
    if isinstance(y, Finite):
        n_blocks = min(n_blocks, len(y))
    blocks = phi_inverse(y, aut, n_blocks).blocks
    return Finite(Word(aut.word.alphabet, tuple(d for b in blocks for d in labels[b])))


# ---------------------------------------------------------------------------
# induced map on bases


def _bracket_from_prefix(bits: tuple[int, ...], precision: int) -> BaseEnclosure:
    """Enclosure of the base whose alpha starts with the given bits.

    The lower end solves for prefix followed by zeros, the upper end for the
    prefix followed by ones; every alpha with this prefix lies between.
    """
    def root(value_at):
        lo, hi = Fraction(1), Fraction(2)
        for _ in range(precision):
            mid = (lo + hi) / 2
            if value_at(mid) > 1:
                lo = mid
            else:
                hi = mid
        return lo, hi

    work = precision + 32
    low_lo, _ = root(lambda q: _horner(bits, q, work, True))
    _, high_hi = root(lambda q: _horner(bits, q, work, False) + Fraction(1) / (q ** len(bits) * (q - 1)))
    low_lo = max(low_lo, Fraction(1) + Fraction(1, 1 << precision))
    return BaseEnclosure(BINARY, RationalInterval(low_lo, min(high_hi, Fraction(2))), None, precision)


def phi_hat(q: BaseEnclosure, J, precision: int = 128) -> BaseEnclosure:
    word = _word_of(J)
    aut = automaton(word)
    alpha = alpha_sequence(q)
    _check_in_plateau(alpha, word)
    if two_sided_check(alpha, strict=False).validity is Validity.NO:
        raise NotInV(f"{q} is not in V")
    image = phi_sequence(alpha, aut)
    if isinstance(image, Finite):
        return _bracket_from_prefix(image.word.digits, precision)
    return base_from_alpha(image, precision)


def phi_hat_inverse(q_star: BaseEnclosure, J, precision: int = 128) -> BaseEnclosure:
    word = _word_of(J)
    aut = automaton(word)
    if q_star.M != 1:
        raise NotInVStar("reference bases use the alphabet {0,1}")
    alpha_star = alpha_sequence(q_star)
    if two_sided_check(alpha_star, strict=False).validity is Validity.NO:
        raise NotInVStar(f"{q_star} is not in the reference V set")
    pre = phi_inverse_sequence(alpha_star, aut)
    if isinstance(pre, Finite):
        raise PrecisionExhausted("the inverse needs a closed-form reference expansion")
    return base_from_alpha(pre, precision)


def _check_in_plateau(alpha: DigitSeq, word: Word):
    """alpha must lie in (a^inf, a+ ~a^inf]."""
    left = EventuallyPeriodic(word.alphabet, (), word.digits)
    plus = increment_last(word)
    right = EventuallyPeriodic(word.alphabet, plus.digits, complement(word).digits)
    lo = lex_compare(alpha, left)
    hi = lex_compare(alpha, right)
    if lo in (Ordering.LESS, Ordering.EQUAL) or hi is Ordering.GREATER:
        raise NotInPlateau(f"{alpha} is not inside the plateau of {word}")
    if Ordering.UNDECIDED in (lo, hi):
        raise PrecisionExhausted(f"cannot place {alpha} relative to the plateau of {word}")
