"""Local and interval dimensions of the set of univoque bases, dimensions of
relative bifurcation sets, and window scans for strongly univoque sequences.

Every value is an interval in [0, 1] built from relative entropies divided
by log q.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

from .entropy import DEFAULT_TOL, EntropyValue, entropy_H, entropy_HJ, log_interval
from .expansion import (
    BaseEnclosure,
    RationalInterval,
    Validity,
    alpha_sequence,
    base_from_alpha,
    canonical,
    two_sided_check,
)
from .phimap import NotInPlateau
from .plateaux import (
    DepthLimit,
    Mode,
    NotCovered,
    PlateauNode,
    PlateauTree,
    _cmp_base,
    _is_doubling_of_plateau,
    _komornik_loreti_seq,
    base_of,
    basic_interval,
    in_node,
    is_left_endpoint,
    smallest_plateau_containing,
)
from .words import (
    Alphabet,
    DigitSeq,
    EventuallyPeriodic,
    Ordering,
    Word,
    as_sequence,
    complement,
    increment_last,
)

DEFAULT_DEPTH = 6


class Basis(enum.Enum):
    EXACT = "exact-formula"
    BRACKET = "plateau-bracket"
    ZERO = "zero"


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    TWO_SIDED = "two-sided"


class EmptyIntersection(ValueError):
    pass


@dataclass(frozen=True)
class DimValue:
    value: RationalInterval
    basis: Basis
    witness: tuple[PlateauNode, ...] | None = None
    note: str = ""

    def __post_init__(self):
        lo = min(max(self.value.lo, Fraction(0)), Fraction(1))
        hi = min(max(self.value.hi, lo), Fraction(1))
        object.__setattr__(self, "value", RationalInterval(lo, hi))

    @property
    def lo(self) -> Fraction:
        return self.value.lo

    @property
    def hi(self) -> Fraction:
        return self.value.hi

    @property
    def plateau(self) -> PlateauNode | None:
        if not self.witness:
            return None
        for node in reversed(self.witness):
            if not node.is_null:
                return node
        return None

    def __str__(self):
        mid = float(self.value.mid)
        radius = float(self.value.width) / 2
        text = f"{mid:.4f} ± {radius:.0e}"
        tags = [self.basis.value]
        if self.plateau is not None:
            tags.append(f"J=path {self.plateau.label}")
        if self.note:
            tags.append(self.note)
        return f"{text} ({', '.join(tags)})"


def _zero(note: str, witness=None) -> DimValue:
    return DimValue(RationalInterval.point(0), Basis.ZERO, witness, note)


def _log_base(q) -> RationalInterval:
    if isinstance(q, BaseEnclosure):
        lo = math.nextafter(math.log(float(q.lo)), 0.0)
        hi = math.nextafter(math.log(float(q.hi)), math.inf)
        return RationalInterval(Fraction(lo), Fraction(hi))
    raise TypeError("a base enclosure is needed to convert entropy to dimension")


def _ratio(h: RationalInterval, log_q: RationalInterval) -> RationalInterval:
    return RationalInterval(h.lo / log_q.hi, h.hi / log_q.lo)


def _from_entropy(e: EntropyValue, q: BaseEnclosure, witness, note="") -> DimValue:
    basis = Basis.BRACKET if "bracket" in e.depth_certificate else Basis.EXACT
    if e.hi == 0:
        basis = Basis.ZERO
    return DimValue(_ratio(e.value, _log_base(q)), basis, witness, note or e.depth_certificate)


def _periodic_top(M: int) -> EventuallyPeriodic:
    return EventuallyPeriodic(Alphabet(M), (), (M,))


def local_dim(tree: PlateauTree, q: BaseEnclosure, side: Side = Side.TWO_SIDED, tol=DEFAULT_TOL,
              max_depth: int = DEFAULT_DEPTH) -> DimValue:
    """f, f- or f+ at q: relative entropy of the smallest enclosing plateau over log q."""
    M = tree.M
    alpha = canonical(alpha_sequence(q))
    if _cmp_base(alpha, _periodic_top(M)) is Ordering.EQUAL:
        if side is Side.RIGHT:
            return _zero("q = M+1 has no right neighbourhood")
        return DimValue(RationalInterval.point(1), Basis.EXACT, (tree.root,), "q = M+1")
    if two_sided_check(alpha, strict=False).validity is Validity.NO:
        return _zero("outside the closure of U")
    if _cmp_base(alpha, _komornik_loreti_seq(M)) is not Ordering.GREATER:
        return _zero("q <= q_KL")
    if _is_doubling_of_plateau(alpha):
        return _zero("de Vries-Komornik number")
    if side is Side.LEFT:
        return _f_minus(tree, q, alpha, tol, max_depth)
    if side is Side.RIGHT:
        return _f_plus(tree, q, alpha, tol, max_depth)
    minus = _f_minus(tree, q, alpha, tol, max_depth)
    plus = _f_plus(tree, q, alpha, tol, max_depth)
    return combine_sides(minus, plus)


def combine_sides(minus: DimValue, plus: DimValue) -> DimValue:
    """f = max(f-, f+) on intervals."""
    value = RationalInterval(max(minus.lo, plus.lo), max(minus.hi, plus.hi))
    if minus.basis is Basis.ZERO and plus.basis is Basis.ZERO:
        basis = Basis.ZERO
    elif Basis.BRACKET in (minus.basis, plus.basis):
        basis = Basis.BRACKET
    else:
        basis = Basis.EXACT
    winner = minus if minus.hi >= plus.hi else plus
    return DimValue(value, basis, winner.witness, winner.note)


def _chain_value(tree: PlateauTree, q: BaseEnclosure, alpha: DigitSeq, mode: Mode, tol, max_depth: int) -> DimValue:
    chain = smallest_plateau_containing(tree, alpha, mode, max_depth)
    last = chain.deepest
    if isinstance(chain, DepthLimit):
        # candidate for the infinitely nested set: report the shrinking bound
        J = chain.smallest_plateau
        bound = _ratio(_scaled_log2(J.m), _log_base(J.q_R))
        return DimValue(RationalInterval(Fraction(0), bound.hi), Basis.ZERO, chain.nodes, chain.note)
    if last.is_null:
        return _zero("inside a null interval", chain.nodes)
    J = chain.smallest_plateau
    note = chain.note if isinstance(chain, NotCovered) else ""
    return _from_entropy(entropy_HJ(tree, J, q, tol), q, chain.nodes, note)


def _scaled_log2(m: int) -> RationalInterval:
    r = log_interval(2)
    return RationalInterval(r.lo / m, r.hi / m)


def _f_minus(tree, q, alpha, tol, max_depth) -> DimValue:
    return _chain_value(tree, q, alpha, Mode.HALF_OPEN_RIGHT, tol, max_depth)


def _f_plus(tree, q, alpha, tol, max_depth) -> DimValue:
    if is_left_endpoint(tree, alpha) is Validity.YES:
        return _zero("plateau left endpoint")
    return _chain_value(tree, q, alpha, Mode.OPEN, tol, max_depth)


def dim_W(tree: PlateauTree, q: BaseEnclosure, tol=DEFAULT_TOL) -> DimValue:
    """Dimension of the projected difference set, equal to the left local dimension."""
    return local_dim(tree, q, Side.LEFT, tol)


def symbolic_to_euclidean(dim_symbolic: DimValue, q: BaseEnclosure) -> DimValue:
    if q.lo == q.hi == 2:
        factor = RationalInterval.point(1)
    else:
        factor = _ratio(log_interval(2), _log_base(q))
    v = dim_symbolic.value
    return DimValue(RationalInterval(v.lo * factor.lo, v.hi * factor.hi), dim_symbolic.basis,
                    dim_symbolic.witness, dim_symbolic.note)


def dj_function(tree: PlateauTree, J: PlateauNode, q: BaseEnclosure, tol=DEFAULT_TOL) -> DimValue:
    """Symbolic dimension of U~_q(J) in the metric 2^-(first difference)."""
    alpha = canonical(alpha_sequence(q))
    if J.left_seq is not None and _cmp_base(alpha, J.left_seq) is Ordering.EQUAL:
        return _zero("q = q_L(J)", (J,))
    e = entropy_HJ(tree, J, q, tol)
    log2 = log_interval(2)
    basis = Basis.ZERO if e.hi == 0 else (Basis.BRACKET if "bracket" in e.depth_certificate else Basis.EXACT)
    return DimValue(RationalInterval(e.lo / log2.hi, e.hi / log2.lo), basis, (J,), e.depth_certificate)


# ---------------------------------------------------------------------------
# bifurcation sets and intervals


def p0_sequence(word: Word) -> EventuallyPeriodic:
    """a+ ~a ~a followed by (~a+ a a+) repeated."""
    plus = increment_last(word)
    bar, bar_plus = complement(word), complement(plus)
    return EventuallyPeriodic(word.alphabet, plus.digits + bar.digits + bar.digits,
                              bar_plus.digits + word.digits + plus.digits)


def bifurcation_dims(J: PlateauNode, precision: int = 128) -> tuple[DimValue, DimValue, BaseEnclosure]:
    if J.is_null or J.is_root:
        raise NotInPlateau("a proper plateau is needed")
    m = J.m
    dim_B = DimValue(_ratio(_scaled_log2(m), _log_base(J.q_R)), Basis.EXACT, (J,), "log 2/(m log q_R)")
    p0 = base_from_alpha(p0_sequence(J.generating_word), precision)
    dim_excess = DimValue(_ratio(_scaled_log2(3 * m), _log_base(p0)), Basis.EXACT, (J,), "log 2/(3m log p0)")
    return dim_B, dim_excess, p0


def p0_from_child(J: PlateauNode, precision: int = 128) -> BaseEnclosure:
    """Right endpoint of the basic interval generated by a+ ~a ~a+."""
    a = J.generating_word
    plus = increment_last(a)
    child = Word(a.alphabet, plus.digits + complement(a).digits + complement(plus).digits)
    return basic_interval(child, precision)[1]


def _contains_closed(node: PlateauNode, seq: DigitSeq) -> bool:
    if node.left_seq is not None and _cmp_base(seq, node.left_seq) is Ordering.LESS:
        return False
    return _cmp_base(seq, node.right_seq) is not Ordering.GREATER


def interval_dim(tree: PlateauTree, t1: BaseEnclosure, t2: BaseEnclosure, tol=DEFAULT_TOL,
                 depth_budget: int = DEFAULT_DEPTH) -> DimValue:
    """Dimension of U within [t1, t2].

    The smallest enumerated plateau J containing [t1, t2] is found within
    ``depth_budget`` levels.  The lower end maximizes H_J/log q over the
    endpoints of J's children that lie in [t1, t2]; the upper end adds the
    slack of H_J/log q across each stretch not covered by a child plateau.
    """
    a1, a2 = canonical(alpha_sequence(t1)), canonical(alpha_sequence(t2))
    if _cmp_base(a1, a2) is not Ordering.LESS:
        raise ValueError("t1 < t2 must be certified")
    chain = [tree.root]
    J = tree.root
    while J.level < depth_budget:
        nxt = None
        for k in tree.children_of(J):
            if _contains_closed(k, a1) and _contains_closed(k, a2):
                nxt = k
                break
        if nxt is None:
            break
        chain.append(nxt)
        J = nxt
        if J.is_null:
            if _cmp_base(a2, J.right_seq) is Ordering.LESS or _cmp_base(a1, J.right_seq) is not Ordering.LESS:
                # U meets a null interval at most in its right end q_c
                return _zero("inside a null interval", tuple(chain))
            return _zero("null interval meets U only in q_c", tuple(chain))
    witness = tuple(chain)

    def H(seq):
        if J.is_root:
            return entropy_H(tree, seq, tol)
        return entropy_HJ(tree, J, seq, tol)

    def base(seq, given=None):
        return given if given is not None else base_of(seq)

    # points: (alpha, enclosure, eligible for the lower bound)
    points = [(a1, t1, False), (a2, t2, False)]
    kids = tree.children_of(J)
    plateaus = []
    for k in kids:
        ends = [(k.right_seq, None)] if k.left_seq is None else [(k.left_seq, None), (k.right_seq, None)]
        if k.is_null:
            ends = [(k.right_seq, None)]
        for seq, _ in ends:
            if _cmp_base(seq, a1) is not Ordering.LESS and _cmp_base(seq, a2) is not Ordering.GREATER:
                points.append((seq, None, True))
        plateaus.append(k)
    if not J.is_root:
        # q_R(J) belongs to the closure of the bifurcation set
        if _cmp_base(J.right_seq, a2) is not Ordering.GREATER and _cmp_base(J.right_seq, a1) is not Ordering.LESS:
            points.append((J.right_seq, None, True))
    # order and deduplicate
    unique = {}
    for seq, enc, eligible in points:
        key = str(seq)
        if key in unique:
            unique[key] = (seq, unique[key][1] or enc, unique[key][2] or eligible)
        else:
            unique[key] = (seq, enc, eligible)
    ordered = sorted(unique.values(), key=cmp_to_key(lambda x, y: _order(x[0], y[0])))
    values = []
    for seq, enc, eligible in ordered:
        q = base(seq, enc)
        in_domain = J.is_root or in_node(seq, J, Mode.HALF_OPEN_RIGHT)
        h = H(seq if enc is None else enc) if in_domain else EntropyValue(RationalInterval.point(0), "exact-zero")
        values.append((seq, q, h, eligible))
    lo = Fraction(0)
    hi = Fraction(0)
    for seq, q, h, eligible in values:
        r = _ratio(h.value, _log_base(q))
        if eligible:
            lo = max(lo, r.lo)
        hi = max(hi, r.hi)
    for (s1, q1, _, _), (s2, q2, h2, _) in zip(values, values[1:]):
        if _inside_one_plateau(plateaus, s1, s2):
            continue
        hi = max(hi, h2.hi / _log_base(q1).lo)
    basis = Basis.EXACT if hi - lo <= tol else Basis.BRACKET
    return DimValue(RationalInterval(lo, max(lo, hi)), basis, witness)


def _order(x, y) -> int:
    o = _cmp_base(x, y)
    return -1 if o is Ordering.LESS else (1 if o is Ordering.GREATER else 0)


def _inside_one_plateau(plateaus, s1, s2) -> bool:
    """Whether [s1, s2] lies in one child interval, where the entropy is constant or zero."""
    for k in plateaus:
        if _contains_closed(k, s1) and _contains_closed(k, s2):
            return True
    return False


# ---------------------------------------------------------------------------
# strongly univoque scans


class Verdict(enum.Enum):
    IN_UTILDE = "InUtilde"
    IN_UCHECK = "InUcheck"
    IN_W_CANDIDATE = "InW_candidate"
    EXCLUDED = "Excluded"


@dataclass(frozen=True)
class StronglyUnivoqueReport:
    q: BaseEnclosure
    prefix: Word
    window_hits: list = field(default_factory=list)
    verdict: Verdict = Verdict.IN_UTILDE
    witness: int | None = None


def strongly_univoque_scan(q: BaseEnclosure, x, depth: int, k: int) -> StronglyUnivoqueReport:
    """Window statistics of x against the prefixes of alpha(q) and its complement.

    x must satisfy the strict bounds at every shift n < depth (as far as
    ``2 * depth`` digits decide).  Hits are the positions n <= depth - k where
    the length-k window equals alpha_1..alpha_k or its complement.  With
    k = 0 only the bound test is run.
    """
    if not 0 <= k <= depth:
        raise ValueError("need 0 <= k <= depth")
    x = as_sequence(x)
    M = q.M
    span = 2 * depth
    digits = x.prefix(span)
    alpha = alpha_sequence(q).prefix(span)
    bar = tuple(M - d for d in alpha)
    prefix = Word(q.alphabet, digits[:depth])
    for n in range(depth):
        window = digits[n:]
        if window > alpha[:len(window)] or window < bar[:len(window)]:
            return StronglyUnivoqueReport(q, prefix, [], Verdict.EXCLUDED, n)
    if k == 0:
        return StronglyUnivoqueReport(q, prefix, [], Verdict.IN_UTILDE)
    hits = []
    for n in range(depth - k + 1):
        window = digits[n:n + k]
        if window == alpha[:k] or window == bar[:k]:
            hits.append((n, k))
    verdict = Verdict.IN_W_CANDIDATE if hits else Verdict.IN_UCHECK
    return StronglyUnivoqueReport(q, prefix, hits, verdict)
