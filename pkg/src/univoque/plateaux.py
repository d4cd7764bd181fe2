"""Admissible words, basic intervals and the nested tree of relative plateaus.

Every comparison between a base and a plateau endpoint is done on the
quasi-greedy expansions, which is exact whenever both sides have a closed
form.  Numerical enclosures of the endpoints are computed lazily.
"""
from __future__ import annotations

import enum
import os
import tempfile
from dataclasses import dataclass, field
from functools import cmp_to_key, lru_cache

from .expansion import (
    DEFAULT_PRECISION,
    BaseEnclosure,
    Validity,
    alpha_sequence,
    base_from_alpha,
    canonical,
    two_sided_check,
)
from .phimap import InvalidReference, NotInXJ, automaton, phi_sequence, pullback_plateau
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


class NotAdmissible(ValueError):
    pass


class UndecidableAtPrecision(ArithmeticError):
    """A base enclosure straddles a plateau endpoint."""


# ---------------------------------------------------------------------------
# words


def is_admissible(w: Word) -> bool:
    a, M = w.digits, w.M
    m = len(a)
    if m == 1:
        return M >= 2 and M - a[0] <= a[0] < M
    for i in range(1, m):
        tail = a[i:]
        head = a[:m - i]
        if not tail < head:
            return False
        if tuple(M - d for d in head) > tail:
            return False
    return True


def is_doubled(w: Word) -> bool:
    """True when w = s followed by the complement of s."""
    a, M = w.digits, w.M
    if len(a) % 2:
        return False
    h = len(a) // 2
    return all(a[h + i] == M - a[i] for i in range(h))


def _require_admissible(w: Word):
    if not is_admissible(w):
        raise NotAdmissible(f"{w} is not admissible over {{0..{w.M}}}")


def left_sequence(w: Word) -> EventuallyPeriodic:
    return EventuallyPeriodic(w.alphabet, (), w.digits)


def right_sequence(w: Word) -> EventuallyPeriodic:
    return EventuallyPeriodic(w.alphabet, increment_last(w).digits, complement(w).digits)


def doubling_sequence(w: Word) -> DvkDoubling:
    return DvkDoubling(increment_last(w))


def golden_sequence(w: Word) -> EventuallyPeriodic:
    plus = increment_last(w)
    return EventuallyPeriodic(w.alphabet, (), plus.digits + complement(plus).digits)


def fibonacci_sequence(w: Word) -> EventuallyPeriodic:
    plus = increment_last(w)
    return EventuallyPeriodic(w.alphabet, (),
                              plus.digits + complement(w).digits + complement(plus).digits + w.digits)


@lru_cache(maxsize=None)
def base_of(seq: DigitSeq, precision: int = DEFAULT_PRECISION) -> BaseEnclosure:
    return base_from_alpha(seq, precision)


def basic_interval(w: Word, precision: int = DEFAULT_PRECISION) -> tuple[BaseEnclosure, BaseEnclosure]:
    _require_admissible(w)
    return base_of(left_sequence(w), precision), base_of(right_sequence(w), precision)


def dvk_sequence(w: Word, n: int) -> Word:
    _require_admissible(w)
    return Word(w.alphabet, doubling_sequence(w).prefix(n))


def special_points(w: Word, precision: int = DEFAULT_PRECISION):
    """(q_G, q_F, q_c) of the basic interval generated by w."""
    _require_admissible(w)
    return (base_of(golden_sequence(w), precision),
            base_of(fibonacci_sequence(w), precision),
            base_of(doubling_sequence(w), precision))


def admissible_words(M: int, max_len: int, prefix: tuple[int, ...] = ()):
    """All admissible words of length <= max_len starting with ``prefix``.

    Depth-first search; prefixes of admissible words satisfy the two-sided
    condition with non-strict upper bounds, which prunes the search.
    """
    alphabet = Alphabet(M)

    def weak_ok(a):
        k = len(a)
        for i in range(1, k):
            tail, head = a[i:], a[:k - i]
            if tail > head or tuple(M - d for d in head) > tail:
                return False
        return True

    stack = [prefix] if prefix else [(d,) for d in range(M, -1, -1)]
    while stack:
        a = stack.pop()
        if not weak_ok(a):
            continue
        w = Word(alphabet, a)
        if is_admissible(w):
            yield w
        if len(a) < max_len:
            stack.extend(a + (d,) for d in range(M, -1, -1))


def _sequence_cmp(x, y) -> int:
    order = lex_compare(x, y)
    if order is Ordering.UNDECIDED:
        raise UndecidableAtPrecision(f"cannot order {x} and {y}")
    return {Ordering.LESS: -1, Ordering.EQUAL: 0, Ordering.GREATER: 1}[order]


def _at_most(x, y) -> bool:
    return _sequence_cmp(x, y) <= 0


@lru_cache(maxsize=None)
def _komornik_loreti_seq(M: int) -> ThueMorseLambda:
    return ThueMorseLambda(Alphabet(M))


def level1_words(M: int, max_word_len: int) -> tuple[Word, ...]:
    """Generating words of the maximal basic intervals right of q_KL, by q_L."""
    return _level1_words(M, max_word_len)


@lru_cache(maxsize=None)
def _level1_words(M: int, max_word_len: int) -> tuple[Word, ...]:
    lam = _komornik_loreti_seq(M)
    candidates = [w for w in admissible_words(M, max_word_len)
                  if lex_compare(left_sequence(w), lam) is Ordering.GREATER]
    candidates.sort(key=cmp_to_key(lambda u, v: _sequence_cmp(left_sequence(u), left_sequence(v))))
    maximal = []
    for w in candidates:
        # intervals are nested or disjoint, so one sweep by left endpoint suffices
        if maximal and _at_most(left_sequence(w), right_sequence(maximal[-1])):
            continue
        maximal.append(w)
    return tuple(maximal)


# ---------------------------------------------------------------------------
# tree


@dataclass(frozen=True)
class PlateauNode:
    """One node of the plateau tree.

    ``left_seq`` is None for intervals starting at the base 1.  Null nodes
    keep their parent's word in ``parent_word`` and have no generating word.
    """

    M: int
    path: tuple[int, ...]
    generating_word: Word | None
    left_seq: DigitSeq | None
    right_seq: DigitSeq
    is_null: bool = False
    parent_word: Word | None = None
    precision_bits: int = DEFAULT_PRECISION
    reference_word: Word | None = None

    @property
    def level(self) -> int:
        return len(self.path)

    @property
    def is_root(self) -> bool:
        return not self.path

    @property
    def m(self) -> int:
        return len(self.generating_word) if self.generating_word is not None else 0

    @property
    def label(self) -> str:
        return ".".join(map(str, self.path)) if self.path else "root"

    @property
    def c_seq(self) -> DigitSeq | None:
        if self.is_null:
            return None
        if self.is_root:
            return _komornik_loreti_seq(self.M)
        return doubling_sequence(self.generating_word)

    @property
    def q_L(self) -> BaseEnclosure | None:
        return None if self.left_seq is None else base_of(self.left_seq, self.precision_bits)

    @property
    def q_R(self) -> BaseEnclosure:
        return base_of(self.right_seq, self.precision_bits)

    @property
    def q_c(self) -> BaseEnclosure | None:
        c = self.c_seq
        return None if c is None else base_of(c, self.precision_bits)

    @property
    def q_G(self) -> BaseEnclosure | None:
        if self.is_null or self.is_root:
            return None
        return base_of(golden_sequence(self.generating_word), self.precision_bits)

    @property
    def q_F(self) -> BaseEnclosure | None:
        if self.is_null or self.is_root:
            return None
        return base_of(fibonacci_sequence(self.generating_word), self.precision_bits)

    def __str__(self):
        word = str(self.generating_word) if self.generating_word is not None else "-"
        return f"J[{self.label}] {word}{' (null)' if self.is_null else ''}"


def root_node(M: int, precision: int = DEFAULT_PRECISION) -> PlateauNode:
    alphabet = Alphabet(M)
    return PlateauNode(M, (), None, None, EventuallyPeriodic(alphabet, (), (M,)), precision_bits=precision)


def plateau_node(w: Word, path: tuple[int, ...], precision: int = DEFAULT_PRECISION,
                 reference_word: Word | None = None) -> PlateauNode:
    return PlateauNode(w.M, path, w, left_sequence(w), right_sequence(w), precision_bits=precision,
                       reference_word=reference_word)


def null_child(node: PlateauNode) -> PlateauNode:
    if node.is_null:
        raise ValueError("null intervals have no children")
    return PlateauNode(node.M, node.path + (0,), None, node.left_seq, node.c_seq, True,
                       node.generating_word, node.precision_bits)


def reference_words(max_ref_len: int) -> tuple[Word, ...]:
    return level1_words(1, max_ref_len)


def children(node: PlateauNode, max_ref_len: int) -> list[PlateauNode]:
    """Null child first, then the plateaus inside [q_c, q_R] by increasing q_L.

    For the root these are the level-one plateaus (with ``max_ref_len`` as
    word-length horizon); below, the reference plateaus are pulled back.
    """
    out = [null_child(node)]
    if node.is_root:
        pairs = [(w, None) for w in level1_words(node.M, max_ref_len)]
    else:
        pairs = [(pullback_plateau(r, node.generating_word), r) for r in reference_words(max_ref_len)]
    for i, (w, r) in enumerate(pairs, start=1):
        out.append(plateau_node(w, node.path + (i,), node.precision_bits, r))
    return out


def children_direct(node: PlateauNode, max_len: int) -> list[Word]:
    """Oracle for ``children``: search admissible words inside [q_c, q_R] directly.

    Returns the generating words of the maximal basic intervals found, by q_L.
    """
    if node.is_null or node.is_root:
        raise ValueError("direct search needs a proper plateau")
    a = node.generating_word
    lower, upper = node.c_seq, node.right_seq
    plus = increment_last(a).digits
    M = a.M

    def inside(w):
        return (lex_compare(left_sequence(w), lower) is Ordering.GREATER
                and _at_most(right_sequence(w), upper))

    found = []
    stack = [plus]
    alphabet = Alphabet(M)
    while stack:
        u = stack.pop()
        k = len(u)
        if any(u[i:] > u[:k - i] or tuple(M - d for d in u[:k - i]) > u[i:] for i in range(1, k)):
            continue
        w = Word(alphabet, u)
        if is_admissible(w) and inside(w):
            found.append(w)
        if k < max_len:
            for d in range(M + 1):
                v = u + (d,)
                # periodic extension of a candidate stays above q_c only if its prefix does
                if upper.prefix(k + 1) >= v:
                    stack.append(v)
    found.sort(key=cmp_to_key(lambda u, v: _sequence_cmp(left_sequence(u), left_sequence(v))))
    maximal = []
    for w in found:
        if maximal and _at_most(left_sequence(w), right_sequence(maximal[-1])):
            continue
        maximal.append(w)
    return maximal


@dataclass
class PlateauTree:
    """Plateau tree truncated by word length; deeper levels are expanded on demand."""

    M: int
    max_word_len: int
    max_ref_len: int
    precision_bits: int = DEFAULT_PRECISION
    nodes: dict = field(default_factory=dict)
    _children: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.root = root_node(self.M, self.precision_bits)
        self.nodes[()] = self.root

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.M)

    def children_of(self, node: PlateauNode) -> list[PlateauNode]:
        if node.is_null:
            return []
        if node.path not in self._children:
            horizon = self.max_word_len if node.is_root else self.max_ref_len
            kids = children(node, horizon)
            self._children[node.path] = kids
            for k in kids:
                self.nodes[k.path] = k
        return self._children[node.path]

    def node(self, path) -> PlateauNode:
        if isinstance(path, str):
            path = parse_path(path)
        path = tuple(path)
        for i in range(1, len(path) + 1):
            if path[:i] not in self.nodes:
                self.children_of(self.nodes[path[:i - 1]])
            if path[:i] not in self.nodes:
                raise KeyError(f"no node at path {'.'.join(map(str, path))}")
        return self.nodes[path]

    def expand(self, levels: int):
        frontier = [self.root]
        for _ in range(levels):
            nxt = []
            for n in frontier:
                nxt.extend(k for k in self.children_of(n) if not k.is_null)
            frontier = nxt
        return self

    def built_nodes(self) -> list[PlateauNode]:
        return [self.nodes[p] for p in sorted(self.nodes)]


def parse_path(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "root"):
        return ()
    return tuple(int(t) for t in text.split("."))


def build_tree(M: int, max_word_len: int = 8, levels: int = 1, max_ref_len: int = 8,
               precision_bits: int = DEFAULT_PRECISION) -> PlateauTree:
    return PlateauTree(M, max_word_len, max_ref_len, precision_bits).expand(levels)


def enumerate_level1(M: int, max_word_len: int, window=None, precision: int = DEFAULT_PRECISION) -> list[PlateauNode]:
    nodes = [plateau_node(w, (i,), precision) for i, w in enumerate(level1_words(M, max_word_len), start=1)]
    if window is not None:
        lo, hi = window
        nodes = [n for n in nodes if n.q_R.hi >= lo and n.q_L.lo <= hi]
    return nodes


# ---------------------------------------------------------------------------
# locating bases


class Mode(enum.Enum):
    HALF_OPEN_RIGHT = "half-open"
    OPEN = "open"


@dataclass(frozen=True)
class PlateauChain:
    nodes: tuple[PlateauNode, ...]
    covered: bool = True
    note: str = ""

    @property
    def deepest(self) -> PlateauNode:
        return self.nodes[-1]

    @property
    def smallest_plateau(self) -> PlateauNode:
        """Deepest non-null node of the chain."""
        for n in reversed(self.nodes):
            if not n.is_null:
                return n
        raise AssertionError("a chain always contains the root")


class NotCovered(PlateauChain):
    """The base lies in a gap between enumerated children of ``deepest``."""


class DepthLimit(PlateauChain):
    """The base lies in plateaus at every level down to the depth limit."""


def _cmp_base(alpha: DigitSeq, seq: DigitSeq | None) -> Ordering:
    if seq is None:
        return Ordering.GREATER
    order = lex_compare(alpha, seq)
    if order is Ordering.UNDECIDED:
        raise UndecidableAtPrecision(f"expansion {alpha} is not separated from endpoint {seq}")
    return order


def in_node(alpha: DigitSeq, node: PlateauNode, mode: Mode) -> bool:
    """Whether the base with expansion alpha lies in (left, right] or (left, right)."""
    if _cmp_base(alpha, node.left_seq) is not Ordering.GREATER:
        return False
    right = _cmp_base(alpha, node.right_seq)
    if mode is Mode.OPEN:
        return right is Ordering.LESS
    return right is not Ordering.GREATER


def _closed_form(alpha: DigitSeq) -> bool:
    return isinstance(alpha, (EventuallyPeriodic, ThueMorseLambda, DvkDoubling))


def plateau_word_containing(alpha: DigitSeq, M: int, limit: int | None = None) -> Word | None:
    """Generating word of the level-one plateau [q_L, q_R] containing the base, if any.

    Candidates are read off the expansion itself: inside a plateau generated
    by w the expansion is either w^inf or starts with w+.
    """
    alpha = canonical(alpha)
    if limit is None:
        if isinstance(alpha, EventuallyPeriodic):
            limit = len(alpha.preamble) + 2 * len(alpha.period) + 8
        else:
            limit = 64
    digits = alpha.prefix(limit)
    lam = _komornik_loreti_seq(M)
    alphabet = Alphabet(M)
    for j in range(1, limit + 1):
        head = digits[:j]
        options = [head]
        if head[-1] > 0:
            options.append(head[:-1] + (head[-1] - 1,))
        for cand in options:
            w = Word(alphabet, cand)
            if not is_admissible(w):
                continue
            if lex_compare(left_sequence(w), lam) is not Ordering.GREATER:
                continue
            lo = lex_compare(alpha, left_sequence(w))
            hi = lex_compare(alpha, right_sequence(w))
            if Ordering.UNDECIDED in (lo, hi):
                continue
            if lo is not Ordering.LESS and hi is not Ordering.GREATER:
                return w
    return None


def _symbolic_child(node: PlateauNode, alpha: DigitSeq) -> Word | None:
    """Exact child of a node containing the base, for closed-form expansions."""
    if node.is_root:
        return plateau_word_containing(alpha, node.M)
    try:
        image = phi_sequence(alpha, automaton(node.generating_word))
    except NotInXJ:
        return None
    if isinstance(image, Finite):
        return None
    ref = plateau_word_containing(image, 1)
    if ref is None:
        return None
    try:
        return pullback_plateau(ref, node.generating_word)
    except InvalidReference:
        return None


def smallest_plateau_containing(tree: PlateauTree, q, mode: Mode = Mode.HALF_OPEN_RIGHT,
                                max_depth: int | None = None) -> PlateauChain:
    """Chain of nodes containing q, from the root down to the smallest one.

    Returns ``NotCovered`` when q lies strictly between the enumerated children
    of the deepest node and the enumeration cannot rule out a longer child,
    and ``DepthLimit`` when the chain is cut at ``max_depth`` levels.
    """
    alpha = q if isinstance(q, DigitSeq) else alpha_sequence(q)
    alpha = canonical(alpha)
    chain = [tree.root]
    node = tree.root
    if alpha == EventuallyPeriodic(tree.alphabet, (), (tree.M,)):
        return PlateauChain(tuple(chain), True, "q = M+1")
    while True:
        if max_depth is not None and node.level >= max_depth:
            return DepthLimit(tuple(chain), False, f"contained in plateaus down to level {node.level}")
        kids = tree.children_of(node)
        nxt = None
        for k in kids:
            if in_node(alpha, k, mode):
                nxt = k
                break
        if nxt is None:
            break
        chain.append(nxt)
        node = nxt
        if node.is_null:
            return PlateauChain(tuple(chain))
    # q is in (q_c, q_R] of node, or equal to q_c in open mode, but in no enumerated child
    c = node.c_seq
    if _cmp_base(alpha, c) is not Ordering.GREATER:
        return PlateauChain(tuple(chain))
    if mode is Mode.HALF_OPEN_RIGHT and _cmp_base(alpha, node.right_seq) is Ordering.EQUAL:
        return PlateauChain(tuple(chain), True, "q = q_R")
    if _closed_form(alpha):
        w = _symbolic_child(node, alpha)
        if w is None:
            return PlateauChain(tuple(chain), True, "no child contains q")
        if any(k.generating_word == w for k in kids):
            # an endpoint of an enumerated child excluded by the open convention
            return PlateauChain(tuple(chain), True, "q is an endpoint of an enumerated child")
        return NotCovered(tuple(chain), False, f"q lies in the child generated by {w}, beyond the enumeration horizon")
    return NotCovered(tuple(chain), False, "q lies between enumerated children")


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Classification:
    U: Validity
    V: Validity
    closure_U: Validity
    B: Validity
    B_L: Validity
    B_R: Validity
    C0: Validity
    depth: int

    def as_dict(self) -> dict:
        return {k: getattr(self, k).value for k in ("U", "V", "closure_U", "B", "B_L", "B_R", "C0")}


YES, NO, UNKNOWN = Validity.YES, Validity.NO, Validity.UNKNOWN


def _is_doubling_of_plateau(alpha: DigitSeq) -> bool:
    if isinstance(alpha, ThueMorseLambda):
        return True
    if isinstance(alpha, DvkDoubling):
        seed = alpha.seed
        a = Word(seed.alphabet, seed.digits[:-1] + (seed.digits[-1] - 1,))
        return is_admissible(a) and not is_doubled(a)
    return False


def _bifurcation_flags(tree: PlateauTree, alpha: DigitSeq):
    """(B, B_L, B_R) decided from the level-one plateaus."""
    M = tree.M
    top = EventuallyPeriodic(tree.alphabet, (), (M,))
    if lex_compare(alpha, top) is Ordering.EQUAL:
        return YES, YES, YES
    kl = _cmp_base(alpha, _komornik_loreti_seq(M))
    if kl is Ordering.LESS:
        return NO, NO, NO
    if kl is Ordering.EQUAL:
        return NO, NO, YES
    word = None
    for k in tree.children_of(tree.root)[1:]:
        lo = _cmp_base(alpha, k.left_seq)
        hi = _cmp_base(alpha, k.right_seq)
        if lo is not Ordering.LESS and hi is not Ordering.GREATER:
            word = k.generating_word
            break
    if word is None and _closed_form(alpha):
        word = plateau_word_containing(alpha, M)
        if word is None:
            return YES, YES, YES
    if word is None:
        return UNKNOWN, UNKNOWN, UNKNOWN
    if lex_compare(alpha, left_sequence(word)) is Ordering.EQUAL:
        return NO, YES, NO
    if lex_compare(alpha, right_sequence(word)) is Ordering.EQUAL:
        return NO, NO, YES
    return NO, NO, NO


def is_left_endpoint(tree: PlateauTree, alpha: DigitSeq) -> Validity:
    """Whether the base is the left endpoint of some relative plateau."""
    alpha = canonical(alpha)
    if not isinstance(alpha, EventuallyPeriodic):
        return NO if _closed_form(alpha) else UNKNOWN
    if alpha.preamble:
        return NO
    w = Word(alpha.alphabet, alpha.period)
    return YES if is_admissible(w) and not is_doubled(w) else NO


def classify(tree: PlateauTree, q, depth: int = 256) -> Classification:
    alpha = q if isinstance(q, DigitSeq) else alpha_sequence(q)
    alpha = canonical(alpha)
    M = tree.M
    if lex_compare(alpha, EventuallyPeriodic(tree.alphabet, (), (M,))) is Ordering.EQUAL:
        return Classification(YES, YES, YES, YES, YES, YES, NO, depth)
    U = two_sided_check(alpha, strict=True, depth=depth).validity
    V = two_sided_check(alpha, strict=False, depth=depth).validity
    if U is YES:
        V = YES
    if V is NO:
        U = NO
    # closure of U
    if U is YES:
        closure = YES
    elif V is NO:
        closure = NO
    else:
        left = is_left_endpoint(tree, alpha)
        closure = YES if (left is YES and V is YES) else UNKNOWN
        if closure is UNKNOWN:
            try:
                chain = smallest_plateau_containing(tree, alpha, Mode.HALF_OPEN_RIGHT)
                last = chain.deepest
                if last.is_null and _cmp_base(alpha, last.right_seq) is Ordering.LESS:
                    closure = NO
            except UndecidableAtPrecision:
                pass
    # de Vries-Komornik numbers
    if _is_doubling_of_plateau(alpha):
        C0 = YES
    elif U is NO or isinstance(alpha, EventuallyPeriodic):
        C0 = NO
    else:
        C0 = UNKNOWN
    try:
        B, B_L, B_R = _bifurcation_flags(tree, alpha)
    except UndecidableAtPrecision:
        B = B_L = B_R = UNKNOWN
    return Classification(U, V, closure, B, B_L, B_R, C0, depth)


# ---------------------------------------------------------------------------
# cache file


def _enc(b: BaseEnclosure | None) -> str:
    return "-" if b is None else str(b)


def node_record(node: PlateauNode) -> str:
    word = str(node.generating_word) if node.generating_word is not None else "-"
    fields = [node.label, word, _enc(node.q_L), _enc(node.q_R),
              _enc(node.q_c), _enc(node.q_G), _enc(node.q_F),
              "null" if node.is_null else "plateau"]
    return "\t".join(fields)


def write_cache(tree: PlateauTree, path: str) -> str:
    lines = [f"# M={tree.M} max_word_len={tree.max_word_len} max_ref_len={tree.max_ref_len} "
             f"precision={tree.precision_bits}",
             "# path\tword\tq_L\tq_R\tq_c\tq_G\tq_F\tkind"]
    lines += [node_record(n) for n in tree.built_nodes()]
    text = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tree-", suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return text


def read_cache(path: str) -> list[dict]:
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            p, word, qL, qR, qc, qG, qF, kind = line.rstrip("\n").split("\t")
            rows.append({"path": p, "word": word, "q_L": qL, "q_R": qR, "q_c": qc,
                         "q_G": qG, "q_F": qF, "null": kind == "null"})
    return rows
