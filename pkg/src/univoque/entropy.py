"""Subshifts of finite type, their Perron roots and the entropy functions
H(q) = h(U~_q) and H_J(q) = h(U~_q(J)).

An SFT is given by a bound word b of length l: a sequence is allowed when
every window of length l lies strictly between the complement of b and b
(or weakly, for outer approximations).  The follower graph has the
(l-1)-words as vertices.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .expansion import RationalInterval, alpha_sequence, canonical
from .phimap import NotInPlateau, NotInXJ, automaton, phi_sequence
from .plateaux import (
    Mode,
    PlateauNode,
    PlateauTree,
    UndecidableAtPrecision,
    _closed_form,
    _cmp_base,
    _komornik_loreti_seq,
    in_node,
    plateau_word_containing,
)
from .words import Alphabet, DigitSeq, EventuallyPeriodic, Finite, Ordering, Word, complement, increment_last

DEFAULT_TOL = Fraction(1, 10**9)
# vertex budget for the prefix approximations used away from plateaus
PREFIX_VERTEX_BUDGET = 20_000
MAX_BRUTE_EXPONENT = 25.0


class EmptySubshift(ValueError):
    pass


class TooLarge(ValueError):
    pass


# ---------------------------------------------------------------------------
# follower graphs


@dataclass(frozen=True)
class FollowerGraph:
    """Follower graph of an SFT.

    ``successors[i]`` lists (target index, label) pairs.  ``starts`` is None
    for the two-sided SFT; otherwise it holds the vertices where sequences
    beginning with ``start_prefix`` may be after their first l-1 digits.
    """

    bound_word: Word
    strict: bool
    vertices: tuple[tuple[int, ...], ...]
    successors: tuple[tuple[tuple[int, int], ...], ...]
    starts: tuple[int, ...] | None = None
    start_prefix: tuple[int, ...] | None = None

    @property
    def M(self) -> int:
        return self.bound_word.M

    @property
    def l(self) -> int:
        return len(self.bound_word)

    @property
    def size(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return sum(len(s) for s in self.successors)

    def adjacency(self) -> csr_matrix:
        rows, cols = [], []
        for i, succ in enumerate(self.successors):
            for j, _ in succ:
                rows.append(i)
                cols.append(j)
        data = np.ones(len(rows), dtype=np.int64)
        return csr_matrix((data, (rows, cols)), shape=(self.size, self.size))

    def export(self) -> str:
        """Adjacency list: vertex word, then ``target/label`` per edge."""
        def name(v):
            return "".join(map(str, v)) or "()"

        lines = []
        for v, succ in zip(self.vertices, self.successors):
            edges = " ".join(f"{name(self.vertices[j])}/{d}" for j, d in succ)
            lines.append(f"{name(v)}: {edges}")
        return "\n".join(lines) + "\n"


class _Bounds:
    """Window tests for a bound word."""

    def __init__(self, bound: tuple[int, ...], M: int, strict: bool):
        self.upper = bound
        self.lower = tuple(M - d for d in bound)
        self.l = len(bound)
        self.strict = strict

    def window_ok(self, w: tuple[int, ...]) -> bool:
        if self.strict:
            return self.lower < w < self.upper
        return self.lower <= w <= self.upper

    def head_ok(self, s: tuple[int, ...]) -> bool:
        """A word shorter than l that starts a window must respect the bounds weakly."""
        k = len(s)
        return self.lower[:k] <= s <= self.upper[:k]

    def tail_ok(self, w: tuple[int, ...]) -> bool:
        """Check the windows and window heads ending at the last digit of w."""
        n = len(w)
        if n >= self.l and not self.window_ok(w[n - self.l:]):
            return False
        return all(self.head_ok(w[n - k:]) for k in range(1, min(n, self.l - 1) + 1))

    def word_ok(self, w: tuple[int, ...]) -> bool:
        return all(self.tail_ok(w[:i]) for i in range(1, len(w) + 1))


def _check_bound(bound_word: Word):
    if not bound_word.digits > complement(bound_word).digits:
        raise EmptySubshift(f"bound {bound_word} does not exceed its complement")


def build_sft(bound_word: Word, start: Word | tuple[int, ...] | None = None, strict: bool = True,
              max_vertices: int | None = None) -> FollowerGraph:
    """Follower graph of the SFT defined by ``bound_word``.

    Without ``start`` the graph is pruned to vertices on bi-infinite paths.
    With ``start`` it holds the vertices reachable by one-sided sequences
    beginning with that prefix, pruned of dead ends only.
    """
    _check_bound(bound_word)
    M = bound_word.M
    bounds = _Bounds(bound_word.digits, M, strict)
    l = bounds.l
    if start is None:
        verts = _all_heads(bounds, M, l - 1, max_vertices)
        starts = None
    else:
        prefix = start.digits if isinstance(start, Word) else tuple(start)
        verts, starts = _reachable(bounds, M, prefix, max_vertices)
    index = {v: i for i, v in enumerate(verts)}
    succ = [[] for _ in verts]
    for i, u in enumerate(verts):
        for d in range(M + 1):
            w = u + (d,)
            # vertices already satisfy the head bounds, so only the full window is new
            if not bounds.window_ok(w):
                continue
            j = index.get(w[1:] if l > 1 else ())
            if j is not None:
                succ[i].append((j, d))
    keep = _prune(succ, two_sided=start is None)
    if not keep:
        raise EmptySubshift(f"no sequence satisfies the bound {bound_word}")
    order = sorted(keep, key=lambda i: verts[i])
    new = {old: k for k, old in enumerate(order)}
    vertices = tuple(verts[i] for i in order)
    successors = tuple(tuple((new[j], d) for j, d in succ[i] if j in new) for i in order)
    start_idx = None
    if starts is not None:
        start_idx = tuple(sorted({new[index[s]] for s in starts if index[s] in new}))
        if not start_idx:
            raise EmptySubshift(f"no allowed sequence starts with {''.join(map(str, prefix))}")
    return FollowerGraph(bound_word, strict, vertices, successors, start_idx,
                         None if start is None else prefix)


def _all_heads(bounds: _Bounds, M: int, length: int, budget: int | None) -> list[tuple[int, ...]]:
    """All words of the given length whose window heads respect the bounds.

    Depth-first search that only tracks the suffixes still equal to a prefix
    of the upper or lower bound; every other suffix is already strictly
    inside and stays so.
    """
    upper, lower = bounds.upper, bounds.lower
    out = []
    stack = [((), (), ())]
    while stack:
        u, tight_hi, tight_lo = stack.pop()
        if len(u) == length:
            out.append(u)
            if budget is not None and len(out) > budget:
                raise TooLarge(f"more than {budget} vertices")
            continue
        for d in range(M, -1, -1):
            hi_next, lo_next, ok = [], [], True
            for k in (0,) + tight_hi:
                if d > upper[k]:
                    ok = False
                    break
                if d == upper[k]:
                    hi_next.append(k + 1)
            if not ok:
                continue
            for k in (0,) + tight_lo:
                if d < lower[k]:
                    ok = False
                    break
                if d == lower[k]:
                    lo_next.append(k + 1)
            if ok:
                stack.append((u + (d,), tuple(hi_next), tuple(lo_next)))
    return sorted(out)


def _reachable(bounds: _Bounds, M: int, prefix: tuple[int, ...], budget: int | None):
    if not bounds.word_ok(prefix):
        raise EmptySubshift(f"the prefix {''.join(map(str, prefix))} violates the bound")
    l = bounds.l
    # extend the prefix to at least l-1 digits
    heads = [prefix]
    while heads and len(heads[0]) < l - 1:
        heads = [u + (d,) for u in heads for d in range(M + 1) if bounds.tail_ok(u + (d,))]
    starts = sorted({u[len(u) - (l - 1):] if l > 1 else () for u in heads})
    seen = set(starts)
    queue = deque(starts)
    while queue:
        u = queue.popleft()
        for d in range(M + 1):
            w = u + (d,)
            if bounds.tail_ok(w):
                v = w[1:] if l > 1 else ()
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
                    if budget is not None and len(seen) > budget:
                        raise TooLarge(f"more than {budget} vertices")
    return sorted(seen), starts


def _prune(succ: list[list[tuple[int, int]]], two_sided: bool) -> set[int]:
    n = len(succ)
    pred = [[] for _ in range(n)]
    outdeg = [len(s) for s in succ]
    indeg = [0] * n
    for i, s in enumerate(succ):
        for j, _ in s:
            pred[j].append(i)
            indeg[j] += 1
    alive = [True] * n
    queue = deque(i for i in range(n) if outdeg[i] == 0 or (two_sided and indeg[i] == 0))
    while queue:
        i = queue.popleft()
        if not alive[i]:
            continue
        alive[i] = False
        for p in pred[i]:
            if alive[p]:
                outdeg[p] -= 1
                if outdeg[p] == 0:
                    queue.append(p)
        if two_sided:
            for j, _ in succ[i]:
                if alive[j]:
                    indeg[j] -= 1
                    if indeg[j] == 0:
                        queue.append(j)
    return {i for i in range(n) if alive[i]}


# ---------------------------------------------------------------------------
# components and Perron roots


def strong_components(g: FollowerGraph) -> list[list[int]]:
    """Nontrivial strongly connected components (those carrying a cycle)."""
    if g.size == 0:
        return []
    A = g.adjacency()
    count, labels = connected_components(A, directed=True, connection="strong")
    groups = [[] for _ in range(count)]
    for i, c in enumerate(labels):
        groups[c].append(i)
    out = []
    for comp in groups:
        if len(comp) > 1 or any(j == comp[0] for j, _ in g.successors[comp[0]]):
            out.append(comp)
    return out


def is_transitive(g: FollowerGraph) -> tuple[bool, list[list[tuple[int, ...]]]]:
    comps = strong_components(g)
    words = [[g.vertices[i] for i in c] for c in comps]
    return len(comps) == 1 and len(comps[0]) == g.size, words


_ROUNDING = 2.0 ** -53


def _perron_seed(B: csr_matrix) -> np.ndarray:
    n = B.shape[0]
    if n <= 600:
        vals, vecs = np.linalg.eig(B.toarray().astype(float))
        k = int(np.argmax(vals.real))
        x = np.abs(vecs[:, k].real)
    else:
        x = np.ones(n)
        shifted = B + _identity(n)
        for _ in range(200):
            x = shifted @ x
            x /= x.max()
    return x


def _identity(n: int) -> csr_matrix:
    return csr_matrix((np.ones(n), (np.arange(n), np.arange(n))), shape=(n, n))


def _cw_bounds(B: csr_matrix, x: np.ndarray, max_row: int) -> tuple[float, float]:
    """Collatz-Wielandt bounds min (Bx)_i/x_i <= rho <= max (Bx)_i/x_i, widened for rounding."""
    y = B @ x
    ratios = y / x
    slack = (max_row + 3) * _ROUNDING
    return float(ratios.min()) * (1 - slack), float(ratios.max()) * (1 + slack)


def _component_radius(B: csr_matrix, tol: float, max_iter: int) -> tuple[float, float]:
    n = B.shape[0]
    max_row = int(np.diff(B.indptr).max())
    x = _perron_seed(B)
    shifted = (B + _identity(n)).tocsr()
    lo, hi = 0.0, float(max_row)
    for it in range(max_iter):
        x = np.maximum(x, x.max() * 1e-250)
        x = x / x.max()
        a, b = _cw_bounds(B, x, max_row)
        lo, hi = max(lo, a), min(hi, b)
        if hi - lo <= tol:
            break
        for _ in range(8):
            x = shifted @ x
            x /= x.max()
    return lo, hi


def spectral_radius(g: FollowerGraph, tol=DEFAULT_TOL, max_iter: int = 5000) -> RationalInterval:
    """Certified enclosure of the Perron root, maximized over strong components."""
    lo = hi = 0.0
    A = g.adjacency()
    for comp in strong_components(g):
        idx = np.array(comp)
        B = A[idx][:, idx].tocsr().astype(float)
        a, b = _component_radius(B, float(tol), max_iter)
        lo, hi = max(lo, a), max(hi, b)
    return RationalInterval(Fraction(lo), Fraction(hi))


def _log_interval(r: RationalInterval) -> RationalInterval:
    lo = 0.0 if r.lo <= 1 else math.nextafter(math.log(float(r.lo) * (1 - _ROUNDING)), 0.0)
    hi = 0.0 if r.hi <= 1 else math.nextafter(math.log(float(r.hi) * (1 + _ROUNDING)), math.inf)
    return RationalInterval(Fraction(max(lo, 0.0)), Fraction(max(hi, lo, 0.0)))


def topological_entropy(g: FollowerGraph, tol=DEFAULT_TOL) -> RationalInterval:
    """Natural-log entropy of the SFT, or of its one-sided part reachable from the starts."""
    return _log_interval(spectral_radius(g, tol))


def log_interval(x) -> RationalInterval:
    x = float(x)
    return RationalInterval(Fraction(math.nextafter(math.log(x), 0.0)), Fraction(math.nextafter(math.log(x), math.inf)))


# ---------------------------------------------------------------------------
# block counts


def count_blocks_matrix(g: FollowerGraph, n: int) -> int:
    """Number of length-n blocks of the two-sided SFT, by exact path counting."""
    if g.starts is not None:
        raise ValueError("block counts are defined for the two-sided graph")
    if n < 1:
        raise ValueError("n must be positive")
    heads = g.l - 1
    if n <= heads:
        return len({v[:n] for v in g.vertices})
    counts = [1] * g.size
    for _ in range(n - heads):
        nxt = [0] * g.size
        for i, c in enumerate(counts):
            if c:
                for j, _ in g.successors[i]:
                    nxt[j] += c
        counts = nxt
    return sum(counts)


def brute_counts(bound_word: Word, n_max: int) -> list[int]:
    """Counts for n = 1..n_max of words that occur in bi-infinite allowed sequences.

    Works on the explicit set of all (l-1)-words: the states that extend
    forever to the right (left) are found as the fixpoint of repeatedly
    discarding states without an allowed successor (predecessor).  Words are
    then enumerated digit by digit; independent of the follower graph.
    """
    M = bound_word.M
    upper = bound_word.digits
    lower = tuple(M - d for d in upper)
    l = len(upper)
    if max(n_max, l - 1) * math.log(M + 1) > MAX_BRUTE_EXPONENT:
        raise TooLarge(f"(M+1)^n too large for n = {max(n_max, l - 1)}")
    if not upper > lower:
        return [0] * n_max

    def ok(w):
        return lower < w < upper

    k = l - 1
    states = set(product(range(M + 1), repeat=k))
    forward = {s: [(s + (d,))[1:] for d in range(M + 1) if ok(s + (d,))] for s in states}
    backward = {s: [((d,) + s)[:k] for d in range(M + 1) if ok((d,) + s)] for s in states}

    def survivors(moves):
        alive = set(states)
        while True:
            keep = {s for s in alive if any(t in alive for t in moves[s])}
            if keep == alive:
                return alive
            alive = keep

    right, left = survivors(forward), survivors(backward)
    both = right & left
    counts = [0] * n_max
    # words shorter than l-1 are exactly the factors of the surviving (l-1)-words
    for n in range(1, min(k, n_max + 1)):
        counts[n - 1] = len({s[i:i + n] for s in both for i in range(k - n + 1)})
    if k > n_max:
        return counts
    if k:
        counts[k - 1] = len(both)
    stack = list(both) if k < n_max else []
    while stack:
        u = stack.pop()
        for d in range(M + 1):
            w = u + (d,)
            if len(w) >= l and not ok(w[len(w) - l:]):
                continue
            if k and w[len(w) - k:] not in right:
                continue
            counts[len(w) - 1] += 1
            if len(w) < n_max:
                stack.append(w)
    return counts


def brute_count(bound_word: Word, n: int) -> int:
    return brute_counts(bound_word, n)[n - 1]


# ---------------------------------------------------------------------------
# phi roots


def phi_root(j: int, tol=DEFAULT_TOL) -> RationalInterval:
    """Root in [1, 2) of x^j = 1 + x + ... + x^(j-1)."""
    if j < 1:
        raise ValueError("j must be positive")
    if j == 1:
        return RationalInterval.point(1)

    def excess(x):
        return x ** j - sum(x ** i for i in range(j))

    lo, hi = Fraction(1), Fraction(2)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        mid = Fraction(round(mid * 2**64), 2**64) if mid.denominator > 2**64 else mid
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    return RationalInterval(lo, hi)


# ---------------------------------------------------------------------------
# entropy functions


@dataclass(frozen=True)
class EntropyValue:
    value: RationalInterval
    depth_certificate: str

    @property
    def lo(self) -> Fraction:
        return self.value.lo

    @property
    def hi(self) -> Fraction:
        return self.value.hi

    def __str__(self):
        return f"{self.value} ({self.depth_certificate})"


ZERO = RationalInterval.point(0)


@lru_cache(maxsize=None)
def plateau_entropy(word: Word, tol=DEFAULT_TOL) -> RationalInterval:
    """Entropy on the plateau generated by ``word``."""
    return topological_entropy(build_sft(increment_last(word)), tol)


@lru_cache(maxsize=None)
def reference_tree(max_word_len: int) -> PlateauTree:
    return PlateauTree(1, max_word_len, max_word_len)


def _alpha(q) -> DigitSeq:
    return canonical(q if isinstance(q, DigitSeq) else alpha_sequence(q))


def _top(M: int) -> EventuallyPeriodic:
    return EventuallyPeriodic(Alphabet(M), (), (M,))


def _prefix_bracket(alpha: DigitSeq, M: int, start: tuple[int, ...] | None, tol, scale: int = 1,
                    lengths=None) -> RationalInterval | None:
    """Entropy bracket from window SFTs cut at alpha_1..alpha_l.

    Strict windows give a subset of the target set, weak windows a superset.
    """
    available = len(alpha.word) if isinstance(alpha, Finite) else 64
    best_lo, best_hi = None, None
    alphabet = Alphabet(M)
    for l in lengths or range(2, available + 1):
        if l > available:
            break
        bound = Word(alphabet, alpha.prefix(l))
        try:
            inner = topological_entropy(build_sft(bound, start, True, PREFIX_VERTEX_BUDGET), tol)
            lo = inner.lo
        except EmptySubshift:
            lo = Fraction(0)
        except TooLarge:
            break
        try:
            hi = topological_entropy(build_sft(bound, start, False, PREFIX_VERTEX_BUDGET), tol).hi
        except EmptySubshift:
            hi = Fraction(0)
        except TooLarge:
            break
        best_lo = lo if best_lo is None else max(best_lo, lo)
        best_hi = hi if best_hi is None else min(best_hi, hi)
        if best_hi - best_lo <= tol:
            break
    if best_lo is None:
        return None
    return RationalInterval(best_lo / scale, max(best_hi, best_lo) / scale)


def _intersect(a: RationalInterval, b: RationalInterval | None) -> RationalInterval:
    if b is None:
        return a
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    return RationalInterval(lo, max(lo, hi))


def entropy_H(tree: PlateauTree, q, tol=DEFAULT_TOL) -> EntropyValue:
    """h(U~_q): exact on plateaus and below q_KL, a certified bracket elsewhere."""
    M = tree.M
    full = log_interval(M + 1)
    try:
        alpha = _alpha(q)
        if _cmp_base(alpha, _top(M)) is Ordering.EQUAL:
            # every finite word occurs in a sequence avoiding the tails 0^inf and M^inf
            return EntropyValue(full, "full-shift")
        if _cmp_base(alpha, _komornik_loreti_seq(M)) is not Ordering.GREATER:
            return EntropyValue(ZERO, "exact-zero, q <= q_KL")
        left_val, right_val = ZERO, full
        for node in tree.children_of(tree.root)[1:]:
            lo = _cmp_base(alpha, node.left_seq)
            hi = _cmp_base(alpha, node.right_seq)
            if lo is Ordering.LESS:
                right_val = plateau_entropy(node.generating_word, tol)
                break
            if hi is Ordering.GREATER:
                left_val = plateau_entropy(node.generating_word, tol)
                continue
            return EntropyValue(plateau_entropy(node.generating_word, tol),
                                f"exact-SFT, plateau {node.generating_word}")
        if _closed_form(alpha):
            w = plateau_word_containing(alpha, M)
            if w is not None:
                return EntropyValue(plateau_entropy(w, tol), f"exact-SFT, plateau {w}")
        bracket = RationalInterval(left_val.lo, max(left_val.lo, right_val.hi))
        bracket = _intersect(bracket, _prefix_bracket(alpha, M, None, tol))
        return EntropyValue(bracket, "plateau-bracket")
    except UndecidableAtPrecision as exc:
        return EntropyValue(RationalInterval(Fraction(0), full.hi), f"trivial bracket: {exc}")


def entropy_HJ(tree: PlateauTree, J: PlateauNode, q, tol=DEFAULT_TOL) -> EntropyValue:
    """h(U~_q(J)) for q in (q_L, q_R] of J, via the block map to the reference alphabet."""
    if J.is_null:
        raise NotInPlateau("null intervals carry no relative entropy")
    if J.is_root:
        return entropy_H(tree, q, tol)
    m = J.m
    alpha = _alpha(q)
    try:
        if not in_node(alpha, J, Mode.HALF_OPEN_RIGHT):
            raise NotInPlateau(f"{q} is not in (q_L, q_R] of node {J.label}")
        if _cmp_base(alpha, J.right_seq) is Ordering.EQUAL:
            return EntropyValue(_scaled(log_interval(2), m), "exact, reference full shift")
        if _cmp_base(alpha, J.c_seq) is not Ordering.GREATER:
            return EntropyValue(ZERO, "exact-zero, q <= q_c(J)")
        left_val, right_val = ZERO, _scaled(log_interval(2), m)
        for k in tree.children_of(J)[1:]:
            value = _scaled(plateau_entropy(k.reference_word, tol), m)
            lo = _cmp_base(alpha, k.left_seq)
            hi = _cmp_base(alpha, k.right_seq)
            if lo is Ordering.LESS:
                right_val = value
                break
            if hi is Ordering.GREATER:
                left_val = value
                continue
            return EntropyValue(value, f"exact-SFT, child {k.label}")
        if _closed_form(alpha):
            try:
                image = phi_sequence(alpha, automaton(J.generating_word))
            except NotInXJ:
                image = None
            if image is not None and not isinstance(image, Finite):
                ref = entropy_H(reference_tree(tree.max_ref_len), image, tol)
                return EntropyValue(_scaled(ref.value, m), f"reference {ref.depth_certificate}")
        bracket = RationalInterval(left_val.lo, max(left_val.lo, right_val.hi))
        start = increment_last(J.generating_word).digits
        bracket = _intersect(bracket, _prefix_bracket(alpha, J.M, start, tol))
        return EntropyValue(bracket, "plateau-bracket")
    except UndecidableAtPrecision as exc:
        return EntropyValue(RationalInterval(Fraction(0), _scaled(log_interval(2), m).hi),
                            f"trivial bracket: {exc}")


def _scaled(r: RationalInterval, m: int) -> RationalInterval:
    return RationalInterval(r.lo / m, r.hi / m)


def relative_entropy_direct(J_word: Word, alpha: DigitSeq, lengths, tol=DEFAULT_TOL) -> RationalInterval:
    """Bracket for h(U~_q(J)) straight from window SFTs on the original alphabet,
    restricted to sequences that begin with a+."""
    start = increment_last(J_word).digits
    out = _prefix_bracket(canonical(alpha), J_word.M, start, tol, lengths=lengths)
    if out is None:
        raise TooLarge("no window length fits the vertex budget")
    return out
