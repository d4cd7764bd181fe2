from fractions import Fraction
from itertools import product
import math

from hypothesis import given, settings, strategies as st
import pytest

from univoque.entropy import (
    EmptySubshift,
    TooLarge,
    brute_count,
    brute_counts,
    build_sft,
    count_blocks_matrix,
    entropy_H,
    entropy_HJ,
    is_transitive,
    phi_root,
    plateau_entropy,
    relative_entropy_direct,
    spectral_radius,
    strong_components,
    topological_entropy,
)
from univoque.expansion import BaseEnclosure, komornik_loreti
from univoque.words import Word, complement, increment_last

LOG_GOLDEN = math.log((1 + math.sqrt(5)) / 2)


def w(text, M=1):
    return Word.of(text, M)


def close(interval, value, tol=1e-9):
    return float(interval.lo) - tol <= value <= float(interval.hi) + tol


def poly_root(j):
    """Root in (1, 2) of x^j = 1 + x + ... + x^(j-1) by float bisection."""
    lo, hi = 1.0, 2.0
    for _ in range(100):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if mid**j - sum(mid**i for i in range(j)) < 0 else (lo, mid)
    return lo


def test_two_cycle():
    g = build_sft(w("11"))
    assert g.size == 2 and g.edge_count == 2
    assert spectral_radius(g).lo == spectral_radius(g).hi == 1 or close(spectral_radius(g), 1.0)
    assert is_transitive(g)[0]
    assert count_blocks_matrix(g, 5) == 2


def test_avoid_three_equal_digits():
    g = build_sft(w("111"))
    assert close(spectral_radius(g), (1 + math.sqrt(5)) / 2)
    assert count_blocks_matrix(g, 3) == 6
    assert is_transitive(g)[0]


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_constant_bound_gives_multinacci_roots(k):
    g = build_sft(w("1" * k))
    assert close(spectral_radius(g), poly_root(k - 1))
    assert close(phi_root(k - 1), poly_root(k - 1))


def test_full_shift_from_weak_bound():
    g = build_sft(w("11"), strict=False)
    assert close(spectral_radius(g), 2.0)
    assert count_blocks_matrix(g, 6) == 64


def test_empty_subshift():
    with pytest.raises(EmptySubshift):
        build_sft(w("10"))


def test_phi_root_examples():
    assert phi_root(1).lo == phi_root(1).hi == 1
    assert abs(float(phi_root(2).mid) - 1.6180339887) < 1e-9
    assert abs(float(phi_root(3).mid) - 1.8392867552) < 1e-9


def test_brute_count_examples():
    assert brute_count(w("11"), 1) == 2
    assert brute_count(w("11"), 5) == 2
    assert brute_count(w("111"), 3) == 6
    g = build_sft(w("1110"))
    assert brute_count(w("1110"), 4) == count_blocks_matrix(g, 4)
    with pytest.raises(TooLarge):
        brute_count(w("111"), 40)


def test_non_transitive_graph_takes_the_largest_component():
    g = build_sft(w("1101"))
    transitive, components = is_transitive(g)
    assert not transitive
    assert sorted(len(c) for c in components) == [2, 4]
    assert close(spectral_radius(g), 1.0)
    assert [count_blocks_matrix(g, n) for n in range(1, 10)] == brute_counts(w("1101"), 9)


def test_forced_prefix_leaves_transient_vertices():
    g = build_sft(w("11010"), start=w("1"))
    transitive, components = is_transitive(g)
    assert not transitive
    assert sum(len(c) for c in components) < g.size
    assert sum(map(len, strong_components(g))) < g.size


def test_export_format():
    text = build_sft(w("111")).export()
    assert text.splitlines()[0] == "00: 01/1"


@pytest.mark.parametrize("M,max_len", [(1, 6), (2, 4)])
def test_matrix_counts_match_brute_force(M, max_len):
    for n in range(1, max_len + 1):
        for digits in product(range(M + 1), repeat=n):
            bound = Word.of(digits, M)
            try:
                g = build_sft(bound)
            except EmptySubshift:
                assert brute_counts(bound, 12)[-1] == 0
                continue
            assert [count_blocks_matrix(g, k) for k in range(1, 13)] == brute_counts(bound, 12), digits


@settings(max_examples=40)
@given(st.integers(1, 3).flatmap(
    lambda M: st.lists(st.integers(0, M), min_size=2, max_size=7).map(lambda d: Word.of(d, M))))
def test_matrix_counts_match_brute_force_random(bound):
    try:
        g = build_sft(bound)
    except EmptySubshift:
        return
    n_max = min(9, int(16 / math.log(bound.M + 1)))
    assert [count_blocks_matrix(g, k) for k in range(1, n_max + 1)] == brute_counts(bound, n_max)


@pytest.mark.parametrize("bound", ["1111", "11100", "111010", "22", "3120", "2202"])
def test_block_growth_converges_to_the_perron_root(bound):
    g = build_sft(Word.of(bound, max(map(int, bound))))
    assert is_transitive(g)[0]
    n = 40
    rate = math.log(count_blocks_matrix(g, n)) / n
    log_gamma = float(topological_entropy(g).mid)
    assert abs(rate - log_gamma) <= math.log(g.size) / n + 1e-6


@pytest.mark.parametrize("bound", ["1101", "2101", "111001"])
def test_block_growth_on_non_transitive_graphs_has_a_polynomial_factor(bound):
    g = build_sft(Word.of(bound, max(map(int, bound))))
    transitive, components = is_transitive(g)
    assert not transitive
    n = 40
    excess = math.log(count_blocks_matrix(g, n)) - n * float(topological_entropy(g).mid)
    assert -math.log(g.size) - 1e-6 <= excess <= math.log(g.size) + (len(components) - 1) * math.log(n) + 1e-6


@given(st.integers(1, 2).flatmap(
    lambda M: st.lists(st.integers(0, M), min_size=2, max_size=8).map(lambda d: Word.of(d, M))))
def test_constraint_is_complement_symmetric(bound):
    try:
        g = build_sft(bound)
    except EmptySubshift:
        return
    M = bound.M
    flipped = {tuple(M - d for d in v) for v in g.vertices}
    assert flipped == set(g.vertices)
    assert count_blocks_matrix(g, 10) == brute_counts(complement(complement(bound)), 10)[-1]


def test_entropy_H_examples(tree1, node_1110):
    assert entropy_H(tree1, BaseEnclosure.exact(Fraction(3, 2), 1)).hi == 0
    assert entropy_H(tree1, komornik_loreti(1)).hi == 0
    inside = entropy_H(tree1, node_1110.q_c)
    assert close(inside.value, math.log(poly_root(3)))
    assert inside.value == topological_entropy(build_sft(w("1111")))
    top = entropy_H(tree1, BaseEnclosure.exact(2, 1))
    assert close(top.value, math.log(2))


def test_entropy_H_constant_on_a_plateau(tree1, node_1110):
    values = {entropy_H(tree1, q).value for q in (node_1110.q_L, node_1110.q_G, node_1110.q_c, node_1110.q_R)}
    assert len(values) == 1


def test_entropy_H_is_monotone(tree1):
    grid = [BaseEnclosure.exact(Fraction(n, 1000), 1) for n in (1700, 1787, 1788, 1790, 1830, 1850, 1900, 1930, 1937, 1950, 1990)]
    values = [entropy_H(tree1, q) for q in grid]
    tol = Fraction(1, 10**9)
    for a, b in zip(values, values[1:]):
        assert a.hi <= b.hi + tol
        assert a.lo <= b.lo + tol
    assert all(v.lo >= 0 and v.hi <= Fraction(7, 10) for v in values)


def test_entropy_HJ_examples(tree1, node_1110):
    assert entropy_HJ(tree1, node_1110, node_1110.q_G).hi == 0
    assert entropy_HJ(tree1, node_1110, node_1110.q_c).hi == 0
    assert entropy_HJ(tree1, node_1110, node_1110.q_F).hi == 0
    assert close(entropy_HJ(tree1, node_1110, node_1110.q_R).value, math.log(2) / 4)


def test_entropy_HJ_pullback_of_constant_reference_word(tree1, node_1110):
    # reference word 1^(k-1) 0 with k = 3
    child = next(k for k in tree1.children_of(node_1110)[1:] if str(k.reference_word) == "110")
    value = entropy_HJ(tree1, node_1110, child.q_R).value
    assert close(value, math.log(poly_root(2)) / 4)
    assert close(plateau_entropy(w("110")), math.log(poly_root(2)))


def test_entropy_bridge_on_level_two(tree1, node_1110):
    start = increment_last(node_1110.generating_word)
    for child in tree1.children_of(node_1110)[1:]:
        bound = increment_last(child.generating_word)
        direct = topological_entropy(build_sft(bound, start=start))
        via_reference = entropy_HJ(tree1, node_1110, child.q_R).value
        assert abs(float(direct.mid) - float(via_reference.mid)) <= 1e-6, child.label


def test_relative_entropy_direct_brackets(node_1110, tree1):
    child = tree1.node("18.7")
    bracket = relative_entropy_direct(node_1110.generating_word, child.right_seq, [12, 24])
    assert close(bracket, math.log(poly_root(2)) / 4, tol=0) or bracket.lo <= Fraction(math.log(poly_root(2)) / 4) <= bracket.hi
