from itertools import product

from hypothesis import given, strategies as st
import pytest

from univoque.expansion import BaseEnclosure, komornik_loreti, two_sided_check
from univoque.phimap import (
    Block,
    InvalidReference,
    NotInXJ,
    State,
    automaton,
    parse_blocks,
    phi_forward,
    phi_hat,
    phi_hat_inverse,
    phi_inverse,
    phi_inverse_sequence,
    phi_sequence,
    pullback_plateau,
)
from univoque.plateaux import fibonacci_sequence, golden_sequence, is_admissible, reference_words
from univoque.words import EventuallyPeriodic, Finite, Word, complement, increment_last, lex_compare, Ordering

A_PLUS, A, A_BAR, A_PLUS_BAR = Block.A_PLUS, Block.A, Block.A_BAR, Block.A_PLUS_BAR


@pytest.fixture(scope="module")
def aut(node_1110):
    return automaton(node_1110.generating_word)


def bits(text):
    return Finite(Word.of(text, 1))


def test_automaton_is_right_resolving(aut):
    for state in State:
        edges = aut.out_edges(state)
        assert len({aut.label(b) for b, _, _ in edges}) == len(edges)
        assert len({bit for _, bit, _ in edges}) == len(edges)
    assert A.bit == A_PLUS_BAR.bit == 0 and A_PLUS.bit == A_BAR.bit == 1


def test_parse_blocks_examples(node_1110, aut):
    assert parse_blocks(node_1110.right_seq, aut, 4).blocks == (A_PLUS, A_BAR, A_BAR, A_BAR)
    assert parse_blocks(golden_sequence(node_1110.generating_word), aut, 4).blocks == (A_PLUS, A_PLUS_BAR) * 2
    with pytest.raises(NotInXJ) as err:
        parse_blocks(Finite(Word.of("11110111", 1)), aut, 2)
    assert err.value.position == 5


def test_phi_forward_examples(node_1110, aut):
    word = node_1110.generating_word
    assert phi_sequence(node_1110.right_seq, aut) == EventuallyPeriodic(1, (), (1,))
    assert phi_sequence(golden_sequence(word), aut) == EventuallyPeriodic(1, (), (1, 0))
    assert phi_sequence(fibonacci_sequence(word), aut) == EventuallyPeriodic(1, (), (1, 1, 0, 0))
    assert str(phi_forward(parse_blocks(node_1110.right_seq, aut, 5))) == "11111"


def test_phi_inverse_examples(node_1110, aut):
    assert phi_inverse(bits("1111"), aut, 4).blocks == (A_PLUS, A_BAR, A_BAR, A_BAR)
    assert phi_inverse(bits("1010"), aut, 4).blocks == (A_PLUS, A_PLUS_BAR) * 2
    assert phi_inverse_sequence(EventuallyPeriodic(1, (), (1,)), aut) == node_1110.right_seq
    with pytest.raises(InvalidReference):
        phi_inverse(bits("0111"), aut, 4)


def test_block_sequence_prints_symbolically(aut):
    assert str(phi_inverse(bits("1100"), aut, 4)) == "a+ ~a ~a+ a"


def test_pullback_examples(node_1110):
    a = node_1110.generating_word
    plus = increment_last(a)
    assert pullback_plateau(Word.of("1110", 1), node_1110) == plus + complement(a) + complement(a) + complement(plus)
    assert pullback_plateau(Word.of("110", 1), node_1110) == plus + complement(a) + complement(plus)


def test_pullbacks_are_admissible(node_1110):
    for ref in reference_words(8):
        word = pullback_plateau(ref, node_1110)
        assert len(word) == len(ref) * node_1110.m
        assert is_admissible(word)


def test_phi_hat_special_points(node_1110):
    assert phi_hat(node_1110.q_R, node_1110).lo == 2
    assert abs(float(phi_hat(node_1110.q_G, node_1110).mid) - 1.6180339887) < 1e-10
    assert abs(float(phi_hat(node_1110.q_F, node_1110).mid) - 1.7548776662) < 1e-10
    kl = komornik_loreti(1)
    image = phi_hat(node_1110.q_c, node_1110)
    assert image.lo <= kl.hi and kl.lo <= image.hi


def test_phi_hat_inverse_examples(node_1110):
    back = phi_hat_inverse(BaseEnclosure.exact(2, 1), node_1110)
    assert back.interval == node_1110.q_R.interval
    back = phi_hat_inverse(komornik_loreti(1), node_1110)
    assert back.interval == node_1110.q_c.interval


def test_phi_hat_round_trip(tree1, node_1110):
    for kid in tree1.children_of(node_1110)[1:12]:
        for q in (kid.q_L, kid.q_R):
            image = phi_hat(q, node_1110)
            back = phi_hat_inverse(image, node_1110)
            assert back.lo <= q.hi and q.lo <= back.hi


def test_phi_hat_increasing_on_chains(tree1, node_1110):
    points = [node_1110.q_G, node_1110.q_F, node_1110.q_c, node_1110.q_R]
    for kid in tree1.children_of(node_1110)[1:9]:
        points += [kid.q_L, kid.q_R]
    points.sort(key=lambda q: q.mid)
    images = [phi_hat(q, node_1110) for q in points]
    assert all(a.hi < b.lo for a, b in zip(images, images[1:]))


reference_bits = st.lists(st.integers(0, 1), min_size=199, max_size=199).map(lambda t: (1, *t))


@given(reference_bits)
def test_phi_round_trip_200_bits(y):
    aut = automaton(Word.of("1110", 1))
    blocks = phi_inverse(Finite(Word.of(y, 1)), aut, 200)
    assert phi_forward(blocks).word.digits == y
    assert parse_blocks(Finite(Word(aut.word.alphabet, blocks.digits())), aut, 200) == blocks


@given(reference_bits, reference_bits)
def test_phi_preserves_order(y, z):
    aut = automaton(Word.of("110", 1))
    x = Word(aut.word.alphabet, phi_inverse(Finite(Word.of(y, 1)), aut, 200).digits())
    u = Word(aut.word.alphabet, phi_inverse(Finite(Word.of(z, 1)), aut, 200).digits())
    assert lex_compare(x, u) is lex_compare(Word.of(y, 1), Word.of(z, 1))


@pytest.mark.parametrize("word", ["1110", "110", "11010"])
def test_two_sided_condition_transfers(word):
    aut = automaton(Word.of(word, 1))
    for n in range(1, 7):
        for period in product((0, 1), repeat=n):
            for pre in ((), (1,), (1, 0)):
                y = EventuallyPeriodic(1, pre, period)
                if y.digit_at(1) != 1:
                    continue
                x = phi_inverse_sequence(y, aut)
                assert two_sided_check(y, False).validity is two_sided_check(x, False).validity
                if y != EventuallyPeriodic(1, (), (1,)):
                    assert two_sided_check(y, True).validity is two_sided_check(x, True).validity
                assert lex_compare(phi_sequence(x, aut), y) is Ordering.EQUAL
