from fractions import Fraction
from itertools import product
import math

from hypothesis import assume, given, strategies as st
import pytest

from univoque.expansion import (
    BaseEnclosure,
    InvalidAlpha,
    PrecisionExhausted,
    Validity,
    _periodic_polynomial,
    _periodic_value,
    _polynomial_sign,
    alpha_sequence,
    base_from_alpha,
    evaluate_pi,
    is_valid_alpha,
    komornik_loreti,
    quasi_greedy_alpha,
    value_range,
)
from univoque.words import Finite, Word, eventually_periodic, lambda_prefix, periodic

GOLDEN = (1 + math.sqrt(5)) / 2


def valid_periodic_words(M, max_len):
    for n in range(1, max_len + 1):
        for digits in product(range(M + 1), repeat=n):
            x = periodic(digits, M)
            if len(x.period) == n and is_valid_alpha(x).validity is Validity.YES:
                yield x


def test_evaluate_pi_top_base():
    enc = evaluate_pi(BaseEnclosure.exact(2, 1), periodic("1", 1))
    assert enc.lo <= 1 <= enc.hi


def test_evaluate_pi_finite_word_is_exact_at_two():
    enc = evaluate_pi(BaseEnclosure.exact(2, 1), Finite(Word.of("1", 1)))
    assert enc.lo == enc.hi == Fraction(1, 2)


def test_evaluate_pi_periodic_closed_form():
    q = Fraction(9, 5)
    enc = evaluate_pi(BaseEnclosure.exact(q, 1), periodic("1100", 1))
    assert enc.lo <= (q**3 + q**2) / (q**4 - 1) <= enc.hi


def test_evaluate_pi_truncations_shrink_and_contain_closed_form():
    q = BaseEnclosure.exact(Fraction(9, 5), 1)
    x = periodic("1100", 1)
    exact = _periodic_value(x, q.lo)
    lazy = eventually_periodic("1100", "1100", 1).prefix(400)
    widths = []
    for terms in (8, 16, 32, 64):
        enc = evaluate_pi(q, periodic_as_lazy(x), terms)
        assert enc.lo <= exact <= enc.hi
        widths.append(enc.width)
    assert widths == sorted(widths, reverse=True)
    assert lazy[:4] == (1, 1, 0, 0)


def periodic_as_lazy(x):
    from univoque.words import Concatenated
    return Concatenated((), x)


def test_quasi_greedy_examples():
    assert str(quasi_greedy_alpha(BaseEnclosure.exact(2, 1), 8)) == "11111111"
    golden = base_from_alpha(periodic("10", 1))
    assert str(quasi_greedy_alpha(golden, 12)) == "101010101010"
    assert str(quasi_greedy_alpha(komornik_loreti(1), 16)) == "1101001100101101"


def test_quasi_greedy_without_defining_sequence_fails_loudly():
    golden = base_from_alpha(periodic("10", 1))
    bare = BaseEnclosure(golden.alphabet, golden.interval, None, golden.precision_bits)
    with pytest.raises(PrecisionExhausted):
        quasi_greedy_alpha(bare, 400)


def test_is_valid_alpha_examples():
    assert is_valid_alpha(periodic("10", 1)).validity is Validity.YES
    check = is_valid_alpha(periodic("01", 1))
    assert check.validity is Validity.NO and check.witness == 1
    assert is_valid_alpha(periodic("1", 1)).validity is Validity.YES
    assert is_valid_alpha(periodic("0", 1)).validity is Validity.NO


def test_base_from_alpha_examples():
    top = base_from_alpha(periodic("1", 1))
    assert top.lo == top.hi == 2
    golden = base_from_alpha(periodic("10", 1))
    assert abs(float(golden.mid) - GOLDEN) < 1e-12
    assert golden.interval.width <= Fraction(1, 2**128)
    assert abs(float(base_from_alpha(periodic("1100", 1)).mid) - 1.75488) < 5e-6


def test_base_from_alpha_rejects_invalid():
    with pytest.raises(InvalidAlpha):
        base_from_alpha(periodic("01", 1))


def test_komornik_loreti_values():
    assert abs(float(komornik_loreti(1).mid) - 1.78723) < 5e-6
    assert komornik_loreti(1).lo >= Fraction(3, 2)
    assert komornik_loreti(2).lo >= 2


def test_value_range_examples():
    assert value_range(BaseEnclosure.exact(2, 1)).hi == 1
    assert value_range(BaseEnclosure.exact(3, 2)).hi == 1
    r = value_range(BaseEnclosure.around(Fraction(3, 2), 1, 64))
    assert r.lo <= 2 <= r.hi


def test_string_form():
    assert str(base_from_alpha(periodic("10", 1))).startswith("1.6180339887 ± ")


@pytest.mark.parametrize("M", [1, 2])
def test_round_trip_all_short_periodic_words(M):
    for x in valid_periodic_words(M, 6):
        q = base_from_alpha(x)
        n = 3 * len(x.period)
        assert quasi_greedy_alpha(q, n).digits == x.prefix(n), str(x)


@pytest.mark.parametrize("M", [1, 2])
def test_pi_of_alpha_encloses_one(M):
    for x in valid_periodic_words(M, 4):
        q = base_from_alpha(x)
        enc = evaluate_pi(q, x)
        assert enc.lo <= 1 <= enc.hi


rationals = st.fractions(min_value=Fraction(11, 10), max_value=2, max_denominator=10**6)


def certified_prefix(q):
    x = alpha_sequence(q)
    return x.prefix(len(x)) if isinstance(x, Finite) else x.prefix(512)


@given(rationals, rationals)
def test_alpha_is_strictly_increasing(a, b):
    assume(abs(a - b) > Fraction(1, 10**4))
    a, b = sorted((a, b))
    x = certified_prefix(BaseEnclosure.around(a, 1, 96))
    y = certified_prefix(BaseEnclosure.around(b, 1, 96))
    n = min(len(x), len(y))
    assert x[:n] < y[:n]


@st.composite
def periodic_words(draw):
    M = draw(st.integers(1, 3))
    pre = draw(st.lists(st.integers(0, M), max_size=5))
    per = draw(st.lists(st.integers(0, M), min_size=1, max_size=8))
    return eventually_periodic(tuple(pre), tuple(per), M)


@given(periodic_words(), st.fractions(min_value=Fraction(11, 10), max_value=4, max_denominator=1000))
def test_polynomial_sign_matches_exact_value(x, q):
    assume(q <= x.M + 1)
    expected = (_periodic_value(x, q) > 1) - (_periodic_value(x, q) < 1)
    assert _polynomial_sign(_periodic_polynomial(x), q) == expected


def test_lambda_prefix_agrees_with_komornik_loreti_alpha():
    assert quasi_greedy_alpha(komornik_loreti(2), 7) == lambda_prefix(2, 7)
