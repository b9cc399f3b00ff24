import random

import gmpy2 as gmp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.linear_form import (
    LinearForm, Ordering, dominating_witnesses, lf_add, lf_compare, lf_instantiate, lf_scale,
    power_witnesses, witnesses_dominate,
)

COEFF_BOUND = 2 ** 16
W1 = LinearForm.omega(1)
W2 = LinearForm.omega(2)


def random_form(rng: random.Random, max_index: int) -> LinearForm:
    return LinearForm.of({i: rng.randrange(COEFF_BOUND)
                          for i in range(max_index + 1) if rng.random() < 0.7})


def numeric(x, y) -> Ordering:
    if x < y:
        return Ordering.LESS
    return Ordering.GREATER if x > y else Ordering.EQUAL


forms = st.dictionaries(st.integers(min_value=0, max_value=6),
                        st.integers(min_value=0, max_value=COEFF_BOUND - 1),
                        max_size=7).map(LinearForm.of)


class TestArithmetic:
    def test_add(self):
        assert lf_add(W1 + LinearForm.constant(2), LinearForm.of({1: 3, 0: 5})) == LinearForm.of({1: 4, 0: 7})
        p = LinearForm.of({2: 1, 0: 9})
        assert p + LinearForm.of() == p
        assert W2 + W1 == LinearForm.of({1: 1, 2: 1})

    def test_scale(self):
        assert lf_scale(LinearForm.of({1: 2, 0: 3}), 3) == LinearForm.of({1: 6, 0: 9})
        assert lf_scale(W1, 0) == LinearForm.of()
        with pytest.raises(ValueError):
            lf_scale(W1, -1)

    def test_normalization(self):
        assert LinearForm.of({3: 0, 1: 2}) == LinearForm.of({1: 2})
        assert str(LinearForm.of({1: 4, 0: 7})) == "4*w1 + 7"
        assert str(LinearForm.of()) == "0"
        with pytest.raises(ValueError):
            LinearForm.of({1: -1})
        with pytest.raises(ValueError):
            LinearForm.omega(0)


class TestCompare:
    def test_examples(self):
        p = LinearForm.of({1: 2, 0: 3})
        assert lf_compare(p, p) is Ordering.EQUAL
        assert lf_compare(W2, LinearForm.of({1: 1000, 0: 999})) is Ordering.GREATER
        assert lf_compare(p, LinearForm.of({1: 2, 0: 7})) is Ordering.LESS
        assert p < LinearForm.of({1: 2, 0: 7})

    def test_omega2_dominates_concretely(self):
        big = lf_instantiate(W2, [2 ** 64, 2 ** 4096])
        small = lf_instantiate(LinearForm.of({1: 1000, 0: 999}), [2 ** 64, 2 ** 4096])
        assert big > small

    @settings(max_examples=200)
    @given(forms, forms)
    def test_antisymmetric_and_equal_iff_identical(self, p, q):
        forward, backward = lf_compare(p, q), lf_compare(q, p)
        assert forward.value == -backward.value
        assert (forward is Ordering.EQUAL) == (p == q)

    def test_transitive_on_random_triples(self):
        rng = random.Random(5)
        for _ in range(500):
            a, b, c = sorted((random_form(rng, 4) for _ in range(3)))
            assert lf_compare(a, c) is not Ordering.GREATER
            assert a <= b <= c


class TestInstantiate:
    def test_examples(self):
        assert lf_instantiate(LinearForm.of({1: 2, 0: 3}), [10]) == 23
        assert lf_instantiate(LinearForm.constant(7), [5, 6]) == 7
        assert lf_instantiate(LinearForm.constant(7), []) == 7
        form = LinearForm.of({2: 3, 1: 1, 0: 5})
        assert lf_instantiate(form, [2 ** 64, 2 ** 256]) == 3 * 2 ** 256 + 2 ** 64 + 5

    def test_missing_witness(self):
        with pytest.raises(ValueError):
            lf_instantiate(W2, [10])


class TestWitnesses:
    def test_power_witnesses(self):
        witnesses = power_witnesses(3)
        assert [int(gmp.bit_length(w)) - 1 for w in witnesses] == [64 * 9, 64 * 81, 64 * 729]

    def test_domination_check(self):
        assert witnesses_dominate(power_witnesses(4), COEFF_BOUND)
        assert not witnesses_dominate([2 ** 10, 2 ** 12], COEFF_BOUND)
        assert witnesses_dominate([2, 4, 16], 2)

    def test_dominating_witnesses_are_minimal_powers(self):
        witnesses = dominating_witnesses(5, COEFF_BOUND)
        assert witnesses_dominate(witnesses, COEFF_BOUND)
        assert witnesses[0] == COEFF_BOUND
        assert not witnesses_dominate([witnesses[0] // 2], COEFF_BOUND)


def _soundness(max_index: int, pairs: int, seed: int):
    witnesses = power_witnesses(max_index)
    assert witnesses_dominate(witnesses, COEFF_BOUND)
    rng = random.Random(seed)
    for _ in range(pairs):
        p, q = random_form(rng, max_index), random_form(rng, max_index)
        if rng.random() < 0.2:
            q = p
        expected = numeric(lf_instantiate(p, witnesses), lf_instantiate(q, witnesses))
        assert lf_compare(p, q) is expected


def test_lexicographic_order_is_sound_on_small_indices():
    _soundness(max_index=6, pairs=1000, seed=6)


def test_lexicographic_order_is_sound_with_sized_witnesses():
    witnesses = dominating_witnesses(8, COEFF_BOUND)
    rng = random.Random(7)
    for _ in range(1000):
        p, q = random_form(rng, 8), random_form(rng, 8)
        expected = numeric(lf_instantiate(p, witnesses), lf_instantiate(q, witnesses))
        assert lf_compare(p, q) is expected


@pytest.mark.slow
def test_lexicographic_order_is_sound_on_all_indices():
    _soundness(max_index=8, pairs=1000, seed=8)
