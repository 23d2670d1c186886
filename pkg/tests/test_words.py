from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qspskt.errors import PreconditionError
from qspskt.words import (balanced_count, brute_force_count, constrained_count, count_table, expected_word_length,
                          gj_series)


def test_balanced_counts():
    assert balanced_count(0) == 1
    assert balanced_count(2) == 6
    assert balanced_count(10) == 184756
    with pytest.raises(PreconditionError):
        balanced_count(-1)


def test_constrained_examples():
    assert constrained_count(2, 2) == 3
    assert constrained_count(3, 2) == 4
    assert constrained_count(3, 2) == comb(4, 3)  # gap placement
    for r in range(6):
        assert constrained_count(r, 2 * r + 1) == balanced_count(r)


def test_exhaustive_against_brute_force():
    rows = count_table(10, 6)
    assert len(rows) == 66
    assert all(a == b for _, _, a, b in rows)


@given(st.integers(0, 7), st.integers(1, 5))
def test_monotone_in_eta_and_bounded(r, eta):
    assert constrained_count(r, eta) <= constrained_count(r, eta + 1) <= balanced_count(r)


def test_eta_one_forbids_zeros():
    assert constrained_count(0, 1) == 1
    assert all(constrained_count(r, 1) == 0 for r in range(1, 6))
    assert brute_force_count(3, 1) == 0


def test_series_coefficients_are_integers():
    G = gj_series(3, 8)
    assert all(isinstance(c, int) for row in G for c in row)
    with pytest.raises(PreconditionError):
        gj_series(0, 3)


def test_word_length_doubling():
    for eps in (1e-3, 1e-4):
        _, a = expected_word_length(1.0, eps, 4)
        _, b = expected_word_length(1.0, eps / 2, 4)
        assert 1.8 <= b / a <= 2.2


def test_word_length_small_xi():
    n, lead = expected_word_length(1e-9, 0.1, 2)
    assert n > 0 and lead < 1e-6


def test_word_length_decreases_with_alphabet():
    ns = [expected_word_length(2.0, 0.01, a)[0] for a in range(2, 12)]
    assert all(x > y for x, y in zip(ns, ns[1:]))


def test_word_length_preconditions():
    for args in ((0, 0.1, 2), (1, 1.5, 2), (1, 0.1, 1)):
        with pytest.raises(PreconditionError):
            expected_word_length(*args)
