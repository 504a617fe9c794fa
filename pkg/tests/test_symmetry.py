from itertools import permutations
from math import comb

import pytest
from hypothesis import given, strategies as st

from dioperads.symmetry import (check_permutation, compose, enumerate_unshuffles, identity,
                                inverse, koszul_sign, koszul_sign_pairs, perm_sign,
                                sort_with_sign)


def test_unshuffles_empty_first_block():
    assert enumerate_unshuffles(0, 3) == [(1, 2, 3)]


def test_unshuffles_two_one():
    got = enumerate_unshuffles(2, 1)
    assert [set(s[:2]) for s in got] == [{1, 2}, {1, 3}, {2, 3}]
    assert all(s[0] < s[1] for s in got)


def test_unshuffles_one_one():
    assert enumerate_unshuffles(1, 1) == [(1, 2), (2, 1)]


def test_unshuffles_reject_negative():
    with pytest.raises(ValueError):
        enumerate_unshuffles(-1, 2)


def test_perm_sign_examples():
    assert perm_sign(identity(4)) == 1
    assert perm_sign((2, 1)) == -1
    assert perm_sign((2, 3, 1)) == 1


def test_check_permutation_rejects():
    with pytest.raises(ValueError):
        check_permutation((1, 1, 2))


def test_koszul_examples():
    assert koszul_sign((2, 4), (2, 1)) == 1
    assert koszul_sign((1, 1), (2, 1)) == -1
    assert koszul_sign((1, 1, 1), (2, 3, 1)) == 1


def test_sort_with_sign():
    items, sign = sort_with_sign([3, 1, 2], [1, 1, 1])
    assert items == [1, 2, 3] and sign == 1
    items, sign = sort_with_sign([2, 1], [1, 1])
    assert items == [1, 2] and sign == -1


perms = st.integers(1, 6).flatmap(lambda n: st.permutations(list(range(1, n + 1))).map(tuple))


@given(st.integers(0, 5), st.integers(0, 5))
def test_unshuffle_count_and_shape(p, q):
    got = enumerate_unshuffles(p, q)
    assert len(got) == comb(p + q, p)
    assert len(set(got)) == len(got)
    for s in got:
        assert list(s[:p]) == sorted(s[:p]) and list(s[p:]) == sorted(s[p:])


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    st.permutations(list(range(1, n + 1))), st.permutations(list(range(1, n + 1))))))
def test_sign_is_homomorphism(pq):
    p, q = map(tuple, pq)
    assert perm_sign(compose(p, q)) == perm_sign(p) * perm_sign(q)
    assert perm_sign(inverse(p)) == perm_sign(p)


@given(perms, st.data())
def test_koszul_degree_extremes(sigma, data):
    n = len(sigma)
    assert koszul_sign([2] * n, sigma) == 1
    assert koszul_sign([1] * n, sigma) == perm_sign(sigma)
    degs = data.draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
    assert koszul_sign(degs, sigma) == koszul_sign_pairs(degs, sigma)


def test_koszul_pairs_exhaustive_small():
    for n in range(1, 5):
        for sigma in permutations(range(1, n + 1)):
            for mask in range(2 ** n):
                degs = [(mask >> i) & 1 for i in range(n)]
                assert koszul_sign(degs, sigma) == koszul_sign_pairs(degs, sigma)
