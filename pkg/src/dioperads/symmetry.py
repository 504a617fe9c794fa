"""Permutations, unshuffles and Koszul signs.

Permutations are tuples of one-based images: ``p[i-1]`` is the image of ``i``.
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence, Tuple

Permutation = Tuple[int, ...]


def identity(n: int) -> Permutation:
    return tuple(range(1, n + 1))


def is_permutation(p: Sequence[int]) -> bool:
    return sorted(p) == list(range(1, len(p) + 1))


def check_permutation(p: Sequence[int]) -> Permutation:
    p = tuple(p)
    if not is_permutation(p):
        raise ValueError(f"not a permutation of [1..{len(p)}]: {p}")
    return p


def compose(p: Permutation, q: Permutation) -> Permutation:
    """(p o q)(i) = p(q(i))."""
    if len(p) != len(q):
        raise ValueError("length mismatch")
    return tuple(p[q[i] - 1] for i in range(len(q)))


def inverse(p: Permutation) -> Permutation:
    out = [0] * len(p)
    for i, v in enumerate(p, start=1):
        out[v - 1] = i
    return tuple(out)


def inversions(p: Sequence[int]) -> int:
    n = len(p)
    return sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])


def parity(p: Sequence[int]) -> int:
    """0 for even, 1 for odd; works for any sequence of distinct comparables."""
    return inversions(p) & 1


def perm_sign(p: Sequence[int]) -> int:
    return -1 if parity(p) else 1


def enumerate_unshuffles(p: int, q: int) -> list[Permutation]:
    """All (p,q)-unshuffles, first block in lexicographic order."""
    if p < 0 or q < 0:
        raise ValueError("block sizes must be nonnegative")
    n = p + q
    out = []
    for first in combinations(range(1, n + 1), p):
        rest = tuple(i for i in range(1, n + 1) if i not in first)
        out.append(tuple(first) + rest)
    return out


def koszul_sign(degrees: Sequence[int], sigma: Sequence[int]) -> int:
    """Sign from rearranging symbols x_1..x_n into x_sigma(1)..x_sigma(n).

    Computed by bubble sort, one adjacent transposition at a time.
    """
    sigma = list(sigma)
    if len(degrees) != len(sigma):
        raise ValueError("degrees and permutation differ in length")
    # Start from the target order and sort back to identity; the sign is the same.
    seq = list(sigma)
    sign = 1
    n = len(seq)
    for i in range(n):
        for j in range(n - 1 - i):
            if seq[j] > seq[j + 1]:
                if degrees[seq[j] - 1] & 1 and degrees[seq[j + 1] - 1] & 1:
                    sign = -sign
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
    return sign


def koszul_sign_pairs(degrees: Sequence[int], sigma: Sequence[int]) -> int:
    """Same sign as koszul_sign, counted over inverted pairs directly."""
    odd = 0
    n = len(sigma)
    for i in range(n):
        for j in range(i + 1, n):
            if sigma[i] > sigma[j] and degrees[sigma[i] - 1] & 1 and degrees[sigma[j] - 1] & 1:
                odd += 1
    return -1 if odd & 1 else 1


def sort_with_sign(items: Sequence, degrees: Sequence[int]) -> tuple[list, int]:
    """Stable-sort graded items, returning them with the Koszul sign of the move."""
    order = sorted(range(len(items)), key=lambda i: items[i])
    sign = koszul_sign(degrees, [i + 1 for i in order])
    return [items[i] for i in order], sign
