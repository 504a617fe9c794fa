"""The minimal resolution of the Lie^2_1-bialgebra dioperad and of Lie^2.

Dioperadic generators E(m,n,i) with 0 <= i <= m-1 span sgn_m (x) triv_n in
degree 2-m.  Operadic generators L(n,i) with 0 <= i <= n-1 span sgn_n in degree
2-n.  The differentials are sums over two-vertex trees; vertex decorations
are written source vertex first, which is the order that makes the
differential square to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Tuple

from .dioperad import (DecoratedElement, Generator, Key, SBimoduleBasis, graft_at, in_tok,
                       out_tok)
from .symmetry import enumerate_unshuffles, perm_sign


@dataclass(frozen=True)
class ResolutionGenerator:
    m: int
    n: int
    i: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.m + self.n < 3:
            raise ValueError(f"no generator at ({self.m},{self.n})")
        if not 0 <= self.i <= self.m - 1:
            raise ValueError(f"black index {self.i} outside 0..{self.m - 1}")

    @property
    def degree(self) -> int:
        return 2 - self.m

    @property
    def name(self) -> str:
        return f"E{self.m}_{self.n}_{self.i}"


@dataclass(frozen=True)
class L2Generator:
    n: int
    i: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("arity must be at least 2")
        if not 0 <= self.i <= self.n - 1:
            raise ValueError(f"black index {self.i} outside 0..{self.n - 1}")

    @property
    def degree(self) -> int:
        return 2 - self.n

    @property
    def name(self) -> str:
        return f"L{self.n}_{self.i}"


def generators(m: int, n: int) -> List[ResolutionGenerator]:
    if m < 1 or n < 1:
        raise ValueError("arities must be positive")
    if m + n < 3:
        return []
    return [ResolutionGenerator(m, n, i) for i in range(m)]


def l2_generators(n: int) -> List[L2Generator]:
    if n < 2:
        return []
    return [L2Generator(n, i) for i in range(n)]


@lru_cache(maxsize=None)
def resolution_basis(max_total: int) -> SBimoduleBasis:
    """All E generators with m+n <= max_total."""
    gens = []
    for m in range(1, max_total):
        for n in range(1, max_total - m + 1):
            for g in generators(m, n):
                gens.append(Generator(g.name, m, n, g.degree, "sgn", "triv"))
    return SBimoduleBasis(gens)


@lru_cache(maxsize=None)
def l2_basis(max_n: int) -> SBimoduleBasis:
    gens = []
    for n in range(2, max_n + 1):
        for g in l2_generators(n):
            gens.append(Generator(g.name, 1, n, g.degree, "triv", "sgn"))
    return SBimoduleBasis(gens)


def _name(m: int, n: int, i: int) -> str:
    return f"E{m}_{n}_{i}"


def differential_terms(g: ResolutionGenerator) -> Iterable[Tuple[int, list]]:
    """(sign, vertex list) for every summand, before canonicalization."""
    m, n, i = g.m, g.n, g.i
    EDGE_ID = 1_000_000
    for k in range(1, n + 1):
        for j in range(0, m):
            if not 2 <= j + k <= m + n - 2:
                continue
            for i1 in range(0, j + 1):
                i2 = i - i1
                if not 0 <= i2 <= m - j - 1:
                    continue
                for sigma in enumerate_unshuffles(j, m - j):
                    sign = perm_sign(sigma) * (-1 if (j * (m - j)) % 2 else 1)
                    for tau in enumerate_unshuffles(k, n - k):
                        a = (_name(j + 1, k, i1),
                             tuple(out_tok(x) for x in sigma[:j]) + (EDGE_ID,),
                             tuple(in_tok(x) for x in tau[:k]))
                        b = (_name(m - j, n - k + 1, i2),
                             tuple(out_tok(x) for x in sigma[j:]),
                             (EDGE_ID,) + tuple(in_tok(x) for x in tau[k:]))
                        yield sign, [a, b]


def differential(g: ResolutionGenerator, basis: SBimoduleBasis = None) -> DecoratedElement:
    basis = basis or resolution_basis(max(g.m + g.n, 3))
    return DecoratedElement.from_terms(basis, g.m, g.n, ((v, s) for s, v in differential_terms(g)))


def raw_term_count(g: ResolutionGenerator) -> int:
    """Number of summands in the defining sum (no cancellation)."""
    return sum(1 for _ in differential_terms(g))


def _parse_e(name: str) -> ResolutionGenerator:
    m, n, i = name[1:].split("_")
    return ResolutionGenerator(int(m), int(n), int(i))


def _parse_l(name: str) -> L2Generator:
    n, i = name[1:].split("_")
    return L2Generator(int(n), int(i))


def extend_as_derivation(x: DecoratedElement, on_vertex=None) -> DecoratedElement:
    """Apply a degree +1 derivation vertex by vertex with Koszul signs.

    ``on_vertex(name)`` returns the image of a generator corolla; by default
    the dioperadic or operadic differential is chosen from the generator name.
    """
    if on_vertex is None:
        def on_vertex(name):
            if name.startswith("E"):
                return differential(_parse_e(name), x.basis)
            return l2_differential(_parse_l(name), x.basis)
    out = DecoratedElement(x.basis, x.m, x.n)
    for key, c in x.terms.items():
        before = 0
        for idx, (name, _, _) in enumerate(key):
            img = on_vertex(name)
            if not img.is_zero():
                part = graft_at(x, key, idx, img)
                sign = -1 if before % 2 else 1
                out = out + part.scale(c * sign)
            before += x.basis[name].degree
    return out


def l2_differential_terms(g: L2Generator) -> Iterable[Tuple[int, list]]:
    n, i = g.n, g.i
    EDGE_ID = 1_000_000
    for k in range(2, n):
        for i1 in range(0, n - k + 1):
            i2 = i - i1
            if not 0 <= i2 <= k - 1:
                continue
            for tau in enumerate_unshuffles(k, n - k):
                sign = perm_sign(tau) * (-1 if ((k - 1) * (n - k + 1)) % 2 else 1)
                upper = (f"L{k}_{i2}", (EDGE_ID,), tuple(in_tok(x) for x in tau[:k]))
                lower = (f"L{n - k + 1}_{i1}", (out_tok(1),), (EDGE_ID,) + tuple(in_tok(x) for x in tau[k:]))
                yield sign, [upper, lower]


def l2_differential(g: L2Generator, basis: SBimoduleBasis = None) -> DecoratedElement:
    basis = basis or l2_basis(max(g.n, 2))
    return DecoratedElement.from_terms(basis, 1, g.n, ((v, s) for s, v in l2_differential_terms(g)))


def d_squared(g) -> DecoratedElement:
    """delta(delta(g)) for an E or L generator."""
    if isinstance(g, ResolutionGenerator):
        return extend_as_derivation(differential(g))
    return extend_as_derivation(l2_differential(g))


def d2_table(max_total: int, max_l2: int = None) -> List[Tuple[str, int, int, bool]]:
    """Rows (generator, terms of delta, terms of delta^2, passed)."""
    rows = []
    for total in range(3, max_total + 1):
        for m in range(1, total):
            n = total - m
            for g in generators(m, n):
                d = differential(g)
                dd = extend_as_derivation(d)
                rows.append((g.name, len(d.terms), len(dd.terms), dd.is_zero()))
    for n in range(2, (max_l2 if max_l2 is not None else max_total) + 1):
        for g in l2_generators(n):
            d = l2_differential(g)
            dd = extend_as_derivation(d)
            rows.append((g.name, len(d.terms), len(dd.terms), dd.is_zero()))
    return rows
