"""S-bimodules, decorated trees and quadratic presentations.

A decorated tree is stored as a tuple of vertices ``(name, outs, ins)``.  Each
slot of a vertex is the sorted tuple of leg tokens lying beyond it: a single
token for a global leg, several for an internal edge.  In a tree whose
vertices all have at least three flags these sets identify slots and vertices
uniquely, so sorting slots and vertices gives a canonical key.  The sign of
that normalization (S-action on the decoration, Koszul sign of reordering the
vertices) is folded into the coefficient.

Leg tokens: input label j is j, output label i is i - OUT.  Internal edges in
working terms are integers >= EDGE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .graphs import LabeledGraph, canonical_certificate
from .linalg import RowReducer, annihilator
from .polyvector import ParseError
from .symmetry import koszul_sign, perm_sign

OUT = 1000
EDGE = 1_000_000

Key = Tuple[Tuple[str, Tuple[Tuple[int, ...], ...], Tuple[Tuple[int, ...], ...]], ...]


def out_tok(i: int) -> int:
    return i - OUT


def in_tok(j: int) -> int:
    return j


def is_out_tok(t: int) -> bool:
    return t < 0


def tok_label(t: int) -> int:
    return t + OUT if t < 0 else t


# S-bimodules


@dataclass(frozen=True)
class Generator:
    name: str
    m: int
    n: int
    degree: int
    out_rep: str = "triv"  # triv | sgn
    in_rep: str = "triv"


def _adjacent_word(p: Sequence[int]) -> List[int]:
    """Indices k with p o s_{k1} o s_{k2} ... = id, in bubble-sort order."""
    p = list(p)
    word = []
    changed = True
    while changed:
        changed = False
        for k in range(len(p) - 1):
            if p[k] > p[k + 1]:
                p[k], p[k + 1] = p[k + 1], p[k]
                word.append(k + 1)
                changed = True
    return word


class SBimoduleBasis:
    """Generators with the action of adjacent transpositions as signed basis moves.

    ``out_moves[(name, k)] = (sign, name2)`` means s_k . name = sign * name2 for
    the left S_m action; ``in_moves`` likewise for the right S_n action.
    """

    def __init__(self, gens: Iterable[Generator], out_moves=None, in_moves=None):
        self.gens: Dict[str, Generator] = {}
        for g in gens:
            if g.name in self.gens:
                raise ValueError(f"duplicate generator {g.name}")
            if g.out_rep not in ("triv", "sgn") or g.in_rep not in ("triv", "sgn"):
                raise ValueError(f"unknown representation for {g.name}")
            self.gens[g.name] = g
        self.out_moves = dict(out_moves or {})
        self.in_moves = dict(in_moves or {})
        for g in self.gens.values():
            for k in range(1, g.m):
                self.out_moves.setdefault((g.name, k), (-1 if g.out_rep == "sgn" else 1, g.name))
            for k in range(1, g.n):
                self.in_moves.setdefault((g.name, k), (-1 if g.in_rep == "sgn" else 1, g.name))
        self._cache: Dict[tuple, Tuple[int, str]] = {}

    def __iter__(self):
        return iter(self.gens.values())

    def __getitem__(self, name: str) -> Generator:
        return self.gens[name]

    def __eq__(self, other):
        return (isinstance(other, SBimoduleBasis) and self.gens == other.gens
                and self.out_moves == other.out_moves and self.in_moves == other.in_moves)

    def __hash__(self):
        return hash(tuple(sorted(self.gens)))

    def component(self, m: int, n: int) -> List[Generator]:
        return [g for g in self.gens.values() if (g.m, g.n) == (m, n)]

    def arities(self) -> List[Tuple[int, int]]:
        return sorted({(g.m, g.n) for g in self.gens.values()})

    def act_out(self, name: str, perm: Sequence[int]) -> Tuple[int, str]:
        """perm . name for the left action on outputs."""
        key = ("o", name, tuple(perm))
        if key not in self._cache:
            sign = 1
            # perm = s_{w_r} ... s_{w_1} with w the bubble word; apply s_{w_1} first
            for k in _adjacent_word(perm):
                s, name = self.out_moves[(name, k)]
                sign *= s
            self._cache[key] = (sign, name)
        return self._cache[key]

    def act_in(self, name: str, perm: Sequence[int]) -> Tuple[int, str]:
        """name . perm for the right action on inputs."""
        key = ("i", name, tuple(perm))
        if key not in self._cache:
            sign = 1
            for k in reversed(_adjacent_word(perm)):
                s, name = self.in_moves[(name, k)]
                sign *= s
            self._cache[key] = (sign, name)
        return self._cache[key]


def czech_dual(b: SBimoduleBasis, rename=None) -> SBimoduleBasis:
    """sgn_m (x) M* (x) sgn_n with negated degrees.

    Dual basis elements are named by ``rename`` (default: append or strip '*').
    """
    if rename is None:
        def rename(s):
            return s[:-1] if s.endswith("*") else s + "*"
    flip = {"triv": "sgn", "sgn": "triv"}
    # sgn_1 is trivial, so one-element sides keep their label
    gens = [Generator(rename(g.name), g.m, g.n, -g.degree,
                      flip[g.out_rep] if g.m > 1 else g.out_rep,
                      flip[g.in_rep] if g.n > 1 else g.in_rep)
            for g in b]
    out_moves = {}
    in_moves = {}
    # s.e_i = eps e_j  =>  s.e*_j = eps e*_i on the dual; then twist by the sign character
    for (name, k), (s, name2) in b.out_moves.items():
        out_moves[(rename(name2), k)] = (-s, rename(name))
    for (name, k), (s, name2) in b.in_moves.items():
        in_moves[(rename(name2), k)] = (-s, rename(name))
    return SBimoduleBasis(gens, out_moves, in_moves)


def coxeter_defects(b: SBimoduleBasis) -> List[str]:
    """Violated Coxeter relations or commutation failures of the actions."""
    bad = []
    for g in b:
        for side, m in (("o", g.m), ("i", g.n)):
            moves = b.out_moves if side == "o" else b.in_moves
            for start in b.component(g.m, g.n):
                def run(word, name):
                    sign = 1
                    for k in word:
                        s, name = moves[(name, k)]
                        sign *= s
                    return sign, name
                for k in range(1, m):
                    if run([k, k], start.name) != (1, start.name):
                        bad.append(f"{start.name}: s{k}^2 != 1 ({side})")
                    if k + 1 < m and run([k, k + 1] * 3, start.name) != (1, start.name):
                        bad.append(f"{start.name}: (s{k}s{k+1})^3 != 1 ({side})")
                    for l in range(k + 2, m):
                        if run([k, l], start.name) != run([l, k], start.name):
                            bad.append(f"{start.name}: s{k}s{l} != s{l}s{k} ({side})")
        for start in b.component(g.m, g.n):
            for k in range(1, g.m):
                for l in range(1, g.n):
                    s1, n1 = b.out_moves[(start.name, k)]
                    s2, n2 = b.in_moves[(n1, l)]
                    t1, o1 = b.in_moves[(start.name, l)]
                    t2, o2 = b.out_moves[(o1, k)]
                    if (s1 * s2, n2) != (t1 * t2, o2):
                        bad.append(f"{start.name}: left/right actions do not commute")
    return sorted(set(bad))


# working terms and canonical keys

Vertex = Tuple[str, Tuple[int, ...], Tuple[int, ...]]


def canonicalize(vertices: Sequence[Vertex], coeff, basis: SBimoduleBasis) -> Tuple[Key, Fraction]:
    """Canonical key of a decorated tree given as a vertex list, with the adjusted coefficient."""
    coeff = Fraction(coeff)
    k = len(vertices)
    if k == 0:
        return (), coeff
    ends: Dict[int, List[int]] = {}
    for vi, (_, outs, ins) in enumerate(vertices):
        for s in outs:
            if s >= EDGE:
                ends.setdefault(s, [None, None])[0] = vi
        for s in ins:
            if s >= EDGE:
                ends.setdefault(s, [None, None])[1] = vi
    for e, (a, b) in ends.items():
        if a is None or b is None:
            raise ValueError(f"dangling internal edge {e - EDGE}")
    memo: Dict[Tuple[int, int], frozenset] = {}

    def beyond(vi: int, via: int) -> frozenset:
        key = (vi, via)
        if key in memo:
            return memo[key]
        acc = set()
        _, outs, ins = vertices[vi]
        for s in outs + ins:
            if s >= EDGE:
                if s != via:
                    a, b = ends[s]
                    acc |= beyond(b if a == vi else a, s)
            else:
                acc.add(s)
        memo[key] = frozenset(acc)
        return memo[key]

    def slot_set(vi: int, s: int) -> Tuple[int, ...]:
        if s < EDGE:
            return (s,)
        a, b = ends[s]
        return tuple(sorted(beyond(b if a == vi else a, s)))

    new_vertices = []
    for vi, (name, outs, ins) in enumerate(vertices):
        os_ = [slot_set(vi, s) for s in outs]
        is_ = [slot_set(vi, s) for s in ins]
        po = sorted(range(len(os_)), key=lambda i: os_[i][0])
        pi = sorted(range(len(is_)), key=lambda i: is_[i][0])
        # f o pi sorted  =>  f (x) p = (f o pi) (x) pi^{-1} p
        perm_o = tuple(i + 1 for i in po)
        perm_i = tuple(i + 1 for i in pi)
        inv_o = [0] * len(perm_o)
        for a, b in enumerate(perm_o, start=1):
            inv_o[b - 1] = a
        s1, name = basis.act_out(name, tuple(inv_o))
        s2, name = basis.act_in(name, perm_i)
        coeff *= s1 * s2
        new_vertices.append((name, tuple(os_[i] for i in po), tuple(is_[i] for i in pi)))
    order = sorted(range(k), key=lambda i: (new_vertices[i][1], new_vertices[i][2]))
    degs = [basis[v[0]].degree for v in new_vertices]
    coeff *= koszul_sign(degs, [i + 1 for i in order])
    return tuple(new_vertices[i] for i in order), coeff


def key_to_term(key: Key) -> List[Vertex]:
    """Working term for a key; internal edges numbered from EDGE in key order."""
    if not key:
        return []
    legs = set()
    for _, outs, ins in key:
        for s in outs + ins:
            if len(s) == 1:
                legs.add(s[0])
    # every leg appears as a singleton slot somewhere
    allset = frozenset(legs)
    in_index = {}
    for wi, (_, _, ins) in enumerate(key):
        for si, s in enumerate(ins):
            if len(s) > 1:
                in_index[frozenset(s)] = (wi, si)
    outs_w = [list() for _ in key]
    ins_w = [list() for _ in key]
    for vi, (_, outs, ins) in enumerate(key):
        ins_w[vi] = [s[0] if len(s) == 1 else None for s in ins]
    eid = EDGE
    for vi, (_, outs, ins) in enumerate(key):
        row = []
        for s in outs:
            if len(s) == 1:
                row.append(s[0])
            else:
                wi, si = in_index[allset - frozenset(s)]
                row.append(eid)
                ins_w[wi][si] = eid
                eid += 1
        outs_w[vi] = row
    return [(key[i][0], tuple(outs_w[i]), tuple(ins_w[i])) for i in range(len(key))]


def key_arity(key: Key) -> Tuple[int, int]:
    if not key:
        return 1, 1
    m = n = 0
    for _, outs, ins in key:
        for s in outs + ins:
            if len(s) == 1:
                if is_out_tok(s[0]):
                    m += 1
                else:
                    n += 1
    return m, n


def key_to_graph(key: Key) -> LabeledGraph:
    term = key_to_term(key)
    edges, ins, outs = [], [], []
    src = {}
    for vi, (_, o, i) in enumerate(term):
        for s in o:
            if s >= EDGE:
                src[s] = vi
            else:
                outs.append((vi, tok_label(s)))
    for vi, (_, o, i) in enumerate(term):
        for s in i:
            if s >= EDGE:
                edges.append((src[s], vi))
            else:
                ins.append((tok_label(s), vi))
    return LabeledGraph(tuple(range(len(term))), tuple(edges), tuple(sorted(ins)),
                        tuple(sorted(outs, key=lambda x: x[1])))


def format_key(key: Key) -> str:
    """Readable form: name[outs; ins] per vertex, internal edges shown as {legs}."""
    if not key:
        return "|"

    def slot(s):
        if len(s) == 1:
            t = s[0]
            return f"o{tok_label(t)}" if is_out_tok(t) else f"i{t}"
        return "{" + ",".join((f"o{tok_label(t)}" if is_out_tok(t) else f"i{t}") for t in s) + "}"

    return " ".join(f"{n}[{' '.join(map(slot, o))}; {' '.join(map(slot, i))}]" for n, o, i in key)


# decorated elements


class DecoratedElement:
    """Exact-rational combination of canonical decorated trees of one arity."""

    __slots__ = ("basis", "m", "n", "terms")

    def __init__(self, basis: SBimoduleBasis, m: int, n: int, terms: Optional[Dict[Key, Fraction]] = None):
        self.basis = basis
        self.m = m
        self.n = n
        self.terms: Dict[Key, Fraction] = {}
        for k, c in (terms or {}).items():
            if c:
                self.terms[k] = Fraction(c)

    @classmethod
    def from_terms(cls, basis, m, n, items: Iterable[Tuple[Sequence[Vertex], object]]):
        out = cls(basis, m, n)
        for verts, c in items:
            out.add_term(verts, c)
        return out

    @classmethod
    def corolla(cls, basis: SBimoduleBasis, name: str) -> "DecoratedElement":
        g = basis[name]
        v = (name, tuple(out_tok(i) for i in range(1, g.m + 1)), tuple(in_tok(j) for j in range(1, g.n + 1)))
        return cls.from_terms(basis, g.m, g.n, [([v], 1)])

    @classmethod
    def unit(cls, basis: SBimoduleBasis) -> "DecoratedElement":
        return cls(basis, 1, 1, {(): Fraction(1)})

    def add_term(self, verts: Sequence[Vertex], c) -> None:
        if not c:
            return
        key, c = canonicalize(verts, c, self.basis)
        v = self.terms.get(key, 0) + c
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def _check(self, other: "DecoratedElement"):
        if (self.m, self.n) != (other.m, other.n):
            raise ValueError(f"component mismatch {(self.m, self.n)} vs {(other.m, other.n)}")

    def __add__(self, other: "DecoratedElement") -> "DecoratedElement":
        self._check(other)
        out = DecoratedElement(self.basis, self.m, self.n, self.terms)
        for k, c in other.terms.items():
            v = out.terms.get(k, 0) + c
            if v:
                out.terms[k] = v
            else:
                out.terms.pop(k, None)
        return out

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DecoratedElement":
        c = Fraction(c)
        return DecoratedElement(self.basis, self.m, self.n, {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        if isinstance(other, DecoratedElement):
            return (self.m, self.n) == (other.m, other.n) and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.m, self.n, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def weights(self) -> set:
        return {len(k) for k in self.terms}

    def relabel(self, sigma: Sequence[int], tau: Sequence[int]) -> "DecoratedElement":
        """sigma X tau: output label i becomes sigma(i); new input j is old input tau(j)."""
        tinv = {t: j for j, t in enumerate(tau, start=1)}

        def mp(t):
            if t >= EDGE:
                return t
            if is_out_tok(t):
                return out_tok(sigma[tok_label(t) - 1])
            return in_tok(tinv[t])

        out = DecoratedElement(self.basis, self.m, self.n)
        for key, c in self.terms.items():
            term = key_to_term(key)
            out.add_term([(nm, tuple(map(mp, o)), tuple(map(mp, i))) for nm, o, i in term], c)
        return out

    def __repr__(self):
        return f"DecoratedElement({self.m},{self.n}: {format_element(self)})"


def format_element(x: DecoratedElement) -> str:
    if x.is_zero():
        return "0"
    parts = []
    for k in sorted(x.terms):
        c = x.terms[k]
        s = "+" if c > 0 else "-"
        a = abs(c)
        cs = f"{a.numerator}" if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
        parts.append(f"{s}{cs} {format_key(k)}")
    return " ".join(parts)


def certificate_of_key(key: Key) -> bytes:
    return canonical_certificate(key_to_graph(key))


# substitution / free composition


def substitute(term: Sequence[Vertex], index: int, plug_key: Key, next_edge: int) -> Tuple[List[Vertex], int]:
    """Replace vertex `index` of a working term by the tree of `plug_key`.

    The plug's output label i is glued to the vertex's i-th out-slot, input j
    to its j-th in-slot.  The plug's vertices take the replaced vertex's place in
    the vertex order.  Returns the new term and the next free edge id.
    """
    _, vouts, vins = term[index]
    if not plug_key:
        if len(vouts) != 1 or len(vins) != 1:
            raise ValueError("unit plug at a vertex that is not (1,1)")
        o, i = vouts[0], vins[0]
        rest = [v for j, v in enumerate(term) if j != index]
        if o >= EDGE and i >= EDGE:
            ren = {o: i}
        elif o >= EDGE:
            ren = {o: i}
        elif i >= EDGE:
            ren = {i: o}
        else:
            raise ValueError("grafting produced the unit tree")
        return [(nm, tuple(ren.get(s, s) for s in a), tuple(ren.get(s, s) for s in b)) for nm, a, b in rest], next_edge
    plug = key_to_term(plug_key)
    emap = {}

    def mp(t):
        nonlocal next_edge
        if t >= EDGE:
            if t not in emap:
                emap[t] = next_edge
                next_edge += 1
            return emap[t]
        if is_out_tok(t):
            return vouts[tok_label(t) - 1]
        return vins[t - 1]

    new = [(nm, tuple(mp(s) for s in a), tuple(mp(s) for s in b)) for nm, a, b in plug]
    return list(term[:index]) + new + list(term[index + 1:]), next_edge


def max_edge(term: Sequence[Vertex]) -> int:
    top = EDGE
    for _, a, b in term:
        for s in a + b:
            if s >= top:
                top = s + 1
    return top


def compose_free(template: LabeledGraph, plugs: Dict, basis: SBimoduleBasis) -> DecoratedElement:
    """Multilinear grafting of decorated elements into a template graph.

    ``plugs[v] = (element, out_order, in_order)`` where out_order lists the
    template out-flags of v matched with the element's outputs 1..m_v (and
    in_order likewise).  Tensor factors are ordered as template.vertices.
    """
    slot_of = {}
    for i, _ in enumerate(template.edges):
        slot_of[("e", i)] = EDGE + i
    for v, l in template.outputs:
        slot_of[("o", l)] = out_tok(l)
    for l, v in template.inputs:
        slot_of[("i", l)] = in_tok(l)
    skeleton = []
    for v in template.vertices:
        if v not in plugs:
            raise ValueError(f"no plug for vertex {v!r}")
        el, oo, io = plugs[v]
        if sorted(oo) != sorted(template.out_flags(v)) or sorted(io) != sorted(template.in_flags(v)):
            raise ValueError(f"labeling at vertex {v!r} is not a bijection onto its flags")
        if (el.m, el.n) != (len(oo), len(io)):
            raise ValueError(f"arity mismatch at vertex {v!r}")
        if el.basis is not basis and el.basis != basis:
            raise ValueError("plugs over different generator bases")
        skeleton.append(("_", tuple(slot_of[f] for f in oo), tuple(slot_of[f] for f in io)))
    result = DecoratedElement(basis, template.m, template.n)
    items = [(skeleton, Fraction(1))]
    # substitute from the last vertex so earlier indices stay valid
    for idx in range(len(template.vertices) - 1, -1, -1):
        el = plugs[template.vertices[idx]][0]
        new_items = []
        for term, c in items:
            for key, pc in el.terms.items():
                t2, _ = substitute(term, idx, key, max_edge(term))
                new_items.append((t2, c * pc))
        items = new_items
    for term, c in items:
        if not term:
            result.terms[()] = result.terms.get((), 0) + c
        else:
            result.add_term(term, c)
    return result


def graft_at(x: DecoratedElement, key: Key, index: int, plug: DecoratedElement) -> DecoratedElement:
    """Substitute `plug` into vertex `index` of the basis tree `key` (coefficient 1)."""
    term = key_to_term(key)
    out = DecoratedElement(x.basis, x.m, x.n)
    top = max_edge(term)
    for pk, pc in plug.terms.items():
        t2, _ = substitute(term, index, pk, top)
        out.add_term(t2, pc)
    return out


# pairing


def pairing_orientation(key: Key) -> int:
    """Orientation sign of a two-vertex tree used by the Koszul pairing.

    Each internal flag contributes (-1)^(position - 1) within its own vertex.
    The remaining global labels are read source vertex first, outputs and
    inputs separately, and each sequence contributes its permutation sign.
    """
    if len(key) != 2:
        raise ValueError("pairing is defined on two-vertex trees")
    (a_name, a_out, a_in), (b_name, b_out, b_in) = key
    if any(len(s) > 1 for s in a_out):
        u_out, u_in, v_out, v_in = a_out, a_in, b_out, b_in
    else:
        u_out, u_in, v_out, v_in = b_out, b_in, a_out, a_in
    pos_o = next(i for i, s in enumerate(u_out) if len(s) > 1)
    pos_i = next(i for i, s in enumerate(v_in) if len(s) > 1)
    sign = -1 if pos_o % 2 else 1
    if pos_i % 2:
        sign = -sign
    outs = [tok_label(s[0]) for s in u_out + v_out if len(s) == 1]
    ins = [s[0] for s in u_in + v_in if len(s) == 1]
    return sign * perm_sign(outs) * perm_sign(ins)


def dual_key(key: Key, rename) -> Key:
    return tuple((rename(nm), o, i) for nm, o, i in key)


def _default_rename(s: str) -> str:
    return s[:-1] if s.endswith("*") else s + "*"


def koszul_pairing(x: DecoratedElement, y: DecoratedElement, rename=_default_rename) -> Fraction:
    """Pairing of weight-2 elements over M and over its Czech dual."""
    if (x.m, x.n) != (y.m, y.n):
        raise ValueError(f"component mismatch {(x.m, x.n)} vs {(y.m, y.n)}")
    total = Fraction(0)
    for k, c in x.terms.items():
        d = y.terms.get(dual_key(k, rename))
        if d:
            total += c * d * pairing_orientation(k)
    return total


# tree enumeration


def _compress(labels_used: Sequence[int], available: Sequence[int]) -> Dict[int, int]:
    """Order-preserving map from sorted old labels onto the available new labels."""
    return dict(zip(sorted(labels_used), available))


@lru_cache(maxsize=None)
def _enumerate(basis_id: int, m: int, n: int, w: int, limits: Tuple[Tuple[str, int], ...]) -> Tuple[Key, ...]:
    basis = _BASES[basis_id]
    lim = dict(limits)
    if w == 1:
        out = set()
        for g in basis.component(m, n):
            if lim.get(g.name, 1) < 1:
                continue
            key, _ = canonicalize([(g.name, tuple(out_tok(i) for i in range(1, m + 1)),
                                    tuple(range(1, n + 1)))], 1, basis)
            out.add(key)
        return tuple(sorted(out))
    out = set()
    for g in basis:
        a, b = g.m, g.n
        # attach g above an output leg of a smaller tree (g takes it as input 1)
        mp, np_ = m + 1 - a, n - b + 1
        if mp >= 1 and np_ >= 1 and b >= 1:
            sub_lim = _lower_limit(lim, g.name)
            if sub_lim is not None:
                for key in _enumerate(basis_id, mp, np_, w - 1, sub_lim):
                    if not _within(key, lim, g.name):
                        continue
                    _attach(basis, key, g, "up", m, n, out)
        mp, np_ = m - a + 1, n + 1 - b
        if mp >= 1 and np_ >= 1 and a >= 1:
            sub_lim = _lower_limit(lim, g.name)
            if sub_lim is not None:
                for key in _enumerate(basis_id, mp, np_, w - 1, sub_lim):
                    if not _within(key, lim, g.name):
                        continue
                    _attach(basis, key, g, "down", m, n, out)
    return tuple(sorted(out))


def _lower_limit(lim: Dict[str, int], name: str):
    if name in lim:
        if lim[name] < 1:
            return None
    return tuple(sorted(lim.items()))


def _within(key: Key, lim: Dict[str, int], extra: str) -> bool:
    if not lim:
        return True
    cnt: Dict[str, int] = {}
    for nm, _, _ in key:
        cnt[nm] = cnt.get(nm, 0) + 1
    cnt[extra] = cnt.get(extra, 0) + 1
    return all(cnt.get(k, 0) <= v for k, v in lim.items())


def _attach(basis, key, g: Generator, where: str, m: int, n: int, out: set):
    term = key_to_term(key)
    mo, no = key_arity(key)
    top = max_edge(term)
    a, b = g.m, g.n
    if where == "up":
        legs = [out_tok(i) for i in range(1, mo + 1)]
    else:
        legs = [in_tok(j) for j in range(1, no + 1)]
    for leg in legs:
        e = top
        # relabel: choose labels for the new vertex's free legs
        if where == "up":
            new_out_count, new_in_count = a, b - 1
            old_outs = [i for i in range(1, mo + 1) if out_tok(i) != leg]
            old_ins = list(range(1, no + 1))
        else:
            new_out_count, new_in_count = a - 1, b
            old_outs = list(range(1, mo + 1))
            old_ins = [j for j in range(1, no + 1) if in_tok(j) != leg]
        for A in combinations(range(1, m + 1), new_out_count):
            rest_o = [i for i in range(1, m + 1) if i not in A]
            omap = _compress(old_outs, rest_o)
            for B in combinations(range(1, n + 1), new_in_count):
                rest_i = [j for j in range(1, n + 1) if j not in B]
                imap = _compress(old_ins, rest_i)

                def mp(t):
                    if t == leg:
                        return e
                    if t >= EDGE:
                        return t
                    if is_out_tok(t):
                        return out_tok(omap[tok_label(t)])
                    return in_tok(imap[t])

                body = [(nm, tuple(map(mp, o)), tuple(map(mp, i))) for nm, o, i in term]
                if where == "up":
                    newv = (g.name, tuple(out_tok(i) for i in A), (e,) + tuple(in_tok(j) for j in B))
                else:
                    newv = (g.name, (e,) + tuple(out_tok(i) for i in A), tuple(in_tok(j) for j in B))
                k2, _ = canonicalize(body + [newv], 1, basis)
                out.add(k2)


_BASES: Dict[int, SBimoduleBasis] = {}


def _basis_id(basis: SBimoduleBasis) -> int:
    bid = id(basis)
    _BASES[bid] = basis
    return bid


def free_basis(basis: SBimoduleBasis, m: int, n: int, weight: int,
               limits: Optional[Dict[str, int]] = None) -> List[Key]:
    """Canonical keys spanning the weight-`weight` part of the free dioperad at (m,n)."""
    if weight < 1 or m < 1 or n < 1:
        return []
    return list(_enumerate(_basis_id(basis), m, n, weight, tuple(sorted((limits or {}).items()))))


# presentations


@dataclass
class TreeExpr:
    """Written form of a decorated tree: name[outs; ins] with nested subtrees."""

    name: str
    outs: List[object]  # int tokens, "^", or TreeExpr
    ins: List[object]

    def render(self) -> str:
        def slot(s, side):
            if s == "^":
                return "^"
            if isinstance(s, TreeExpr):
                return s.render()
            return f"o{s}" if side == "o" else f"i{s}"

        o = " ".join(slot(s, "o") for s in self.outs)
        i = " ".join(slot(s, "i") for s in self.ins)
        return f"{self.name}[{o}; {i}]"

    def to_term(self) -> List[Vertex]:
        """Vertices in preorder; internal edges numbered from EDGE."""
        verts: List[Vertex] = []
        counter = [EDGE]

        def walk(node: TreeExpr, parent_edge: Optional[int]):
            idx = len(verts)
            verts.append(None)
            outs, ins = [], []
            pending = []
            for s in node.outs:
                if s == "^":
                    outs.append(parent_edge)
                elif isinstance(s, TreeExpr):
                    e = counter[0]
                    counter[0] += 1
                    outs.append(e)
                    pending.append((s, e))
                else:
                    outs.append(out_tok(s))
            for s in node.ins:
                if s == "^":
                    ins.append(parent_edge)
                elif isinstance(s, TreeExpr):
                    e = counter[0]
                    counter[0] += 1
                    ins.append(e)
                    pending.append((s, e))
                else:
                    ins.append(in_tok(s))
            verts[idx] = (node.name, tuple(outs), tuple(ins))
            for child, e in pending:
                walk(child, e)

        walk(self, None)
        return verts


@dataclass
class Relation:
    name: str
    terms: List[Tuple[Fraction, TreeExpr]]

    def element(self, basis: SBimoduleBasis) -> DecoratedElement:
        m, n = _expr_arity(self.terms[0][1])
        out = DecoratedElement(basis, m, n)
        for c, t in self.terms:
            if _expr_arity(t) != (m, n):
                raise ValueError(f"relation {self.name} mixes arities")
            out.add_term(t.to_term(), c)
        return out


def _expr_arity(t: TreeExpr) -> Tuple[int, int]:
    m = n = 0
    for v in t.to_term():
        m += sum(1 for s in v[1] if s < EDGE)
        n += sum(1 for s in v[2] if s < EDGE)
    return m, n


@dataclass
class QuadraticPresentation:
    name: str
    basis: SBimoduleBasis
    relations: List[Relation] = field(default_factory=list)
    _cache: Dict = field(default_factory=dict, repr=False)

    def relation_elements(self) -> List[DecoratedElement]:
        if "rel" not in self._cache:
            self._cache["rel"] = [r.element(self.basis) for r in self.relations]
        return self._cache["rel"]

    def relations_at(self, m: int, n: int) -> List[DecoratedElement]:
        return [r for r in self.relation_elements() if (r.m, r.n) == (m, n)]

    def check(self) -> None:
        for r, el in zip(self.relations, self.relation_elements()):
            if el.weights() - {2}:
                raise ValueError(f"relation {r.name} is not quadratic")
            degs = {sum(self.basis[nm].degree for nm, _, _ in k) for k in el.terms}
            if len(degs) > 1:
                raise ValueError(f"relation {r.name} is not homogeneous in degree")


# text format

def _fmt_frac(c: Fraction) -> str:
    s = "+" if c > 0 else "-"
    a = abs(c)
    return f"{s}{a.numerator}" if a.denominator == 1 else f"{s}{a.numerator}/{a.denominator}"


def serialize_presentation(p: QuadraticPresentation) -> str:
    lines = [f"presentation: {p.name}", "generators:"]
    for g in p.basis:
        lines.append(f"g {g.name} ({g.m},{g.n}) degree {g.degree} action {g.out_rep} {g.in_rep}")
    lines.append("relations:")
    for r in p.relations:
        body = " ".join(f"{_fmt_frac(c)} {t.render()}" for c, t in r.terms)
        lines.append(f"r {r.name} = {body}")
    return "\n".join(lines) + "\n"


class _TreeParser:
    def __init__(self, text: str, src: str, line: int):
        self.s = text
        self.i = 0
        self.src = src
        self.line = line

    def err(self, expected: str):
        got = self.s[self.i:self.i + 12] or "end of line"
        raise ParseError(self.src, self.line, expected, got)

    def ws(self):
        while self.i < len(self.s) and self.s[self.i] == " ":
            self.i += 1

    def name(self) -> str:
        j = self.i
        while self.i < len(self.s) and (self.s[self.i].isalnum() or self.s[self.i] in "_*'"):
            self.i += 1
        if j == self.i:
            self.err("generator name")
        return self.s[j:self.i]

    def tree(self) -> TreeExpr:
        nm = self.name()
        if self.i >= len(self.s) or self.s[self.i] != "[":
            self.err("'['")
        self.i += 1
        outs = self.slots("o", ";")
        self.i += 1
        ins = self.slots("i", "]")
        self.i += 1
        return TreeExpr(nm, outs, ins)

    def slots(self, side: str, end: str) -> list:
        out = []
        while True:
            self.ws()
            if self.i >= len(self.s):
                self.err(f"'{end}'")
            ch = self.s[self.i]
            if ch == end:
                return out
            if ch == "^":
                self.i += 1
                out.append("^")
            elif ch == side:
                self.i += 1
                j = self.i
                while self.i < len(self.s) and self.s[self.i].isdigit():
                    self.i += 1
                if j == self.i:
                    self.err("leg label digits")
                out.append(int(self.s[j:self.i]))
            else:
                out.append(self.tree())


def _parse_coeff(tok: str, src: str, ln: int) -> Fraction:
    if not tok or tok[0] not in "+-":
        raise ParseError(src, ln, "signed coefficient", tok)
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(src, ln, "rational coefficient", tok) from None


def _parse_relation_body(body: str, src: str, ln: int) -> List[Tuple[Fraction, TreeExpr]]:
    p = _TreeParser(body, src, ln)
    terms = []
    while True:
        p.ws()
        if p.i >= len(body):
            break
        j = p.i
        while p.i < len(body) and body[p.i] != " ":
            p.i += 1
        c = _parse_coeff(body[j:p.i], src, ln)
        p.ws()
        t = p.tree()
        _validate_expr(t, src, ln)
        terms.append((c, t))
    if not terms:
        raise ParseError(src, ln, "at least one term")
    return terms


def _validate_expr(t: TreeExpr, src: str, ln: int, parent_side: Optional[str] = None):
    carets_o = sum(1 for s in t.outs if s == "^")
    carets_i = sum(1 for s in t.ins if s == "^")
    if parent_side is None and carets_o + carets_i:
        raise ParseError(src, ln, "no '^' at the root vertex", t.name)
    if parent_side == "o" and (carets_i != 1 or carets_o):
        raise ParseError(src, ln, "exactly one '^' among the inputs of a subtree hung on an output", t.name)
    if parent_side == "i" and (carets_o != 1 or carets_i):
        raise ParseError(src, ln, "exactly one '^' among the outputs of a subtree hung on an input", t.name)
    for s in t.outs:
        if isinstance(s, TreeExpr):
            _validate_expr(s, src, ln, "o")
    for s in t.ins:
        if isinstance(s, TreeExpr):
            _validate_expr(s, src, ln, "i")


def parse_presentation(text: str, source: str = "<string>") -> QuadraticPresentation:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("presentation: "):
        raise ParseError(source, 1, "'presentation: <name>'", lines[0] if lines else "")
    name = lines[0][len("presentation: "):].strip()
    if len(lines) < 2 or lines[1] != "generators:":
        raise ParseError(source, 2, "'generators:'", lines[1] if len(lines) > 1 else "")
    gens = []
    i = 2
    while i < len(lines) and lines[i] != "relations:":
        ln = i + 1
        parts = lines[i].split(" ")
        if len(parts) != 8 or parts[0] != "g":
            raise ParseError(source, ln, "'g <name> (m,n) degree <d> action <rep> <rep>'", lines[i])
        _, nm, ar, kw1, d, kw2, ro, ri = parts
        if kw1 != "degree":
            raise ParseError(source, ln, "'degree'", kw1)
        if kw2 != "action":
            raise ParseError(source, ln, "'action'", kw2)
        try:
            mm, nn = ar.strip("()").split(",")
            mm, nn = int(mm), int(nn)
            if ar != f"({mm},{nn})":
                raise ValueError
        except ValueError:
            raise ParseError(source, ln, "arity '(m,n)'", ar) from None
        try:
            d = int(d)
        except ValueError:
            raise ParseError(source, ln, "integer degree", d) from None
        for rep in (ro, ri):
            if rep not in ("triv", "sgn"):
                raise ParseError(source, ln, "representation 'triv' or 'sgn'", rep)
        gens.append(Generator(nm, mm, nn, d, ro, ri))
        i += 1
    if i >= len(lines):
        raise ParseError(source, i + 1, "'relations:'", "end of file")
    try:
        basis = SBimoduleBasis(gens)
    except ValueError as exc:
        raise ParseError(source, 2, "distinct generator names", str(exc)) from None
    rels = []
    for j in range(i + 1, len(lines)):
        ln = j + 1
        line = lines[j]
        if not line.startswith("r "):
            raise ParseError(source, ln, "'r <name> = <terms>'", line[:12])
        head, sep, body = line[2:].partition(" = ")
        if not sep or not head or " " in head:
            raise ParseError(source, ln, "'r <name> = <terms>'", line[:20])
        terms = _parse_relation_body(body, source, ln)
        for c, t in terms:
            for v in t.to_term():
                if v[0] not in basis.gens:
                    raise ParseError(source, ln, "declared generator name", v[0])
                g = basis[v[0]]
                if (len(v[1]), len(v[2])) != (g.m, g.n):
                    raise ParseError(source, ln, f"{g.name} with arity ({g.m},{g.n})", t.render())
        rel = Relation(head, terms)
        try:
            rel.element(basis)
        except ValueError as exc:
            raise ParseError(source, ln, "a relation of one arity with valid leg labels", str(exc)) from None
        rels.append(rel)
    pres = QuadraticPresentation(name, basis, rels)
    try:
        pres.check()
    except ValueError as exc:
        raise ParseError(source, len(lines), "quadratic homogeneous relations", str(exc)) from None
    return pres


# built-in presentations

def _data_path(name: str):
    from importlib import resources
    return resources.files("dioperads") / "data" / name


BUILTIN_FILES = {
    "lie2-1-bi": "lie2-1-bi.pres",
    "lie2-1-bi-dual": "lie2-1-bi-dual.pres",
    "lie1": "lie1.pres",
    "lie2": "lie2.pres",
}


def builtin_text(name: str) -> str:
    return _data_path(BUILTIN_FILES[name]).read_text()


_BUILTIN_CACHE: Dict[str, QuadraticPresentation] = {}


def builtin(name: str) -> QuadraticPresentation:
    if name not in BUILTIN_FILES:
        raise KeyError(f"unknown built-in presentation {name!r}; known: {sorted(BUILTIN_FILES)}")
    if name not in _BUILTIN_CACHE:
        _BUILTIN_CACHE[name] = parse_presentation(builtin_text(name), BUILTIN_FILES[name])
    return _BUILTIN_CACHE[name]


# duality and dimensions


@dataclass
class SubspaceBasis:
    columns: List[Key]
    rows: List[Dict[Key, Fraction]]

    @property
    def dim(self) -> int:
        return len(self.rows)


def relation_span(p: QuadraticPresentation, m: int, n: int) -> SubspaceBasis:
    cols = free_basis(p.basis, m, n, 2)
    order = {c: i for i, c in enumerate(cols)}
    rr = RowReducer(order)
    for r in p.relations_at(m, n):
        rr.add(r.terms)
    return SubspaceBasis(cols, rr.basis())


def full_relation_span(p: QuadraticPresentation, m: int, n: int) -> SubspaceBasis:
    """Span of all S-relabelings of the relations at (m,n)."""
    key = ("full", m, n)
    if key not in p._cache:
        cols = free_basis(p.basis, m, n, 2)
        order = {c: i for i, c in enumerate(cols)}
        rr = RowReducer(order)
        for r in p.relations_at(m, n):
            for s in permutations(range(1, m + 1)):
                for t in permutations(range(1, n + 1)):
                    rr.add(r.relabel(s, t).terms)
        p._cache[key] = SubspaceBasis(cols, rr.basis())
    return p._cache[key]


def orthogonal_complement(p: QuadraticPresentation, m: int, n: int,
                          dual_basis: Optional[SBimoduleBasis] = None, rename=_default_rename) -> SubspaceBasis:
    """Annihilator of the relation span inside the weight-2 part of the free dioperad on M^v."""
    if dual_basis is None:
        dual_basis = czech_dual(p.basis, rename)
    span = full_relation_span(p, m, n)
    cols = span.columns
    weights = {c: pairing_orientation(c) for c in cols}
    ann = annihilator(span.rows, cols, weights)
    dcols = [dual_key(c, rename) for c in cols]
    rows = [{dual_key(k, rename): v for k, v in r.items()} for r in ann]
    return SubspaceBasis(dcols, rows)


def ideal_rows(p: QuadraticPresentation, m: int, n: int, weight: int) -> Iterable[Dict[Key, Fraction]]:
    """Spanning rows of the weight-`weight` slice of the ideal generated by the relations."""
    if weight < 2:
        return
    rel_arities = sorted({(r.m, r.n) for r in p.relation_elements()})
    for (a, b) in rel_arities:
        span = full_relation_span(p, a, b)
        if not span.rows:
            continue
        xname = f"__X{a}_{b}"
        deg = sum(p.basis[nm].degree for nm, _, _ in next(iter(span.rows[0])))
        ext = SBimoduleBasis(list(p.basis) + [Generator(xname, a, b, deg)],
                             p.basis.out_moves, p.basis.in_moves)
        ext_id = _ext_basis(p, ext, xname)
        for key in _enumerate(ext_id, m, n, weight - 1, ((xname, 1),)):
            idx = [i for i, v in enumerate(key) if v[0] == xname]
            if len(idx) != 1:
                continue
            term = key_to_term(key)
            top = max_edge(term)
            for row in span.rows:
                out = DecoratedElement(p.basis, m, n)
                for rk, rc in row.items():
                    t2, _ = substitute(term, idx[0], rk, top)
                    out.add_term(t2, rc)
                if out.terms:
                    yield out.terms


_EXT: Dict[tuple, int] = {}


def _ext_basis(p: QuadraticPresentation, ext: SBimoduleBasis, xname: str) -> int:
    k = (id(p), xname)
    if k not in _EXT:
        p._cache.setdefault("ext", []).append(ext)
        _EXT[k] = _basis_id(ext)
    return _EXT[k]


def quotient_dim(p: QuadraticPresentation, m: int, n: int, weight: int, method: str = "auto") -> int:
    """Dimension of the weight-graded component of F(M)/(R) at (m,n).

    ``method`` is "eliminate" (row reduction over all trees), "orbits"
    (two-term relations only, explored over relabeling orbits) or "auto",
    which picks "orbits" whenever every relation has at most two terms.
    """
    if method not in ("auto", "eliminate", "orbits"):
        raise ValueError(f"unknown method {method!r}")
    if method != "eliminate":
        from .orbits import binomial_rows, quotient_dim_orbits
        if method == "orbits" or ("binomial" not in p._cache and p._cache.setdefault(
                "binomial", binomial_rows(p) is not None)) or p._cache.get("binomial"):
            if "canonizer" not in p._cache:
                from .orbits import Canonizer
                p._cache["canonizer"] = Canonizer(p.basis)
            return quotient_dim_orbits(p, m, n, weight, p._cache["canonizer"])
    cols = free_basis(p.basis, m, n, weight)
    if weight < 2:
        return len(cols)
    order = {c: i for i, c in enumerate(cols)}
    rr = RowReducer(order)
    for row in ideal_rows(p, m, n, weight):
        rr.add(row)
        if rr.rank == len(cols):
            break
    return len(cols) - rr.rank


def total_quotient_dim(p: QuadraticPresentation, m: int, n: int) -> int:
    """Sum over weights; for binary generators only weight m+n-2 contributes."""
    return sum(quotient_dim(p, m, n, w) for w in range(1, m + n - 1))


def _two_level_ok(key: Key, upper_names: set, lower_names: set) -> bool:
    term = key_to_term(key)
    src = {}
    for vi, (nm, o, _) in enumerate(term):
        for s in o:
            if s >= EDGE:
                src[s] = nm
    for nm, _, i in term:
        for s in i:
            if s >= EDGE:
                if src[s] not in lower_names or nm not in upper_names:
                    return False
    return True


def box_product_dim(upper: QuadraticPresentation, lower: QuadraticPresentation, m: int, n: int) -> int:
    """Dimension of the two-level assembly of an operad part and a co-part at (m,n).

    ``upper`` is concentrated in arities (1,k) and sits next to the outputs;
    ``lower`` is concentrated in arities (k,1) and sits next to the inputs.
    Every internal edge runs from a lower vertex to an upper vertex.
    """
    if m + n > 6:
        raise ValueError("box product limited to m+n <= 6")
    gens = []
    for k in range(2, n + 1):
        gens.append(Generator(f"P{k}", 1, k, 0))
    for k in range(2, m + 1):
        gens.append(Generator(f"Q{k}", k, 1, 0))
    shapes = SBimoduleBasis(gens)
    ups = {g.name for g in gens if g.name.startswith("P")}
    lows = {g.name for g in gens if g.name.startswith("Q")}
    sid = _basis_id(shapes)
    _BOX_KEEP.append(shapes)
    dims_up = {k: total_quotient_dim(upper, 1, k) for k in range(2, n + 1)}
    dims_low = {k: total_quotient_dim(lower, k, 1) for k in range(2, m + 1)}
    total = 0
    for w in range(1, m + n - 1):
        for key in _enumerate(sid, m, n, w, ()):
            if not _two_level_ok(key, ups, lows):
                continue
            prod = 1
            for nm, o, i in key:
                prod *= dims_up[len(i)] if nm.startswith("P") else dims_low[len(o)]
            total += prod
    return total


_BOX_KEEP: List[SBimoduleBasis] = []
