"""Quotient dimensions by exploring relation moves over relabeling orbits.

When every relation is a two-term relation, the annihilator of the ideal in a
weight-graded component is spanned by one functional per constraint
component that admits a consistent nonzero sign assignment.  Relabelings
(S_m x S_n) permute these components, so it suffices to explore one component
per orbit while tracking which relabelings map it to itself and with which
sign.  A component orbit of good components contributes |G| / |stabilizer|.

Group elements are pairs (out_map, in_map) of label maps old -> new, stored as
one-based tuples: out_map[i-1] is the new label of output i.
"""

from __future__ import annotations

from collections import deque
from itertools import permutations, product
from math import factorial
from typing import Dict, List, Optional, Tuple

from .dioperad import (EDGE, DecoratedElement, Key, QuadraticPresentation, SBimoduleBasis,
                       _enumerate, _basis_id, canonicalize, in_tok, is_out_tok, key_arity,
                       key_to_term, max_edge, out_tok, substitute, tok_label)

Group = Tuple[Tuple[int, ...], Tuple[int, ...]]


def compose(a: Group, b: Group) -> Group:
    """a after b."""
    return (tuple(a[0][x - 1] for x in b[0]), tuple(a[1][x - 1] for x in b[1]))


def invert(a: Group) -> Group:
    def inv(p):
        out = [0] * len(p)
        for i, v in enumerate(p, start=1):
            out[v - 1] = i
        return tuple(out)
    return inv(a[0]), inv(a[1])


def act(basis: SBimoduleBasis, key: Key, g: Group) -> Tuple[Key, int]:
    """Relabel a basis tree: returns (key', sign) with g.key = sign * key'."""
    om, im = g

    def mp(t):
        if t >= EDGE:
            return t
        if is_out_tok(t):
            return out_tok(om[tok_label(t) - 1])
        return in_tok(im[t - 1])

    term = key_to_term(key)
    k2, c = canonicalize([(n, tuple(map(mp, o)), tuple(map(mp, i))) for n, o, i in term], 1, basis)
    return k2, int(c)


# canonical labeling

_LEG = ("", (), ())
_PARENT = ("^", (), ())


def _adjacency(term):
    ends = {}
    for vi, (_, o, i) in enumerate(term):
        for s in o:
            if s >= EDGE:
                ends.setdefault(s, [None, None])[0] = vi
        for s in i:
            if s >= EDGE:
                ends.setdefault(s, [None, None])[1] = vi
    return ends


def _code(term, ends, v, parent_edge):
    name, outs, ins = term[v]

    def slot(s):
        if s == parent_edge:
            return _PARENT
        if s >= EDGE:
            a, b = ends[s]
            return _code(term, ends, b if a == v else a, s)
        return _LEG

    return (name, tuple(sorted(map(slot, outs))), tuple(sorted(map(slot, ins))))


def _traversals(term, ends, v, parent_edge):
    """All leg orders (outputs, inputs) compatible with the sorted-code traversal."""
    name, outs, ins = term[v]

    def slot_items(slots):
        items = []
        for s in slots:
            if s == parent_edge:
                continue
            if s >= EDGE:
                a, b = ends[s]
                w = b if a == v else a
                items.append((_code(term, ends, w, s), ("sub", w, s)))
            else:
                items.append((_LEG, ("leg", s)))
        items.sort(key=lambda x: x[0])
        return items

    groups = []
    for items in (slot_items(outs), slot_items(ins)):
        i = 0
        while i < len(items):
            j = i
            while j < len(items) and items[j][0] == items[i][0]:
                j += 1
            groups.append([x[1] for x in items[i:j]])
            i = j

    def expand(item):
        if item[0] == "leg":
            t = item[1]
            return [([t], []) if is_out_tok(t) else ([], [t])]
        return _traversals(term, ends, item[1], item[2])

    results = [([], [])]
    for grp in groups:
        new = []
        for order in permutations(grp):
            options = [expand(it) for it in order]
            for combo in product(*options):
                o = [t for c in combo for t in c[0]]
                i = [t for c in combo for t in c[1]]
                new.append((o, i))
        results = [(a[0] + b[0], a[1] + b[1]) for a in results for b in new]
    return results


class Canonizer:
    """Orbit representatives and stabilizers under leg relabeling."""

    def __init__(self, basis: SBimoduleBasis):
        self.basis = basis
        self._cache: Dict[Key, Tuple[Key, Group, int]] = {}
        self._stab: Dict[Key, List[Tuple[Group, int]]] = {}

    def canon(self, key: Key) -> Tuple[Key, Group, int]:
        """(rep, h, eps) with h.key = eps * rep."""
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        term = key_to_term(key)
        ends = _adjacency(term)
        codes = [_code(term, ends, v, None) for v in range(len(term))]
        best = min(codes)
        labelings = []
        for r in range(len(term)):
            if codes[r] != best:
                continue
            for o, i in _traversals(term, ends, r, None):
                om = [0] * len(o)
                for new, t in enumerate(o, start=1):
                    om[tok_label(t) - 1] = new
                im = [0] * len(i)
                for new, t in enumerate(i, start=1):
                    im[t - 1] = new
                labelings.append((tuple(om), tuple(im)))
        results = [(g,) + act(self.basis, key, g) for g in labelings]
        h0, rep, e0 = results[0]
        stab = []
        for g, k2, e in results:
            if k2 != rep:
                raise AssertionError("canonical labeling is not well defined")
            # g.key = e rep and h0.key = e0 rep  =>  (g h0^-1) rep = e e0 rep
            stab.append((compose(g, invert(h0)), e * e0))
        self._cache[key] = (rep, h0, e0)
        if rep not in self._stab:
            self._stab[rep] = sorted(set(stab))
        return rep, h0, e0

    def stabilizer(self, rep: Key) -> List[Tuple[Group, int]]:
        if rep not in self._stab:
            self.canon(rep)
        return self._stab[rep]


def orbit_reps(p: QuadraticPresentation, canon: Canonizer, m: int, n: int, weight: int) -> List[Key]:
    """One canonical representative per relabeling orbit of free trees."""
    return sorted(_orbit_reps(p, canon, m, n, weight))


def _orbit_reps(p, canon, m, n, w, memo=None):
    memo = {} if memo is None else memo
    if (m, n, w) in memo:
        return memo[(m, n, w)]
    basis = p.basis
    out = set()
    if w == 1:
        for g in basis.component(m, n):
            key, _ = canonicalize([(g.name, tuple(out_tok(i) for i in range(1, m + 1)),
                                    tuple(range(1, n + 1)))], 1, basis)
            out.add(canon.canon(key)[0])
    else:
        for g in basis:
            a, b = g.m, g.n
            for where in ("up", "down"):
                mp, np_ = (m + 1 - a, n - b + 1) if where == "up" else (m - a + 1, n + 1 - b)
                if mp < 1 or np_ < 1:
                    continue
                for rep in _orbit_reps(p, canon, mp, np_, w - 1, memo):
                    term = key_to_term(rep)
                    e = max_edge(term)
                    legs = ([out_tok(i) for i in range(1, mp + 1)] if where == "up"
                            else [in_tok(j) for j in range(1, np_ + 1)])
                    for leg in legs:
                        body = [(nm, tuple(e if s == leg else s for s in o), tuple(e if s == leg else s for s in i))
                                for nm, o, i in term]
                        if where == "up":
                            newv = (g.name, tuple(out_tok(mp + 1 + k) for k in range(a)),
                                    (e,) + tuple(in_tok(np_ + 1 + k) for k in range(b - 1)))
                        else:
                            newv = (g.name, (e,) + tuple(out_tok(mp + 1 + k) for k in range(a - 1)),
                                    tuple(in_tok(np_ + 1 + k) for k in range(b)))
                        verts = _compress_labels(body + [newv])
                        key, _ = canonicalize(verts, 1, basis)
                        out.add(canon.canon(key)[0])
    memo[(m, n, w)] = out
    return out


def _compress_labels(verts):
    outs = sorted({t for _, o, i in verts for t in o + i if t < EDGE and is_out_tok(t)})
    ins = sorted({t for _, o, i in verts for t in o + i if t < EDGE and not is_out_tok(t)})
    mp = {t: out_tok(k) for k, t in enumerate(outs, start=1)}
    mp.update({t: in_tok(k) for k, t in enumerate(ins, start=1)})
    return [(nm, tuple(mp.get(s, s) for s in o), tuple(mp.get(s, s) for s in i)) for nm, o, i in verts]


# two-term relations and moves


def binomial_rows(p: QuadraticPresentation) -> Optional[Dict[Tuple[int, int], List[Dict[Key, object]]]]:
    """All relabelings of the relations, per arity, if each has at most two terms."""
    out: Dict[Tuple[int, int], List[Dict[Key, object]]] = {}
    for r in p.relation_elements():
        seen = out.setdefault((r.m, r.n), [])
        for s in permutations(range(1, r.m + 1)):
            for t in permutations(range(1, r.n + 1)):
                x = r.relabel(s, t)
                if len(x.terms) > 2:
                    return None
                if x.terms and x.terms not in seen and x.scale(-1).terms not in seen:
                    seen.append(x.terms)
    return out


class MoveGraph:
    """Signed constraints f(K) = s f(K') and f(K) = 0 coming from the ideal."""

    def __init__(self, p: QuadraticPresentation):
        rows = binomial_rows(p)
        if rows is None:
            raise ValueError("relations are not all two-term")
        self.p = p
        self.basis = p.basis
        self.by_local: Dict[Key, List[Dict[Key, object]]] = {}
        for (a, b), rs in rows.items():
            for r in rs:
                for k in r:
                    self.by_local.setdefault(k, []).append(r)

    def moves(self, key: Key):
        """Yield (other_key, s) for f(key) = s f(other), or (None, 0) when f(key) = 0."""
        term = key_to_term(key)
        top = max_edge(term)
        for e in sorted({s for _, o, _ in term for s in o if s >= EDGE}):
            ui = next(i for i, v in enumerate(term) if e in v[1])
            vi = next(i for i, v in enumerate(term) if e in v[2])
            u, v = term[ui], term[vi]
            xo = [s for s in u[1] if s != e] + list(v[1])
            xi = list(u[2]) + [s for s in v[2] if s != e]
            # local plug: X slot k corresponds to local label k
            lo = {s: out_tok(k) for k, s in enumerate(xo, start=1)}
            li = {s: in_tok(k) for k, s in enumerate(xi, start=1)}
            loc = {**lo, **li, e: EDGE}
            plug = [(u[0], tuple(loc[s] for s in u[1]), tuple(loc[s] for s in u[2])),
                    (v[0], tuple(loc[s] for s in v[1]), tuple(loc[s] for s in v[2]))]
            lkey, sigma = canonicalize(plug, 1, self.basis)
            rows = self.by_local.get(lkey)
            if not rows:
                continue
            others = [w for i, w in enumerate(term) if i not in (ui, vi)]
            xterm = others + [("__X", tuple(xo), tuple(xi))]
            idx = len(others)
            for r in rows:
                terms = []
                for lk, c in r.items():
                    t2, _ = substitute(xterm, idx, lk, top + 1)
                    k2, c2 = canonicalize(t2, c, self.basis)
                    terms.append((k2, c2))
                # combine equal keys
                acc: Dict[Key, object] = {}
                for k2, c2 in terms:
                    acc[k2] = acc.get(k2, 0) + c2
                acc = {k2: c2 for k2, c2 in acc.items() if c2}
                if key not in acc:
                    continue
                if len(acc) == 1:
                    yield None, 0
                else:
                    (k1, c1), = [(k2, c2) for k2, c2 in acc.items() if k2 == key]
                    (k2, c2), = [(k2, c2) for k2, c2 in acc.items() if k2 != key]
                    s = -c2 / c1
                    if s not in (1, -1):
                        raise ValueError("two-term relation with unequal weights")
                    yield k2, int(s)


def _signed_closure(gens: List[Tuple[Group, int]], identity: Group) -> Tuple[int, bool]:
    """Order of the generated group and whether the signs define a character."""
    seen = {(identity, 1)}
    queue = deque(seen)
    elems = {identity}
    while queue:
        g, s = queue.popleft()
        for h, t in gens:
            x = (compose(h, g), s * t)
            if x not in seen:
                seen.add(x)
                queue.append(x)
                elems.add(x[0])
    consistent = (identity, -1) not in seen
    return len(elems), consistent


def quotient_dim_orbits(p: QuadraticPresentation, m: int, n: int, weight: int, canon: Optional[Canonizer] = None) -> int:
    if weight < 2:
        return len(p.basis.component(m, n)) if weight == 1 else 0
    canon = canon or Canonizer(p.basis)
    graph = MoveGraph(p)
    reps = orbit_reps(p, canon, m, n, weight)
    identity: Group = (tuple(range(1, m + 1)), tuple(range(1, n + 1)))
    order = factorial(m) * factorial(n)
    done = set()
    total = 0
    for r0 in reps:
        if r0 in done:
            continue
        # lift[rep] = (key, g, eps, value): g.rep = eps * key, f(key) = value
        lift = {r0: (r0, identity, 1, 1)}
        queue = deque([r0])
        gens: List[Tuple[Group, int]] = []
        bad = False
        for k0, e0 in canon.stabilizer(r0):
            gens.append((k0, e0))
        while queue:
            rep = queue.popleft()
            key, g, eps, val = lift[rep]
            for other, s in graph.moves(key):
                if other is None:
                    bad = True
                    continue
                v_other = val * s
                r2, h, e_h = canon.canon(other)
                if r2 not in lift:
                    g2 = invert(h)
                    lift[r2] = (other, g2, e_h, v_other)
                    queue.append(r2)
                    for k0, e0 in canon.stabilizer(r2):
                        gens.append((compose(compose(g2, k0), invert(g2)), e0))
                else:
                    ka, ga, ea, ca = lift[r2]
                    k = compose(invert(h), invert(ga))
                    gens.append((k, v_other * e_h * ea * ca))
        size, consistent = _signed_closure(sorted(set(gens)), identity)
        done.update(lift)
        if consistent and not bad:
            total += order // size
    return total

