"""Labeled directed (m,n)-graphs.

A graph has vertices, internal edges (source, target), input legs
(label -> vertex) and output legs (vertex -> label).  Edges are listed, so
parallel edges and self-edges are allowed.  Isomorphisms must preserve leg
labels exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from itertools import permutations
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

MAX_CERT_VERTICES = 12


class GraphClass(IntEnum):
    """Graph classes, ordered from largest to smallest."""

    WHEELED = 0
    DAG = 1
    CONNECTED_DAG = 2
    TREE = 3
    ROOTED_TREE = 4
    LADDER = 5

    def contains(self, other: "GraphClass") -> bool:
        """True if every graph of class ``other`` belongs to this class."""
        return other >= self


Flag = Tuple[str, int]  # ("e", edge index) or ("i", input label) or ("o", output label)


@dataclass(frozen=True)
class LabeledGraph:
    vertices: Tuple[Hashable, ...]
    edges: Tuple[Tuple[Hashable, Hashable], ...] = ()
    inputs: Tuple[Tuple[int, Hashable], ...] = ()  # (label, target vertex)
    outputs: Tuple[Tuple[Hashable, int], ...] = ()  # (source vertex, label)

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValueError("repeated vertex id")
        for u, v in self.edges:
            if u not in vs or v not in vs:
                raise ValueError(f"edge ({u},{v}) references an unknown vertex")
        for lab, v in self.inputs:
            if v not in vs:
                raise ValueError(f"input leg {lab} at unknown vertex {v}")
        for v, lab in self.outputs:
            if v not in vs:
                raise ValueError(f"output leg {lab} at unknown vertex {v}")
        if sorted(l for l, _ in self.inputs) != list(range(1, len(self.inputs) + 1)):
            raise ValueError("input labels are not a bijection with [n]")
        if sorted(l for _, l in self.outputs) != list(range(1, len(self.outputs) + 1)):
            raise ValueError("output labels are not a bijection with [m]")

    @property
    def m(self) -> int:
        return len(self.outputs)

    @property
    def n(self) -> int:
        return len(self.inputs)

    def out_flags(self, v) -> List[Flag]:
        fl = [("e", i) for i, (a, _) in enumerate(self.edges) if a == v]
        fl += [("o", lab) for (a, lab) in self.outputs if a == v]
        return fl

    def in_flags(self, v) -> List[Flag]:
        fl = [("e", i) for i, (_, b) in enumerate(self.edges) if b == v]
        fl += [("i", lab) for (lab, b) in self.inputs if b == v]
        return fl

    def arity(self, v) -> Tuple[int, int]:
        return len(self.out_flags(v)), len(self.in_flags(v))

    def relabel(self, sigma: Sequence[int], tau: Sequence[int]) -> "LabeledGraph":
        """sigma G tau: output label l becomes sigma(l); input label j carries old label tau(j)."""
        tinv = {t: j for j, t in enumerate(tau, start=1)}
        return LabeledGraph(
            self.vertices,
            self.edges,
            tuple(sorted((tinv[l], v) for l, v in self.inputs)),
            tuple(sorted(((v, sigma[l - 1]) for v, l in self.outputs), key=lambda x: x[1])),
        )

    def rename(self, mapping: Dict[Hashable, Hashable]) -> "LabeledGraph":
        return LabeledGraph(
            tuple(mapping[v] for v in self.vertices),
            tuple((mapping[a], mapping[b]) for a, b in self.edges),
            tuple((l, mapping[v]) for l, v in self.inputs),
            tuple((mapping[v], l) for v, l in self.outputs),
        )


def corolla(m: int, n: int, v: Hashable = 0) -> LabeledGraph:
    return LabeledGraph((v,), (), tuple((j, v) for j in range(1, n + 1)),
                        tuple((v, i) for i in range(1, m + 1)))


# classification

def _undirected_cycle(g: LabeledGraph) -> bool:
    parent = {v: v for v in g.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in g.edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return True
        parent[ru] = rv
    return False


def _directed_cycle(g: LabeledGraph) -> bool:
    succ = {v: [] for v in g.vertices}
    for u, v in g.edges:
        succ[u].append(v)
    state = {v: 0 for v in g.vertices}
    for s in g.vertices:
        if state[s]:
            continue
        stack = [(s, iter(succ[s]))]
        state[s] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[v] = 2
                stack.pop()
            elif state[nxt] == 1:
                return True
            elif state[nxt] == 0:
                state[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
    return False


def is_connected(g: LabeledGraph) -> bool:
    if not g.vertices:
        return True
    adj = {v: set() for v in g.vertices}
    for u, v in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = {g.vertices[0]}
    todo = [g.vertices[0]]
    while todo:
        x = todo.pop()
        for y in adj[x] - seen:
            seen.add(y)
            todo.append(y)
    return len(seen) == len(g.vertices)


def classify(g: LabeledGraph) -> GraphClass:
    """Most specific class containing g."""
    if _directed_cycle(g):
        return GraphClass.WHEELED
    if not is_connected(g):
        return GraphClass.DAG
    if _undirected_cycle(g):
        return GraphClass.CONNECTED_DAG
    if any(len(g.out_flags(v)) != 1 for v in g.vertices):
        return GraphClass.TREE
    if any(len(g.in_flags(v)) != 1 for v in g.vertices):
        return GraphClass.ROOTED_TREE
    return GraphClass.LADDER


def in_class(g: LabeledGraph, cls: GraphClass) -> bool:
    return cls.contains(classify(g))


# canonical certificates

def _encode(g: LabeledGraph, order: Sequence[Hashable]) -> tuple:
    pos = {v: i for i, v in enumerate(order)}
    return (
        len(order),
        tuple(sorted((pos[a], pos[b]) for a, b in g.edges)),
        tuple(sorted((l, pos[v]) for l, v in g.inputs)),
        tuple(sorted((pos[v], l) for v, l in g.outputs)),
    )


def _refine(g: LabeledGraph, colors: Dict[Hashable, int]) -> Dict[Hashable, int]:
    outn = {v: [] for v in g.vertices}
    inn = {v: [] for v in g.vertices}
    for a, b in g.edges:
        outn[a].append(b)
        inn[b].append(a)
    while True:
        sig = {
            v: (colors[v], tuple(sorted(colors[w] for w in outn[v])),
                tuple(sorted(colors[w] for w in inn[v])))
            for v in g.vertices
        }
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: ranks[sig[v]] for v in g.vertices}
        if len(set(new.values())) == len(set(colors.values())):
            return new
        colors = new


def canonical_certificate(g: LabeledGraph) -> bytes:
    """Byte string equal for two graphs iff they are isomorphic (labels preserved)."""
    if len(g.vertices) > MAX_CERT_VERTICES:
        raise ValueError(f"graph has {len(g.vertices)} vertices; limit is {MAX_CERT_VERTICES}")
    ins = {v: [] for v in g.vertices}
    outs = {v: [] for v in g.vertices}
    for l, v in g.inputs:
        ins[v].append(l)
    for v, l in g.outputs:
        outs[v].append(l)
    loops = Counter(a for a, b in g.edges if a == b)
    init = {v: (tuple(sorted(ins[v])), tuple(sorted(outs[v])), loops[v]) for v in g.vertices}
    ranks = {s: i for i, s in enumerate(sorted(set(init.values())))}
    colors = _refine(g, {v: ranks[init[v]] for v in g.vertices})
    best = None

    def search(colors):
        nonlocal best
        classes: Dict[int, list] = {}
        for v, c in colors.items():
            classes.setdefault(c, []).append(v)
        if len(classes) == len(colors):
            order = sorted(colors, key=colors.get)
            enc = _encode(g, order)
            if best is None or enc < best:
                best = enc
            return
        # individualize each vertex of the first non-singleton class
        c0 = min(c for c, vs in classes.items() if len(vs) > 1)
        for v in classes[c0]:
            nc = {w: 2 * c for w, c in colors.items()}
            nc[v] = 2 * c0 - 1
            search(_refine(g, nc))

    search(colors)
    return repr(best).encode()


def isomorphic(g: LabeledGraph, h: LabeledGraph) -> bool:
    return canonical_certificate(g) == canonical_certificate(h)


# subgraphs and contraction

def contract(g: LabeledGraph, h: Iterable[Hashable], new_vertex: Hashable = None) -> LabeledGraph:
    """Contract the subgraph spanned by the vertex subset h into one vertex."""
    hs = set(h)
    if not hs:
        raise ValueError("subgraph condition (1) violated: empty vertex set")
    missing = hs - set(g.vertices)
    if missing:
        raise ValueError(f"subgraph condition (1) violated: vertices {sorted(map(str, missing))} not in graph")
    vh = new_vertex if new_vertex is not None else ("H",) + tuple(sorted(map(repr, hs)))
    if vh in g.vertices and vh not in hs:
        raise ValueError("contracted vertex id collides with an existing vertex")
    mp = {v: (vh if v in hs else v) for v in g.vertices}
    verts = tuple(v for v in g.vertices if v not in hs) + (vh,)
    edges = tuple((mp[a], mp[b]) for a, b in g.edges if not (a in hs and b in hs))
    return LabeledGraph(
        verts,
        edges,
        tuple((l, mp[v]) for l, v in g.inputs),
        tuple((mp[v], l) for v, l in g.outputs),
    )


def subgraph(g: LabeledGraph, h: Iterable[Hashable]) -> Tuple[LabeledGraph, Dict[Flag, Flag]]:
    """The subgraph on a vertex subset, with a canonical global labeling.

    Returns the subgraph and a map from its leg flags ("i"/"o", label) to the
    corresponding flags of g.  Legs are numbered in the order of the flags of g:
    edges first by index, then legs by label.
    """
    hs = set(h)
    vs = tuple(v for v in g.vertices if v in hs)
    edges = []
    ins, outs = [], []
    for i, (a, b) in enumerate(g.edges):
        if a in hs and b in hs:
            edges.append((a, b))
        elif b in hs:
            ins.append((("e", i), b))
        elif a in hs:
            outs.append((("e", i), a))
    ins += [(("i", l), v) for l, v in g.inputs if v in hs]
    outs += [(("o", l), v) for v, l in g.outputs if v in hs]
    back = {}
    for j, (fl, v) in enumerate(ins, start=1):
        back[("i", j)] = fl
    for j, (fl, v) in enumerate(outs, start=1):
        back[("o", j)] = fl
    sub = LabeledGraph(
        vs, tuple(edges),
        tuple((j, v) for j, (_, v) in enumerate(ins, start=1)),
        tuple((v, j) for j, (_, v) in enumerate(outs, start=1)),
    )
    return sub, back


# grafting

@dataclass(frozen=True)
class Plug:
    """A graph inserted at a template vertex.

    ``out_order[i-1]`` is the template out-flag matched with the plug's output
    label i; ``in_order[j-1]`` the template in-flag matched with input label j.
    ``graph`` is None for the unit graph "|".
    """

    graph: Optional[LabeledGraph]
    out_order: Tuple[Flag, ...]
    in_order: Tuple[Flag, ...]


def graft(template: LabeledGraph, plugs: Dict[Hashable, Plug]) -> LabeledGraph:
    """G(G_1,...,G_k): replace each template vertex by its plug graph.

    Plug vertices are renamed to (template vertex, plug vertex).  Template
    edges are rerouted through the plugs' leg labelings; unit plugs pass an
    edge straight through.  A result that is itself the unit graph raises.
    """
    for v in template.vertices:
        if v not in plugs:
            raise ValueError(f"no plug for vertex {v!r}")
        p = plugs[v]
        of, inf = template.out_flags(v), template.in_flags(v)
        if sorted(p.out_order) != sorted(of) or sorted(p.in_order) != sorted(inf):
            raise ValueError(f"labeling at vertex {v!r} is not a bijection onto its flags")
        if p.graph is None:
            if len(of) != 1 or len(inf) != 1:
                raise ValueError(f"unit plug at vertex {v!r} of arity {(len(of), len(inf))}")
        elif (p.graph.m, p.graph.n) != (len(of), len(inf)):
            raise ValueError(
                f"arity mismatch at vertex {v!r}: plug {(p.graph.m, p.graph.n)} vs {(len(of), len(inf))}")

    edge_src = {i: a for i, (a, _) in enumerate(template.edges)}

    def source(v, flag):
        """Where the data leaving template vertex v through out-flag `flag` comes from."""
        p = plugs[v]
        i = p.out_order.index(flag) + 1
        if p.graph is None:
            fin = p.in_order[0]
            if fin[0] == "i":
                return ("input", fin[1])
            return source(edge_src[fin[1]], fin)
        x = next(a for a, l in p.graph.outputs if l == i)
        return ("vertex", (v, x))

    verts, edges, ins, outs = [], [], [], []
    for v in template.vertices:
        p = plugs[v]
        if p.graph is None:
            continue
        verts += [(v, x) for x in p.graph.vertices]
        edges += [((v, a), (v, b)) for a, b in p.graph.edges]
        for j, y in p.graph.inputs:
            fl = p.in_order[j - 1]
            if fl[0] == "i":
                ins.append((fl[1], (v, y)))
            else:
                kind, s = source(edge_src[fl[1]], fl)
                if kind == "vertex":
                    edges.append((s, (v, y)))
                else:
                    ins.append((s, (v, y)))
    for u, l in template.outputs:
        kind, s = source(u, ("o", l))
        if kind != "vertex":
            raise ValueError("grafting produced the unit graph")
        outs.append((s, l))
    return LabeledGraph(tuple(verts), tuple(edges), tuple(sorted(ins)),
                        tuple(sorted(outs, key=lambda x: x[1])))


def identity_plug(template: LabeledGraph, v, graph: Optional[LabeledGraph]) -> Plug:
    """Plug whose local labeling follows the template's flag order at v."""
    return Plug(graph, tuple(template.out_flags(v)), tuple(template.in_flags(v)))


# enumeration

def enumerate_graphs(cls: GraphClass, m: int, n: int, weight: int,
                     arities: Iterable[Tuple[int, int]]) -> List[LabeledGraph]:
    """All isomorphism classes of (m,n)-graphs of a class with `weight` vertices.

    Vertices have (out, in) profiles from `arities`.  Exhaustive search over
    vertex profiles and flag matchings; deduplicated by certificate.
    """
    if weight > 4 or m + n > 8:
        raise ValueError("enumeration limited to weight <= 4 and m+n <= 8")
    arities = sorted(set(tuple(x) for x in arities))
    found: Dict[bytes, LabeledGraph] = {}
    from itertools import combinations_with_replacement
    for prof in combinations_with_replacement(arities, weight):
        tot_out = sum(p[0] for p in prof)
        tot_in = sum(p[1] for p in prof)
        k = tot_out - m  # internal edges
        if k < 0 or tot_in - n != k:
            continue
        outs = [(v, s) for v, p in enumerate(prof) for s in range(p[0])]
        ins = [(v, s) for v, p in enumerate(prof) for s in range(p[1])]
        for out_int in _combos(len(outs), k):
            for in_int in _combos(len(ins), k):
                src = [outs[i][0] for i in out_int]
                tgts = [ins[i][0] for i in in_int]
                out_legs = [outs[i][0] for i in range(len(outs)) if i not in out_int]
                in_legs = [ins[i][0] for i in range(len(ins)) if i not in in_int]
                for tp in set(permutations(tgts)):
                    edges = tuple(zip(src, tp))
                    for olab in set(permutations(range(1, m + 1))):
                        for ilab in set(permutations(range(1, n + 1))):
                            g = LabeledGraph(
                                tuple(range(weight)), edges,
                                tuple(sorted(zip(ilab, in_legs))),
                                tuple(sorted(zip(out_legs, olab), key=lambda x: x[1])),
                            )
                            if not in_class(g, cls):
                                continue
                            c = canonical_certificate(g)
                            if c not in found:
                                found[c] = g
    return [found[c] for c in sorted(found)]


def _combos(n: int, k: int):
    from itertools import combinations
    return [set(c) for c in combinations(range(n), k)]


# debug text form

def dump_graph(g: LabeledGraph) -> str:
    """Line-based text form: vertices, edges, input legs, output legs."""
    names = {v: str(i) for i, v in enumerate(g.vertices)}
    lines = ["vertices: " + " ".join(names[v] for v in g.vertices)]
    lines.append("edges: " + (" ".join(f"{names[a]}>{names[b]}" for a, b in g.edges) or "-"))
    lines.append("in: " + (" ".join(f"{l}>{names[v]}" for l, v in sorted(g.inputs)) or "-"))
    lines.append("out: " + (" ".join(f"{names[v]}>{l}" for v, l in sorted(g.outputs, key=lambda x: x[1])) or "-"))
    return "\n".join(lines)
