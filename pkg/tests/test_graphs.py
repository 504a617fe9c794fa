from itertools import permutations, product

import pytest
from hypothesis import given, settings, strategies as st

from dioperads.graphs import (GraphClass, LabeledGraph, Plug, canonical_certificate, classify,
                              contract, corolla, dump_graph, enumerate_graphs, graft,
                              identity_plug, in_class, is_connected, isomorphic, subgraph)


def two_vertex_tree(upper_inputs, lower_input):
    """A (1,2)-vertex feeding a (1,2)-vertex: leaves upper_inputs on top, lower_input below."""
    a, b = upper_inputs
    return LabeledGraph(("u", "l"), (("u", "l"),), ((a, "u"), (b, "u"), (lower_input, "l")), (("l", 1),))


def test_classify_examples():
    assert classify(corolla(1, 2)) == GraphClass.ROOTED_TREE
    assert not in_class(corolla(1, 2), GraphClass.LADDER)
    two_cycle = LabeledGraph((0, 1), ((0, 1), (1, 0)))
    assert classify(two_cycle) == GraphClass.WHEELED
    chain = LabeledGraph((0, 1, 2), ((0, 1), (1, 2)), ((1, 0),), ((2, 1),))
    assert classify(chain) == GraphClass.LADDER


def test_class_nesting():
    for big in GraphClass:
        for small in GraphClass:
            assert big.contains(small) == (small >= big)
    chain = LabeledGraph((0, 1, 2), ((0, 1), (1, 2)), ((1, 0),), ((2, 1),))
    assert all(in_class(chain, c) for c in GraphClass)


def test_certificate_examples():
    assert canonical_certificate(two_vertex_tree((1, 2), 3)) == canonical_certificate(two_vertex_tree((2, 1), 3))
    assert canonical_certificate(two_vertex_tree((1, 2), 3)) != canonical_certificate(two_vertex_tree((1, 3), 2))


def test_certificate_sees_leg_labels():
    g = LabeledGraph((0, 1), ((0, 1),), ((1, 0), (2, 1)), ((1, 1),))
    assert not isomorphic(g, g.relabel((1,), (2, 1)))


def test_certificate_rejects_large_graphs():
    big = LabeledGraph(tuple(range(13)), tuple((i, i + 1) for i in range(12)))
    with pytest.raises(ValueError):
        canonical_certificate(big)


@settings(max_examples=60)
@given(st.permutations(["p", "q", "r", "s"]))
def test_certificate_invariant_under_vertex_renaming(names):
    g = LabeledGraph((0, 1, 2, 3), ((0, 1), (0, 2), (3, 1)), ((1, 0), (2, 3), (3, 1)),
                     ((1, 1), (2, 2), (2, 3)))
    assert canonical_certificate(g.rename(dict(enumerate(names)))) == canonical_certificate(g)


def test_contract_whole_and_single():
    g = LabeledGraph((0, 1, 2), ((0, 1), (2, 1)), ((1, 0), (2, 2)), ((1, 1),))
    whole = contract(g, g.vertices, "h")
    assert isomorphic(whole, corolla(1, 2))
    single = contract(g, [2], "h")
    assert isomorphic(single, g)


def test_contract_vertex_count():
    g = LabeledGraph((0, 1, 2, 3), ((0, 1), (1, 2), (3, 2)), ((1, 0), (2, 3)), ((2, 1),))
    for h in ([0, 1], [1, 2], [0, 1, 2], [2, 3]):
        assert len(contract(g, h).vertices) == len(g.vertices) - len(h) + 1


def test_contract_errors_name_condition():
    g = corolla(1, 2)
    with pytest.raises(ValueError, match="condition"):
        contract(g, [])
    with pytest.raises(ValueError, match="condition"):
        contract(g, ["nope"])


def test_subgraph_legs_map_back():
    g = LabeledGraph((0, 1), ((0, 1),), ((1, 0), (2, 1)), ((1, 1),))
    sub, back = subgraph(g, [1])
    assert (sub.m, sub.n) == (1, 2)
    assert set(back.values()) == {("e", 0), ("i", 2), ("o", 1)}


def test_graft_into_corolla_returns_plug():
    g = LabeledGraph(("x", "y"), (("x", "y"),), ((1, "x"), (2, "x")), (("x", 1), ("y", 2)))
    t = corolla(2, 2, "v")
    assert isomorphic(graft(t, {"v": identity_plug(t, "v", g)}), g)


def test_graft_relabels_through_local_order():
    g = LabeledGraph(("x", "y"), (("x", "y"),), ((1, "x"),), (("x", 1), ("y", 2)))
    t = corolla(2, 1, "v")
    out = graft(t, {"v": Plug(g, (("o", 2), ("o", 1)), (("i", 1),))})
    assert not isomorphic(out, g)
    assert isomorphic(out, g.relabel((2, 1), (1,)))


def test_graft_unit_plugs():
    t = LabeledGraph(("u", "a", "b"), (("u", "a"), ("b", "a")), ((1, "u"), (2, "b")), (("a", 1),))
    plugs = {"u": identity_plug(t, "u", None), "b": identity_plug(t, "b", None),
             "a": Plug(corolla(1, 2, "c"), (("o", 1),), (("e", 1), ("e", 0)))}
    assert isomorphic(graft(t, plugs), corolla(1, 2))


def test_graft_two_vertex_tree():
    t = LabeledGraph(("top", "bot"), (("bot", "top"),), ((1, "top"), (2, "bot")), (("top", 1), ("bot", 2)))
    plugs = {"top": identity_plug(t, "top", corolla(1, 2, "a")),
             "bot": identity_plug(t, "bot", corolla(2, 1, "b"))}
    out = graft(t, plugs)
    assert len(out.vertices) == 2 and len(out.edges) == 1
    assert isomorphic(out, t)


def test_graft_arity_mismatch():
    t = corolla(1, 2, "v")
    with pytest.raises(ValueError, match="arity"):
        graft(t, {"v": identity_plug(t, "v", corolla(2, 1))})


# Independent oracle: build every labeled graph from raw edge multisets and
# deduplicate by minimizing over all vertex permutations.

def _brute_key(verts, edges, ins, outs):
    best = None
    for p in permutations(range(len(verts))):
        mp = dict(zip(verts, p))
        code = (tuple(sorted((mp[a], mp[b]) for a, b in edges)),
                tuple(sorted((l, mp[v]) for l, v in ins)),
                tuple(sorted((mp[v], l) for v, l in outs)),
                tuple(sorted((mp[v], verts_profile) for v, verts_profile in verts.items())))
        best = code if best is None or code < best else best
    return best


def _is_tree(nv, edges):
    if len(edges) != nv - 1:
        return False
    seen, stack = {0}, [0]
    while stack:
        x = stack.pop()
        for a, b in edges:
            for u, w in ((a, b), (b, a)):
                if u == x and w not in seen:
                    seen.add(w)
                    stack.append(w)
    return len(seen) == nv


def brute_tree_count(m, n, arities, weight):
    found = set()
    for prof in product(arities, repeat=weight):
        pairs = [(a, b) for a in range(weight) for b in range(weight) if a != b]
        for edges in product(pairs, repeat=weight - 1):
            if not _is_tree(weight, edges):
                continue
            free_out = [prof[v][0] - sum(1 for a, _ in edges if a == v) for v in range(weight)]
            free_in = [prof[v][1] - sum(1 for _, b in edges if b == v) for v in range(weight)]
            if min(free_out + free_in) < 0 or sum(free_out) != m or sum(free_in) != n:
                continue
            out_slots = [v for v in range(weight) for _ in range(free_out[v])]
            in_slots = [v for v in range(weight) for _ in range(free_in[v])]
            for ol in permutations(range(1, m + 1)):
                for il in permutations(range(1, n + 1)):
                    verts = {v: prof[v] for v in range(weight)}
                    found.add(_brute_key(verts, edges, tuple(zip(il, in_slots)), tuple(zip(out_slots, ol))))
    return len(found)


def test_enumerate_tree_one_three():
    assert len(enumerate_graphs(GraphClass.TREE, 1, 3, 2, [(1, 2)])) == 3
    assert brute_tree_count(1, 3, [(1, 2)], 2) == 3


def test_enumerate_tree_two_two():
    # 1 graph with the (2,1)-vertex on top (both outputs on one vertex),
    # 4 with it below (one free output and one free input to label each).
    got = enumerate_graphs(GraphClass.TREE, 2, 2, 2, [(1, 2), (2, 1)])
    assert len(got) == 5
    assert brute_tree_count(2, 2, [(1, 2), (2, 1)], 2) == 5


@pytest.mark.parametrize("m,n,arities,weight", [
    (1, 4, [(1, 2)], 3), (3, 1, [(2, 1)], 2), (2, 3, [(1, 2), (2, 1)], 3), (1, 3, [(1, 2), (1, 3)], 2)])
def test_enumerate_matches_brute_force(m, n, arities, weight):
    assert len(enumerate_graphs(GraphClass.TREE, m, n, weight, arities)) == brute_tree_count(m, n, arities, weight)


@pytest.mark.parametrize("cls", list(GraphClass))
def test_enumerate_weight_one_is_corolla(cls):
    # a (2,3)-corolla has two outputs, so it is not a rooted tree or a ladder
    m, n = (2, 3) if cls <= GraphClass.TREE else (1, 1)
    got = enumerate_graphs(cls, m, n, 1, [(m, n)])
    assert len(got) == 1 and isomorphic(got[0], corolla(m, n))


def test_enumerate_is_deterministic_and_connected():
    a = enumerate_graphs(GraphClass.TREE, 2, 2, 2, [(1, 2), (2, 1)])
    b = enumerate_graphs(GraphClass.TREE, 2, 2, 2, [(1, 2), (2, 1)])
    assert [dump_graph(g) for g in a] == [dump_graph(g) for g in b]
    assert all(is_connected(g) for g in a)


def test_enumerate_bounds():
    with pytest.raises(ValueError):
        enumerate_graphs(GraphClass.TREE, 1, 6, 5, [(1, 2)])


def test_dump_graph_format():
    g = LabeledGraph(("a", "b"), (("a", "b"),), ((1, "a"), (2, "b")), (("b", 1),))
    assert dump_graph(g) == "vertices: 0 1\nedges: 0>1\nin: 1>0 2>1\nout: 1>1"
