from itertools import combinations

import pytest

from compbcast import (
    GuardExceeded,
    broadcast_graph,
    build_characteristic_graph,
    build_union_graph,
    export_dot,
    make_instance,
    or_power,
    support,
)
from compbcast.graphs import CharGraph


def edge_labels(graph):
    return sorted(
        "".join(map(str, a)) + "-" + "".join(map(str, b)) for a, b in graph.edges
    )


# per-user edge sets derived by exhaustively applying the construction rule
# (same side-information coordinate, different demanded value)
def brute_edges(inst, user):
    out = set()
    for x, y in combinations(support(inst), 2):
        same_side = inst.side_values(user, x) == inst.side_values(user, y)
        if same_side and inst.demand_value(user, x) != inst.demand_value(user, y):
            out.add((min(x, y), max(x, y)))
    return out


def test_example1_user1_edges(example1):
    g = build_characteristic_graph(example1, 1)
    assert edge_labels(g) == ["100-111", "101-111", "110-111"]
    assert g.edges == frozenset(brute_edges(example1, 1))


def test_example1_all_users_against_brute_force(example1):
    for user in (1, 2, 3):
        g = build_characteristic_graph(example1, user)
        assert g.edges == frozenset(brute_edges(example1, user))


def test_example1_union_has_13_distinct_edges(example1):
    per_user = [build_characteristic_graph(example1, u) for u in (1, 2, 3)]
    sizes = [g.num_edges for g in per_user]
    assert sizes == [3, 3, 7]
    union = build_union_graph(per_user)
    assert union.num_edges == 13  # the three edge sets are pairwise disjoint
    assert union.edges == frozenset().union(*(g.edges for g in per_user))


def test_constant_demand_gives_empty_graph():
    inst = make_instance(2, 2, [([1], "0")])
    g = build_characteristic_graph(inst, 1)
    assert g.num_edges == 0


def test_xor_demand_edges():
    inst = make_instance(2, 2, [([1], "X1 + X2")])
    g = build_characteristic_graph(inst, 1)
    assert edge_labels(g) == ["00-01", "10-11"]
    assert g.edges == frozenset(brute_edges(inst, 1))


def test_zero_probability_tuples_excluded():
    weights = [0.25, 0.25, 0.0, 0.5]
    inst = make_instance(2, 2, [([1], "X1 + X2")], pmf=weights)
    g = build_characteristic_graph(inst, 1)
    assert g.vertices == ((0, 0), (0, 1), (1, 1))
    assert edge_labels(g) == ["00-01"]


def test_union_idempotent_and_identity(example1):
    g = build_characteristic_graph(example1, 1)
    assert build_union_graph([g, g]).edges == g.edges
    empty = CharGraph(g.vertices, frozenset(), "empty")
    assert build_union_graph([g, empty]).edges == g.edges


def test_union_rejects_vertex_mismatch(example1):
    g = build_characteristic_graph(example1, 1)
    other = CharGraph(g.vertices[:-1], frozenset(), "short")
    with pytest.raises(ValueError):
        build_union_graph([g, other])


def test_def1_soundness_non_edges_share_demand(example1):
    # any same-side pair without an edge must agree on the demand
    for user in (1, 2, 3):
        g = build_characteristic_graph(example1, user)
        for x, y in combinations(g.vertices, 2):
            if example1.side_values(user, x) != example1.side_values(user, y):
                continue
            if not g.has_edge(x, y):
                assert example1.demand_value(user, x) == example1.demand_value(user, y)


def or_power_brute(g, n):
    from itertools import product

    verts = list(product(g.vertices, repeat=n))
    edges = set()
    for u, v in combinations(verts, 2):
        if any(a != b and g.has_edge(a, b) for a, b in zip(u, v)):
            edges.add((min(u, v), max(u, v)))
    return verts, edges


def test_or_power_single_edge_square_is_complete():
    base = CharGraph(((0,), (1,)), frozenset({((0,), (1,))}), "pair")
    squared = or_power(base, 2)
    verts, edges = or_power_brute(base, 2)
    assert len(squared.vertices) == 4
    assert squared.edges == frozenset(edges)
    assert squared.num_edges == 6  # complete graph on 4 vertices


def test_or_power_identity_and_edgeless(example1):
    g = build_characteristic_graph(example1, 1)
    p1 = or_power(g, 1)
    assert p1.vertices == g.vertices and p1.edges == g.edges
    empty = CharGraph(g.vertices, frozenset(), "empty")
    assert or_power(empty, 2).num_edges == 0


def test_or_power_matches_brute_force(example1):
    g = build_characteristic_graph(example1, 1)
    small = CharGraph(g.vertices[:3], frozenset(), "sub")
    squared = or_power(small, 2)
    assert len(squared.vertices) == 9
    g2 = CharGraph(
        ((0,), (1,), (2,)), frozenset({((0,), (1,)), ((1,), (2,))}), "path"
    )
    power = or_power(g2, 2)
    verts, edges = or_power_brute(g2, 2)
    assert power.edges == frozenset(edges)


def test_or_power_guard():
    g = CharGraph(tuple((i,) for i in range(40)), frozenset(), "big")
    with pytest.raises(GuardExceeded):
        or_power(g, 4)
    with pytest.raises(ValueError):
        or_power(g, 0)


def test_export_dot_shapes(example1):
    empty = CharGraph((), frozenset(), "empty")
    text = export_dot(empty)
    assert text.startswith('graph "empty" {') and text.rstrip().endswith("}")
    union = broadcast_graph(example1)
    lines = export_dot(union).splitlines()
    assert sum(1 for ln in lines if ln.endswith('";') and " -- " not in ln) == 8
    assert sum(1 for ln in lines if " -- " in ln) == 13
    g1 = build_characteristic_graph(example1, 1)
    assert sum(1 for ln in export_dot(g1).splitlines() if " -- " in ln) == 3


def test_user_index_out_of_range(example1):
    with pytest.raises(IndexError):
        build_characteristic_graph(example1, 4)
    with pytest.raises(IndexError):
        build_characteristic_graph(example1, 0)
