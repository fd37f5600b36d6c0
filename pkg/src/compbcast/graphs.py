"""Characteristic graphs of user demands.

A per-user graph joins two source tuples exactly when the user must tell
them apart: they look identical through the user's side-information
coordinates but demand different function values.  The union over users is
the broadcast graph; its independent sets are message classes ambiguous to
nobody.  The n-fold OR power lifts distinguishability to length-n blocks:
two tuple-sequences are adjacent when some coordinate pair is.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Dict, FrozenSet, List, Sequence, Tuple

from .errors import GuardExceeded
from .model import Instance, require_valid, support, tuple_label

Vertex = Tuple  # source tuples, or tuples of source tuples for power graphs
Edge = Tuple[Vertex, Vertex]

OR_POWER_VERTEX_GUARD = 10 ** 6


@dataclass(frozen=True, eq=False)
class CharGraph:
    vertices: Tuple[Vertex, ...]  # lex-sorted
    edges: FrozenSet[Edge]  # each edge stored once as (min, max)
    label: str

    def __post_init__(self):
        vset = set(self.vertices)
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u}, {v}) leaves the vertex set")
            if not u < v:
                raise ValueError(f"edge ({u}, {v}) not stored in sorted order")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, u: Vertex, v: Vertex) -> bool:
        return (u, v) in self.edges or (v, u) in self.edges

    def neighbors(self, v: Vertex) -> List[Vertex]:
        out = [b if a == v else a for a, b in self.edges if v in (a, b)]
        return sorted(out)


def _edge(u: Vertex, v: Vertex) -> Edge:
    return (u, v) if u < v else (v, u)


def adjacency_masks(g: CharGraph) -> List[int]:
    """Neighbor bitmasks indexed by vertex position; vertex i's bit is 1 << i."""
    index = {v: i for i, v in enumerate(g.vertices)}
    masks = [0] * len(g.vertices)
    for u, v in g.edges:
        masks[index[u]] |= 1 << index[v]
        masks[index[v]] |= 1 << index[u]
    return masks


def build_characteristic_graph(inst: Instance, user: int) -> CharGraph:
    """Graph of source tuples user ``user`` (1-based) must distinguish.

    Vertices are the PMF support.  Two tuples are joined iff they agree on
    every side-information coordinate of the user yet demand different
    values.  Tuples are grouped by side-information class first, so cost is
    quadratic per class rather than over all pairs.
    """
    require_valid(inst)
    if not 1 <= user <= inst.num_users:
        raise IndexError(f"user index {user} out of range [1, {inst.num_users}]")
    verts = support(inst)
    classes: Dict[Tuple[int, ...], List[Vertex]] = {}
    for x in verts:
        classes.setdefault(inst.side_values(user, x), []).append(x)
    edges = set()
    for members in classes.values():
        for x, y in combinations(members, 2):
            if inst.demand_value(user, x) != inst.demand_value(user, y):
                edges.add(_edge(x, y))
    return CharGraph(tuple(verts), frozenset(edges), f"user-{user}")


def build_union_graph(graphs: Sequence[CharGraph]) -> CharGraph:
    """Edge-union of graphs sharing one vertex list (the broadcast graph)."""
    if not graphs:
        raise ValueError("need at least one graph")
    verts = graphs[0].vertices
    for g in graphs[1:]:
        if g.vertices != verts:
            raise ValueError(f"vertex set of {g.label!r} differs from {graphs[0].label!r}")
    edges = frozenset().union(*(g.edges for g in graphs))
    return CharGraph(verts, edges, "union")


def broadcast_graph(inst: Instance) -> CharGraph:
    return build_union_graph(
        [build_characteristic_graph(inst, i) for i in range(1, inst.num_users + 1)]
    )


def or_power(g: CharGraph, n: int) -> CharGraph:
    """n-fold disjunctive (OR) power: vertices are n-tuples of g's vertices,
    adjacent iff adjacent in at least one coordinate.

    Edge materialization is quadratic in the vertex count; the guard keeps
    the vertex count itself below 10^6, so keep n small for dense bases.
    """
    if n < 1:
        raise ValueError(f"power must be >= 1, got {n}")
    if len(g.vertices) ** n > OR_POWER_VERTEX_GUARD:
        raise GuardExceeded(
            f"or_power would materialize {len(g.vertices)}^{n} vertices "
            f"(> {OR_POWER_VERTEX_GUARD})"
        )
    if n == 1:
        return CharGraph(g.vertices, g.edges, f"{g.label}-power-1")
    verts = tuple(product(g.vertices, repeat=n))
    base = g.edges
    edges = set()
    for u, v in combinations(verts, 2):
        for a, b in zip(u, v):
            if a != b and ((a, b) in base or (b, a) in base):
                edges.add(_edge(u, v))
                break
    return CharGraph(verts, frozenset(edges), f"{g.label}-power-{n}")


def export_dot(g: CharGraph) -> str:
    """Deterministic DOT rendering (undirected)."""
    lines = [f'graph "{g.label}" {{']
    for v in g.vertices:
        lines.append(f'  "{tuple_label(v)}";')
    for u, v in sorted(g.edges):
        lines.append(f'  "{tuple_label(u)}" -- "{tuple_label(v)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
