"""Maximal independent set enumeration and cover validation.

Enumeration runs Bron-Kerbosch with pivoting on the complement graph
(maximal independent sets = maximal cliques of the complement), using
integer bitmasks for the candidate / excluded sets.  Output is canonical:
each set sorted, the family sorted lexicographically.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from itertools import combinations
from typing import List, Sequence, Tuple

from .errors import EnumerationTimeout, GuardExceeded
from .graphs import CharGraph, Vertex, adjacency_masks
from .model import tuple_label

ENUMERATION_VERTEX_GUARD = 10 ** 4


@dataclass(frozen=True)
class MISFamily:
    sets: Tuple[Tuple[Vertex, ...], ...]
    graph_label: str

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def memberships(self, vertices: Sequence[Vertex]) -> List[List[int]]:
        """For each vertex, the sorted ids of family sets containing it."""
        out: List[List[int]] = [[] for _ in vertices]
        index = {v: i for i, v in enumerate(vertices)}
        for si, s in enumerate(self.sets):
            for v in s:
                out[index[v]].append(si)
        return out

    def pretty(self) -> str:
        return "\n".join("{" + ", ".join(tuple_label(v) for v in s) + "}" for s in self.sets)


def enumerate_mis(g: CharGraph, timeout_s: float = 60.0) -> MISFamily:
    """All maximal independent sets of ``g``, canonically ordered.

    Pivoting: from candidates+excluded, take the vertex whose complement
    neighborhood covers the most candidates, and branch only on candidates
    it does not cover.
    """
    nv = len(g.vertices)
    if nv > ENUMERATION_VERTEX_GUARD:
        raise GuardExceeded(f"{nv} vertices exceeds MIS enumeration guard {ENUMERATION_VERTEX_GUARD}")
    if nv == 0:
        return MISFamily((), g.label)
    full = (1 << nv) - 1
    adj = adjacency_masks(g)
    # complement adjacency: vertices an independent set may share
    comp = [full & ~adj[i] & ~(1 << i) for i in range(nv)]
    deadline = time.monotonic() + timeout_s
    found: List[int] = []
    steps = 0

    def expand(current: int, candidates: int, excluded: int) -> None:
        nonlocal steps
        steps += 1
        if steps % 1024 == 0 and time.monotonic() > deadline:
            raise EnumerationTimeout(f"MIS enumeration exceeded {timeout_s:g}s")
        if candidates == 0 and excluded == 0:
            found.append(current)
            return
        pool = candidates | excluded
        pivot, best = -1, -1
        m = pool
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            cover = bin(candidates & comp[u]).count("1")
            if cover > best:
                pivot, best = u, cover
        branch = candidates & ~comp[pivot]
        while branch:
            bit = branch & -branch
            v = bit.bit_length() - 1
            branch &= branch - 1
            expand(current | bit, candidates & comp[v], excluded & comp[v])
            candidates &= ~bit
            excluded |= bit

    # recursion depth is bounded by the largest independent set
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, nv + 200))
    try:
        expand(0, full, 0)
    finally:
        sys.setrecursionlimit(limit)

    sets = []
    for mask in found:
        members = []
        m = mask
        while m:
            members.append(g.vertices[(m & -m).bit_length() - 1])
            m &= m - 1
        sets.append(tuple(sorted(members)))
    return MISFamily(tuple(sorted(sets)), g.label)


def is_independent(g: CharGraph, vertices: Sequence[Vertex]) -> bool:
    """True iff no edge of ``g`` has both endpoints in ``vertices``."""
    vset = set(vertices)
    unknown = vset - set(g.vertices)
    if unknown:
        raise KeyError(f"unknown vertices: {sorted(unknown)}")
    for u, v in combinations(sorted(vset), 2):
        if (u, v) in g.edges:
            return False
    return True


def is_maximal_independent(g: CharGraph, vertices: Sequence[Vertex]) -> bool:
    if not is_independent(g, vertices):
        return False
    vset = set(vertices)
    for w in g.vertices:
        if w in vset:
            continue
        if not any((min(w, v), max(w, v)) in g.edges for v in vset):
            return False
    return True


@dataclass(frozen=True)
class CoverReport:
    violations: Tuple[Tuple[str, str], ...]  # (code, detail)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "valid cover"
        return "\n".join(f"{code}: {detail}" for code, detail in self.violations)


def validate_cover(
    family: MISFamily,
    rows: Sequence[Sequence[float]],
    vertices: Sequence[Vertex],
    atol: float = 1e-9,
) -> CoverReport:
    """Check a conditional assignment P(W | x) against the family.

    Every row must be a probability vector over the family's sets, and mass
    may only sit on sets that actually contain the row's vertex.
    """
    out = []
    if len(rows) != len(vertices):
        out.append(("row-count-mismatch", f"{len(rows)} rows for {len(vertices)} vertices"))
        return CoverReport(tuple(out))
    member = [set(s) for s in family.sets]
    for x, row in zip(vertices, rows):
        if len(row) != len(family.sets):
            out.append(("row-length-mismatch", f"row for {tuple_label(x)} has {len(row)} entries"))
            continue
        total = float(sum(row))
        if any(p < -atol for p in row):
            out.append(("negative-probability", f"row for {tuple_label(x)}"))
        if abs(total - 1.0) > max(atol, 1e-9):
            out.append(("row-not-normalized", f"row for {tuple_label(x)} sums to {total!r}"))
        for si, p in enumerate(row):
            if p > atol and x not in member[si]:
                out.append(
                    ("x-not-in-W", f"{tuple_label(x)} assigned to set {si} not containing it")
                )
    return CoverReport(tuple(out))
