"""Exhaustive single-shot ground truth at desk scale.

A deterministic broadcast message at block length one is a partition of the
support: the message names the cell containing the realized tuple.  Every
user decodes correctly exactly when each cell is an independent set of the
broadcast graph, so the oracle enumerates set partitions whose cells are
independent sets (restricted-growth order with incremental pruning) and
minimizes either H(M) or max_i H(M | S_i).  Cells may be any independent
sets, not only maximal ones, which makes this a strictly stronger search
than assignments to an MIS family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .entropy import unit_name
from .errors import GuardExceeded
from .graphs import CharGraph, Vertex, adjacency_masks
from .model import Instance, require_valid, support, support_probs, tuple_label
from .rates import RateReport

ORACLE_SUPPORT_GUARD = 15  # Bell numbers explode beyond this; 12 is comfortable

OBJECTIVES = ("max-conditional", "message-entropy")


@dataclass(frozen=True)
class Partition:
    """Disjoint cells covering the support, canonically ordered (cells and
    the cell list both lexicographically sorted)."""

    cells: Tuple[Tuple[Vertex, ...], ...]

    @classmethod
    def from_cells(cls, cells: Sequence[Sequence[Vertex]]) -> "Partition":
        return cls(tuple(sorted(tuple(sorted(c)) for c in cells)))

    def labels(self, vertices: Sequence[Vertex]) -> List[int]:
        lab = {v: i for i, c in enumerate(self.cells) for v in c}
        return [lab[v] for v in vertices]

    def pretty(self) -> str:
        return "\n".join(" ".join(tuple_label(v) for v in cell) for cell in self.cells)


@dataclass(frozen=True)
class DecodeReport:
    violations: Tuple[Tuple[int, int, Tuple[Vertex, Vertex]], ...]  # (user, cell, pair)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "decodable"
        return "\n".join(
            f"user {u}, cell {c}: {tuple_label(a)} vs {tuple_label(b)}"
            for u, c, (a, b) in self.violations
        )


def decode_check(inst: Instance, partition: Partition) -> DecodeReport:
    """Zero-error recovery check: within every cell, tuples sharing a user's
    side-information class must demand the same value for that user."""
    require_valid(inst)
    sup = support(inst)
    covered = [v for cell in partition.cells for v in cell]
    if sorted(covered) != sorted(sup) or len(covered) != len(set(covered)):
        raise ValueError("partition cells must exactly cover the support, disjointly")
    out = []
    for ci, cell in enumerate(partition.cells):
        for u in range(1, inst.num_users + 1):
            seen: Dict[Tuple[int, ...], Vertex] = {}
            for x in cell:
                key = inst.side_values(u, x)
                other = seen.setdefault(key, x)
                if inst.demand_value(u, other) != inst.demand_value(u, x):
                    out.append((u, ci, (other, x)))
                    break
    return DecodeReport(tuple(out))


def partition_objective(
    inst: Instance, partition: Partition, objective: str = "max-conditional", base: float = 2
) -> Tuple[float, Tuple[float, ...]]:
    """Objective value of a partition; also returns per-user conditional
    entropies (for message-entropy the per-user tuple is empty)."""
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    sup = support(inst)
    probs = support_probs(inst)
    labels = partition.labels(sup)
    if objective == "message-entropy":
        dist: Dict[int, float] = {}
        for lab, p in zip(labels, probs):
            dist[lab] = dist.get(lab, 0.0) + p
        h = -sum(p * math.log(p) for p in dist.values() if p > 0) / math.log(base)
        return max(h, 0.0), ()
    per_user = []
    for u in range(1, inst.num_users + 1):
        groups: Dict[Tuple[int, ...], Dict[int, float]] = {}
        for x, lab, p in zip(sup, labels, probs):
            groups.setdefault(inst.side_values(u, x), {}).setdefault(lab, 0.0)
            groups[inst.side_values(u, x)][lab] += p
        total = 0.0
        for dist in groups.values():
            mass = sum(dist.values())
            for w in dist.values():
                if w > 0:
                    total -= w * math.log(w / mass)
        per_user.append(max(total / math.log(base), 0.0))
    return max(per_user), tuple(per_user)


def oracle_search(
    inst: Instance,
    graph: CharGraph,
    objective: str = "max-conditional",
    base: float = 2,
    return_all: bool = False,
):
    """Exact minimum of the objective over all partitions of the support
    into independent sets of ``graph``, with one optimal witness.

    With ``return_all`` every valid partition and its value is also
    returned (small instances only); the report notes how many partitions
    were evaluated.
    """
    require_valid(inst)
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    sup = support(inst)
    if tuple(graph.vertices) != tuple(sup):
        raise ValueError("graph vertices must equal the instance support")
    nv = len(sup)
    if nv > ORACLE_SUPPORT_GUARD:
        raise GuardExceeded(f"support size {nv} exceeds oracle guard {ORACLE_SUPPORT_GUARD}")
    adj = adjacency_masks(graph)

    best_value = math.inf
    best: Optional[Partition] = None
    evaluated = 0
    collected: List[Tuple[Partition, float]] = []

    cell_masks: List[int] = []
    cell_members: List[List[int]] = []

    def visit() -> None:
        nonlocal best_value, best, evaluated
        evaluated += 1
        part = Partition.from_cells([[sup[i] for i in cell] for cell in cell_members])
        value, _ = partition_objective(inst, part, objective, base)
        if return_all:
            collected.append((part, value))
        if value < best_value - 1e-12 or (
            abs(value - best_value) <= 1e-12 and (best is None or part.cells < best.cells)
        ):
            best_value, best = value, part

    def place(v: int) -> None:
        if v == nv:
            visit()
            return
        bit = 1 << v
        for ci in range(len(cell_masks)):
            if cell_masks[ci] & adj[v]:
                continue  # v is adjacent to a member; cell would stop being independent
            cell_masks[ci] |= bit
            cell_members[ci].append(v)
            place(v + 1)
            cell_members[ci].pop()
            cell_masks[ci] &= ~bit
        cell_masks.append(bit)
        cell_members.append([v])
        place(v + 1)
        cell_members.pop()
        cell_masks.pop()

    place(0)

    per_user = partition_objective(inst, best, objective, base)[1]
    report = RateReport(
        name=f"oracle-{objective}",
        value=best_value,
        base=base,
        unit=unit_name(base),
        per_user=per_user if per_user else None,
        witness=best,
        notes=(f"exhaustive over {evaluated} valid partitions",),
    )
    if return_all:
        return report, collected
    return report
