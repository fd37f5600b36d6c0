"""Randomized property suites, runnable standalone:

    pytest tests/test_properties.py

Each property is exercised over at least 100 randomized small instances
with fixed seeds; numeric identities hold to 1e-9.
"""

import math
import random
from itertools import combinations

import numpy as np
import pytest

from compbcast import (
    CoverDistribution,
    JointPMF,
    Partition,
    broadcast_graph,
    conditional_entropy,
    conditional_mutual_information,
    decode_check,
    entropy,
    enumerate_mis,
    evaluate_cover_rate,
    is_independent,
    make_instance,
    or_power,
    push_channel,
    support,
)
from compbcast.graphs import CharGraph
from compbcast.model import support_probs


def random_instance(rng, max_users=3):
    q = rng.choice([2, 2, 3])
    n = rng.choice([2, 2, 3] if q == 2 else [2])
    users = []
    for _ in range(rng.randrange(1, max_users + 1)):
        side = sorted(rng.sample(range(1, n + 1), rng.randrange(0, n)))
        table = [rng.randrange(q) for _ in range(q ** n)]
        users.append((side, table))
    pmf = None
    if rng.random() < 0.4:
        weights = [rng.random() for _ in range(q ** n)]
        if rng.random() < 0.5:
            weights[rng.randrange(len(weights))] = 0.0
        total = sum(weights)
        pmf = [w / total for w in weights]
    return make_instance(q, n, users, pmf="uniform" if pmf is None else pmf)


def random_cover(rng, inst, family):
    memberships = family.memberships(support(inst))
    rows = np.zeros((len(memberships), len(family.sets)))
    for i, mem in enumerate(memberships):
        if rng.random() < 0.5:
            rows[i, rng.choice(mem)] = 1.0
        else:
            weights = [rng.random() + 1e-3 for _ in mem]
            total = sum(weights)
            for m, w in zip(mem, weights):
                rows[i, m] = w / total
    return CoverDistribution(rows)


def test_entropy_chain_rule_100_instances():
    rng = random.Random(2024)
    for _ in range(100):
        shape = (rng.randrange(2, 5), rng.randrange(2, 5), rng.randrange(2, 4))
        w = np.array([rng.random() for _ in range(shape[0] * shape[1] * shape[2])])
        pmf = JointPMF(("A", "B", "C"), (w / w.sum()).reshape(shape))
        h_joint = entropy(pmf, 2)
        chained = (
            entropy(pmf.marginal(["A"]), 2)
            + conditional_entropy(pmf, ["B"], ["A"], 2)
            + conditional_entropy(pmf, ["C"], ["A", "B"], 2)
        )
        assert abs(h_joint - chained) <= 1e-9


def test_deterministic_label_identity_100_instances():
    # for a label W that is a function of the source,
    # I(X; W | S) equals H(W | S)
    rng = random.Random(77)
    checked = 0
    while checked < 100:
        inst = random_instance(rng)
        family = enumerate_mis(broadcast_graph(inst))
        memberships = family.memberships(support(inst))
        assign = [rng.choice(mem) for mem in memberships]
        rows = np.zeros((len(assign), len(family.sets)))
        rows[np.arange(len(assign)), assign] = 1.0
        joint = push_channel(inst, rows.tolist(), len(family.sets))
        x_axes = [f"X{j}" for j in range(1, inst.num_datasets + 1)]
        for u in range(1, inst.num_users + 1):
            s_axes = [f"X{c}" for c in inst.users[u - 1].side_coords]
            lhs = conditional_mutual_information(joint, x_axes, ["W"], s_axes, 2)
            rhs = conditional_entropy(joint, ["W"], s_axes, 2)
            assert abs(lhs - rhs) <= 1e-9
        checked += 1


def test_decodability_iff_independent_cells_100_instances():
    rng = random.Random(404)
    for _ in range(120):
        inst = random_instance(rng)
        g = broadcast_graph(inst)
        sup = support(inst)
        cells = []
        for v in sup:
            if cells and rng.random() < 0.55:
                rng.choice(cells).append(v)
            else:
                cells.append([v])
        part = Partition.from_cells(cells)
        ok = decode_check(inst, part).ok
        assert ok == all(is_independent(g, c) for c in part.cells)


def test_or_power_vertex_count_100_graphs():
    rng = random.Random(555)
    for _ in range(100):
        nv = rng.randrange(2, 7)
        verts = tuple((i,) for i in range(nv))
        edges = {
            (a, b) for a, b in combinations(verts, 2) if rng.random() < 0.4
        }
        g = CharGraph(verts, frozenset(edges), "rand")
        n = rng.randrange(1, 4)
        if nv ** n > 300:
            n = 1
        power = or_power(g, n)
        assert len(power.vertices) == nv ** n
        if not edges:
            assert power.num_edges == 0


def test_conditioning_never_increases_entropy_100():
    rng = random.Random(808)
    for _ in range(100):
        shape = (rng.randrange(2, 6), rng.randrange(2, 6))
        w = np.array([rng.random() for _ in range(shape[0] * shape[1])])
        pmf = JointPMF(("A", "B"), (w / w.sum()).reshape(shape))
        assert conditional_entropy(pmf, ["A"], ["B"], 2) <= entropy(
            pmf.marginal(["A"]), 2
        ) + 1e-9


def test_base_conversion_100():
    rng = random.Random(909)
    for _ in range(100):
        size = rng.randrange(2, 9)
        w = np.array([rng.random() for _ in range(size)])
        pmf = JointPMF(("A",), w / w.sum())
        q = rng.choice([2, 3, 4, 5, 8])
        assert abs(entropy(pmf, q) * math.log2(q) - entropy(pmf, 2)) <= 1e-9


def test_union_contains_inputs_100():
    rng = random.Random(606)
    from compbcast import build_characteristic_graph, build_union_graph

    for _ in range(100):
        inst = random_instance(rng)
        per_user = [
            build_characteristic_graph(inst, u) for u in range(1, inst.num_users + 1)
        ]
        union = build_union_graph(per_user)
        for g in per_user:
            assert g.edges <= union.edges


def test_support_probabilities_positive_and_normalized_100():
    rng = random.Random(303)
    for _ in range(100):
        inst = random_instance(rng)
        probs = support_probs(inst)
        assert all(p > 0 for p in probs)
        assert abs(sum(probs) - 1.0) <= 1e-9


def test_cover_evaluation_never_beats_exhaustive_100():
    rng = random.Random(111)
    from compbcast import optimize_achievable

    checked = 0
    while checked < 100:
        inst = random_instance(rng, max_users=2)
        family = enumerate_mis(broadcast_graph(inst))
        space = 1
        for mem in family.memberships(support(inst)):
            space *= len(mem)
        if space > 2000:
            continue
        best = optimize_achievable(inst, family, base=2, mode="exhaustive").value
        cover = random_cover(rng, inst, family)
        value = evaluate_cover_rate(inst, family, cover, base=2).value
        assert value >= best - 1e-9
        checked += 1


def test_every_mis_member_decodes_unambiguously_100():
    # within any family set, tuples sharing a user's side-information class
    # demand the same value (the operational meaning of independence)
    rng = random.Random(121)
    for _ in range(100):
        inst = random_instance(rng)
        family = enumerate_mis(broadcast_graph(inst))
        for s in family.sets:
            for u in range(1, inst.num_users + 1):
                seen = {}
                for x in s:
                    key = inst.side_values(u, x)
                    want = inst.demand_value(u, x)
                    assert seen.setdefault(key, want) == want
