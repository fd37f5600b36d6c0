import math
import random

import numpy as np
import pytest

from compbcast import (
    JointPMF,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    push_channel,
)
from compbcast.entropy import entropy_of_table, joint_of_variables, unit_name
from compbcast.model import support
from tests.conftest import table1_assignment

# closed-form oracles
H_QUARTER = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))  # 0.811278...
H_F3_GIVEN_X3 = 0.5 * H_QUARTER + 0.5  # 0.905639...


def table1_joint(example1, example1_family):
    assign = table1_assignment(example1_family)
    rows = np.zeros((8, len(example1_family.sets)))
    rows[np.arange(8), assign] = 1.0
    return push_channel(example1, rows.tolist(), len(example1_family.sets))


def test_entropy_uniform_point_and_biased():
    uniform4 = JointPMF(("A",), np.full(4, 0.25))
    assert entropy(uniform4, 2) == pytest.approx(2.0, abs=1e-12)
    biased = JointPMF(("A",), np.array([0.25, 0.75]))
    assert entropy(biased, 2) == pytest.approx(H_QUARTER, abs=1e-9)
    assert entropy(biased, 2) == pytest.approx(0.811278, abs=1e-6)
    point = JointPMF(("A",), np.array([1.0, 0.0]))
    for base in (2, 3, math.e):
        assert entropy(point, base) == 0.0


def test_entropy_rejects_bad_base():
    pmf = JointPMF(("A",), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        entropy(pmf, 1.0)
    with pytest.raises(ValueError):
        entropy(pmf, 0.5)


def test_table1_conditional_entropies(example1, example1_family):
    joint = table1_joint(example1, example1_family)
    assert conditional_entropy(joint, ["W"], ["X2"], 2) == pytest.approx(1.5, abs=1e-9)
    assert conditional_entropy(joint, ["W"], ["X3"], 2) == pytest.approx(1.5, abs=1e-9)
    assert conditional_entropy(joint, ["W"], ["X1"], 2) == pytest.approx(1.155639, abs=1e-6)
    # self-conditioning
    assert conditional_entropy(joint, ["X1"], ["X1"], 2) == pytest.approx(0.0, abs=1e-12)


def test_genie_first_term_value(example1):
    f3 = {x: example1.demand_value(3, x) for x in support(example1)}
    x3 = {x: x[2] for x in support(example1)}
    joint = joint_of_variables(example1, [f3, x3], ["F3", "X3"])
    assert conditional_entropy(joint, ["F3"], ["X3"], 2) == pytest.approx(
        H_F3_GIVEN_X3, abs=1e-9
    )
    assert conditional_entropy(joint, ["F3"], ["X3"], 2) == pytest.approx(0.905639, abs=1e-6)


def test_cmi_examples(example1, example1_family):
    joint = table1_joint(example1, example1_family)
    xs = ["X1", "X2", "X3"]
    # W is a function of the source, so I(X; W | S) = H(W | S)
    for s in (["X1"], ["X2"], ["X3"]):
        assert conditional_mutual_information(joint, xs, ["W"], s, 2) == pytest.approx(
            conditional_entropy(joint, ["W"], s, 2), abs=1e-9
        )
    assert conditional_mutual_information(joint, xs, ["W"], ["X1"], 2) == pytest.approx(
        1.155639, abs=1e-6
    )
    # independent A, B with empty conditioning
    w = np.full((2, 2), 0.25)
    ind = JointPMF(("A", "B"), w)
    assert conditional_mutual_information(ind, ["A"], ["B"], (), 2) == pytest.approx(
        0.0, abs=1e-12
    )


def test_cmi_rejects_target_side_overlap():
    pmf = JointPMF(("A", "B"), np.full((2, 2), 0.25))
    with pytest.raises(ValueError):
        conditional_mutual_information(pmf, ["A"], ["A"], (), 2)
    with pytest.raises(KeyError):
        conditional_entropy(pmf, ["C"], ["A"], 2)


def test_push_channel_identity_and_uniform(example1):
    support_size = 8
    eye = np.eye(support_size)
    joint = push_channel(example1, eye.tolist(), support_size)
    # deterministic identity channel: joint mass sits on the diagonal
    for i in range(support_size):
        w = joint.weights[i]
        assert w.sum() == pytest.approx(1 / 8, abs=1e-12)
        assert w.max() == pytest.approx(1 / 8, abs=1e-12)
    assert conditional_entropy(joint, ["W"], ["X1", "X2", "X3"], 2) == pytest.approx(
        0.0, abs=1e-9
    )
    # uniform two-label channel: W independent of everything, one bit
    half = np.full((support_size, 2), 0.5)
    joint2 = push_channel(example1, half.tolist(), 2)
    for axes in ([], ["X1"], ["X2", "X3"]):
        assert conditional_entropy(joint2, ["W"], axes, 2) == pytest.approx(1.0, abs=1e-9)


def test_push_channel_rejects_bad_rows(example1):
    rows = [[0.5, 0.4]] * 8
    with pytest.raises(ValueError):
        push_channel(example1, rows, 2)
    with pytest.raises(ValueError):
        push_channel(example1, [[1.0, 0.0]] * 7, 2)


def test_table1_push_matches_table(example1, example1_family):
    joint = table1_joint(example1, example1_family)
    marg = joint.marginal(["W"]).weights
    w_masses = sorted(m for m in marg if m > 0)
    assert w_masses == pytest.approx([0.25, 0.25, 0.5], abs=1e-12)
    assert entropy(joint.marginal(["W"]), 2) == pytest.approx(1.5, abs=1e-9)


def _random_pmf(rng, shape):
    w = np.array([rng.random() for _ in range(int(np.prod(shape)))]).reshape(shape)
    if rng.random() < 0.3:
        w.flat[rng.randrange(w.size)] = 0.0
    return JointPMF(("A", "B"), w / w.sum())


def test_chain_rule_on_random_pmfs():
    rng = random.Random(123)
    for _ in range(100):
        pmf = _random_pmf(rng, (rng.randrange(2, 5), rng.randrange(2, 5)))
        lhs = entropy(pmf, 2)
        rhs = entropy(pmf.marginal(["A"]), 2) + conditional_entropy(pmf, ["B"], ["A"], 2)
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_conditioning_reduces_entropy():
    rng = random.Random(321)
    for _ in range(100):
        pmf = _random_pmf(rng, (3, 4))
        assert conditional_entropy(pmf, ["A"], ["B"], 2) <= entropy(
            pmf.marginal(["A"]), 2
        ) + 1e-9


def test_base_conversion():
    rng = random.Random(11)
    for _ in range(100):
        pmf = _random_pmf(rng, (4, 3))
        q = rng.choice([2, 3, 4, 7])
        assert entropy(pmf, q) * math.log2(q) == pytest.approx(entropy(pmf, 2), abs=1e-9)


def test_unit_names():
    assert unit_name(2) == "bits"
    assert unit_name(3) == "3-ary symbols"


def test_entropy_of_table(example1):
    const = {x: 0 for x in support(example1)}
    assert entropy_of_table(example1, const, 2) == 0.0
