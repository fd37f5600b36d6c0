"""Exact entropy computations on finite joint PMFs.

Everything here works on explicit probability tables; there is no sampling
or estimation.  Entropies use the convention 0 * log 0 = 0 and may be taken
in any base > 1.  Values in [-1e-9, 0] arising from floating error are
clamped to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .model import Instance, support, support_probs

NEG_TOLERANCE = 1e-9


def unit_name(base: float) -> str:
    """Entropy unit label: 'bits' for base 2, otherwise '<q>-ary symbols'."""
    if base == 2:
        return "bits"
    return f"{base:g}-ary symbols"


@dataclass(frozen=True, eq=False)
class JointPMF:
    """A joint PMF over named finite axes.

    ``weights`` has one dimension per axis, in axis order.  Axis alphabets
    are implicit 0..size-1 index sets; callers keep their own label maps.
    """

    axes: Tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        if len(set(self.axes)) != len(self.axes):
            raise ValueError(f"duplicate axis names in {self.axes}")
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != len(self.axes):
            raise ValueError(f"weights have {w.ndim} dims for {len(self.axes)} axes")
        if w.size and w.min() < 0:
            raise ValueError("negative probability mass")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"mass sums to {float(w.sum())!r}, expected 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def axis_index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise KeyError(f"unknown axis {name!r}; have {self.axes}") from None

    def marginal(self, names: Sequence[str]) -> "JointPMF":
        keep = [self.axis_index(n) for n in names]
        drop = tuple(i for i in range(len(self.axes)) if i not in keep)
        w = self.weights.sum(axis=drop) if drop else self.weights
        # after summing, dims follow sorted(keep); permute into requested order
        w = np.moveaxis(w, range(len(keep)), np.argsort(keep))
        return JointPMF(tuple(names), w)


def _check_base(base: float) -> None:
    if not base > 1:
        raise ValueError(f"logarithm base must be > 1, got {base}")


def _entropy_of_weights(w: np.ndarray, base: float) -> float:
    flat = np.asarray(w, dtype=float).ravel()
    flat = flat[flat > 0]
    if flat.size == 0:
        return 0.0
    h = float(-(flat * np.log(flat)).sum() / math.log(base))
    return _clamp(h)


def _clamp(v: float) -> float:
    if -NEG_TOLERANCE <= v < 0:
        return 0.0
    return v


def entropy(pmf: JointPMF, base: float = 2) -> float:
    """H(all axes) = -sum p log_base p over positive-mass outcomes."""
    _check_base(base)
    return _entropy_of_weights(pmf.weights, base)


def conditional_entropy(
    pmf: JointPMF, target: Sequence[str], given: Sequence[str], base: float = 2
) -> float:
    """H(target | given) = H(target, given) - H(given).

    Overlap between target and conditioning axes is allowed (duplicates
    collapse), so conditioning a tuple on one of its own coordinates works.
    """
    _check_base(base)
    t, g = list(target), list(given)
    joint_axes = t + [name for name in g if name not in t]
    h_joint = _entropy_of_weights(pmf.marginal(joint_axes).weights, base)
    if not g:
        return h_joint
    h_given = _entropy_of_weights(pmf.marginal(g).weights, base)
    return _clamp(h_joint - h_given)


def conditional_mutual_information(
    pmf: JointPMF,
    axes_a: Sequence[str],
    axes_b: Sequence[str],
    given: Sequence[str] = (),
    base: float = 2,
) -> float:
    """I(A; B | C) = H(A | C) - H(A | B, C), clamped to be nonnegative.

    A and C may overlap (conditioning on part of A); A and B may not.
    """
    _check_base(base)
    a, b, c = list(axes_a), list(axes_b), list(given)
    for s, t in ((a, b), (b, c)):
        if set(s) & set(t):
            raise ValueError(f"axes overlap: {set(s) & set(t)}")
    bc = b + [name for name in c if name not in b]
    return _clamp(conditional_entropy(pmf, a, c, base) - conditional_entropy(pmf, a, bc, base))


def push_channel(inst: Instance, rows: Sequence[Sequence[float]], num_labels: int) -> JointPMF:
    """Materialize the joint PMF of (W, X_1, ..., X_N) from a conditional
    assignment P(W | x).

    ``rows`` is aligned with ``support(inst)``; row r gives P(W = w | x_r)
    over label ids ``0..num_labels-1``.  Coordinate marginals (the side
    information of any user) are obtained from the result by dropping axes.
    """
    sup = support(inst)
    probs = support_probs(inst)
    if len(rows) != len(sup):
        raise ValueError(f"{len(rows)} channel rows for {len(sup)} support tuples")
    q, n = inst.q, inst.num_datasets
    shape = (num_labels,) + (q,) * n
    w = np.zeros(shape, dtype=float)
    for x, px, row in zip(sup, probs, rows):
        row = np.asarray(row, dtype=float)
        if row.shape != (num_labels,):
            raise ValueError(f"channel row for {x} has shape {row.shape}")
        if row.min() < -1e-15 or abs(float(row.sum()) - 1.0) > 1e-9:
            raise ValueError(f"channel row for {x} is not a distribution: {row.tolist()}")
        w[(slice(None),) + x] = px * np.clip(row, 0.0, None)
    axes = ("W",) + tuple(f"X{j}" for j in range(1, n + 1))
    return JointPMF(axes, w)


def side_axes(inst: Instance, user: int) -> Tuple[str, ...]:
    """Axis names of user ``user``'s side information in a push_channel PMF."""
    return tuple(f"X{c}" for c in inst.users[user - 1].side_coords)


def joint_of_variables(inst: Instance, tables: Sequence[Dict], names: Sequence[str]) -> JointPMF:
    """Joint PMF of arbitrary functions of the source.

    Each entry of ``tables`` maps source tuples to hashable values; values
    are indexed in first-seen sorted order per variable.
    """
    if len(tables) != len(names):
        raise ValueError("one name per table required")
    sup = support(inst)
    probs = support_probs(inst)
    alphabets = [sorted({t[x] for x in sup}, key=repr) for t in tables]
    index = [{v: i for i, v in enumerate(alpha)} for alpha in alphabets]
    shape = tuple(len(a) for a in alphabets)
    w = np.zeros(shape if shape else (1,), dtype=float)
    for x, px in zip(sup, probs):
        key = tuple(ind[t[x]] for t, ind in zip(tables, index))
        w[key if key else (0,)] += px
    return JointPMF(tuple(names) if names else ("const",), w)


def entropy_of_table(inst: Instance, table: Dict, base: float = 2) -> float:
    """Entropy of a single function of the source, given as x -> value."""
    return entropy(joint_of_variables(inst, [table], ["V"]), base)
