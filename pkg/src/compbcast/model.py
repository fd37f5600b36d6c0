"""Problem instances: field order, source PMF, per-user side information
and demand tables.

A source tuple x = (x_1, ..., x_N) with x_j in F_q is ranked lexicographically
with x_1 most significant; every table in the toolkit (PMF, demand tables)
is indexed by that rank.  Demands are stored extensionally as full tables of
length q^N; expression strings are expanded through :mod:`compbcast.expr`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from itertools import product
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from . import expr as expr_mod
from .errors import InstanceFormatError, InvalidInstanceError

SourceTuple = Tuple[int, ...]
DemandTable = Tuple[int, ...]

PMF_TOLERANCE = 1e-12


def all_tuples(q: int, n: int) -> List[SourceTuple]:
    """All of F_q^N in lexicographic order (x_1 most significant)."""
    return list(product(range(q), repeat=n))


def tuple_rank(x: SourceTuple, q: int) -> int:
    r = 0
    for d in x:
        r = r * q + d
    return r


def tuple_label(x) -> str:
    """Compact display form: digit string for field tuples (q <= 10),
    '.'-joined blocks for power-graph vertices (nested tuples)."""
    if x and isinstance(x[0], tuple):
        return ".".join(tuple_label(part) for part in x)
    if all(isinstance(d, int) and 0 <= d <= 9 for d in x):
        return "".join(str(d) for d in x)
    return "(" + ",".join(str(d) for d in x) + ")"


@dataclass(frozen=True)
class UserSpec:
    """One user's side-information coordinates (1-based, subset of [N]) and
    demand table (length q^N, values in [0, q))."""

    side_coords: Tuple[int, ...]
    demand: DemandTable
    demand_text: Optional[str] = None  # original expression, if any


@dataclass(frozen=True)
class Instance:
    q: int
    num_datasets: int
    pmf: Tuple[float, ...]
    users: Tuple[UserSpec, ...]

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def tuples(self) -> List[SourceTuple]:
        return all_tuples(self.q, self.num_datasets)

    def demand_value(self, user: int, x: SourceTuple) -> int:
        """Demanded function of user ``user`` (1-based) at source tuple x."""
        return self.users[user - 1].demand[tuple_rank(x, self.q)]

    def side_values(self, user: int, x: SourceTuple) -> Tuple[int, ...]:
        """Side-information coordinates of ``x`` seen by user ``user``."""
        return tuple(x[c - 1] for c in self.users[user - 1].side_coords)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(f"{v.code}: {v.message}" for v in self.violations)


def validate_instance(inst: Instance) -> ValidationReport:
    """Check every structural invariant; collects all violations instead of
    stopping at the first."""
    out: List[Violation] = []
    q, n = inst.q, inst.num_datasets
    if q < 2:
        out.append(Violation("q-too-small", f"field order must be >= 2, got {q}"))
    if n < 1:
        out.append(Violation("n-datasets-too-small", f"need at least one dataset, got {n}"))
    if not inst.users:
        out.append(Violation("no-users", "instance has no users"))
    size = q ** n if q >= 2 and n >= 1 else None
    if size is not None and len(inst.pmf) != size:
        out.append(
            Violation("pmf-wrong-length", f"pmf has {len(inst.pmf)} entries, expected {size}")
        )
    if any(p < 0 for p in inst.pmf):
        out.append(Violation("pmf-negative", "pmf contains negative weights"))
    total = sum(inst.pmf)
    if abs(total - 1.0) > PMF_TOLERANCE:
        out.append(Violation("pmf-not-normalized", f"pmf sums to {total!r}, expected 1"))
    for k, user in enumerate(inst.users, start=1):
        if len(set(user.side_coords)) != len(user.side_coords):
            out.append(Violation("side-duplicate", f"user {k}: duplicate side coordinates"))
        for c in user.side_coords:
            if not 1 <= c <= n:
                out.append(
                    Violation("coord-out-of-range", f"user {k}: side coordinate {c} not in [1, {n}]")
                )
        if size is not None and len(user.demand) != size:
            out.append(
                Violation(
                    "demand-wrong-length",
                    f"user {k}: demand table has {len(user.demand)} entries, expected {size}",
                )
            )
        if any(not 0 <= v < q for v in user.demand):
            out.append(
                Violation("demand-value-out-of-range", f"user {k}: demand value outside [0, {q})")
            )
    return ValidationReport(tuple(out))


def require_valid(inst: Instance) -> None:
    report = validate_instance(inst)
    if not report.ok:
        raise InvalidInstanceError(report.violations)


def support(inst: Instance) -> List[SourceTuple]:
    """Source tuples with strictly positive probability, lexicographic."""
    return [x for x, p in zip(inst.tuples, inst.pmf) if p > 0]


def support_probs(inst: Instance) -> List[float]:
    return [p for p in inst.pmf if p > 0]


def expand_demand(node: expr_mod.Node, q: int, n: int) -> DemandTable:
    """Evaluate an expression AST on every tuple of F_q^N, lex order."""
    return tuple(expr_mod.eval_expr(node, x, q) for x in all_tuples(q, n))


def demand_table(text: str, q: int, n: int) -> DemandTable:
    return expand_demand(expr_mod.parse_demand(text, q, n), q, n)


def uniform_pmf(q: int, n: int) -> Tuple[float, ...]:
    size = q ** n
    return tuple([1.0 / size] * size)


def make_instance(
    q: int,
    num_datasets: int,
    users: Iterable[Tuple[Sequence[int], Union[str, Sequence[int]]]],
    pmf: Union[str, Sequence[Union[float, str]]] = "uniform",
) -> Instance:
    """Convenience constructor.  Each user is ``(side_coords, demand)`` where
    the demand is an expression string or an explicit table."""
    if pmf == "uniform":
        weights = uniform_pmf(q, num_datasets)
    else:
        weights = tuple(_parse_weight(w) for w in pmf)
    built = []
    for side, demand in users:
        if isinstance(demand, str):
            table = demand_table(demand, q, num_datasets)
            built.append(UserSpec(tuple(sorted(side)), table, demand))
        else:
            built.append(UserSpec(tuple(sorted(side)), tuple(demand), None))
    return Instance(q, num_datasets, weights, tuple(built))


def _parse_weight(w) -> float:
    # accepts plain numbers and exact-rational strings like "1/8"
    if isinstance(w, str):
        return float(Fraction(w))
    return float(w)


# ---------------------------------------------------------------------------
# instance files


def parse_instance(doc: dict) -> Instance:
    """Build an Instance from a decoded instance document."""
    try:
        q = int(doc["q"])
        n = int(doc["n_datasets"])
        users_doc = doc["users"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"missing or malformed required field: {exc}") from exc
    pmf_doc = doc.get("pmf", "uniform")
    if not isinstance(users_doc, list) or not users_doc:
        raise InstanceFormatError("'users' must be a non-empty array")
    users = []
    for k, u in enumerate(users_doc, start=1):
        if not isinstance(u, dict) or "side" not in u:
            raise InstanceFormatError(f"user {k}: expected an object with a 'side' field")
        side = u["side"]
        if not isinstance(side, list) or not all(isinstance(c, int) for c in side):
            raise InstanceFormatError(
                f"user {k}: side information must be an array of dataset coordinate "
                "indices; functions of datasets are not supported as side information"
            )
        if "demand" in u:
            users.append((side, str(u["demand"])))
        elif "demand_table" in u:
            users.append((side, [int(v) for v in u["demand_table"]]))
        else:
            raise InstanceFormatError(f"user {k}: needs 'demand' or 'demand_table'")
    if pmf_doc != "uniform" and not isinstance(pmf_doc, list):
        raise InstanceFormatError("'pmf' must be \"uniform\" or an array of weights")
    try:
        return make_instance(q, n, users, pmf_doc)
    except Exception as exc:
        raise InstanceFormatError(str(exc)) from exc


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(f"not valid JSON: {exc}") from exc
    return parse_instance(doc)


def load_bundled_instance(name: str) -> Instance:
    """Load one of the fixtures shipped with the package
    (``example1_boolean`` or ``example2_linear``)."""
    text = resources.files("compbcast.data").joinpath(f"{name}.json").read_text()
    return parse_instance(json.loads(text))


def bundled_path(name: str) -> str:
    return str(resources.files("compbcast.data").joinpath(f"{name}.json"))
