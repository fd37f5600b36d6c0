"""Rate computations: graph-cover achievable rates, baselines, lower bounds,
and the pairwise schemes for three-user linear demands.

Conventions
-----------
* Rates carry an explicit logarithm base and unit ("bits" for base 2,
  "<q>-ary symbols" otherwise); reports convert to bits on demand.
* The graph-cover optimizer searches deterministic assignments of source
  tuples to maximal independent sets, optionally refined on the probability
  simplex.  Results are certified optimal only when the deterministic space
  was exhausted and refinement found no improvement; otherwise they are
  labeled heuristic upper bounds.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass
from itertools import permutations, product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .entropy import (
    conditional_entropy,
    entropy as entropy_of,
    joint_of_variables,
    push_channel,
    side_axes,
    unit_name,
)
from .errors import GuardExceeded
from .mis import MISFamily, validate_cover
from .model import (
    DemandTable,
    Instance,
    SourceTuple,
    all_tuples,
    require_valid,
    support,
    support_probs,
    tuple_label,
    tuple_rank,
)

VALUE_TOLERANCE = 1e-9
EXHAUSTIVE_ASSIGNMENT_GUARD = 10 ** 6
FUNCTION_SEARCH_GUARD = 10 ** 7
REFINEMENT_GRID = 32


# ---------------------------------------------------------------------------
# report plumbing


@dataclass(frozen=True)
class RateReport:
    """A named rate value with its unit and the data behind it.

    ``per_user`` holds per-user conditional entropies whose maximum is the
    value; ``terms`` holds scheme-specific decompositions (genie summands,
    per-cell entropies) that need not obey the max rule.
    """

    name: str
    value: float
    base: float
    unit: str
    per_user: Optional[Tuple[float, ...]] = None
    terms: Optional[Tuple[float, ...]] = None
    witness: Optional[object] = None
    method: str = "exact"
    notes: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.per_user is not None:
            if abs(self.value - max(self.per_user)) > VALUE_TOLERANCE:
                raise ValueError(
                    f"value {self.value} is not the max of per-user {self.per_user}"
                )

    @property
    def value_bits(self) -> float:
        return self.value * math.log2(self.base)

    def describe(self) -> str:
        parts = [f"{self.name}: {self.value:.6f} {self.unit}"]
        if self.base != 2:
            parts.append(f"(= {self.value_bits:.6f} bits)")
        if self.per_user:
            parts.append("per-user [" + ", ".join(f"{v:.6f}" for v in self.per_user) + "]")
        if self.terms:
            parts.append("terms [" + ", ".join(f"{v:.6f}" for v in self.terms) + "]")
        if self.method != "exact":
            parts.append(f"[{self.method}]")
        return " ".join(parts)


def _witness_text(witness) -> str:
    if witness is None:
        return ""
    if isinstance(witness, CoverDistribution):
        if witness.is_deterministic():
            return "assign:" + ",".join(str(i) for i in witness.assignment())
        return "rows:" + ";".join(
            ",".join(repr(p) for p in row) for row in witness.rows.tolist()
        )
    if isinstance(witness, CompatibleScheme):
        if witness.coefficients is not None:
            return "coeffs:" + ",".join(str(c) for c in witness.coefficients)
        return "table:" + ",".join(str(v) for v in witness.table)
    return str(witness)


REPORT_CSV_COLUMNS = ("name", "value", "unit", "per_user", "witness")


def reports_to_csv(reports: Iterable[RateReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_CSV_COLUMNS)
    for r in reports:
        per_user = "|".join(repr(v) for v in r.per_user) if r.per_user else ""
        writer.writerow([r.name, repr(r.value), r.unit, per_user, _witness_text(r.witness)])
    return buf.getvalue()


def parse_report_csv(text: str) -> List[Dict[str, object]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != REPORT_CSV_COLUMNS:
        raise ValueError(f"unexpected report header {header}")
    rows = []
    for rec in reader:
        name, value, unit, per_user, witness = rec
        rows.append(
            {
                "name": name,
                "value": float(value),
                "unit": unit,
                "per_user": tuple(float(v) for v in per_user.split("|")) if per_user else None,
                "witness": witness,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# covers


@dataclass(frozen=True, eq=False)
class CoverDistribution:
    """Conditional assignment P(W | x): one probability row per support
    tuple over the sets of an MIS family."""

    rows: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rows, dtype=float).copy()
        r.setflags(write=False)
        object.__setattr__(self, "rows", r)

    @classmethod
    def from_assignment(cls, num_sets: int, assignment: Sequence[int]) -> "CoverDistribution":
        rows = np.zeros((len(assignment), num_sets))
        rows[np.arange(len(assignment)), list(assignment)] = 1.0
        return cls(rows)

    def is_deterministic(self, atol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.rows.max(axis=1) - 1.0) <= atol))

    def assignment(self) -> List[int]:
        return [int(i) for i in self.rows.argmax(axis=1)]


def _user_class_ids(inst: Instance) -> Tuple[List[np.ndarray], List[int]]:
    """Per user: the side-information class id of each support tuple."""
    sup = support(inst)
    ids, counts = [], []
    for u in range(1, inst.num_users + 1):
        seen: Dict[Tuple[int, ...], int] = {}
        arr = np.empty(len(sup), dtype=np.int64)
        for i, x in enumerate(sup):
            key = inst.side_values(u, x)
            arr[i] = seen.setdefault(key, len(seen))
        ids.append(arr)
        counts.append(len(seen))
    return ids, counts


def _cond_entropy_from_counts(t: np.ndarray, base: float) -> float:
    """H(col | row) for a nonnegative mass matrix summing to 1."""
    pos = t[t > 0]
    rows = t.sum(axis=1)
    rows = rows[rows > 0]
    h = float((rows * np.log(rows)).sum() - (pos * np.log(pos)).sum()) / math.log(base)
    return max(h, 0.0)


def _cover_objective(
    probs: np.ndarray,
    class_ids: List[np.ndarray],
    class_counts: List[int],
    rows: np.ndarray,
    base: float,
) -> Tuple[float, Tuple[float, ...]]:
    weighted = rows * probs[:, None]
    per_user = []
    for ids, c in zip(class_ids, class_counts):
        t = np.zeros((c, rows.shape[1]))
        np.add.at(t, ids, weighted)
        per_user.append(_cond_entropy_from_counts(t, base))
    return max(per_user), tuple(per_user)


def evaluate_cover_rate(
    inst: Instance, family: MISFamily, cover: CoverDistribution, base: float = 2
) -> RateReport:
    """max_i H(W | S_i) for a validated cover, via the pushed joint PMF."""
    require_valid(inst)
    sup = support(inst)
    report = validate_cover(family, cover.rows.tolist(), sup)
    if not report.ok:
        raise ValueError(f"cover does not validate:\n{report}")
    joint = push_channel(inst, cover.rows.tolist(), len(family.sets))
    per_user = tuple(
        conditional_entropy(joint, ["W"], list(side_axes(inst, u)), base)
        for u in range(1, inst.num_users + 1)
    )
    return RateReport(
        name="graph-cover-rate",
        value=max(per_user),
        base=base,
        unit=unit_name(base),
        per_user=per_user,
        witness=cover,
    )


def optimize_achievable(
    inst: Instance,
    family: MISFamily,
    base: float = 2,
    mode: str = "auto",
    max_evals: int = 200_000,
    restarts: int = 16,
    seed: int = 7,
) -> RateReport:
    """Minimize max_i H(W | S_i) over covers supported on the MIS family.

    Deterministic assignments are exhausted when their count is within the
    guard (or ``mode="exhaustive"`` insists); otherwise multi-start local
    search is used.  Either way the incumbent is refined coordinate-wise on
    the probability simplex with a 1/32 step grid.  The result is an upper
    bound witness; it is certified optimal only when the deterministic space
    was exhausted and refinement found nothing better.
    """
    require_valid(inst)
    if mode not in ("auto", "exhaustive", "heuristic"):
        raise ValueError(f"unknown mode {mode!r}")
    sup = support(inst)
    probs = np.asarray(support_probs(inst))
    memberships = family.memberships(sup)
    for x, mem in zip(sup, memberships):
        if not mem:
            raise ValueError(f"support tuple {tuple_label(x)} is in no family set")
    class_ids, class_counts = _user_class_ids(inst)
    num_sets = len(family.sets)

    space = 1
    for mem in memberships:
        space *= len(mem)
        if space > EXHAUSTIVE_ASSIGNMENT_GUARD:
            break
    do_exhaustive = mode == "exhaustive" or (
        mode == "auto" and space <= EXHAUSTIVE_ASSIGNMENT_GUARD
    )
    if mode == "exhaustive" and space > EXHAUSTIVE_ASSIGNMENT_GUARD:
        raise GuardExceeded(
            f"deterministic assignment space exceeds {EXHAUSTIVE_ASSIGNMENT_GUARD}"
        )

    evals = 0
    budget_hit = False

    def assignment_value(assign: Sequence[int]) -> Tuple[float, Tuple[float, ...]]:
        nonlocal evals
        evals += 1
        rows = np.zeros((len(sup), num_sets))
        rows[np.arange(len(sup)), list(assign)] = 1.0
        return _cover_objective(probs, class_ids, class_counts, rows, base)

    best_assign: Optional[Tuple[int, ...]] = None
    best_value = math.inf
    exhausted = False

    if do_exhaustive:
        exhausted = True
        for assign in product(*memberships):
            if evals >= max_evals:
                exhausted = False
                budget_hit = True
                break
            value, _ = assignment_value(assign)
            if value < best_value - VALUE_TOLERANCE or (
                abs(value - best_value) <= VALUE_TOLERANCE
                and (best_assign is None or assign < best_assign)
            ):
                best_value, best_assign = value, tuple(assign)
    else:
        rng = random.Random(seed)
        for _ in range(restarts):
            if evals >= max_evals:
                budget_hit = True
                break
            assign = [mem[rng.randrange(len(mem))] for mem in memberships]
            value, _ = assignment_value(assign)
            improved = True
            while improved and evals < max_evals:
                improved = False
                for i, mem in enumerate(memberships):
                    current = assign[i]
                    for alt in mem:
                        if alt == current or evals >= max_evals:
                            continue
                        assign[i] = alt
                        v2, _ = assignment_value(assign)
                        if v2 < value - VALUE_TOLERANCE:
                            value = v2
                            current = alt
                            improved = True
                        else:
                            assign[i] = current
            if value < best_value - VALUE_TOLERANCE or (
                abs(value - best_value) <= VALUE_TOLERANCE
                and (best_assign is None or tuple(assign) < best_assign)
            ):
                best_value, best_assign = value, tuple(assign)

    if best_assign is None:  # zero-budget corner: fall back to first memberships
        best_assign = tuple(mem[0] for mem in memberships)
        best_value, _ = assignment_value(best_assign)
    rows = np.zeros((len(sup), num_sets))
    rows[np.arange(len(sup)), list(best_assign)] = 1.0
    refined = False
    grid = [k / REFINEMENT_GRID for k in range(1, REFINEMENT_GRID + 1)]
    improving = True
    while improving and evals < max_evals:
        improving = False
        for i, mem in enumerate(memberships):
            if len(mem) < 2:
                continue
            for m in mem:
                for delta in grid:
                    if evals >= max_evals:
                        budget_hit = True
                        break
                    candidate = rows.copy()
                    candidate[i] = (1 - delta) * candidate[i]
                    candidate[i, m] += delta
                    evals += 1
                    v2, _ = _cover_objective(probs, class_ids, class_counts, candidate, base)
                    if v2 < best_value - VALUE_TOLERANCE:
                        best_value = v2
                        rows = candidate
                        refined = True
                        improving = True

    cover = CoverDistribution(rows)
    value, per_user = _cover_objective(probs, class_ids, class_counts, rows, base)
    certified = exhausted and not refined and not budget_hit
    notes = []
    if budget_hit:
        notes.append("budget-exhausted: best-so-far reported")
    if refined:
        notes.append("simplex refinement improved on the deterministic optimum")
    return RateReport(
        name="achievable-graph-cover",
        value=value,
        base=base,
        unit=unit_name(base),
        per_user=per_user,
        witness=cover,
        method="exhaustive" if certified else "heuristic upper bound",
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# baselines and lower bounds


def _grouped_cond_entropy(inst: Instance, target, key, base: float) -> float:
    """H(target(X) | key(X)) from the source PMF; target/key are callables
    on support tuples."""
    groups: Dict[object, Dict[object, float]] = {}
    for x, p in zip(support(inst), support_probs(inst)):
        groups.setdefault(key(x), {}).setdefault(target(x), 0.0)
        groups[key(x)][target(x)] += p
    total = 0.0
    for dist in groups.values():
        mass = sum(dist.values())
        for w in dist.values():
            if w > 0:
                total -= w * math.log(w / mass)
    return max(total / math.log(base), 0.0)


def slepian_wolf_baseline(inst: Instance, base: float = 2) -> RateReport:
    """Rate sufficient for every user to recover all datasets:
    max_i H(X_{[N]} | S_i)."""
    require_valid(inst)
    per_user = tuple(
        _grouped_cond_entropy(inst, lambda x: x, lambda x, u=u: inst.side_values(u, x), base)
        for u in range(1, inst.num_users + 1)
    )
    return RateReport(
        name="slepian-wolf-baseline",
        value=max(per_user),
        base=base,
        unit=unit_name(base),
        per_user=per_user,
    )


def explicit_message_rate(
    inst: Instance, message_tables: Sequence[DemandTable], base: float = 2
) -> RateReport:
    """Entropy of an explicit broadcast message (a tuple of functions of the
    source), with a note on whether it lets each user recover all datasets."""
    require_valid(inst)
    q = inst.q
    tables = [dict(zip(all_tuples(q, inst.num_datasets), t)) for t in message_tables]
    value = entropy_of(
        joint_of_variables(inst, tables, [f"M{i}" for i in range(len(tables))]), base
    )
    notes = []
    for u in range(1, inst.num_users + 1):
        seen: Dict[object, SourceTuple] = {}
        ok = True
        for x in support(inst):
            key = (tuple(t[x] for t in tables), inst.side_values(u, x))
            if seen.setdefault(key, x) != x:
                ok = False
                break
        notes.append(f"user-{u}-recovers-all-datasets: {'yes' if ok else 'no'}")
    return RateReport(
        name="explicit-message",
        value=value,
        base=base,
        unit=unit_name(base),
        notes=tuple(notes),
    )


PROP1_INTERPRETATIONS = ("joint-demand", "residual-with-erasure")
ERASED = "erased"


def prop1_lower_bound(inst: Instance, interpretation: str, base: float = 2) -> RateReport:
    """Joint entropy of per-user demand summaries.

    ``joint-demand`` uses the demanded values themselves.  With
    ``residual-with-erasure``, a user's symbol is a distinguished erasure
    mark wherever its demand is already constant on the side-information
    class (nothing left to learn), and the demanded value elsewhere.  The
    two readings differ; reports always name the one used.
    """
    require_valid(inst)
    if interpretation not in PROP1_INTERPRETATIONS:
        raise ValueError(f"interpretation must be one of {PROP1_INTERPRETATIONS}")
    sup = support(inst)
    tables = []
    for u in range(1, inst.num_users + 1):
        if interpretation == "joint-demand":
            tables.append({x: inst.demand_value(u, x) for x in sup})
        else:
            by_class: Dict[Tuple[int, ...], set] = {}
            for x in sup:
                by_class.setdefault(inst.side_values(u, x), set()).add(inst.demand_value(u, x))
            tables.append(
                {
                    x: ERASED
                    if len(by_class[inst.side_values(u, x)]) == 1
                    else inst.demand_value(u, x)
                    for x in sup
                }
            )
    value = entropy_of(
        joint_of_variables(inst, tables, [f"F{u}" for u in range(1, inst.num_users + 1)]),
        base,
    )
    return RateReport(
        name=f"prop1-{interpretation}",
        value=value,
        base=base,
        unit=unit_name(base),
        notes=("interpretation-dependent quantity; not certified as a converse bound",),
    )


def genie_lower_bound(
    inst: Instance, ordering: Sequence[int], base: float = 2
) -> RateReport:
    """Genie-aided lower bound for one decoding order: user pi(i) gets the
    side information and decoded demands of everyone before it, so the bound
    is the sum of successive conditional demand entropies."""
    require_valid(inst)
    if sorted(ordering) != list(range(1, inst.num_users + 1)):
        raise ValueError(f"ordering {ordering} is not a permutation of [1, {inst.num_users}]")
    coords: List[int] = []
    prior_users: List[int] = []
    terms = []
    for u in ordering:
        coords_now = sorted(set(coords) | set(inst.users[u - 1].side_coords))

        def key(x, cs=tuple(coords_now), prior=tuple(prior_users)):
            return (
                tuple(x[c - 1] for c in cs),
                tuple(inst.demand_value(v, x) for v in prior),
            )

        terms.append(
            _grouped_cond_entropy(inst, lambda x, u=u: inst.demand_value(u, x), key, base)
        )
        coords = coords_now
        prior_users.append(u)
    return RateReport(
        name="genie-bound-ordering-" + ",".join(str(u) for u in ordering),
        value=sum(terms),
        base=base,
        unit=unit_name(base),
        terms=tuple(terms),
        witness=tuple(ordering),
    )


GENIE_SWEEP_GUARD = 6


def genie_best_ordering(
    inst: Instance, base: float = 2
) -> Tuple[RateReport, Dict[Tuple[int, ...], float]]:
    """Best (largest) genie bound over all user orderings; K <= 6 only."""
    require_valid(inst)
    if inst.num_users > GENIE_SWEEP_GUARD:
        raise GuardExceeded(f"ordering sweep limited to K <= {GENIE_SWEEP_GUARD}")
    values: Dict[Tuple[int, ...], float] = {}
    best: Optional[RateReport] = None
    for perm in permutations(range(1, inst.num_users + 1)):
        report = genie_lower_bound(inst, perm, base)
        values[perm] = report.value
        if best is None or report.value > best.value + VALUE_TOLERANCE:
            best = report
    return best, values


# ---------------------------------------------------------------------------
# pairwise schemes for linear-style demands


@dataclass(frozen=True)
class CompatibleScheme:
    """A single function of the datasets from which both users of a pair can
    derive their demands using their own side information."""

    pair: Tuple[int, int]
    table: DemandTable  # value per source tuple, lex order over F_q^N
    entropy_qary: float  # H(Z) in base-q symbols
    coefficients: Optional[Tuple[int, ...]] = None  # linear mode only

    def value_at(self, inst: Instance, x: SourceTuple) -> int:
        return self.table[tuple_rank(x, inst.q)]

    def decoder(self, inst: Instance, user: int) -> Dict[Tuple, int]:
        """Decode table (z, side values) -> demanded value."""
        out: Dict[Tuple, int] = {}
        for x in support(inst):
            out[(self.value_at(inst, x), inst.side_values(user, x))] = inst.demand_value(user, x)
        return out


def _determines(inst: Instance, table: Sequence[int], user: int) -> bool:
    """Does (table(x), side_user(x)) determine the user's demand on support?"""
    seen: Dict[Tuple, int] = {}
    for x in support(inst):
        key = (table[tuple_rank(x, inst.q)], inst.side_values(user, x))
        want = inst.demand_value(user, x)
        if seen.setdefault(key, want) != want:
            return False
    return True


def _table_entropy_qary(inst: Instance, table: Sequence[int]) -> float:
    dist: Dict[int, float] = {}
    for x, p in zip(support(inst), support_probs(inst)):
        z = table[tuple_rank(x, inst.q)]
        dist[z] = dist.get(z, 0.0) + p
    return max(-sum(p * math.log(p) for p in dist.values() if p > 0) / math.log(inst.q), 0.0)


def _linear_table(inst: Instance, coeffs: Sequence[int]) -> DemandTable:
    q = inst.q
    return tuple(
        sum(c * d for c, d in zip(coeffs, x)) % q for x in all_tuples(q, inst.num_datasets)
    )


def find_compatible_function(
    inst: Instance, pair: Tuple[int, int], mode: str = "linear"
) -> Optional[CompatibleScheme]:
    """Search for a minimum-entropy function Z with decode maps for both
    users of ``pair``.

    ``linear`` scans coefficient vectors over F_q^N with the first nonzero
    coefficient normalized to 1 (scalar multiples are equivalent).
    ``exhaustive`` scans all q^(q^N) tables, guarded at 10^7.
    """
    require_valid(inst)
    i1, i2 = pair
    if i1 == i2 or not all(1 <= u <= inst.num_users for u in pair):
        raise ValueError(f"need two distinct user indices in [1, {inst.num_users}], got {pair}")
    q, n = inst.q, inst.num_datasets

    best: Optional[CompatibleScheme] = None

    def consider(table: DemandTable, coeffs: Optional[Tuple[int, ...]]) -> None:
        nonlocal best
        if not (_determines(inst, table, i1) and _determines(inst, table, i2)):
            return
        h = _table_entropy_qary(inst, table)
        if best is None or h < best.entropy_qary - VALUE_TOLERANCE:
            best = CompatibleScheme((i1, i2), table, h, coeffs)

    if mode == "linear":
        # canonical representatives up to scalar: first nonzero coefficient 1;
        # the all-zero vector stays in as the constant function
        for coeffs in product(range(q), repeat=n):
            nz = [c for c in coeffs if c]
            if nz and nz[0] != 1:
                continue
            consider(_linear_table(inst, coeffs), coeffs)
    elif mode == "exhaustive":
        table_count = q ** (q ** n)
        if table_count > FUNCTION_SEARCH_GUARD:
            raise GuardExceeded(
                f"{q}^({q}^{n}) = {table_count} tables exceeds search guard "
                f"{FUNCTION_SEARCH_GUARD}"
            )
        for table in product(range(q), repeat=q ** n):
            consider(table, None)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return best


def _conv_self_qary(inst: Instance, table: DemandTable) -> float:
    """Entropy (base q) of the mod-q sum of two independent copies of a
    function of the source."""
    q = inst.q
    dist = [0.0] * q
    for x, p in zip(support(inst), support_probs(inst)):
        dist[table[tuple_rank(x, q)]] += p
    conv = [0.0] * q
    for a in range(q):
        for b in range(q):
            conv[(a + b) % q] += dist[a] * dist[b]
    return max(-sum(p * math.log(p) for p in conv if p > 0) / math.log(q), 0.0)


def _recoverable(inst: Instance, target: DemandTable, user: int) -> bool:
    """Can (demand_user(x), side_user(x)) reproduce target(x) on support?"""
    seen: Dict[Tuple, int] = {}
    q = inst.q
    for x in support(inst):
        key = (inst.demand_value(user, x), inst.side_values(user, x))
        want = target[tuple_rank(x, q)]
        if seen.setdefault(key, want) != want:
            return False
    return True


def split_scheme_rate(
    inst: Instance,
    scheme_12: CompatibleScheme,
    scheme_23: CompatibleScheme,
    scheme_13: CompatibleScheme,
    base: Optional[float] = None,
) -> RateReport:
    """Rate of the three-message splitting construction for K = 3.

    Each dataset block is split into two half-length pieces; the messages
    are the (1,2)-compatible function on the first half, the
    (2,3)-compatible function on the second half, and the positionwise sum
    of the (1,3)-compatible function over both halves.  Users decode one
    half directly and reconstruct the other by cancelling the sum message,
    so three table conditions are verified besides pair compatibility:
    users 1 and 3 must be able to rebuild the (1,3) function from their own
    decoded demand and side information.
    """
    require_valid(inst)
    if inst.num_users != 3:
        raise ValueError("splitting construction is defined for exactly 3 users")
    if base is None:
        base = inst.q
    for scheme, pair in ((scheme_12, (1, 2)), (scheme_23, (2, 3)), (scheme_13, (1, 3))):
        if tuple(scheme.pair) != pair:
            raise ValueError(f"expected scheme for pair {pair}, got {scheme.pair}")
        for u in pair:
            if not _determines(inst, scheme.table, u):
                raise ValueError(f"decodability check fails: pair {pair}, user {u}")
    for u in (1, 3):
        if not _recoverable(inst, scheme_13.table, u):
            raise ValueError(
                f"decodability check fails: user {u} cannot rebuild the (1,3) function "
                "from its demand and side information"
            )
    # entropies in base-q symbols, then converted to the requested base
    scale = math.log(inst.q) / math.log(base)
    h12 = _table_entropy_qary(inst, scheme_12.table) * scale
    h23 = _table_entropy_qary(inst, scheme_23.table) * scale
    h13sum = _conv_self_qary(inst, scheme_13.table) * scale
    terms = (0.5 * h12, 0.5 * h23, 0.5 * h13sum)
    return RateReport(
        name="split-scheme",
        value=sum(terms),
        base=base,
        unit=unit_name(base),
        terms=terms,
        witness=(scheme_12, scheme_23, scheme_13),
        notes=("terms are half-length message entropies",),
    )


# ---------------------------------------------------------------------------
# vector scheme


@dataclass(frozen=True, eq=False)
class VectorScheme:
    """Condition on one coordinate's value cell, send a per-cell message.

    ``cells`` partition the field values of the conditioning coordinate;
    ``messages[c]`` maps every source tuple (lex rank) to a hashable label,
    of which only tuples whose conditioning coordinate falls in cell ``c``
    are meaningful.  The rate charged is the cell-probability-weighted
    conditional message entropy; the cell-selector sequence itself is
    treated as shared context and not charged.
    """

    coordinate: int  # 1-based
    cells: Tuple[Tuple[int, ...], ...]
    messages: Tuple[Tuple, ...]


def build_vector_scheme(
    inst: Instance,
    coordinate: int,
    cells: Sequence[Sequence[int]],
    message_exprs: Sequence[Sequence[str]],
) -> VectorScheme:
    """Vector scheme whose per-cell message is a tuple of expression values."""
    from .model import demand_table

    q, n = inst.q, inst.num_datasets
    messages = []
    for exprs in message_exprs:
        tables = [demand_table(e, q, n) for e in exprs]
        messages.append(tuple(zip(*tables)) if tables else tuple(() for _ in range(q ** n)))
    return VectorScheme(coordinate, tuple(tuple(c) for c in cells), tuple(messages))


def validate_vector_scheme(inst: Instance, scheme: VectorScheme) -> List[str]:
    violations = []
    q = inst.q
    if not 1 <= scheme.coordinate <= inst.num_datasets:
        violations.append(f"coordinate {scheme.coordinate} out of range")
        return violations
    seen: List[int] = []
    for cell in scheme.cells:
        seen.extend(cell)
    if sorted(seen) != list(range(q)):
        violations.append(f"cells {scheme.cells} do not partition the {q} field values")
    if len(scheme.messages) != len(scheme.cells):
        violations.append("one message table per cell required")
        return violations
    j = scheme.coordinate - 1
    for ci, (cell, table) in enumerate(zip(scheme.cells, scheme.messages)):
        members = [x for x in support(inst) if x[j] in cell]
        for u in range(1, inst.num_users + 1):
            first: Dict[Tuple, SourceTuple] = {}
            for x in members:
                key = (table[tuple_rank(x, q)], inst.side_values(u, x))
                other = first.setdefault(key, x)
                if inst.demand_value(u, other) != inst.demand_value(u, x):
                    violations.append(
                        f"cell {ci} fails for user {u}: tuples {tuple_label(other)} and "
                        f"{tuple_label(x)} share a message and side information but demand "
                        "different values"
                    )
                    break
    return violations


def vector_scheme_rate(
    inst: Instance, scheme: VectorScheme, base: Optional[float] = None
) -> RateReport:
    """Cell-probability-weighted conditional entropy of the cell messages."""
    require_valid(inst)
    violations = validate_vector_scheme(inst, scheme)
    if violations:
        raise ValueError("vector scheme invalid: " + "; ".join(violations))
    if base is None:
        base = inst.q
    q = inst.q
    j = scheme.coordinate - 1
    cell_probs = []
    cell_entropies = []
    for cell, table in zip(scheme.cells, scheme.messages):
        mass = 0.0
        dist: Dict[object, float] = {}
        for x, p in zip(support(inst), support_probs(inst)):
            if x[j] in cell:
                mass += p
                label = table[tuple_rank(x, q)]
                dist[label] = dist.get(label, 0.0) + p
        cell_probs.append(mass)
        if mass > 0:
            h = -sum(p / mass * math.log(p / mass) for p in dist.values() if p > 0)
            cell_entropies.append(max(h / math.log(base), 0.0))
        else:
            cell_entropies.append(0.0)
    value = sum(p * h for p, h in zip(cell_probs, cell_entropies))
    return RateReport(
        name="vector-scheme",
        value=value,
        base=base,
        unit=unit_name(base),
        terms=tuple(cell_entropies),
        witness=scheme,
        notes=("cell weights: " + ",".join(f"{p:.6f}" for p in cell_probs),),
    )
