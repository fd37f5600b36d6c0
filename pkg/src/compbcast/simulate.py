"""Operational simulation of the compress-bin broadcast scheme.

The master draws a length-n source block, scans a random codebook of
independent-set label sequences for one jointly typical with the block
(ties broken uniformly; index 0 is reserved as the "nothing found"
sentinel), and broadcasts the codeword's bin index.  Each user searches its
bin for the unique codeword typical with its own side-information sequence
and reads its demand off the label at every position.  Per-user failures
are classified, on actual demand error only, as:

* ``er1`` - the encoder found no typical codeword,
* ``er2`` - the selected codeword is atypical at the decoder slack,
* ``er3`` - bin resolution failed (none / several candidates, or a wrong
  codeword survived).

All randomness is counter-based (:mod:`compbcast.rng`), so results are
bit-reproducible for a fixed seed, identical across backends, and trials
may be split across threads without changing the outcome.  A compiled
kernel is used when available; set ``COMPBCAST_PURE=1`` to force the
pure-Python fallback.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .entropy import conditional_mutual_information, push_channel, side_axes
from . import rng
from .errors import GuardExceeded
from .mis import MISFamily, validate_cover
from .model import Instance, require_valid, support, support_probs, tuple_label
from .oracle import Partition, decode_check
from .rates import CoverDistribution

CODEBOOK_GUARD = 10 ** 7

_ERR_NAMES = {0: "", 1: "er1", 2: "er2", 3: "er3"}


def _load_compiled():
    if os.environ.get("COMPBCAST_PURE"):
        return None
    try:
        from . import _binning  # compiled extension

        return _binning
    except ImportError:
        return None


_COMPILED = _load_compiled()


def available_backends() -> Tuple[str, ...]:
    return ("compiled", "python") if _COMPILED is not None else ("python",)


def default_backend() -> str:
    return "compiled" if _COMPILED is not None else "python"


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SimConfig:
    """Block length, rate exponents (per symbol, base q), typicality slacks,
    and Monte-Carlo controls.  ``codebook_rate >= bin_rate``; equality gives
    one codeword per bin (no binning gain, no bin collisions)."""

    n: int
    codebook_rate: float
    bin_rate: float
    epsilon: float
    epsilon_prime: float
    trials: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"block length must be >= 1, got {self.n}")
        if not self.codebook_rate >= self.bin_rate >= 0:
            raise ValueError(
                f"need codebook_rate >= bin_rate >= 0, got {self.codebook_rate}, {self.bin_rate}"
            )
        if not self.epsilon > self.epsilon_prime > 0:
            raise ValueError(
                f"need epsilon > epsilon_prime > 0, got {self.epsilon}, {self.epsilon_prime}"
            )
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


def codebook_size(q: int, cfg: SimConfig) -> int:
    return max(1, int(round(q ** (cfg.n * cfg.codebook_rate))))


def bin_count(q: int, cfg: SimConfig) -> int:
    return max(1, min(int(round(q ** (cfg.n * cfg.bin_rate))), codebook_size(q, cfg)))


def suggest_rates(
    inst: Instance, family: MISFamily, cover: CoverDistribution, margin: float = 0.2
) -> Tuple[float, float]:
    """Codebook and bin rates ``margin`` above the covering / decoding
    thresholds I(X; W) and max_i I(X; W | S_i), in base-q symbols."""
    joint = push_channel(inst, cover.rows.tolist(), cover.rows.shape[1])
    q = inst.q
    x_axes = [f"X{j}" for j in range(1, inst.num_datasets + 1)]
    i_xw = conditional_mutual_information(joint, x_axes, ["W"], (), q)
    worst = max(
        conditional_mutual_information(
            joint, x_axes, ["W"], list(side_axes(inst, u)), q
        )
        for u in range(1, inst.num_users + 1)
    )
    return i_xw + margin, worst + margin


# ---------------------------------------------------------------------------
# typicality


def typicality_check(seq_a: Sequence, seq_b: Sequence, joint: Dict, slack: float) -> bool:
    """Strong (frequency) typicality of a paired sequence against a joint
    PMF: every pair's empirical frequency is within ``slack`` times its
    reference probability, and zero-probability pairs never occur."""
    if len(seq_a) != len(seq_b):
        raise ValueError(f"length mismatch: {len(seq_a)} vs {len(seq_b)}")
    n = len(seq_a)
    counts: Dict = {}
    for pair in zip(seq_a, seq_b):
        counts[pair] = counts.get(pair, 0) + 1
    for pair, c in counts.items():
        if joint.get(pair, 0.0) <= 0.0:
            return False
    for pair, p in joint.items():
        if p <= 0.0:
            continue
        if abs(counts.get(pair, 0) / n - p) > slack * p + 1e-12:
            return False
    return True


def _boxes(joint: np.ndarray, n: int, slack: float):
    """Integer count windows implementing the typicality criterion."""
    forbidden = (joint <= 0).astype(np.uint8)
    lo = np.ceil((1 - slack) * n * joint - 1e-9).astype(np.int32)
    up = np.floor((1 + slack) * n * joint + 1e-9).astype(np.int32)
    lo = np.clip(lo, 0, None)
    up = np.minimum(up, n)
    lo[forbidden == 1] = 0
    up[forbidden == 1] = 0
    return forbidden, lo, up


# ---------------------------------------------------------------------------
# plan construction


@dataclass(eq=False)
class BinningPlan:
    """Precomputed arrays consumed by the trial kernels."""

    n: int
    num_codewords: int
    num_bins: int
    num_users: int
    num_support: int
    num_labels: int
    src_cdf: np.ndarray
    w_cdf: np.ndarray
    enc_forbidden: np.ndarray  # eps'-boxes over (w, x) for encoding
    enc_lo: np.ndarray
    enc_up: np.ndarray
    enc2_forbidden: np.ndarray  # eps-boxes over (w, x) for the er2 check
    enc2_lo: np.ndarray
    enc2_up: np.ndarray
    x_lo_sum: np.ndarray  # per-x feasibility of the encoder boxes
    x_up_sum: np.ndarray
    class_of: np.ndarray  # [K, S] side-information class ids
    dec_forbidden: np.ndarray  # [K, M, Cmax] eps-boxes over (w, class)
    dec_lo: np.ndarray
    dec_up: np.ndarray
    est: np.ndarray  # [K, M, Cmax] decoded demand per (label, class)
    est_ok: np.ndarray
    truth: np.ndarray  # [K, S] demanded values


def build_plan(
    inst: Instance, family: MISFamily, cover: CoverDistribution, cfg: SimConfig
) -> BinningPlan:
    require_valid(inst)
    sup = support(inst)
    probs = np.asarray(support_probs(inst))
    report = validate_cover(family, cover.rows.tolist(), sup)
    if not report.ok:
        raise ValueError(f"cover does not validate:\n{report}")
    num_codewords = codebook_size(inst.q, cfg)
    if num_codewords > CODEBOOK_GUARD:
        raise GuardExceeded(
            f"codebook of {num_codewords} sequences exceeds guard {CODEBOOK_GUARD}"
        )
    num_bins = bin_count(inst.q, cfg)

    s_count = len(sup)
    m_count = len(family.sets)
    joint = cover.rows.T * probs[None, :]  # [M, S] mass of (w, x)
    w_marg = joint.sum(axis=1)
    src_cdf = np.cumsum(probs)
    src_cdf[-1] = max(src_cdf[-1], 1.0)
    w_cdf = np.cumsum(w_marg)
    w_cdf[-1] = max(w_cdf[-1], 1.0)

    enc_forbidden, enc_lo, enc_up = _boxes(joint, cfg.n, cfg.epsilon_prime)
    enc2_forbidden, enc2_lo, enc2_up = _boxes(joint, cfg.n, cfg.epsilon)
    allowed = enc_forbidden == 0
    x_lo_sum = (enc_lo * allowed).sum(axis=0).astype(np.int32)
    x_up_sum = (enc_up * allowed).sum(axis=0).astype(np.int32)

    k = inst.num_users
    class_maps: List[Dict[Tuple[int, ...], int]] = []
    class_of = np.zeros((k, s_count), dtype=np.int32)
    for u in range(1, k + 1):
        seen: Dict[Tuple[int, ...], int] = {}
        for i, x in enumerate(sup):
            class_of[u - 1, i] = seen.setdefault(inst.side_values(u, x), len(seen))
        class_maps.append(seen)
    c_max = max(len(m) for m in class_maps)

    dec_forbidden = np.ones((k, m_count, c_max), dtype=np.uint8)
    dec_lo = np.zeros((k, m_count, c_max), dtype=np.int32)
    dec_up = np.zeros((k, m_count, c_max), dtype=np.int32)
    est = np.zeros((k, m_count, c_max), dtype=np.int32)
    est_ok = np.zeros((k, m_count, c_max), dtype=np.uint8)
    truth = np.zeros((k, s_count), dtype=np.int32)
    set_members = [set(s) for s in family.sets]
    for u in range(k):
        c_count = len(class_maps[u])
        ws = np.zeros((m_count, c_count))
        for i in range(s_count):
            ws[:, class_of[u, i]] += joint[:, i]
        fb, lo, up = _boxes(ws, cfg.n, cfg.epsilon)
        dec_forbidden[u, :, :c_count] = fb
        dec_lo[u, :, :c_count] = lo
        dec_up[u, :, :c_count] = up
        for i, x in enumerate(sup):
            truth[u, i] = inst.demand_value(u + 1, x)
        for w, members in enumerate(set_members):
            per_class: Dict[int, set] = {}
            for i, x in enumerate(sup):
                if x in members:
                    per_class.setdefault(int(class_of[u, i]), set()).add(int(truth[u, i]))
            for c, vals in per_class.items():
                if len(vals) == 1:
                    est[u, w, c] = vals.pop()
                    est_ok[u, w, c] = 1

    return BinningPlan(
        n=cfg.n,
        num_codewords=num_codewords,
        num_bins=num_bins,
        num_users=k,
        num_support=s_count,
        num_labels=m_count,
        src_cdf=src_cdf.astype(np.float64),
        w_cdf=w_cdf.astype(np.float64),
        enc_forbidden=enc_forbidden,
        enc_lo=enc_lo,
        enc_up=enc_up,
        enc2_forbidden=enc2_forbidden,
        enc2_lo=enc2_lo,
        enc2_up=enc2_up,
        x_lo_sum=x_lo_sum,
        x_up_sum=x_up_sum,
        class_of=class_of,
        dec_forbidden=dec_forbidden,
        dec_lo=dec_lo,
        dec_up=dec_up,
        est=est,
        est_ok=est_ok,
        truth=truth,
    )


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class UserErrorCounts:
    er1: int
    er2: int
    er3: int
    demand_errors: int

    def rates(self, trials: int) -> Tuple[float, float, float, float]:
        return (
            self.er1 / trials,
            self.er2 / trials,
            self.er3 / trials,
            self.demand_errors / trials,
        )


@dataclass(frozen=True)
class SimTrace:
    trial: int
    l_star: int
    m_star: int
    decoded: Tuple[int, ...]  # per user; -1 none found, -2 ambiguous
    errors: Tuple[str, ...]  # per user; "", "er1", "er2" or "er3"


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    backend: str
    num_codewords: int
    num_bins: int
    per_user: Tuple[UserErrorCounts, ...]
    total_error_trials: int
    traces: Optional[Tuple[SimTrace, ...]] = None

    @property
    def total_error_rate(self) -> float:
        return self.total_error_trials / self.config.trials

    def describe(self) -> str:
        cfg = self.config
        lines = [
            f"n={cfg.n} codewords={self.num_codewords} bins={self.num_bins} "
            f"trials={cfg.trials} backend={self.backend}",
            f"total error rate (any user wrong): {self.total_error_rate:.6f}",
        ]
        for i, u in enumerate(self.per_user, start=1):
            e1, e2, e3, de = u.rates(cfg.trials)
            lines.append(
                f"user {i}: er1={e1:.6f} er2={e2:.6f} er3={e3:.6f} demand-error={de:.6f}"
            )
        return "\n".join(lines)

    def summary_csv_row(self) -> List[str]:
        cfg = self.config
        row = [
            "summary",
            str(cfg.n),
            repr(cfg.codebook_rate),
            repr(cfg.bin_rate),
            "",
            "",
        ]
        row.extend(
            f"{name}={value}"
            for u in self.per_user
            for name, value in zip(("er1", "er2", "er3", "demand"), (u.er1, u.er2, u.er3, u.demand_errors))
        )
        return row

    def traces_csv(self) -> str:
        """CSV of per-trial records plus one summary row."""
        buf = io.StringIO()
        header = ["trial", "n", "codebook_rate", "bin_rate", "l_star", "m_star"]
        for i in range(1, len(self.per_user) + 1):
            header.extend([f"user{i}_decoded", f"user{i}_error"])
        buf.write(",".join(header) + "\n")
        cfg = self.config
        if self.traces:
            for t in self.traces:
                row = [
                    str(t.trial),
                    str(cfg.n),
                    repr(cfg.codebook_rate),
                    repr(cfg.bin_rate),
                    str(t.l_star),
                    str(t.m_star),
                ]
                for dec, err in zip(t.decoded, t.errors):
                    row.extend([str(dec), err])
                buf.write(",".join(row) + "\n")
        buf.write(",".join(self.summary_csv_row()) + "\n")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# simulation driver


def binning_simulate(
    inst: Instance,
    family: MISFamily,
    cover: CoverDistribution,
    cfg: SimConfig,
    collect_traces: bool = False,
    backend: Optional[str] = None,
    threads: int = 1,
) -> SimReport:
    """Monte-Carlo run of the compress-bin scheme under ``cfg``.

    Trials are independent streams, so ``threads > 1`` splits the trial
    range without changing any outcome.
    """
    plan = build_plan(inst, family, cover, cfg)
    if backend is None:
        backend = default_backend()
    if backend == "compiled":
        if _COMPILED is None:
            raise ValueError("compiled backend unavailable; rebuild the extension")
        runner = _COMPILED.run_trials
    elif backend == "python":
        from . import _binning_py

        runner = _binning_py.run_trials
    else:
        raise ValueError(f"unknown backend {backend!r}")

    ranges: List[Tuple[int, int]] = []
    threads = max(1, int(threads))
    chunk = max(1, math.ceil(cfg.trials / threads))
    start = 0
    while start < cfg.trials:
        ranges.append((start, min(chunk, cfg.trials - start)))
        start += chunk

    if len(ranges) == 1:
        results = [runner(plan, cfg.seed, 0, cfg.trials, collect_traces)]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            futures = [
                pool.submit(runner, plan, cfg.seed, t0, cnt, collect_traces)
                for t0, cnt in ranges
            ]
            results = [f.result() for f in futures]

    counts = np.zeros((plan.num_users, 4), dtype=np.int64)
    total_any = 0
    trace_rows: List[np.ndarray] = []
    for user_counts, any_err, traces in results:
        counts += user_counts
        total_any += int(any_err)
        if collect_traces and traces is not None:
            trace_rows.append(traces)

    traces_out: Optional[Tuple[SimTrace, ...]] = None
    if collect_traces:
        merged = np.concatenate(trace_rows, axis=0) if trace_rows else np.zeros((0, 2))
        out = []
        for trial, row in enumerate(merged):
            decoded = tuple(int(row[2 + 2 * u]) for u in range(plan.num_users))
            errors = tuple(_ERR_NAMES[int(row[3 + 2 * u])] for u in range(plan.num_users))
            out.append(SimTrace(trial, int(row[0]), int(row[1]), decoded, errors))
        traces_out = tuple(out)

    per_user = tuple(
        UserErrorCounts(int(c[0]), int(c[1]), int(c[2]), int(c[3])) for c in counts
    )
    return SimReport(
        config=cfg,
        backend=backend,
        num_codewords=plan.num_codewords,
        num_bins=plan.num_bins,
        per_user=per_user,
        total_error_trials=total_any,
        traces=traces_out,
    )


# ---------------------------------------------------------------------------
# exact single-shot execution


@dataclass(frozen=True)
class SingleShotRow:
    x: Tuple[int, ...]
    cell: int
    decoded: Tuple[int, ...]


def single_shot_execute(inst: Instance, scheme, family: Optional[MISFamily] = None):
    """Run a deterministic scheme exactly once over every support tuple and
    verify every user decodes its demand.

    ``scheme`` is a :class:`Partition` or a deterministic
    :class:`CoverDistribution` (``family`` required to resolve labels).
    Raises ``ValueError`` with the violating tuple on any mismatch.
    """
    require_valid(inst)
    sup = support(inst)
    if isinstance(scheme, CoverDistribution):
        if family is None:
            raise ValueError("family required to interpret a cover")
        if not scheme.is_deterministic():
            raise ValueError("single-shot execution needs a deterministic cover")
        assign = scheme.assignment()
        cells: Dict[int, List] = {}
        for x, a in zip(sup, assign):
            cells.setdefault(a, []).append(x)
        partition = Partition.from_cells(list(cells.values()))
    elif isinstance(scheme, Partition):
        partition = scheme
    else:
        raise TypeError(f"expected Partition or CoverDistribution, got {type(scheme)!r}")

    report = decode_check(inst, partition)
    if not report.ok:
        raise ValueError(f"scheme is not decodable:\n{report}")

    labels = partition.labels(sup)
    decoders: List[Dict[Tuple, int]] = []
    for u in range(1, inst.num_users + 1):
        table: Dict[Tuple, int] = {}
        for x, lab in zip(sup, labels):
            table[(lab, inst.side_values(u, x))] = inst.demand_value(u, x)
        decoders.append(table)

    rows = []
    for x, lab in zip(sup, labels):
        decoded = []
        for u in range(1, inst.num_users + 1):
            got = decoders[u - 1][(lab, inst.side_values(u, x))]
            want = inst.demand_value(u, x)
            if got != want:
                raise ValueError(
                    f"user {u} decodes {got} instead of {want} at {tuple_label(x)}"
                )
            decoded.append(got)
        rows.append(SingleShotRow(x, lab, tuple(decoded)))
    return rows
