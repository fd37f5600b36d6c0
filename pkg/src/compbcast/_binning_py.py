"""Pure-Python / numpy fallback kernel for the compress-bin simulator.

Implements exactly the same counter-based trial semantics as the compiled
extension (see ``_binning.pyx``); the two are interchangeable and produce
bit-identical counts and traces.  Codeword scans are vectorized in chunks:
a cheap per-position "forbidden pair" cut kills most codewords early, and
only the survivors get the exact count-window check.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from . import rng

_CHUNK = 1 << 15


def _scan_typical(
    tbase: int,
    lo_l: int,
    hi_l: int,
    cond_ids: np.ndarray,
    forbidden: np.ndarray,
    lo: np.ndarray,
    up: np.ndarray,
    w_cdf: np.ndarray,
    need: Optional[int] = None,
) -> List[int]:
    """Ascending list of codeword indices in [lo_l, hi_l] whose symbol
    sequence is typical with ``cond_ids`` under the given count windows.
    Stops early once ``need`` indices are found."""
    n = len(cond_ids)
    m, ncond = forbidden.shape
    out: List[int] = []
    start = lo_l
    while start <= hi_l:
        stop = min(start + _CHUNK - 1, hi_l)
        ls = np.arange(start, stop + 1, dtype=np.uint64)
        cbases = rng.stream_base_np(tbase, ls + np.uint64(rng.CODEWORD_STREAM_BASE))
        size = len(ls)
        syms = np.zeros((size, n), dtype=np.int64)
        alive = np.arange(size)
        for t in range(n):
            u = rng.uniform_np(cbases[alive], t)
            s = np.minimum(np.searchsorted(w_cdf, u, side="right"), m - 1)
            syms[alive, t] = s
            keep = forbidden[s, cond_ids[t]] == 0
            alive = alive[keep]
            if alive.size == 0:
                break
        if alive.size:
            rows = syms[alive]
            ids = rows * ncond + cond_ids[None, :]
            offsets = (np.arange(alive.size) * (m * ncond))[:, None]
            counts = np.bincount(
                (ids + offsets).ravel(), minlength=alive.size * m * ncond
            ).reshape(alive.size, m, ncond)
            ok = ((counts >= lo[None]) & (counts <= up[None])).all(axis=(1, 2))
            for idx in alive[ok]:
                out.append(int(ls[idx]))
                if need is not None and len(out) >= need:
                    return out
        start = stop + 1
    return out


def _codeword_typical_scalar(
    tbase: int,
    l: int,
    cond_ids: np.ndarray,
    forbidden: np.ndarray,
    lo: np.ndarray,
    up: np.ndarray,
    w_cdf: np.ndarray,
) -> bool:
    cbase = rng.stream_base(tbase, rng.CODEWORD_STREAM_BASE + l)
    m, ncond = forbidden.shape
    counts = np.zeros((m, ncond), dtype=np.int64)
    for t, c in enumerate(cond_ids):
        w = rng.draw_symbol(w_cdf, cbase, t)
        if forbidden[w, c]:
            return False
        counts[w, c] += 1
        if counts[w, c] > up[w, c]:
            return False
    return bool((counts >= lo).all())


def _codeword_symbols(tbase: int, l: int, n: int, w_cdf: np.ndarray) -> List[int]:
    cbase = rng.stream_base(tbase, rng.CODEWORD_STREAM_BASE + l)
    return [rng.draw_symbol(w_cdf, cbase, t) for t in range(n)]


def run_trials(
    plan, seed: int, trial_start: int, num_trials: int, collect_traces: bool = False
) -> Tuple[np.ndarray, int, Optional[np.ndarray]]:
    """Run ``num_trials`` trials starting at ``trial_start``.

    Returns per-user counts [K, 4] of (er1, er2, er3, demand errors), the
    number of trials where any user erred, and optionally an int64 trace
    matrix with rows (l*, m*, decoded_1, err_1, ..., decoded_K, err_K).
    """
    n = plan.n
    num_codewords = plan.num_codewords
    num_bins = plan.num_bins
    k_users = plan.num_users
    src_cdf = plan.src_cdf
    w_cdf = plan.w_cdf
    sbase = rng.seed_base(seed)

    counts = np.zeros((k_users, 4), dtype=np.int64)
    total_any = 0
    traces = (
        np.zeros((num_trials, 2 + 2 * k_users), dtype=np.int64) if collect_traces else None
    )

    for local in range(num_trials):
        trial = trial_start + local
        tbase = rng.trial_base(sbase, trial)
        src_base = rng.stream_base(tbase, rng.STREAM_SOURCE)
        xs = np.array(
            [rng.draw_symbol(src_cdf, src_base, t) for t in range(n)], dtype=np.int64
        )

        # composition feasibility: box windows already rule out any codeword
        # when some source value appears too often or not often enough
        xcnt = np.bincount(xs, minlength=plan.num_support)
        feasible = bool(
            np.all(xcnt >= plan.x_lo_sum) and np.all(xcnt <= plan.x_up_sum)
        )

        typical: List[int] = []
        if feasible and num_codewords > 1:
            typical = _scan_typical(
                tbase, 1, num_codewords - 1, xs, plan.enc_forbidden, plan.enc_lo,
                plan.enc_up, w_cdf,
            )
        if typical:
            tie_base = rng.stream_base(tbase, rng.STREAM_TIEBREAK)
            l_star = typical[0]
            for i in range(2, len(typical) + 1):
                if rng.uniform(tie_base, i) * i < 1.0:
                    l_star = typical[i - 1]
        else:
            l_star = 0
        m_star = (l_star * num_bins) // num_codewords
        bin_lo = (m_star * num_codewords + num_bins - 1) // num_bins
        bin_hi = ((m_star + 1) * num_codewords + num_bins - 1) // num_bins - 1

        l_star_eps_typical: Optional[bool] = None  # lazily evaluated er2 test
        any_err = False
        if collect_traces:
            traces[local, 0] = l_star
            traces[local, 1] = m_star
        for u in range(k_users):
            cond = plan.class_of[u, xs]
            found = _scan_typical(
                tbase, bin_lo, bin_hi, cond, plan.dec_forbidden[u], plan.dec_lo[u],
                plan.dec_up[u], w_cdf, need=2,
            )
            if len(found) == 1:
                lhat = found[0]
                demand_err = False
                cbase = rng.stream_base(tbase, rng.CODEWORD_STREAM_BASE + lhat)
                for t in range(n):
                    w = rng.draw_symbol(w_cdf, cbase, t)
                    c = cond[t]
                    if not plan.est_ok[u, w, c] or plan.est[u, w, c] != plan.truth[u, xs[t]]:
                        demand_err = True
                        break
            else:
                lhat = -1 if not found else -2
                demand_err = True

            err_class = 0
            if demand_err:
                any_err = True
                counts[u, 3] += 1
                if l_star == 0:
                    err_class = 1
                else:
                    if l_star_eps_typical is None:
                        l_star_eps_typical = _codeword_typical_scalar(
                            tbase, l_star, xs, plan.enc2_forbidden, plan.enc2_lo,
                            plan.enc2_up, w_cdf,
                        )
                    err_class = 2 if not l_star_eps_typical else 3
                counts[u, err_class - 1] += 1
            if collect_traces:
                traces[local, 2 + 2 * u] = lhat
                traces[local, 3 + 2 * u] = err_class
        if any_err:
            total_any += 1

    return counts, total_any, traces
