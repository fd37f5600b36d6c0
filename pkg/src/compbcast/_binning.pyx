# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled trial kernel for the compress-bin simulator.

Implements the counter-based stream contract of ``compbcast.rng`` and the
exact trial semantics of ``compbcast._binning_py``; the backends produce
bit-identical counts and traces.  The per-codeword scan exits on the first
forbidden pair or count-window overflow, which is what makes large
codebooks tractable.
"""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

cdef uint64_t C_SEED = 0x9E3779B97F4A7C15UL
cdef uint64_t C_SEED_ADD = 0x243F6A8885A308D3UL
cdef uint64_t C_TRIAL = 0xD1342543DE82EF95UL
cdef uint64_t C_STREAM = 0x94D049BB133111EBUL
cdef uint64_t C_COUNTER = 0xBF58476D1CE4E5B9UL
cdef uint64_t CODEWORD_STREAM_BASE = 16UL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9UL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBUL
    return z ^ (z >> 31)


cdef inline double u01(uint64_t cbase, uint64_t counter) nogil:
    return <double>(mix64(cbase + counter * C_COUNTER) >> 11) * INV_2_53


cdef inline int draw_symbol(const double* cdf, int m, uint64_t cbase, uint64_t counter) nogil:
    cdef double u = u01(cbase, counter)
    cdef int i
    for i in range(m):
        if u < cdf[i]:
            return i
    return m - 1


cdef inline bint codeword_typical(uint64_t tbase, int64_t l, int n,
                                  const int32_t* cond,
                                  const uint8_t* forbidden,
                                  const int32_t* lo, const int32_t* up,
                                  int ncond,
                                  const double* wcdf, int m,
                                  int32_t* cnt, int32_t* touched) nogil:
    """Typicality of codeword ``l`` against the per-position conditioning
    ids in ``cond``; ``cnt`` must be all zeros on entry and is restored."""
    cdef uint64_t cbase = mix64(tbase + (CODEWORD_STREAM_BASE + <uint64_t>l) * C_STREAM)
    cdef int t, w, idx, i, ntouched = 0
    cdef bint ok = True
    for t in range(n):
        w = draw_symbol(wcdf, m, cbase, <uint64_t>t)
        idx = w * ncond + cond[t]
        if forbidden[idx]:
            ok = False
            break
        cnt[idx] += 1
        touched[ntouched] = idx
        ntouched += 1
        if cnt[idx] > up[idx]:
            ok = False
            break
    if ok:
        for idx in range(m * ncond):
            if cnt[idx] < lo[idx]:
                ok = False
                break
    for i in range(ntouched):
        cnt[touched[i]] = 0
    return ok


def run_trials(plan, seed, trial_start, num_trials, collect_traces=False):
    """Compiled counterpart of ``_binning_py.run_trials`` (same signature,
    same results)."""
    cdef int n = plan.n
    cdef int64_t ncode = plan.num_codewords
    cdef int64_t nbins = plan.num_bins
    cdef int nusers = plan.num_users
    cdef int nsup = plan.num_support
    cdef int nlab = plan.num_labels

    cdef double[::1] src_cdf = np.ascontiguousarray(plan.src_cdf, dtype=np.float64)
    cdef double[::1] w_cdf = np.ascontiguousarray(plan.w_cdf, dtype=np.float64)
    cdef uint8_t[:, ::1] enc_forbidden = np.ascontiguousarray(plan.enc_forbidden, dtype=np.uint8)
    cdef int32_t[:, ::1] enc_lo = np.ascontiguousarray(plan.enc_lo, dtype=np.int32)
    cdef int32_t[:, ::1] enc_up = np.ascontiguousarray(plan.enc_up, dtype=np.int32)
    cdef uint8_t[:, ::1] enc2_forbidden = np.ascontiguousarray(plan.enc2_forbidden, dtype=np.uint8)
    cdef int32_t[:, ::1] enc2_lo = np.ascontiguousarray(plan.enc2_lo, dtype=np.int32)
    cdef int32_t[:, ::1] enc2_up = np.ascontiguousarray(plan.enc2_up, dtype=np.int32)
    cdef int32_t[::1] x_lo_sum = np.ascontiguousarray(plan.x_lo_sum, dtype=np.int32)
    cdef int32_t[::1] x_up_sum = np.ascontiguousarray(plan.x_up_sum, dtype=np.int32)
    cdef int32_t[:, ::1] class_of = np.ascontiguousarray(plan.class_of, dtype=np.int32)
    cdef uint8_t[:, :, ::1] dec_forbidden = np.ascontiguousarray(plan.dec_forbidden, dtype=np.uint8)
    cdef int32_t[:, :, ::1] dec_lo = np.ascontiguousarray(plan.dec_lo, dtype=np.int32)
    cdef int32_t[:, :, ::1] dec_up = np.ascontiguousarray(plan.dec_up, dtype=np.int32)
    cdef int32_t[:, :, ::1] est = np.ascontiguousarray(plan.est, dtype=np.int32)
    cdef uint8_t[:, :, ::1] est_ok = np.ascontiguousarray(plan.est_ok, dtype=np.uint8)
    cdef int32_t[:, ::1] truth = np.ascontiguousarray(plan.truth, dtype=np.int32)
    cdef int cmax = dec_forbidden.shape[2]

    counts_arr = np.zeros((nusers, 4), dtype=np.int64)
    cdef int64_t[:, ::1] counts = counts_arr
    cdef bint want_traces = bool(collect_traces)
    traces_arr = np.zeros((num_trials if want_traces else 1, 2 + 2 * nusers), dtype=np.int64)
    cdef int64_t[:, ::1] traces = traces_arr

    xs_arr = np.zeros(n, dtype=np.int32)
    conds_arr = np.zeros(n, dtype=np.int32)
    xcnt_arr = np.zeros(nsup, dtype=np.int32)
    cnt_arr = np.zeros(nlab * max(nsup, cmax), dtype=np.int32)
    touched_arr = np.zeros(n, dtype=np.int32)
    cdef int32_t[::1] xs = xs_arr
    cdef int32_t[::1] conds = conds_arr
    cdef int32_t[::1] xcnt = xcnt_arr
    cdef int32_t[::1] cnt = cnt_arr
    cdef int32_t[::1] touched = touched_arr

    cdef uint64_t sbase = mix64(<uint64_t>(<int64_t>seed) * C_SEED + C_SEED_ADD)
    cdef int64_t t0 = trial_start
    cdef int64_t ntrials = num_trials
    cdef int64_t total_any = 0

    cdef int64_t local, l, l_star, m_star, bin_lo, bin_hi, lhat, k_typ, k_found
    cdef uint64_t tbase, src_base, tie_base, cbase
    cdef int t, u, w, c, s
    cdef bint feasible, demand_err, any_err, er2_known, er2_typical
    cdef int errclass

    with nogil:
        for local in range(ntrials):
            tbase = mix64(sbase ^ (<uint64_t>(t0 + local) * C_TRIAL))
            src_base = mix64(tbase)  # stream 0
            for s in range(nsup):
                xcnt[s] = 0
            for t in range(n):
                xs[t] = draw_symbol(&src_cdf[0], nsup, src_base, <uint64_t>t)
                xcnt[xs[t]] += 1
            feasible = True
            for s in range(nsup):
                if xcnt[s] < x_lo_sum[s] or xcnt[s] > x_up_sum[s]:
                    feasible = False
                    break

            k_typ = 0
            l_star = 0
            if feasible:
                tie_base = mix64(tbase + C_STREAM)  # stream 1
                for l in range(1, ncode):
                    if codeword_typical(tbase, l, n, &xs[0], &enc_forbidden[0, 0],
                                        &enc_lo[0, 0], &enc_up[0, 0], nsup,
                                        &w_cdf[0], nlab, &cnt[0], &touched[0]):
                        k_typ += 1
                        if k_typ == 1:
                            l_star = l
                        elif u01(tie_base, <uint64_t>k_typ) * k_typ < 1.0:
                            l_star = l
            m_star = (l_star * nbins) // ncode
            bin_lo = (m_star * ncode + nbins - 1) // nbins
            bin_hi = ((m_star + 1) * ncode + nbins - 1) // nbins - 1

            er2_known = False
            er2_typical = False
            any_err = False
            if want_traces:
                traces[local, 0] = l_star
                traces[local, 1] = m_star
            for u in range(nusers):
                for t in range(n):
                    conds[t] = class_of[u, xs[t]]
                lhat = -1
                k_found = 0
                for l in range(bin_lo, bin_hi + 1):
                    if codeword_typical(tbase, l, n, &conds[0], &dec_forbidden[u, 0, 0],
                                        &dec_lo[u, 0, 0], &dec_up[u, 0, 0], cmax,
                                        &w_cdf[0], nlab, &cnt[0], &touched[0]):
                        k_found += 1
                        if k_found == 1:
                            lhat = l
                        else:
                            lhat = -2
                            break
                demand_err = True
                if k_found == 1:
                    demand_err = False
                    cbase = mix64(tbase + (CODEWORD_STREAM_BASE + <uint64_t>lhat) * C_STREAM)
                    for t in range(n):
                        w = draw_symbol(&w_cdf[0], nlab, cbase, <uint64_t>t)
                        c = conds[t]
                        if est_ok[u, w, c] == 0 or est[u, w, c] != truth[u, xs[t]]:
                            demand_err = True
                            break
                errclass = 0
                if demand_err:
                    any_err = True
                    counts[u, 3] += 1
                    if l_star == 0:
                        errclass = 1
                    else:
                        if not er2_known:
                            er2_typical = codeword_typical(
                                tbase, l_star, n, &xs[0], &enc2_forbidden[0, 0],
                                &enc2_lo[0, 0], &enc2_up[0, 0], nsup,
                                &w_cdf[0], nlab, &cnt[0], &touched[0])
                            er2_known = True
                        errclass = 2 if not er2_typical else 3
                    counts[u, errclass - 1] += 1
                if want_traces:
                    traces[local, 2 + 2 * u] = lhat
                    traces[local, 3 + 2 * u] = errclass
            if any_err:
                total_any += 1

    return counts_arr, int(total_any), (traces_arr if want_traces else None)
