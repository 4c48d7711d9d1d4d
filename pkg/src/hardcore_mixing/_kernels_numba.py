"""Numba-compiled hot kernels.

Same contracts as `_kernels_python`; the agreement is pinned by tests.  All
64-bit RNG state lives inside the kernels (uint64 scalars returned through
the python boundary get boxed as signed ints, so state never crosses it).
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _subset_scan_impl(nbr_idx, m_half, m_opp, masks):
    ms, d = nbr_idx.shape
    hist = np.zeros((ms + 1, ms + 1, m_opp + 1), dtype=np.int64)
    cover = np.zeros(m_opp, dtype=np.int64)
    na = np.uint64(0)
    one = np.uint64(1)
    g = 0
    s = 0
    cur = np.uint64(0)
    best_num = np.int64(1)
    best_den = np.int64(0)
    best_mask = np.uint64(0)
    hist[0, 0, 0] += 1
    total = np.int64(1) << np.int64(ms)
    for i in range(np.int64(1), total):
        tz = 0
        while (i >> tz) & 1 == 0:
            tz += 1
        bit = one << np.uint64(tz)
        if cur & bit:
            s -= 1
            for j in range(d):
                w = nbr_idx[tz, j]
                cover[w] -= 1
                if cover[w] == 0:
                    na &= ~(one << np.uint64(w))
                    g -= 1
        else:
            s += 1
            for j in range(d):
                w = nbr_idx[tz, j]
                cover[w] += 1
                if cover[w] == 1:
                    na |= one << np.uint64(w)
                    g += 1
        cur ^= bit
        a = 0
        nna = ~na
        for x in range(ms):
            if masks[x] & nna == np.uint64(0):
                a += 1
        hist[s, a, g] += 1
        if 2 * a <= m_half and np.int64(g - a) * best_den < best_num * np.int64(g):
            best_num = np.int64(g - a)
            best_den = np.int64(g)
            best_mask = cur
    return hist, best_num, best_den, best_mask


def subset_scan(nbr_idx, m_half, m_opp):
    ms, d = nbr_idx.shape
    masks = np.zeros(ms, dtype=np.uint64)
    for i in range(ms):
        acc = 0
        for j in range(d):
            acc |= 1 << int(nbr_idx[i, j])
        masks[i] = acc
    hist, num, den, mask = _subset_scan_impl(
        np.ascontiguousarray(nbr_idx, dtype=np.int64),
        np.int64(m_half),
        np.int64(m_opp),
        masks,
    )
    return hist, int(num), int(den), int(mask)


@njit(cache=True)
def _conductance_scan_impl(indptr, indices, qdata, rowsum, pi, pi_cutoff):
    n = len(pi)
    cur = np.uint64(0)
    one = np.uint64(1)
    flow = 0.0
    pis = 0.0
    best_phi = np.inf
    best_mask = np.uint64(0)
    best_flow = 0.0
    best_pis = 0.0
    total = np.int64(1) << np.int64(n)
    for i in range(np.int64(1), total):
        tz = 0
        while (i >> tz) & 1 == 0:
            tz += 1
        bit = one << np.uint64(tz)
        mask_off = cur & ~bit
        sum_in = 0.0
        for k in range(indptr[tz], indptr[tz + 1]):
            j = indices[k]
            if j != tz and (mask_off >> np.uint64(j)) & one:
                sum_in += qdata[k]
        delta = rowsum[tz] - 2.0 * sum_in
        if cur & bit:
            flow -= delta
            pis -= pi[tz]
            cur = mask_off
        else:
            flow += delta
            pis += pi[tz]
            cur |= bit
        if 0.0 < pis <= pi_cutoff:
            phi = flow / pis
            if phi < best_phi:
                best_phi = phi
                best_mask = cur
                best_flow = flow
                best_pis = pis
    return best_phi, best_mask, best_flow, best_pis


def conductance_scan(indptr, indices, qdata, rowsum, pi, pi_cutoff):
    phi, mask, flow, pis = _conductance_scan_impl(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(qdata, dtype=np.float64),
        np.ascontiguousarray(rowsum, dtype=np.float64),
        np.ascontiguousarray(pi, dtype=np.float64),
        float(pi_cutoff),
    )
    return float(phi), int(mask), float(flow), float(pis)


@njit(cache=True, parallel=True)
def _escape_times_impl(even_masks, odd_masks, n_even, n_odd, start_even,
                       start_odd, add_threshold, states, max_steps):
    n = np.uint64(n_even + n_odd)
    ne = np.uint64(n_even)
    one = np.uint64(1)
    out = np.empty(len(states), dtype=np.int64)
    for k in prange(len(states)):
        state = states[k]
        occ_e = start_even
        occ_o = start_odd
        ce = 0
        co = 0
        for b in range(64):
            ce += np.int64((occ_e >> np.uint64(b)) & one)
            co += np.int64((occ_o >> np.uint64(b)) & one)
        if ce <= co:
            out[k] = 0
            continue
        hit = np.int64(-1)
        t = np.int64(0)
        while t < max_steps:
            state += _GAMMA
            z = state
            z = (z ^ (z >> np.uint64(30))) * _MIX1
            z = (z ^ (z >> np.uint64(27))) * _MIX2
            r1 = z ^ (z >> np.uint64(31))
            state += _GAMMA
            z = state
            z = (z ^ (z >> np.uint64(30))) * _MIX1
            z = (z ^ (z >> np.uint64(27))) * _MIX2
            r2 = z ^ (z >> np.uint64(31))
            v = r1 % n
            add = r2 < add_threshold
            if v < ne:
                bit = one << v
                if add:
                    if (occ_e & bit) == np.uint64(0) and (even_masks[v] & occ_o) == np.uint64(0):
                        occ_e |= bit
                        ce += 1
                elif occ_e & bit:
                    occ_e &= ~bit
                    ce -= 1
            else:
                i = v - ne
                bit = one << i
                if add:
                    if (occ_o & bit) == np.uint64(0) and (odd_masks[i] & occ_e) == np.uint64(0):
                        occ_o |= bit
                        co += 1
                elif occ_o & bit:
                    occ_o &= ~bit
                    co -= 1
            t += 1
            if ce <= co:
                hit = t
                break
        out[k] = hit
    return out


def escape_times(even_masks, odd_masks, n_even, n_odd, start_even, start_odd,
                 add_threshold, states, max_steps):
    return _escape_times_impl(
        np.ascontiguousarray(even_masks, dtype=np.uint64),
        np.ascontiguousarray(odd_masks, dtype=np.uint64),
        np.int64(n_even),
        np.int64(n_odd),
        np.uint64(start_even),
        np.uint64(start_odd),
        np.uint64(add_threshold),
        np.ascontiguousarray(states, dtype=np.uint64),
        np.int64(max_steps),
    )


@njit(cache=True)
def _draw_tally_impl(n, add_threshold, n_steps, state0):
    counts = np.zeros((n, 2), dtype=np.int64)
    state = state0
    nn = np.uint64(n)
    for _ in range(n_steps):
        state += _GAMMA
        z = state
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        r1 = z ^ (z >> np.uint64(31))
        state += _GAMMA
        z = state
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        r2 = z ^ (z >> np.uint64(31))
        v = np.int64(r1 % nn)
        add = 1 if r2 < add_threshold else 0
        counts[v, add] += 1
    return counts


def draw_tally(n, add_threshold, n_steps, state0):
    return _draw_tally_impl(
        np.int64(n), np.uint64(add_threshold), np.int64(n_steps), np.uint64(state0)
    )
