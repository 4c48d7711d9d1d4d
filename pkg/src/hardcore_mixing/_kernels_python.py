"""Pure-python/numpy fallback kernels.

Semantics (including RNG streams, tie-breaking, and summation order) match
the numba kernels bit for bit; only the speed differs.  Selected via the
HARDCORE_NO_NUMBA environment flag or when numba is unavailable.
"""

from __future__ import annotations

import numpy as np

from .rng import MASK64, mix64, _GAMMA

_U64 = 0xFFFFFFFFFFFFFFFF


def subset_scan(nbr_idx: np.ndarray, m_half: int, m_opp: int):
    """Scan all subsets A of one parity class in Gray-code order.

    nbr_idx[i] lists the opposite-class positions adjacent to class vertex i.
    Returns (hist, num, den, argmin_mask): hist[s, a, g] counts subsets with
    |A| = s, |[A]| = a, |N(A)| = g; num/den is min (g-a)/g over nonempty A
    with 2a <= m_half (den = 0 if none exists), argmin_mask a witness.
    """
    ms, d = nbr_idx.shape
    masks = [0] * ms
    for i in range(ms):
        for j in range(d):
            masks[i] |= 1 << int(nbr_idx[i, j])
    hist = np.zeros((ms + 1, ms + 1, m_opp + 1), dtype=np.int64)
    cover = [0] * m_opp
    na = 0
    g = 0
    s = 0
    cur = 0
    best_num, best_den, best_mask = 1, 0, 0
    hist[0, 0, 0] += 1
    for i in range(1, 1 << ms):
        tz = (i & -i).bit_length() - 1
        bit = 1 << tz
        if cur & bit:
            s -= 1
            for j in range(d):
                w = int(nbr_idx[tz, j])
                cover[w] -= 1
                if cover[w] == 0:
                    na &= ~(1 << w)
                    g -= 1
        else:
            s += 1
            for j in range(d):
                w = int(nbr_idx[tz, j])
                cover[w] += 1
                if cover[w] == 1:
                    na |= 1 << w
                    g += 1
        cur ^= bit
        a = 0
        for x in range(ms):
            if masks[x] & ~na == 0:
                a += 1
        hist[s, a, g] += 1
        if 2 * a <= m_half and (g - a) * best_den < best_num * g:
            best_num, best_den, best_mask = g - a, g, cur
    return hist, best_num, best_den, best_mask


def conductance_scan(indptr, indices, qdata, rowsum, pi, pi_cutoff):
    """Exact-structure float scan over all cuts S with 0 < pi(S) <= cutoff.

    Q is the symmetric flow matrix in CSR form (diagonal entries ignored via
    rowsum, which must exclude the diagonal).  Returns (best_phi, best_mask,
    best_flow, best_pis).
    """
    n = len(pi)
    cur = 0
    flow = 0.0
    pis = 0.0
    best_phi = np.inf
    best_mask = 0
    best_flow = 0.0
    best_pis = 0.0
    for i in range(1, 1 << n):
        tz = (i & -i).bit_length() - 1
        bit = 1 << tz
        mask_off = cur & ~bit
        sum_in = 0.0
        for k in range(int(indptr[tz]), int(indptr[tz + 1])):
            j = int(indices[k])
            if j != tz and (mask_off >> j) & 1:
                sum_in += float(qdata[k])
        delta = float(rowsum[tz]) - 2.0 * sum_in
        if cur & bit:
            flow -= delta
            pis -= float(pi[tz])
            cur = mask_off
        else:
            flow += delta
            pis += float(pi[tz])
            cur |= bit
        if 0.0 < pis <= pi_cutoff:
            phi = flow / pis
            if phi < best_phi:
                best_phi = phi
                best_mask = cur
                best_flow = flow
                best_pis = pis
    return best_phi, best_mask, best_flow, best_pis


def _next_u64(state: int) -> tuple[int, int]:
    state = (state + _GAMMA) & MASK64
    return mix64(state), state


def escape_times(even_masks, odd_masks, n_even, n_odd, start_even, start_odd,
                 add_threshold, states, max_steps):
    """Hitting time of {|I ∩ even| <= |I ∩ odd|} per seeded chain.

    states: uint64 array of initial splitmix64 states, one chain each.
    Returns int64 hit times, -1 where censored at max_steps.
    """
    n = n_even + n_odd
    thr = int(add_threshold)
    out = np.empty(len(states), dtype=np.int64)
    e_masks = [int(x) for x in even_masks]
    o_masks = [int(x) for x in odd_masks]
    for k in range(len(states)):
        state = int(states[k])
        occ_e = int(start_even)
        occ_o = int(start_odd)
        ce = occ_e.bit_count()
        co = occ_o.bit_count()
        if ce <= co:
            out[k] = 0
            continue
        hit = -1
        t = 0
        while t < max_steps:
            r1, state = _next_u64(state)
            r2, state = _next_u64(state)
            v = r1 % n
            add = r2 < thr
            if v < n_even:
                bit = 1 << v
                if add:
                    if not occ_e & bit and e_masks[v] & occ_o == 0:
                        occ_e |= bit
                        ce += 1
                elif occ_e & bit:
                    occ_e &= ~bit
                    ce -= 1
            else:
                i = v - n_even
                bit = 1 << i
                if add:
                    if not occ_o & bit and o_masks[i] & occ_e == 0:
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


def draw_tally(n, add_threshold, n_steps, state0):
    """Tally (vertex, add/remove) proposal draws of the single-site chain."""
    counts = np.zeros((n, 2), dtype=np.int64)
    state = int(state0)
    thr = int(add_threshold)
    for _ in range(n_steps):
        r1, state = _next_u64(state)
        r2, state = _next_u64(state)
        v = r1 % n
        add = 1 if r2 < thr else 0
        counts[v, add] += 1
    return counts
