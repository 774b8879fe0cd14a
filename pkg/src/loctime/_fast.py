"""Numba kernels for the hot loops.

Each kernel has a naive counterpart elsewhere in the package used by the
test suite for exact cross-checks. All kernels are single-threaded; the
sweep parallelizes across replicas in separate processes.
"""

import math

import numpy as np
from numba import njit

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@njit(cache=True)
def diag_counts(bin_idx, n_bins):
    """out[k] = number of prior indices j < k with bin_idx[j] == bin_idx[k]."""
    counts = np.zeros(n_bins, dtype=np.int64)
    out = np.empty(len(bin_idx), dtype=np.int64)
    for k in range(len(bin_idx)):
        b = bin_idx[k]
        out[k] = counts[b]
        counts[b] += 1
    return out


@njit(cache=True)
def fenwick_window_diffs(q_low, q_mid_left, q_mid_right, q_high, ins_pos, n_vals):
    """Signed window counts over past values via a Fenwick tree.

    For each query m (before inserting value m):
        (# inserted values in [B_m - h, B_m]) - (# inserted values in [B_m, B_m + h])
    Query positions are 0-based prefix ranks into the sorted insert universe:
    prefix(p) counts inserted values with compressed rank < p. Ties at B_m
    land in both windows and cancel.
    """
    n_query = len(q_mid_right)
    n_ins = len(ins_pos)
    tree = np.zeros(n_vals + 1, dtype=np.int64)
    out = np.empty(n_query, dtype=np.int64)
    for m in range(n_query):
        c_low = 0
        i = q_low[m]
        while i > 0:
            c_low += tree[i]
            i -= i & (-i)
        c_ml = 0
        i = q_mid_left[m]
        while i > 0:
            c_ml += tree[i]
            i -= i & (-i)
        c_mr = 0
        i = q_mid_right[m]
        while i > 0:
            c_mr += tree[i]
            i -= i & (-i)
        c_high = 0
        i = q_high[m]
        while i > 0:
            c_high += tree[i]
            i -= i & (-i)
        out[m] = (c_mr - c_low) - (c_high - c_ml)
        if m < n_ins:
            i = ins_pos[m]
            while i <= n_vals:
                tree[i] += 1
                i += i & (-i)
    return out


@njit(cache=True)
def triangular_pair_sum(sorted_vals, h):
    """sum over unordered pairs i < j of [(h - (v_j - v_i))+]^2, values sorted."""
    n = len(sorted_vals)
    acc = 0.0
    j_hi = 0
    for i in range(n):
        if j_hi < i + 1:
            j_hi = i + 1
        while j_hi < n and sorted_vals[j_hi] - sorted_vals[i] <= h:
            j_hi += 1
        for j in range(i + 1, j_hi):
            d = h - (sorted_vals[j] - sorted_vals[i])
            acc += d * d
    return acc


@njit(cache=True, inline="always")
def _ndtr(x):
    return 0.5 * math.erfc(-x * _SQRT1_2)


@njit(cache=True)
def uhat_strided_series(values, t, h, dt, stride):
    """Smooth component of the representation integrand at m = 0, stride, 2*stride, ...

    out[j] = 4 * dt * sum_{u < m} [2*Phi(z/sqrt(s)) - Phi((z+h)/sqrt(s)) - Phi((z-h)/sqrt(s))]
    with z = B_m - B_u and s = t - m*dt; positive when the past sits below the
    current point. m runs over multiples of stride with m*dt < t.
    """
    n = len(values) - 1
    n_out = (n + stride - 1) // stride
    out = np.zeros(n_out)
    for j in range(n_out):
        m = j * stride
        if m == 0:
            continue
        s = t - m * dt
        if s <= 0.0:
            break
        rs = 1.0 / math.sqrt(s)
        bm = values[m]
        acc = 0.0
        for u in range(m):
            z = bm - values[u]
            acc += 2.0 * _ndtr(z * rs) - _ndtr((z + h) * rs) - _ndtr((z - h) * rs)
        out[j] = 4.0 * dt * acc
    return out
