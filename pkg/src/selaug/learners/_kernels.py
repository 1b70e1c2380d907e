"""Numba kernels for CART construction and traversal.

The tree is stored as flat arrays (feature, threshold, left, right, prob);
feature < 0 marks a leaf. Split search scans midpoints between sorted
distinct values of the sampled features; weighted Gini decrease is maximised
with ties broken toward the lowest feature index and lowest threshold, which
the ascending scan order yields for free. Feature subsampling uses an
embedded splitmix64 stream so builds are bit-reproducible for a given seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64


@njit(cache=True, inline="always")
def _splitmix64(state):
    state[0] = state[0] + U64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True)
def build_tree(X, y, w, max_depth, min_leaf, mtry, laplace, seed):
    """Grow one tree; returns (feature, threshold, left, right, prob) arrays.

    Leaf prob is Laplace-smoothed: (w+ + laplace) / (w+ + w- + 2*laplace).
    A node stops when it reaches max_depth, holds fewer than 2*min_leaf
    examples, is pure, or offers no valid split.
    """
    n, k = X.shape
    max_leaves = max(1, n // max(1, min_leaf))
    max_nodes = 2 * max_leaves + 4
    feat = np.full(max_nodes, -1, np.int64)
    thr = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    prob = np.zeros(max_nodes, np.float64)

    idx = np.arange(n)
    stack = np.empty((max_nodes, 4), np.int64)  # start, end, depth, node
    state = np.empty(1, U64)
    state[0] = U64(seed)
    pool = np.empty(k, np.int64)
    nsel = mtry if mtry < k else k
    chosen = np.empty(nsel, np.int64)

    n_nodes = 1
    stack[0, 0] = 0
    stack[0, 1] = n
    stack[0, 2] = 0
    stack[0, 3] = 0
    top = 1
    while top > 0:
        top -= 1
        start = stack[top, 0]
        end = stack[top, 1]
        depth = stack[top, 2]
        node = stack[top, 3]
        m = end - start

        wpos = 0.0
        wtot = 0.0
        npos = 0
        for j in range(start, end):
            i = idx[j]
            wtot += w[i]
            if y[i] > 0.5:
                wpos += w[i]
                npos += 1
        prob[node] = (wpos + laplace) / (wtot + 2.0 * laplace)
        if depth >= max_depth or m < 2 * min_leaf or npos == 0 or npos == m:
            continue

        if nsel < k:
            for f in range(k):
                pool[f] = f
            for c in range(nsel):
                r = int(_splitmix64(state) % U64(k - c))
                chosen[c] = pool[c + r]
                pool[c + r] = pool[c]
                pool[c] = chosen[c]
            chosen[:nsel].sort()
        else:
            for f in range(k):
                chosen[f] = f

        gpar = 1.0 - (wpos / wtot) ** 2 - ((wtot - wpos) / wtot) ** 2
        best_dec = -1.0
        best_f = -1
        best_t = 0.0
        vals = np.empty(m, np.float64)
        for c in range(nsel):
            f = chosen[c]
            for j in range(m):
                vals[j] = X[idx[start + j], f]
            order = np.argsort(vals)
            wl = 0.0
            wlp = 0.0
            for j in range(m - 1):
                i = idx[start + order[j]]
                wl += w[i]
                if y[i] > 0.5:
                    wlp += w[i]
                vj = vals[order[j]]
                vj1 = vals[order[j + 1]]
                if vj >= vj1:
                    continue
                nl = j + 1
                if nl < min_leaf or (m - nl) < min_leaf:
                    continue
                wr = wtot - wl
                wrp = wpos - wlp
                gl = 1.0 - (wlp / wl) ** 2 - ((wl - wlp) / wl) ** 2
                gr = 1.0 - (wrp / wr) ** 2 - ((wr - wrp) / wr) ** 2
                dec = gpar - (wl * gl + wr * gr) / wtot
                if dec > best_dec:
                    # threshold strictly between the adjacent distinct values;
                    # clamp to the lower value if rounding collapsed the gap,
                    # so `x <= t` reproduces the scanned partition exactly
                    t = 0.5 * (vj + vj1)
                    if t >= vj1:
                        t = vj
                    best_dec = dec
                    best_f = f
                    best_t = t
        if best_f < 0:
            continue

        tmp = np.empty(m, np.int64)
        lo = 0
        for j in range(start, end):
            i = idx[j]
            if X[i, best_f] <= best_t:
                tmp[lo] = i
                lo += 1
        hi = lo
        for j in range(start, end):
            i = idx[j]
            if X[i, best_f] > best_t:
                tmp[hi] = i
                hi += 1
        for j in range(m):
            idx[start + j] = tmp[j]

        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        feat[node] = best_f
        thr[node] = best_t
        left[node] = lnode
        right[node] = rnode
        stack[top, 0] = start
        stack[top, 1] = start + lo
        stack[top, 2] = depth + 1
        stack[top, 3] = lnode
        top += 1
        stack[top, 0] = start + lo
        stack[top, 1] = end
        stack[top, 2] = depth + 1
        stack[top, 3] = rnode
        top += 1
    return (
        feat[:n_nodes].copy(),
        thr[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        prob[:n_nodes].copy(),
    )


@njit(cache=True)
def predict_tree(feat, thr, left, right, prob, X):
    n = X.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        node = 0
        while feat[node] >= 0:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = prob[node]
    return out
