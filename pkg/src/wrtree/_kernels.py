"""Numba kernels shared by the generator, tree statistics and bijection code.

Parent arrays use 1-based node labels: ``parent[j]`` for ``j = 2..n`` and
``parent[0] = parent[1] = 0``.  Batched variants take a 2-D array with one
tree per row.
"""
import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def compensated_cumsum(w):
    """Running sums of ``w`` with Neumaier compensation."""
    out = np.empty(w.shape[0], np.float64)
    s = 0.0
    c = 0.0
    for i in range(w.shape[0]):
        x = w[i]
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        out[i] = s + c
    return out


@numba.njit(cache=True, nogil=True)
def build_guide(S, inv_delta):
    """``guide[g]`` = number of entries of ``S`` that are <= ``g / inv_delta``."""
    m = S.shape[0]
    guide = np.empty(m + 1, np.int64)
    idx = 0
    for g in range(m + 1):
        edge = g / inv_delta
        while idx < m and S[idx] <= edge:
            idx += 1
        guide[g] = idx
    return guide


@numba.njit(cache=True, nogil=True)
def _count_le(S, guide, inv_delta, x, limit):
    # number of S[0..limit-1] that are <= x; bucket lookup then binary search
    m = S.shape[0]
    g = int(x * inv_delta)
    if g < 0:
        g = 0
    if g > m - 1:
        g = m - 1
    lo = guide[g]
    hi = guide[g + 1]
    while lo > 0 and S[lo - 1] > x:
        lo -= 1
    while hi < m and S[hi] <= x:
        hi += 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if S[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    if lo > limit:
        lo = limit
    return lo


@numba.njit(cache=True, nogil=True)
def sample_parents(u, S, guide, inv_delta, out):
    """Fill ``out`` (B, n+1) from uniforms ``u`` (B, n-2).

    Node ``j >= 3`` draws ``x = u * S(j-1)`` and attaches to the smallest
    ``i`` with ``x < S(i)`` (so ``x == S(i)`` goes to ``i + 1``).
    """
    B = out.shape[0]
    n = out.shape[1] - 1
    for b in range(B):
        out[b, 0] = 0
        if n >= 1:
            out[b, 1] = 0
        if n >= 2:
            out[b, 2] = 1
        for j in range(3, n + 1):
            x = u[b, j - 3] * S[j - 2]
            out[b, j] = _count_le(S, guide, inv_delta, x, j - 2) + 1


@numba.njit(cache=True, nogil=True)
def batch_stats(parents):
    """Per-row leaves, height, depth of node n, branch count, largest branch."""
    B = parents.shape[0]
    n = parents.shape[1] - 1
    leaves = np.zeros(B, np.int64)
    height = np.zeros(B, np.int64)
    depth_last = np.zeros(B, np.int64)
    branches = np.zeros(B, np.int64)
    largest = np.zeros(B, np.int64)
    depth = np.zeros(n + 1, np.int64)
    nchild = np.zeros(n + 1, np.int64)
    top = np.zeros(n + 1, np.int64)
    size = np.zeros(n + 1, np.int64)
    for b in range(B):
        h = 0
        for j in range(n + 1):
            nchild[j] = 0
        for j in range(2, n + 1):
            p = parents[b, j]
            d = depth[p] + 1
            depth[j] = d
            if d > h:
                h = d
            nchild[p] += 1
            if p == 1:
                top[j] = j
                size[j] = 0
            else:
                top[j] = top[p]
            size[top[j]] += 1
        nl = 0
        nb = 0
        big = 0
        for j in range(2, n + 1):
            if nchild[j] == 0:
                nl += 1
            if parents[b, j] == 1:
                nb += 1
                if size[j] > big:
                    big = size[j]
        leaves[b] = nl
        height[b] = h
        depth_last[b] = depth[n] if n >= 1 else 0
        branches[b] = nb
        largest[b] = big
    return leaves, height, depth_last, branches, largest


@numba.njit(cache=True, nogil=True)
def tree_arrays(parent):
    """Depth, child count and branch head (child of the root) for every node."""
    n = parent.shape[0] - 1
    depth = np.zeros(n + 1, np.int64)
    nchild = np.zeros(n + 1, np.int64)
    top = np.zeros(n + 1, np.int64)
    for j in range(2, n + 1):
        p = parent[j]
        depth[j] = depth[p] + 1
        nchild[p] += 1
        top[j] = j if p == 1 else top[p]
    return depth, nchild, top


@numba.njit(cache=True, nogil=True)
def crp_successors(u, theta, out):
    """Chinese-restaurant construction on labels 2..n, one row per sample.

    ``out[b, x]`` is the image of label ``x``.  Label ``k`` opens a new cycle
    when ``u * (theta + k - 2) < theta``, else it is inserted to the right of
    label ``2 + floor(u * (theta + k - 2) - theta)``.
    """
    B = out.shape[0]
    n = out.shape[1] - 1
    for b in range(B):
        out[b, 0] = 0
        out[b, 1] = 0
        if n >= 2:
            out[b, 2] = 2
        for k in range(3, n + 1):
            x = u[b, k - 3] * (theta + k - 2)
            if x < theta:
                out[b, k] = k
            else:
                j = 2 + int(x - theta)
                if j > k - 1:
                    j = k - 1
                out[b, k] = out[b, j]
                out[b, j] = k


@numba.njit(cache=True, nogil=True)
def successors_to_parents(succ, out):
    """Undo insertions from the largest label down: the inverse of
    :func:`parents_to_successors`."""
    B = succ.shape[0]
    n = succ.shape[1] - 1
    nxt = np.zeros(n + 1, np.int64)
    prv = np.zeros(n + 1, np.int64)
    for b in range(B):
        for x in range(2, n + 1):
            nxt[x] = succ[b, x]
        for x in range(2, n + 1):
            prv[nxt[x]] = x
        out[b, 0] = 0
        if n >= 1:
            out[b, 1] = 0
        for k in range(n, 1, -1):
            p = prv[k]
            if p == k:
                out[b, k] = 1
            else:
                out[b, k] = p
                s = nxt[k]
                nxt[p] = s
                prv[s] = p


@numba.njit(cache=True, nogil=True)
def parents_to_successors(parents, out):
    B = parents.shape[0]
    n = parents.shape[1] - 1
    for b in range(B):
        out[b, 0] = 0
        if n >= 1:
            out[b, 1] = 0
        for k in range(2, n + 1):
            p = parents[b, k]
            if p == 1:
                out[b, k] = k
            else:
                out[b, k] = out[b, p]
                out[b, p] = k


@numba.njit(cache=True, nogil=True)
def cycle_types(succ):
    """``counts[b, s-1]`` = number of cycles of length ``s`` in row ``b``."""
    B = succ.shape[0]
    n = succ.shape[1] - 1
    m = max(n - 1, 1)
    counts = np.zeros((B, m), np.int64)
    seen = np.zeros(n + 1, np.bool_)
    for b in range(B):
        for x in range(n + 1):
            seen[x] = False
        for x in range(2, n + 1):
            if seen[x]:
                continue
            length = 0
            y = x
            while not seen[y]:
                seen[y] = True
                length += 1
                y = succ[b, y]
            counts[b, length - 1] += 1
    return counts
