# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels.

Signatures and integer outputs match percotasep._kernels_py exactly; see
that module's docstring for the array conventions. The backend selector
(percotasep._backend) prefers this module when the extension built.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

cdef long long _INF = <long long>1 << 60


cdef inline void _sweep_rows(
    const unsigned char[:, ::1] closed,
    long long* d,
    long long* scratch,
    Py_ssize_t n_cols,
    Py_ssize_t n_rows,
) noexcept nogil:
    cdef Py_ssize_t i, r
    cdef long long best
    for i in range(n_cols):
        for r in range(n_rows):
            best = _INF
            if not closed[i, r]:
                best = d[r] + 1
            if r > 0 and d[r - 1] + 2 < best:
                best = d[r - 1] + 2
            if r + 1 < n_rows and d[r + 1] + 2 < best:
                best = d[r + 1] + 2
            scratch[r] = best
        for r in range(1, n_rows):
            if scratch[r - 1] + 1 < scratch[r]:
                scratch[r] = scratch[r - 1] + 1
        for r in range(n_rows - 2, -1, -1):
            if scratch[r + 1] + 1 < scratch[r]:
                scratch[r] = scratch[r + 1] + 1
        for r in range(n_rows):
            d[r] = scratch[r]


def cross_sweep(closed, d0):
    """Sweep the Cross-model DP over n columns; returns the final profile."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, mode="c"] c = \
        np.ascontiguousarray(closed, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] d = \
        np.array(d0, dtype=np.int64, copy=True)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] scratch = \
        np.empty(d.shape[0], dtype=np.int64)
    _sweep_rows(c, <long long*>d.data, <long long*>scratch.data,
                c.shape[0], d.shape[0])
    return d


def cross_sweep_batch(closed, d0):
    """Sweep R independent instances; closed is (R, n, n_rows)."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=3, mode="c"] c = \
        np.ascontiguousarray(closed, dtype=np.uint8)
    cdef Py_ssize_t reps = c.shape[0]
    cdef Py_ssize_t n_rows = c.shape[2]
    cdef cnp.ndarray[cnp.int64_t, ndim=2, mode="c"] out = \
        np.empty((reps, n_rows), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] d0a = \
        np.ascontiguousarray(d0, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] scratch = \
        np.empty(n_rows, dtype=np.int64)
    cdef Py_ssize_t rep, r
    cdef long long* dp
    for rep in range(reps):
        dp = (<long long*>out.data) + rep * n_rows
        for r in range(n_rows):
            dp[r] = (<long long*>d0a.data)[r]
        _sweep_rows(c[rep], dp, <long long*>scratch.data, c.shape[1], n_rows)
    return out


def tasep_chunk(occ, uniforms, double alpha, double beta, double gamma):
    """Advance the synchronous TASEP by uniforms.shape[0] steps in place."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] o = occ
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] u = \
        np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t n = o.shape[0]
    if u.shape[1] != n + 1:
        raise ValueError("uniforms must have 2K+1 columns")
    cdef Py_ssize_t steps = u.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] out = \
        np.empty(steps, dtype=np.uint8)
    cdef Py_ssize_t t, i
    cdef Py_ssize_t k = n // 2
    cdef unsigned char cur, moved_in
    with nogil:
        for t in range(steps):
            # Left-to-right pass; o[i+1] still holds its pre-update value
            # when site i is processed, so the update is simultaneous.
            # A particle can arrive at site i only if it was empty, hence
            # moved_in is always 0 when cur == 1 below.
            moved_in = 0
            if o[0] == 0 and u[t, 0] < beta:
                moved_in = 1
            for i in range(n):
                cur = o[i]
                if cur == 1:
                    if i + 1 < n:
                        if o[i + 1] == 0 and u[t, i + 1] < alpha:
                            o[i] = 0
                            moved_in = 1
                        else:
                            moved_in = 0
                    else:
                        if u[t, n] < gamma:
                            o[i] = 0
                        moved_in = 0
                else:
                    o[i] = moved_in
                    moved_in = 0
            out[t] = 1 if (o[k - 1] == 1 and o[k] == 0) else 0
    return np.asarray(out)


def grid_bfs(h_open, v_open, Py_ssize_t src_x, Py_ssize_t src_y):
    """BFS distances from (src_x, src_y) over the open subgraph of a grid."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, mode="c"] h = \
        np.ascontiguousarray(h_open, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, mode="c"] v = \
        np.ascontiguousarray(v_open, dtype=np.uint8)
    cdef Py_ssize_t w = h.shape[0] + 1
    cdef Py_ssize_t ht = h.shape[1]
    if v.shape[0] != w or v.shape[1] != ht - 1:
        raise ValueError("edge grid shapes are inconsistent")
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] dist = \
        np.full((w, ht), -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] queue = \
        np.empty(w * ht, dtype=np.int64)
    cdef Py_ssize_t head = 0, tail = 0
    cdef Py_ssize_t x, y, node
    cdef int dcur
    dist[src_x, src_y] = 0
    queue[tail] = src_x * ht + src_y
    tail += 1
    with nogil:
        while head < tail:
            node = queue[head]
            head += 1
            x = node // ht
            y = node % ht
            dcur = dist[x, y]
            if x + 1 < w and h[x, y] and dist[x + 1, y] < 0:
                dist[x + 1, y] = dcur + 1
                queue[tail] = node + ht
                tail += 1
            if x > 0 and h[x - 1, y] and dist[x - 1, y] < 0:
                dist[x - 1, y] = dcur + 1
                queue[tail] = node - ht
                tail += 1
            if y + 1 < ht and v[x, y] and dist[x, y + 1] < 0:
                dist[x, y + 1] = dcur + 1
                queue[tail] = node + 1
                tail += 1
            if y > 0 and v[x, y - 1] and dist[x, y - 1] < 0:
                dist[x, y - 1] = dcur + 1
                queue[tail] = node - 1
                tail += 1
    return np.asarray(dist)
