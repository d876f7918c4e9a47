"""Pure NumPy/SciPy implementations of the hot kernels.

Same signatures and bit-identical integer outputs as the compiled
extension ``percotasep._kernels``; used as the import-time fallback and
as the reference side of the backend-equivalence tests.

Array conventions
-----------------
Strip kernels: ``closed`` is uint8 with shape (n_columns, n_rows) where
row index r corresponds to lattice row j = r - K, and ``closed[i, r] == 1``
means the horizontal edge (i, j) -> (i+1, j) is closed.

TASEP kernel: ``occ`` is uint8 of length 2K; occ[i] is lattice site
j = i - K + 1. ``uniforms`` has one column per edge row -K..K: column 0
drives entry, column i+1 drives the move of a particle at occ index i,
column 2K drives exit.

Grid kernel: vertex grids are indexed [x, y]; ``h_open[x, y] == 1`` means
the edge (x, y)-(x+1, y) is open, ``v_open[x, y] == 1`` means (x, y)-(x, y+1)
is open.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

BACKEND = "python"

_INF = np.int64(1) << 60


def _vertical_relax(d: np.ndarray) -> None:
    """Relax unit vertical edges in place; two passes reach the fixed point.

    ``d`` has shape (..., n_rows); relaxation runs along the last axis.
    """
    n_rows = d.shape[-1]
    for r in range(1, n_rows):
        np.minimum(d[..., r], d[..., r - 1] + 1, out=d[..., r])
    for r in range(n_rows - 2, -1, -1):
        np.minimum(d[..., r], d[..., r + 1] + 1, out=d[..., r])


def cross_step_batch(closed_col: np.ndarray, d: np.ndarray) -> np.ndarray:
    """One Cross-model column update for a batch of profiles.

    closed_col: uint8 (..., n_rows) closed flags of the horizontal edges.
    d: int64 (..., n_rows) distance profiles of column i.
    Returns the profiles of column i+1.
    """
    horiz = np.where(closed_col.astype(bool), _INF, d + 1)
    new = horiz
    new[..., 1:] = np.minimum(new[..., 1:], d[..., :-1] + 2)
    new[..., :-1] = np.minimum(new[..., :-1], d[..., 1:] + 2)
    _vertical_relax(new)
    return new


def cross_sweep(closed: np.ndarray, d0: np.ndarray) -> np.ndarray:
    """Sweep the Cross-model DP over n columns; returns the final profile."""
    d = d0.astype(np.int64, copy=True)
    for i in range(closed.shape[0]):
        d = cross_step_batch(closed[i], d)
    return d


def cross_sweep_batch(closed: np.ndarray, d0: np.ndarray) -> np.ndarray:
    """Sweep R independent instances; closed is (R, n, n_rows).

    Returns int64 (R, n_rows), the final profile of each instance.
    """
    reps = closed.shape[0]
    d = np.broadcast_to(d0.astype(np.int64), (reps, d0.shape[0])).copy()
    for i in range(closed.shape[1]):
        d = cross_step_batch(closed[:, i, :], d)
    return d


def tasep_chunk(
    occ: np.ndarray,
    uniforms: np.ndarray,
    alpha: float,
    beta: float,
    gamma: float,
) -> np.ndarray:
    """Advance the synchronous TASEP by uniforms.shape[0] steps.

    ``occ`` is updated in place. Returns uint8 per-step indicators of
    {site 0 occupied and site 1 empty} evaluated after each step.
    """
    n = occ.shape[0]
    if uniforms.shape[1] != n + 1:
        raise ValueError("uniforms must have 2K+1 columns")
    k = n // 2
    out = np.empty(uniforms.shape[0], dtype=np.uint8)
    for t in range(uniforms.shape[0]):
        u = uniforms[t]
        old = occ.copy()
        movers = (old[:-1] == 1) & (old[1:] == 0) & (u[1:n] < alpha)
        occ[:-1][movers] = 0
        occ[1:][movers] = 1
        if old[0] == 0 and u[0] < beta:
            occ[0] = 1
        if old[n - 1] == 1 and u[n] < gamma:
            occ[n - 1] = 0
        out[t] = occ[k - 1] == 1 and occ[k] == 0
    return out


def grid_bfs(
    h_open: np.ndarray,
    v_open: np.ndarray,
    src_x: int,
    src_y: int,
) -> np.ndarray:
    """BFS distances from (src_x, src_y) over the open subgraph of a grid.

    Returns int32 (W, H); unreachable vertices get -1.
    """
    w, h = h_open.shape[0] + 1, h_open.shape[1]
    idx = np.arange(w * h).reshape(w, h)
    hx, hy = np.nonzero(h_open)
    vx, vy = np.nonzero(v_open)
    row = np.concatenate([idx[hx, hy], idx[vx, vy]])
    col = np.concatenate([idx[hx + 1, hy], idx[vx, vy + 1]])
    data = np.ones(row.shape[0], dtype=np.int8)
    g = coo_matrix((data, (row, col)), shape=(w * h, w * h))
    dist = _csgraph_dijkstra(
        g.tocsr(), directed=False, unweighted=True, indices=idx[src_x, src_y]
    )
    out = np.full(w * h, -1, dtype=np.int32)
    finite = np.isfinite(dist)
    out[finite] = dist[finite].astype(np.int32)
    return out.reshape(w, h)
