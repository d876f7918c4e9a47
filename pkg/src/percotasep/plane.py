"""Bond percolation on finite windows of the square lattice.

Windows carry closed-edge bit grids (True = closed) indexed [x, y] with
an origin offset, so lattice vertex (a, b) sits at grid position
(a - x0, b - y0). Boundary-connectedness of a component is the finite-
window proxy for membership in the infinite cluster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from percotasep import parallel
from percotasep import rng as rng_mod
from percotasep._backend import grid_bfs
from percotasep.errors import EstimationError, ParameterError


@dataclass(frozen=True)
class PlaneWindow:
    """Vertices [x0, x1] x [y0, y1] with closed flags per edge.

    horizontal[x, y]: edge (x0+x, y0+y) -> (x0+x+1, y0+y) is closed;
    vertical[x, y]: edge (x0+x, y0+y) -> (x0+x, y0+y+1) is closed.
    """

    x0: int
    y0: int
    horizontal: np.ndarray
    vertical: np.ndarray
    eps: float

    def __post_init__(self):
        w, h = self.shape
        if self.horizontal.shape != (w - 1, h) or self.vertical.shape != (w, h - 1):
            raise ParameterError("edge grid shapes do not match the window")

    @property
    def shape(self) -> tuple[int, int]:
        return self.vertical.shape[0], self.horizontal.shape[1]

    def grid_index(self, vertex: tuple[int, int]) -> tuple[int, int]:
        x, y = vertex[0] - self.x0, vertex[1] - self.y0
        w, h = self.shape
        if not (0 <= x < w and 0 <= y < h):
            raise ParameterError(f"vertex {vertex} outside the window")
        return x, y


def sample_window(
    rng: np.random.Generator,
    x_range: tuple[int, int],
    y_range: tuple[int, int],
    eps: float,
) -> PlaneWindow:
    """Sample a window; every edge closed independently with probability eps."""
    if not 0.0 <= eps <= 1.0:
        raise ParameterError(f"eps must be in [0, 1], got {eps}")
    w = x_range[1] - x_range[0] + 1
    h = y_range[1] - y_range[0] + 1
    if w < 2 or h < 2:
        raise ParameterError("window must span at least 2 vertices per axis")
    horizontal = rng.random((w - 1, h)) < eps
    vertical = rng.random((w, h - 1)) < eps
    return PlaneWindow(x_range[0], y_range[0], horizontal, vertical, eps)


@dataclass(frozen=True)
class ClusterLabels:
    """Connected components of the open subgraph, grid-shaped labels."""

    labels: np.ndarray
    boundary_connected: np.ndarray  # per-component flag

    def label_of(self, window: PlaneWindow, vertex: tuple[int, int]) -> int:
        x, y = window.grid_index(vertex)
        return int(self.labels[x, y])

    def is_boundary_connected(self, window: PlaneWindow, vertex) -> bool:
        return bool(self.boundary_connected[self.label_of(window, vertex)])


def label_clusters(window: PlaneWindow) -> ClusterLabels:
    """Exact components of the open subgraph; flags components on the border."""
    w, h = window.shape
    idx = np.arange(w * h).reshape(w, h)
    hx, hy = np.nonzero(~window.horizontal)
    vx, vy = np.nonzero(~window.vertical)
    row = np.concatenate([idx[hx, hy], idx[vx, vy]])
    col = np.concatenate([idx[hx + 1, hy], idx[vx, vy + 1]])
    g = coo_matrix(
        (np.ones(row.shape[0], dtype=np.int8), (row, col)), shape=(w * h, w * h)
    )
    n_comp, flat = connected_components(g.tocsr(), directed=False)
    labels = flat.reshape(w, h)
    boundary = np.zeros(n_comp, dtype=bool)
    for border in (labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]):
        boundary[np.unique(border)] = True
    return ClusterLabels(labels, boundary)


def distance_grid(window: PlaneWindow, source: tuple[int, int]) -> np.ndarray:
    """BFS distance grid from ``source``; -1 marks unreachable vertices."""
    sx, sy = window.grid_index(source)
    return grid_bfs(
        (~window.horizontal).astype(np.uint8),
        (~window.vertical).astype(np.uint8),
        sx,
        sy,
    )


def plane_distance(
    window: PlaneWindow, source: tuple[int, int], target: tuple[int, int]
) -> int | None:
    """Shortest open-path length between two window vertices, or None."""
    tx, ty = window.grid_index(target)
    d = int(distance_grid(window, source)[tx, ty])
    return None if d < 0 else d


def find_T(
    window: PlaneWindow, labels: ClusterLabels, n: int, k: int
) -> tuple[int, int] | None:
    """k-th point of (n,0), (2n,0), ... in a boundary-connected component."""
    if n < 1 or k < 1:
        raise ParameterError("n and k must be >= 1")
    found = 0
    i = 1
    while True:
        vertex = (i * n, 0)
        try:
            window.grid_index(vertex)
        except ParameterError:
            return None
        if labels.is_boundary_connected(window, vertex):
            found += 1
            if found == k:
                return vertex
        i += 1


@dataclass(frozen=True)
class MuEstimate:
    """Monte Carlo estimate of the per-column distance inflation mu."""

    eps: float
    n: int
    margin: int
    replicas: int
    mu_hat: float
    stderr: float
    admissible_fraction: float
    seed: int


def _mu_replica_range(
    eps: float, n: int, margin: int, seed: int, start: int, stop: int
) -> tuple[int, int, int]:
    """(admissible count, sum, sum of squares) of the distance increments.

    Sums are exact integers so merging partial results is associative and
    the final estimate is bit-identical for every chunking of the range.
    """
    total = total_sq = 0
    admissible = 0
    for r in range(start, stop):
        rng = rng_mod.stream(seed, r)
        window = sample_window(rng, (-margin, 2 * n + margin), (-margin, margin), eps)
        dist = distance_grid(window, (0, 0))
        d_near = int(dist[window.grid_index((n, 0))])
        d_far = int(dist[window.grid_index((2 * n, 0))])
        if d_near < 0 or d_far < 0:
            continue
        touches_border = (
            (dist[0, :] >= 0).any()
            or (dist[-1, :] >= 0).any()
            or (dist[:, 0] >= 0).any()
            or (dist[:, -1] >= 0).any()
        )
        if not touches_border:
            continue
        admissible += 1
        inc = d_far - d_near
        total += inc
        total_sq += inc * inc
    return admissible, total, total_sq


def estimate_mu(
    eps: float,
    n: int,
    margin: int | None,
    replicas: int,
    seed: int,
    workers: int | None = None,
) -> MuEstimate:
    """Estimate mu as the mean slope (D(0,(2n,0)) - D(0,(n,0))) / n.

    Each replica samples a fresh window [-margin, 2n+margin] x
    [-margin, margin] and is admissible when the origin, (n, 0) and
    (2n, 0) are mutually connected and their (shared) component touches
    the window border, the finite-window proxy for lying on the infinite
    cluster. The increment between scales n and 2n cancels the sublinear
    additive cost of D (endpoint effects and geodesic wandering), which
    the plain mean of D/n does not; at eps = 0 the slope is exactly 1.
    margin defaults to n // 2. The result is a pure function of the
    parameters and seed, independent of the worker count.
    """
    if margin is None:
        margin = max(1, n // 2)
    if margin < max(1, n // 2):
        raise ParameterError("margin must be at least n // 2")
    if replicas < 100:
        raise ParameterError("need at least 100 replicas")
    parts = parallel.run_replica_chunks(
        _mu_replica_range, replicas, (eps, n, margin, seed), workers
    )
    admissible = sum(p[0] for p in parts)
    total = sum(p[1] for p in parts)
    total_sq = sum(p[2] for p in parts)
    if admissible == 0:
        raise EstimationError(
            "no admissible replicas; lower eps or enlarge the window"
        )
    mu_hat = total / (n * admissible)
    if admissible > 1:
        # sample variance of the slopes from the exact integer moments
        var = max(
            0.0,
            (total_sq / (n * n) - admissible * mu_hat * mu_hat) / (admissible - 1),
        )
        stderr = math.sqrt(var / admissible)
    else:
        stderr = float("nan")
    return MuEstimate(
        eps, n, margin, replicas, mu_hat, stderr, admissible / replicas, seed
    )
