"""Plane percolation windows, clusters, distances and the mu estimator."""

import heapq

import numpy as np
import pytest

from percotasep import rng as rng_mod
from percotasep.errors import EstimationError, ParameterError
from percotasep.plane import (
    PlaneWindow,
    distance_grid,
    estimate_mu,
    find_T,
    label_clusters,
    plane_distance,
    sample_window,
)


def _window(eps, seed, x_range=(-5, 5), y_range=(-5, 5)):
    return sample_window(rng_mod.stream(seed), x_range, y_range, eps)


def _dijkstra_reference(window, source, target):
    """Independent shortest-path check on the open subgraph."""
    w, h = window.shape
    sx, sy = window.grid_index(source)
    tx, ty = window.grid_index(target)
    dist = {(sx, sy): 0}
    heap = [(0, sx, sy)]
    while heap:
        d, x, y = heapq.heappop(heap)
        if (x, y) == (tx, ty):
            return d
        if d > dist.get((x, y), 1 << 30):
            continue
        steps = []
        if x + 1 < w and not window.horizontal[x, y]:
            steps.append((x + 1, y))
        if x > 0 and not window.horizontal[x - 1, y]:
            steps.append((x - 1, y))
        if y + 1 < h and not window.vertical[x, y]:
            steps.append((x, y + 1))
        if y > 0 and not window.vertical[x, y - 1]:
            steps.append((x, y - 1))
        for nxt in steps:
            if d + 1 < dist.get(nxt, 1 << 30):
                dist[nxt] = d + 1
                heapq.heappush(heap, (d + 1, *nxt))
    return None


def test_window_shape_validation():
    with pytest.raises(ParameterError):
        PlaneWindow(0, 0, np.zeros((3, 3), dtype=bool), np.zeros((3, 3), dtype=bool), 0.1)
    with pytest.raises(ParameterError):
        sample_window(rng_mod.stream(0), (0, 5), (0, 5), 1.5)


def test_grid_index_and_bounds():
    w = _window(0.0, 0)
    assert w.grid_index((-5, -5)) == (0, 0)
    assert w.grid_index((5, 5)) == (10, 10)
    with pytest.raises(ParameterError):
        w.grid_index((6, 0))


def test_label_clusters_all_open_single_component():
    w = _window(0.0, 1)
    labels = label_clusters(w)
    assert np.unique(labels.labels).size == 1
    assert labels.is_boundary_connected(w, (0, 0))


def test_label_clusters_all_closed_singletons():
    w = _window(1.0, 1)
    labels = label_clusters(w)
    assert np.unique(labels.labels).size == 11 * 11
    assert labels.is_boundary_connected(w, (5, 5))
    assert not labels.is_boundary_connected(w, (0, 0))


def test_boundary_connection_frequency_ordering():
    """Origin boundary-connection is markedly rarer at eps = 0.5 than 0.05."""
    hits = {}
    for eps in (0.05, 0.5):
        count = 0
        for seed in range(300):
            w = _window(eps, seed, (-12, 12), (-12, 12))
            if label_clusters(w).is_boundary_connected(w, (0, 0)):
                count += 1
        hits[eps] = count
    assert hits[0.5] < hits[0.05] * 0.85


def test_plane_distance_all_open_is_l1():
    w = _window(0.0, 2)
    assert plane_distance(w, (0, 0), (3, -2)) == 5
    assert plane_distance(w, (-5, -5), (5, 5)) == 20


def test_plane_distance_isolated_target_unreachable():
    h = np.zeros((10, 11), dtype=bool)
    v = np.zeros((11, 10), dtype=bool)
    h[4, 5] = h[5, 5] = True
    v[5, 4] = v[5, 5] = True
    w = PlaneWindow(-5, -5, h, v, 0.0)
    assert plane_distance(w, (-5, -5), (0, 0)) is None


def test_plane_distance_matches_reference_dijkstra():
    for seed in range(20):
        w = _window(0.3, seed)
        got = plane_distance(w, (-5, -5), (4, 3))
        assert got == _dijkstra_reference(w, (-5, -5), (4, 3))


def test_distance_finite_iff_same_component():
    for seed in range(10):
        w = _window(0.45, seed)
        labels = label_clusters(w)
        dist = distance_grid(w, (0, 0))
        same = labels.labels == labels.label_of(w, (0, 0))
        assert np.array_equal(dist >= 0, same)


def test_distance_lower_bound_l1():
    for seed in range(10):
        w = _window(0.2, seed)
        d = plane_distance(w, (0, 0), (5, 0))
        if d is not None:
            assert d >= 5


def test_monotonicity_under_edge_opening():
    rng = rng_mod.stream(3)
    for seed in range(10):
        w = _window(0.4, seed)
        base = distance_grid(w, (0, 0))
        closed = np.argwhere(w.horizontal)
        if closed.shape[0] == 0:
            continue
        x, y = closed[rng.integers(closed.shape[0])]
        h = w.horizontal.copy()
        h[x, y] = False
        opened = distance_grid(PlaneWindow(w.x0, w.y0, h, w.vertical, w.eps), (0, 0))
        reach = base >= 0
        assert (opened[reach] <= base[reach]).all()
        assert (opened[~reach] >= -1).all()  # opening never disconnects


def test_find_T_all_open():
    w = _window(0.0, 4, (-2, 12), (-2, 2))
    labels = label_clusters(w)
    assert find_T(w, labels, 3, 1) == (3, 0)
    assert find_T(w, labels, 3, 2) == (6, 0)
    assert find_T(w, labels, 3, 5) is None  # (15, 0) outside the window


def test_find_T_skips_isolated_point():
    h = np.zeros((14, 5), dtype=bool)
    v = np.zeros((15, 4), dtype=bool)
    # isolate (3, 0): grid position (5, 2)
    h[4, 2] = h[5, 2] = True
    v[5, 1] = v[5, 2] = True
    w = PlaneWindow(-2, -2, h, v, 0.0)
    labels = label_clusters(w)
    assert find_T(w, labels, 3, 1) == (6, 0)


def test_find_T_disconnection_scaling():
    """P((n,0) not boundary-connected) scales like eps^4: factor in [8, 32]
    when eps halves."""
    n = 5
    hits = {}
    for eps in (0.4, 0.2):
        count = 0
        reps = 60_000
        for r in range(reps):
            rng = rng_mod.stream(808, r)
            w = sample_window(rng, (-3, 13), (-8, 8), eps)
            dist = distance_grid(w, (n, 0))
            reached = (
                (dist[0, :] >= 0).any()
                or (dist[-1, :] >= 0).any()
                or (dist[:, 0] >= 0).any()
                or (dist[:, -1] >= 0).any()
            )
            if not reached:
                count += 1
        hits[eps] = count / reps
    ratio = hits[0.4] / hits[0.2]
    assert 8 <= ratio <= 32, hits


def test_estimate_mu_eps_zero_exact():
    est = estimate_mu(0.0, 20, None, 100, seed=0)
    assert est.mu_hat == 1.0
    assert est.admissible_fraction == 1.0
    assert est.stderr == 0.0


def test_estimate_mu_parameter_checks():
    with pytest.raises(ParameterError):
        estimate_mu(0.1, 20, 5, 100, seed=0)  # margin below n // 2
    with pytest.raises(ParameterError):
        estimate_mu(0.1, 20, None, 50, seed=0)  # too few replicas


def test_estimate_mu_zero_admissible():
    with pytest.raises(EstimationError):
        estimate_mu(1.0, 10, None, 100, seed=0)


def test_estimate_mu_worker_invariance():
    a = estimate_mu(0.1, 20, None, 120, seed=3, workers=1)
    b = estimate_mu(0.1, 20, None, 120, seed=3, workers=3)
    assert a.mu_hat == b.mu_hat and a.stderr == b.stderr
    assert a.admissible_fraction == b.admissible_fraction


def test_estimate_mu_upper_bound_sane():
    est = estimate_mu(0.05, 60, None, 150, seed=1)
    assert 1.0 <= est.mu_hat <= 1.0 + 2 * 0.05
