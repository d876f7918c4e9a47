"""Expected strip distances: exact chain propagation and Monte Carlo.

The expectation identity E[D(n,0)] = n + 2 eps sum_{i<n} P(pair at step i)
(pair = particle at site 0, hole at site 1) turns the distance expectation
into chain propagation; the stationary-start variant is exactly linear,
E = n (1 + 2 eps nu). Exact-rational arithmetic is available where the
two-sided bound 0 <= E[D] - n(1 + 2 eps nu) <= 2K is checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from percotasep import parallel
from percotasep import rng as rng_mod
from percotasep._backend import cross_sweep_batch, grid_bfs
from percotasep.errors import ParameterError
from percotasep.strip import (
    Model,
    StripConfig,
    StripGeometry,
    cross_distance_profile,
    initial_profile,
    shortest_path_oracle,
)
from percotasep.tasep import (
    TasepRates,
    nu_pair_from_probabilities,
    state_to_int,
    stationary_exact,
    stationary_exact_rational,
    step_initial_state,
    transition_matrix,
    transition_rows_scaled,
)


class ExpectationMethod(Enum):
    EXACT_CHAIN = "exact_chain"
    MONTE_CARLO = "monte_carlo"
    STATIONARY_START = "stationary_start"


@dataclass(frozen=True)
class StripExpectation:
    K: int
    eps: float
    n: int
    value: float | Fraction
    method: ExpectationMethod
    stderr: float | None = None

    def __post_init__(self):
        if self.value < self.n:
            raise ParameterError("expected distance below n is impossible")


def pair_probabilities_exact(K: int, eps: float, n: int) -> np.ndarray:
    """P(site 0 occupied, site 1 empty) at steps 0..n-1, float64 propagation."""
    P = transition_matrix(K, TasepRates.uniform(eps))
    w = np.zeros(P.shape[0])
    w[state_to_int(step_initial_state(K))] = 1.0
    out = np.empty(n)
    for i in range(n):
        out[i] = nu_pair_from_probabilities(w, K)
        w = w @ P
    return out


def expected_distance_exact(K: int, eps: float, n: int) -> StripExpectation:
    """E[D(n,0)] by dense propagation of the particle chain (K <= 7)."""
    if not 0.0 < eps < 1.0:
        raise ParameterError("eps must lie strictly inside (0, 1)")
    if n < 0:
        raise ParameterError("n must be >= 0")
    value = n + 2.0 * eps * pair_probabilities_exact(K, eps, n).sum()
    return StripExpectation(K, eps, n, value, ExpectationMethod.EXACT_CHAIN)


def expected_distance_exact_rational(K: int, eps, n: int) -> list[Fraction]:
    """E[D(i,0)] for i = 0..n as exact rationals (eps rational, K <= 7).

    Propagates integer numerators over a common power-of-denominator
    scale, so no floating point enters the sandwich checks.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ParameterError("eps must lie strictly inside (0, 1)")
    rows, step_den = transition_rows_scaled(K, eps)
    size = len(rows)
    num = [0] * size
    num[state_to_int(step_initial_state(K))] = 1
    den = 1
    sel = [
        s for s in range(size) if (s >> (K - 1)) & 1 == 1 and (s >> K) & 1 == 0
    ]
    values = [Fraction(0)]
    pair_sum = Fraction(0)
    for i in range(1, n + 1):
        pair_sum += Fraction(sum(num[s] for s in sel), den)
        nxt = [0] * size
        for s, n_s in enumerate(num):
            if n_s == 0:
                continue
            for t, w in rows[s]:
                nxt[t] += n_s * w
        num = nxt
        den *= step_den
        values.append(i + 2 * eps * pair_sum)
    return values


def stationary_start_expectation(
    K: int, eps, n: int, exact: bool = False
) -> StripExpectation:
    """n (1 + 2 eps nu): the stationary-start chain's distance expectation."""
    if exact:
        _, nu = stationary_exact_rational(K, Fraction(eps))
        value = n * (1 + 2 * Fraction(eps) * nu)
    else:
        nu = stationary_exact(K, TasepRates.uniform(eps)).nu_pair
        value = n * (1.0 + 2.0 * eps * nu)
    return StripExpectation(K, float(eps), n, value, ExpectationMethod.STATIONARY_START)


def _mc_distance_range(
    K: int, eps: float, n: int, seed: int, start: int, stop: int
) -> tuple[int, int]:
    """Sum and sum of squares of D(n,0) over replicas start..stop-1.

    Distances are integers, so the sums are exact and merging partial
    results is associative: estimates are bit-identical for any chunking.
    """
    rows = 2 * K + 1
    batch = max(1, (1 << 24) // max(1, n * rows))
    d0 = initial_profile(K).d
    total = total_sq = 0
    done = start
    while done < stop:
        b = min(batch, stop - done)
        closed = np.empty((b, n, rows), dtype=np.uint8)
        for r in range(b):
            rng = rng_mod.stream(seed, done + r)
            closed[r] = rng.random((n, rows)) < eps
        finals = cross_sweep_batch(closed, d0)[:, K]
        total += int(finals.sum())
        total_sq += int((finals * finals).sum())
        done += b
    return total, total_sq


def monte_carlo_distance(
    K: int, eps: float, n: int, replicas: int, seed: int, workers: int | None = None
) -> StripExpectation:
    """Mean and stderr of D(n,0) over independent Cross-model replicas.

    Replica r draws from its own stream (master seed, r); the result is
    a pure function of (K, eps, n, replicas, seed), independent of how
    replicas are batched or how many workers run them.
    """
    if replicas < 2:
        raise ParameterError("need at least 2 replicas")
    parts = parallel.run_replica_chunks(
        _mc_distance_range, replicas, (K, eps, n, seed), workers
    )
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / replicas
    var = max(0.0, (total_sq - replicas * mean * mean) / (replicas - 1))
    stderr = math.sqrt(var / replicas)
    return StripExpectation(
        K, eps, n, mean, ExpectationMethod.MONTE_CARLO, stderr=stderr
    )


@dataclass(frozen=True)
class LowerBoundReport:
    """Strip-confinement and edge-monotonicity checks on plane samples."""

    k: int
    eps: float
    replicas: int
    equality_violations: int  # plane D^d(k,0) != strip D^{k,d}(k,0)
    inequality_violations: int  # D^d(k,0) > plane D(k,0) with D finite
    monotonicity_violations: int  # D^d(n,0) decreasing in n somewhere
    seed: int

    @property
    def passed(self) -> bool:
        return (
            self.equality_violations == 0
            and self.inequality_violations == 0
            and self.monotonicity_violations == 0
        )


def lower_bound_check(
    k: int, eps: float, seed: int, replicas: int, pad: int = 4
) -> LowerBoundReport:
    """Compare plane and strip distances on shared horizontal edges.

    Samples a window around the segment (0,0)-(k,0). The diagonal-added
    plane distance D^d (verticals and diagonals forced open) is computed
    by the unrestricted Dijkstra oracle on a strip of half-width k+pad
    with pad extra columns on each side, so confinement to the strip Z_k
    is itself under test, not assumed.
    """
    wide = StripGeometry(k + pad, Model.CROSS)
    n_cols = k + 2 * pad
    eq_bad = ineq_bad = mono_bad = 0
    for r in range(replicas):
        rng = rng_mod.stream(seed, r)
        h_closed = rng.random((n_cols, wide.n_rows)) < eps
        v_closed = rng.random((n_cols + 1, wide.n_rows - 1)) < eps
        wide_config = StripConfig(wide, h_closed)
        dist = shortest_path_oracle(wide, wide_config, (pad, 0), None)
        d_plane = [dist[(pad + i, 0)] for i in range(k + 1)]
        if any(b < a for a, b in zip(d_plane, d_plane[1:])):
            mono_bad += 1
        # strip Z_k with the same horizontal edges
        strip_cfg = StripConfig(
            StripGeometry(k, Model.CROSS),
            h_closed[pad : pad + k, pad : pad + 2 * k + 1],
        )
        d_strip = int(cross_distance_profile(strip_cfg).d[k])
        if d_plane[k] != d_strip:
            eq_bad += 1
        # standard plane distance with the sampled verticals
        d_std_grid = grid_bfs(
            (~h_closed).astype(np.uint8),
            (~v_closed).astype(np.uint8),
            pad,
            wide.K,
        )
        d_std = int(d_std_grid[pad + k, wide.K])
        if d_std >= 0 and d_plane[k] > d_std:
            ineq_bad += 1
    return LowerBoundReport(k, eps, replicas, eq_bad, ineq_bad, mono_bad, seed)
