"""Percolation on the strip Z x [-K, K].

Two edge models share the geometry:

* Cross model: vertical edges (length 1) and diagonal edges (length 2)
  are always open; each horizontal edge (length 1) is closed
  independently with probability eps.
* Standard model: no diagonals; horizontal and vertical edges are each
  closed independently with probability eps.

Rows are indexed j = -K..K and stored at array position r = j + K.
Closed flags are stored as boolean arrays with True meaning closed.

Random draw discipline: sampling one column consumes exactly 2K+1
uniforms for the horizontal edges (rows -K..K in order), then, in the
standard model, 2K uniforms for the vertical edges of the next vertex
column (rows -K..K-1). A standard-model strip additionally consumes a
prefix block of 2K uniforms for the verticals of vertex column 0, which
no EdgeColumn covers. A flag is closed iff its uniform is < eps.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from percotasep._backend import cross_sweep, grid_bfs
from percotasep.errors import ContractError, ParameterError


class Model(Enum):
    CROSS = "cross"
    STANDARD = "standard"


@dataclass(frozen=True)
class StripGeometry:
    """Half-width K (rows -K..K) and edge model."""

    K: int
    model: Model = Model.CROSS

    def __post_init__(self):
        if self.K < 1:
            raise ParameterError(f"K must be >= 1, got {self.K}")

    @property
    def n_rows(self) -> int:
        return 2 * self.K + 1


@dataclass(frozen=True)
class EdgeColumn:
    """Random edges between vertex columns i and i+1.

    horizontal[r]: edge (i, r-K) -> (i+1, r-K) is closed.
    vertical[r] (standard model only): edge (i+1, r-K) -> (i+1, r-K+1)
    is closed. Cross-model columns carry no vertical flags (all open).
    """

    horizontal: np.ndarray
    vertical: np.ndarray | None = None

    def validate(self, geom: StripGeometry) -> None:
        if self.horizontal.shape != (geom.n_rows,):
            raise ContractError("horizontal flag count does not match geometry")
        if geom.model is Model.CROSS:
            if self.vertical is not None:
                raise ContractError("cross-model columns have no vertical flags")
        else:
            if self.vertical is None or self.vertical.shape != (2 * geom.K,):
                raise ContractError("standard-model columns need 2K vertical flags")


@dataclass(frozen=True)
class DistanceProfile:
    """Distances D(i, j) from the origin to every vertex of column i."""

    column_index: int
    d: np.ndarray

    @property
    def K(self) -> int:
        return (self.d.shape[0] - 1) // 2

    def validate(self) -> None:
        """Check the Cross-model profile invariants; raise ContractError."""
        if self.column_index < 0 or np.any(self.d < 0):
            raise ContractError("negative column index or distance")
        diffs = np.abs(np.diff(self.d.astype(np.int64)))
        if np.any(diffs != 1):
            raise ContractError("adjacent profile entries must differ by exactly 1")
        j = np.arange(-self.K, self.K + 1)
        if np.any((self.d - (self.column_index + j)) % 2 != 0):
            raise ContractError("profile parity must equal (i + j) mod 2")


def initial_profile(K: int) -> DistanceProfile:
    """Column-0 profile for a source at (0, 0): d[j] = |j|."""
    j = np.arange(-K, K + 1, dtype=np.int64)
    return DistanceProfile(0, np.abs(j))


@dataclass(frozen=True)
class StripConfig:
    """A materialized strip segment: vertex columns 0..n_columns.

    horizontal has shape (n_columns, 2K+1); vertical, present only in
    the standard model, has shape (n_columns + 1, 2K) with row c holding
    the vertical closed flags of vertex column c.
    """

    geom: StripGeometry
    horizontal: np.ndarray
    vertical: np.ndarray | None = None

    @property
    def n_columns(self) -> int:
        return self.horizontal.shape[0]

    def column(self, i: int) -> EdgeColumn:
        if self.geom.model is Model.CROSS:
            return EdgeColumn(self.horizontal[i])
        return EdgeColumn(self.horizontal[i], self.vertical[i + 1])


def _check_eps(eps: float) -> None:
    if not 0.0 <= eps <= 1.0:
        raise ParameterError(f"eps must be in [0, 1], got {eps}")


def sample_column(
    rng: np.random.Generator, geom: StripGeometry, eps: float
) -> EdgeColumn:
    """Sample one EdgeColumn; consumes the documented number of draws."""
    _check_eps(eps)
    horizontal = rng.random(geom.n_rows) < eps
    if geom.model is Model.CROSS:
        return EdgeColumn(horizontal)
    vertical = rng.random(2 * geom.K) < eps
    return EdgeColumn(horizontal, vertical)


def sample_strip(
    rng: np.random.Generator, geom: StripGeometry, eps: float, n_columns: int
) -> StripConfig:
    """Sample a strip segment of n_columns columns.

    Consumes exactly the draws of n_columns sample_column calls (plus
    the standard model's 2K-draw prefix for column 0 verticals), in the
    same order, so column-wise and bulk sampling agree stream-for-stream.
    """
    _check_eps(eps)
    k2 = 2 * geom.K
    rows = geom.n_rows
    if geom.model is Model.CROSS:
        flat = rng.random(n_columns * rows) < eps
        return StripConfig(geom, flat.reshape(n_columns, rows))
    flat = rng.random(k2 + n_columns * (rows + k2)) < eps
    vertical = np.empty((n_columns + 1, k2), dtype=bool)
    vertical[0] = flat[:k2]
    blocks = flat[k2:].reshape(n_columns, rows + k2)
    horizontal = blocks[:, :rows].copy()
    vertical[1:] = blocks[:, rows:]
    return StripConfig(geom, horizontal, vertical)


def cross_step(profile: DistanceProfile, col: EdgeColumn) -> DistanceProfile:
    """Advance the Cross-model distance profile by one column.

    D(i+1, j) = min(D(i, j) + 1 if the horizontal edge at row j is open,
    D(i, j-1) + 2, D(i, j+1) + 2), then vertical relaxation to a fixed
    point within column i+1.
    """
    if col.vertical is not None:
        raise ContractError("cross_step requires a cross-model column")
    profile.validate()
    closed = np.ascontiguousarray(col.horizontal, dtype=np.uint8).reshape(1, -1)
    d = cross_sweep(closed, profile.d)
    return DistanceProfile(profile.column_index + 1, d)


def cross_distance_profile(config: StripConfig) -> DistanceProfile:
    """Sweep the Cross-model DP over all columns of ``config``."""
    if config.geom.model is not Model.CROSS:
        raise ContractError("cross sweep requires the Cross model")
    d0 = initial_profile(config.geom.K)
    closed = np.ascontiguousarray(config.horizontal, dtype=np.uint8)
    return DistanceProfile(config.n_columns, cross_sweep(closed, d0.d))


def shortest_path_oracle(
    geom: StripGeometry,
    config: StripConfig,
    source: tuple[int, int],
    target: tuple[int, int] | None,
) -> int | None | dict:
    """Exact shortest-path length on the explicit strip graph.

    Plain Dijkstra over all materialized edges with lengths 1 (horizontal,
    vertical) and 2 (diagonal); no structural assumptions, left steps
    allowed. Returns None when no open path exists, or the whole distance
    dict when target is None. Kept independent of the column-sweep DP on
    purpose: it is the correctness arbiter.
    """
    n = config.n_columns
    K = geom.K
    targets = [("source", source)] + ([("target", target)] if target else [])
    for label, (i, j) in targets:
        if not (0 <= i <= n and -K <= j <= K):
            raise ParameterError(f"{label} {(i, j)} outside the materialized strip")
    cross = geom.model is Model.CROSS
    h = config.horizontal
    v = config.vertical

    def neighbors(i, j):
        if i < n and not h[i, j + K]:
            yield (i + 1, j), 1
        if i > 0 and not h[i - 1, j + K]:
            yield (i - 1, j), 1
        if j < K and (cross or not v[i, j + K]):
            yield (i, j + 1), 1
        if j > -K and (cross or not v[i, j - 1 + K]):
            yield (i, j - 1), 1
        if cross:
            for di in (-1, 1):
                for dj in (-1, 1):
                    ii, jj = i + di, j + dj
                    if 0 <= ii <= n and -K <= jj <= K:
                        yield (ii, jj), 2

    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        dcur, u = heapq.heappop(heap)
        if u == target:
            return dcur
        if dcur > dist.get(u, 1 << 60):
            continue
        for w, length in neighbors(*u):
            nd = dcur + length
            if nd < dist.get(w, 1 << 60):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist if target is None else None


def standard_distance(
    geom: StripGeometry, config: StripConfig, n: int
) -> int | None:
    """D^K(n, 0): open-path distance (0,0) -> (n,0) within the segment."""
    if geom.model is not Model.STANDARD:
        raise ContractError("standard_distance requires the standard model")
    if not 0 <= n <= config.n_columns:
        raise ParameterError("columns 0..n are not materialized")
    h_open = (~config.horizontal[:n]).astype(np.uint8)
    v_open = (~config.vertical[: n + 1]).astype(np.uint8)
    dist = grid_bfs(h_open, v_open, 0, geom.K)
    value = int(dist[n, geom.K])
    return None if value < 0 else value


def count_bad_squares(config: StripConfig, box=None) -> int:
    """Number of unit squares of the box with two or more closed sides.

    ``box`` is (col_lo, col_hi, row_lo, row_hi) in lattice coordinates,
    identifying squares with lower-left corners (i, j), col_lo <= i < col_hi,
    row_lo <= j < row_hi. Defaults to the whole materialized region.
    """
    if config.geom.model is not Model.STANDARD:
        raise ContractError("event A is defined for the standard model")
    K = config.geom.K
    if box is None:
        box = (0, config.n_columns, -K, K)
    c0, c1, r0, r1 = box
    if not (0 <= c0 <= c1 <= config.n_columns and -K <= r0 <= r1 <= K):
        raise ParameterError("box outside the materialized region")
    h = config.horizontal[c0:c1, r0 + K : r1 + K + 1].astype(np.int8)
    v = config.vertical[c0 : c1 + 1, r0 + K : r1 + K].astype(np.int8)
    counts = h[:, :-1] + h[:, 1:] + v[:-1, :] + v[1:, :]
    return int(np.count_nonzero(counts >= 2))


def check_event_a(config: StripConfig, box=None) -> bool:
    """True iff every unit square of the box has at most one closed edge."""
    return count_bad_squares(config, box) == 0


def forced_open_companion(config: StripConfig) -> StripConfig:
    """Cross-model config with the same horizontal edges, verticals forced open."""
    geom = StripGeometry(config.geom.K, Model.CROSS)
    return StripConfig(geom, config.horizontal)


def sample_standard_batch(
    rng: np.random.Generator, K: int, eps: float, n_columns: int, batch: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sample ``batch`` standard-model strips at once.

    Returns (horizontal, vertical) closed flags of shapes
    (batch, n_columns, 2K+1) and (batch, n_columns+1, 2K). Each replica's
    draws follow the sample_strip order, replicas consecutive on one stream.
    """
    _check_eps(eps)
    rows, k2 = 2 * K + 1, 2 * K
    flat = rng.random((batch, k2 + n_columns * (rows + k2))) < eps
    vertical = np.empty((batch, n_columns + 1, k2), dtype=bool)
    vertical[:, 0] = flat[:, :k2]
    blocks = flat[:, k2:].reshape(batch, n_columns, rows + k2)
    horizontal = blocks[:, :, :rows].copy()
    vertical[:, 1:] = blocks[:, :, rows:]
    return horizontal, vertical


def batch_has_bad_square(horizontal: np.ndarray, vertical: np.ndarray) -> np.ndarray:
    """Per-replica flag: some unit square has two or more closed sides."""
    counts = (
        horizontal[:, :, :-1].astype(np.int8)
        + horizontal[:, :, 1:]
        + vertical[:, :-1, :]
        + vertical[:, 1:, :]
    )
    return (counts >= 2).any(axis=(1, 2))


@dataclass(frozen=True)
class EventABoundReport:
    """Empirical P(not A) against the union bound 22*K*n*eps^2."""

    K: int
    n: int
    eps: float
    replicas: int
    p_hat: float
    stderr: float
    bound: float
    seed: int

    @property
    def satisfied(self) -> bool:
        """P(not A) <= bound within four standard errors."""
        return self.p_hat <= self.bound + 4.0 * self.stderr


def event_a_bound_report(
    K: int, n: int, eps: float, replicas: int, seed: int
) -> EventABoundReport:
    """Estimate P(event A fails) and compare it to 22*K*n*eps^2."""
    from percotasep import rng as rng_mod

    rng = rng_mod.stream(seed)
    bad = 0
    done = 0
    batch = max(1, min(replicas, (1 << 24) // max(1, n * (4 * K + 1))))
    while done < replicas:
        b = min(batch, replicas - done)
        h, v = sample_standard_batch(rng, K, eps, n, b)
        bad += int(batch_has_bad_square(h, v).sum())
        done += b
    p_hat = bad / replicas
    stderr = math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / replicas) / replicas)
    return EventABoundReport(
        K, n, eps, replicas, p_hat, stderr, 22.0 * K * n * eps * eps, seed
    )


@dataclass(frozen=True)
class PathwiseBoundReport:
    """Prop-style pathwise check on configurations satisfying event A:
    the standard distance never exceeds the diagonal-added distance + 3K."""

    K: int
    n: int
    eps: float
    accepted: int
    trials: int
    violations: int
    unreachable: int
    max_gap: int
    seed: int

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.unreachable == 0


def pathwise_bound_check(
    K: int,
    n: int,
    eps: float,
    accepted_target: int,
    seed: int,
    max_trials: int = 10_000_000,
) -> PathwiseBoundReport:
    """Rejection-sample on event A; check D^K(n,0) <= D^{K,d}(n,0) + 3K pathwise.

    The diagonal-added distance reuses the same horizontal edges with all
    verticals and diagonals forced open.
    """
    from percotasep import rng as rng_mod

    geom = StripGeometry(K, Model.STANDARD)
    rng = rng_mod.stream(seed)
    accepted = trials = violations = unreachable = 0
    max_gap = -(1 << 30)
    batch = max(16, min(8192, (1 << 23) // max(1, n * (4 * K + 1))))
    while accepted < accepted_target and trials < max_trials:
        h, v = sample_standard_batch(rng, K, eps, n, batch)
        good = ~batch_has_bad_square(h, v)
        trials += batch
        for idx in np.nonzero(good)[0]:
            if accepted == accepted_target:
                break
            accepted += 1
            config = StripConfig(geom, h[idx], v[idx])
            d_std = standard_distance(geom, config, n)
            d_cross = int(
                cross_distance_profile(forced_open_companion(config)).d[K]
            )
            if d_std is None:
                unreachable += 1
                continue
            max_gap = max(max_gap, d_std - d_cross)
            if d_std > d_cross + 3 * K:
                violations += 1
    return PathwiseBoundReport(
        K, n, eps, accepted, trials, violations, unreachable, max_gap, seed
    )


# --- compact edge text format (--dump-edges / --replay-edges) ----------------
#
# One line per column: "<i> H:<bits>" (cross) or "<i> H:<bits> V:<bits>"
# (standard), bits in row order -K..K ('1' = closed), V holding the
# verticals of vertex column i+1. A standard-model dump starts with a
# "-1 V:<bits>" line for the verticals of vertex column 0.


def _bits(flags: np.ndarray) -> str:
    return "".join("1" if f else "0" for f in flags)


def dump_edges(config: StripConfig) -> str:
    lines = [f"# model={config.geom.model.value} K={config.geom.K}"]
    if config.geom.model is Model.STANDARD:
        lines.append(f"-1 V:{_bits(config.vertical[0])}")
    for i in range(config.n_columns):
        line = f"{i} H:{_bits(config.horizontal[i])}"
        if config.geom.model is Model.STANDARD:
            line += f" V:{_bits(config.vertical[i + 1])}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def parse_edges(text: str) -> StripConfig:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0]
    if not header.startswith("#"):
        raise ParameterError("edge dump must start with a '# model=... K=...' header")
    fields = dict(part.split("=") for part in header[1:].split())
    geom = StripGeometry(int(fields["K"]), Model(fields["model"]))
    horizontal, vertical = [], []
    for line in lines[1:]:
        parts = line.split()
        for part in parts[1:]:
            kind, bits = part.split(":")
            flags = np.array([c == "1" for c in bits], dtype=bool)
            (horizontal if kind == "H" else vertical).append(flags)
    config = StripConfig(
        geom,
        np.array(horizontal, dtype=bool),
        np.array(vertical, dtype=bool) if vertical else None,
    )
    if config.horizontal.shape[1] != geom.n_rows:
        raise ParameterError("horizontal bit count does not match K")
    if geom.model is Model.STANDARD and (
        config.vertical.shape != (config.n_columns + 1, 2 * geom.K)
    ):
        raise ParameterError("vertical bit rows must cover columns 0..n")
    return config
