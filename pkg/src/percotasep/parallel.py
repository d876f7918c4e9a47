"""Replica fan-out.

Estimators loop over independent replicas whose streams depend only on
(master seed, replica index), so work can be split into index ranges and
the partial accumulators merged in canonical (index) order. The worker
count defaults to the PERCOTASEP_THREADS environment variable; results
are identical for every worker count by construction.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

from percotasep.errors import ParameterError


def default_workers() -> int:
    raw = os.environ.get("PERCOTASEP_THREADS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ParameterError(f"PERCOTASEP_THREADS must be an integer, got {raw!r}")
    if workers < 1:
        raise ParameterError("PERCOTASEP_THREADS must be >= 1")
    return workers


def run_replica_chunks(fn, total: int, args: tuple, workers: int | None = None):
    """Run fn(*args, start, stop) over a partition of range(total).

    Returns the partial results in ascending start order, regardless of
    scheduling. ``fn`` must be picklable (module-level) when workers > 1.
    """
    if workers is None:
        workers = default_workers()
    workers = min(workers, total) or 1
    if workers == 1:
        return [fn(*args, 0, total)]
    bounds = [(total * i) // workers for i in range(workers + 1)]
    spans = [(a, b) for a, b in zip(bounds, bounds[1:]) if a < b]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args, a, b) for a, b in spans]
        return [f.result() for f in futures]
