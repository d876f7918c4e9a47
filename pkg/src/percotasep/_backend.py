"""Kernel backend selection.

The compiled extension is preferred when it built; set
``PERCOTASEP_BACKEND=python`` to force the pure NumPy/SciPy fallback
(used by the benchmark and the equivalence tests). Both backends expose
cross_sweep, cross_sweep_batch, tasep_chunk and grid_bfs with identical
signatures and bit-identical integer outputs.
"""

from __future__ import annotations

import os

from percotasep import _kernels_py


def _load():
    choice = os.environ.get("PERCOTASEP_BACKEND", "auto")
    if choice == "python":
        return _kernels_py
    try:
        from percotasep import _kernels
    except ImportError:
        if choice == "compiled":
            raise
        return _kernels_py
    return _kernels


kernels = _load()
BACKEND = kernels.BACKEND

cross_sweep = kernels.cross_sweep
cross_sweep_batch = kernels.cross_sweep_batch
tasep_chunk = kernels.tasep_chunk
grid_bfs = kernels.grid_bfs
