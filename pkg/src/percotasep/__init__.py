"""Graph distances on supercritical percolation clusters, via the
correspondence between strip distances with open diagonals and a
synchronous TASEP with open boundaries."""

from percotasep._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
