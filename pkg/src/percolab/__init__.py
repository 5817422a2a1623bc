"""Bond percolation on semi-cylinders: traversable heights, crossing events,
rate estimation and random-cluster sampling."""
from numba import config as _nb_config

# the TBB layer shipped here is too old and only produces a warning
_nb_config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

__version__ = "0.1.0"
