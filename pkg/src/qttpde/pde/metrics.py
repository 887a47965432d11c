from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..tt import TensorTrain, tt_entries, tt_to_dense

DENSE_MSE_MAX_CORES = 24      # 12 per dimension in 2D, 128 MB per dense vector
SAMPLES = 10 ** 6


def grid_mse(t: TensorTrain, exact: Callable, axes: Sequence[np.ndarray], seed: int = 0,
             samples: int = SAMPLES) -> float:
    """Mean squared error of a serial-ordered train against ``exact(*coords)``.

    Densifies up to 24 cores (comparing one slice of the first axis at a time);
    beyond that ``samples`` random grid indices are evaluated directly from the cores.
    """
    sizes = [len(a) for a in axes]
    total = int(np.prod(sizes))
    if t.n_cores <= DENSE_MSE_MAX_CORES:
        v = tt_to_dense(t).reshape(sizes[0], -1)
        rest = np.meshgrid(*axes[1:], indexing="ij")
        acc = 0.0
        for i, x in enumerate(axes[0]):
            acc += float(np.sum((v[i] - np.ravel(exact(x, *rest))) ** 2))
        return acc / total
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, total, samples)
    coords = np.unravel_index(idx, sizes)
    pts = [np.asarray(a)[i] for a, i in zip(axes, coords)]
    return float(np.mean((tt_entries(t, idx) - exact(*pts)) ** 2))


def train_mse(a: TensorTrain, b: TensorTrain, seed: int = 0, samples: int = SAMPLES) -> float:
    """Mean squared difference between two trains on the same grid."""
    if a.n_cores <= DENSE_MSE_MAX_CORES:
        return float(np.mean((tt_to_dense(a) - tt_to_dense(b)) ** 2))
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, 2 ** a.n_cores, samples)
    return float(np.mean((tt_entries(a, idx) - tt_entries(b, idx)) ** 2))
