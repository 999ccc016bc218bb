"""Pure numpy implementations of the Monte Carlo accumulation kernels.

Each kernel reduces one chunk of standard Gaussian draws to
``(count, mean, m2)`` where ``m2`` is the sum of squared deviations from the
chunk mean. Chunks are merged with :func:`condlab.kernels.merge_stats`.
"""
import numpy as np


def sphere_power_stats(matrix, draws, p):
    """Statistics of ``(|M g| / |g|) ** p`` over the rows ``g`` of ``draws``."""
    matrix = np.asarray(matrix, dtype=np.float64)
    draws = np.asarray(draws, dtype=np.float64)
    image = draws @ matrix.T
    ratio = np.einsum("ij,ij->i", image, image) / np.einsum("ij,ij->i", draws, draws)
    vals = ratio ** (0.5 * p)
    return _stats(vals)


def gaussian_power_stats(weights, draws, p):
    """Statistics of ``(sum_j w_j g_j**2) ** (p/2)`` over the rows of ``draws``."""
    weights = np.asarray(weights, dtype=np.float64)
    draws = np.asarray(draws, dtype=np.float64)
    vals = (draws * draws @ weights) ** (0.5 * p)
    return _stats(vals)


def _stats(vals):
    n = vals.shape[0]
    if n == 0:
        return 0, 0.0, 0.0
    mean = float(vals.mean())
    dev = vals - mean
    return n, mean, float(dev @ dev)
