"""
Coefficients of the fractional differencing expansion

    (1-B)^d = 1 - sum_{i>=1} g_i B^i,  0 < d < 1

computed by the recurrence g_1 = d, g_i = g_{i-1} (i-1-d) / i.
Results are cached per (d, K) and returned as read-only arrays,
so they can be shared between threads and sampler sweeps.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

import config
from .common import DomainError


@dataclass(frozen=True)
class FracDiffCoeffs:
    d: float
    K: int
    coeffs: np.ndarray # g_1..g_K

    def __len__(self):
        return self.K


@lru_cache(maxsize=256)
def _recurrence(d, K):
    ratios = (np.arange(1, K) - d) / np.arange(2, K + 1)
    g = d * np.concatenate(([1.0], np.cumprod(ratios)))
    g.flags.writeable = False
    return g


def compute_coeffs(d, K=None):
    """
    Returns g_1..g_K for memory exponent d.
    """
    if K is None:
        K = config.FRACDIFF_K
    d = float(d)
    if not 0 < d < 1:
        raise DomainError('Memory exponent d must lie in (0, 1), got {}'.format(d))
    if int(K) != K or K < 1:
        raise DomainError('Truncation length K must be a positive integer, got {}'.format(K))
    K = int(K)
    return FracDiffCoeffs(d=d, K=K, coeffs=_recurrence(d, K))


def tail_weight(coeffs):
    """
    Mass discarded by truncation: 1 - sum(g_1..g_K)
    """
    return 1.0 - float(np.sum(coeffs.coeffs))


def partial_sums(coeffs):
    return np.cumsum(coeffs.coeffs)
