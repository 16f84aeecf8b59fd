"""
Variance recursions of the HYGARCH family.

Each regime j carries a GARCH(1,1) variance h1, a FIGARCH(1,d,1)
variance h2 and a weight w in [0, 1]; the regime variance is
h = (1-w) h1 + w h2. The weight is either the logistic function of
the previous (signed) return or a constant (classic HYGARCH).

The step functions below are the reference implementation.
`variance_paths` evaluates the same recursions for a whole series
at once (linear filters plus cached fractional-lag convolutions)
and is what the filter and the sampler use.
"""
from collections import OrderedDict
from functools import lru_cache

import numpy as np
from scipy.signal import lfilter
from scipy.special import expit

from .common import log, DomainError
from .fracdiff import compute_coeffs
from .models import VariancePath


def logistic_weight(gamma, y_prev):
    """
    exp(-gamma y) / (1 + exp(-gamma y)), overflow-safe.
    """
    return expit(-gamma * np.asarray(y_prev, dtype=float))


def garch_step(p, h1_prev, y_prev_sq):
    return p.a0 + p.a1 * h1_prev + p.a2 * y_prev_sq


@lru_cache(maxsize=256)
def _lag_weights(b1, b2, d, K):
    g = compute_coeffs(d, K).coeffs
    c = np.empty(K)
    c[0] = b2 - b1 + g[0]
    c[1:] = g[1:] - b2 * g[:-1]
    if c[0] < 0:
        raise DomainError(
            'FIGARCH weight b2-b1+g1 is negative ({:.4g}) for b1={} b2={} d={}'.format(
                c[0], b1, b2, d))
    if np.any(c[1:] < 0):
        lag = int(np.argmax(c[1:] < 0)) + 2
        raise DomainError(
            'FIGARCH weight at lag {} is negative for b2={} d={}'.format(lag, b2, d))
    c.flags.writeable = False
    return c


def figarch_lag_weights(p, K):
    """
    Weights c_L of y^2_{t-L} in the expanded FIGARCH recursion:
    c_1 = b2 - b1 + g_1, c_L = g_L - b2 g_{L-1} for L = 2..K.
    Raises DomainError when any weight is negative.
    """
    return _lag_weights(float(p.b1), float(p.b2), float(p.d), int(K))


def figarch_step(p, g, h2_prev, y_sq_history):
    """
    h2_t = b0 + b1 h2_{t-1} + sum_L c_L y^2_{t-L}, truncated at K lags.

    `y_sq_history` holds squared returns newest first;
    lags beyond the available history count as zero.
    """
    c = figarch_lag_weights(p, g.K)
    hist = np.asarray(y_sq_history, dtype=float)[:g.K]
    return p.b0 + p.b1 * h2_prev + float(c[:len(hist)] @ hist)


def regime_variance(p, h1, h2, w):
    return (1 - w) * h1 + w * h2


def initial_variance(p, presample=None):
    """
    Starting value for both h1 and h2: sample variance of the
    presample window, else the GARCH fixed point when it exists, else 1.
    """
    if presample is not None and len(presample) > 1:
        var = float(np.var(presample))
        if var > 0:
            return var
    if p.a1 + p.a2 < 1:
        return p.a0 / (1 - p.a1 - p.a2)
    return 1.0


class FractionalLags:
    """
    Convolutions of a fixed squared-return series with the fractional
    differencing weights, cached per (d, K):

        G[t]  = sum_{L>=1} g_L y^2_{t-L}
        G2[t] = sum_{L>=2} g_{L-1} y^2_{t-L}
    """
    cache_max = 128

    def __init__(self, y):
        self.y = np.asarray(y, dtype=float)
        self.y_sq = self.y ** 2
        self.cache = OrderedDict()

    def __len__(self):
        return len(self.y)

    def get(self, d, K):
        key = (float(d), int(K))
        if key in self.cache:
            self.cache.move_to_end(key)
            return self.cache[key]
        T = len(self.y_sq)
        g = compute_coeffs(d, K).coeffs
        kern = np.concatenate(([0.0], g))[:T]
        kern2 = np.concatenate(([0.0, 0.0], g[:-1]))[:T]
        ret = (np.convolve(self.y_sq, kern)[:T],
               np.convolve(self.y_sq, kern2)[:T])
        self.cache[key] = ret
        if len(self.cache) > self.cache_max:
            self.cache.popitem(last=False)
        return ret


def regime_path(p, lags, K, h_init, weight_mode='logistic', w=None):
    """
    Component paths of one regime over the whole series held by `lags`.
    Returns (h1, h2, w, h), each of length T.
    """
    figarch_lag_weights(p, K) # positivity
    y, y_sq = lags.y, lags.y_sq
    T = len(y)
    h1 = np.empty(T)
    h2 = np.empty(T)
    h1[0] = h2[0] = h_init
    if T > 1:
        x1 = p.a0 + p.a2 * y_sq[:-1]
        h1[1:] = lfilter([1.0], [1.0, -p.a1], x1, zi=[p.a1 * h_init])[0]
        G, G2 = lags.get(p.d, K)
        x2 = p.b0 + G[1:] - p.b2 * G2[1:] + (p.b2 - p.b1) * y_sq[:-1]
        h2[1:] = lfilter([1.0], [1.0, -p.b1], x2, zi=[p.b1 * h_init])[0]
    if weight_mode == 'fixed':
        wt = np.full(T, float(w))
    else:
        # pre-history is zero, so w_0 = 1/2
        wt = logistic_weight(p.gamma, np.concatenate(([0.0], y[:-1])))
    return h1, h2, wt, regime_variance(p, h1, h2, wt)


def variance_paths(spec, y, h_init=None, presample=None, lags=None):
    """
    Evaluates the recursions of every regime of `spec` along returns `y`.

    `h_init` is a scalar or per-regime starting variance; by default it is
    taken from `presample` (or `y` itself) per `initial_variance`.
    """
    if lags is None:
        lags = FractionalLags(y)
    if h_init is None:
        ref = y if presample is None else presample
        h_init = [initial_variance(p, ref) for p in spec.regimes]
    h_init = np.broadcast_to(np.asarray(h_init, dtype=float), (spec.m,))
    cols = [regime_path(p, lags, spec.trunc_K, h0, spec.weight_mode, spec.w)
            for p, h0 in zip(spec.regimes, h_init)]
    return VariancePath(*(np.column_stack(parts) for parts in zip(*cols)))


def simulate_path(spec, T, burn_in=0, seed=None):
    """
    Simulates T observations and discards the first `burn_in`.
    Returns (returns, states, VariancePath) of length T - burn_in.

    States start from the stationary distribution; innovations are
    standard normal, independent of the chain.
    """
    from .stability import stationary_distribution

    if int(T) != T or T < 1:
        raise DomainError('Simulation length must be a positive integer, got {}'.format(T))
    if int(burn_in) != burn_in or not 0 <= burn_in < T:
        raise DomainError('Burn-in must be in [0, T), got {}'.format(burn_in))
    T, burn_in = int(T), int(burn_in)
    m, K = spec.m, spec.trunc_K
    rng = np.random.default_rng(seed)
    u = rng.random(T)
    eps = rng.standard_normal(T)

    pi = stationary_distribution(spec.transition)
    cum = np.cumsum(spec.transition.p, axis=1)
    z = np.empty(T, dtype=int)
    z[0] = np.searchsorted(np.cumsum(pi), u[0], side='right')
    for t in range(1, T):
        z[t] = np.searchsorted(cum[z[t-1]], u[t], side='right')
    np.minimum(z, m - 1, out=z)

    g = [compute_coeffs(p.d, K) for p in spec.regimes]
    h1 = np.empty((T, m))
    h2 = np.empty((T, m))
    w = np.empty((T, m))
    y = np.empty(T)
    y_sq = np.empty(T)
    h1[0] = h2[0] = [initial_variance(p) for p in spec.regimes]
    for t in range(T):
        if t > 0:
            hist = y_sq[max(0, t - K):t][::-1]
            for j, p in enumerate(spec.regimes):
                h1[t, j] = garch_step(p, h1[t-1, j], y_sq[t-1])
                h2[t, j] = figarch_step(p, g[j], h2[t-1, j], hist)
        y_prev = y[t-1] if t > 0 else 0.0
        for j, p in enumerate(spec.regimes):
            w[t, j] = spec.w if spec.weight_mode == 'fixed' else logistic_weight(p.gamma, y_prev)
        h_t = regime_variance(None, h1[t], h2[t], w[t])
        y[t] = np.sqrt(h_t[z[t]]) * eps[t]
        y_sq[t] = y[t] ** 2

    log.debug('simulate_path: T={} burn_in={} m={} seed={}'.format(T, burn_in, m, seed))
    h = regime_variance(None, h1, h2, w)
    keep = slice(burn_in, None)
    return y[keep], z[keep], VariancePath(h1[keep], h2[keep], w[keep], h[keep])
