"""
Regime filter, one-step-ahead variance forecasts and forecast metrics.

psi_t[j] = p(z_t=j | y_0..y_{t-1}) is updated by

    psi_{t+1} = normalize(psi_t * f_t) @ P,   f_t[k] = N(y_t; 0, h_{t,k})

in log space. The forecast of y_t^2 is sum_k psi_t[k] h_{t,k} and the
predictive density of y_t is the normal mixture with weights psi_t.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .common import log, DomainError, ComputationError
from .fracdiff import compute_coeffs
from .volatility import (garch_step, figarch_step, logistic_weight,
                         regime_variance, initial_variance, variance_paths)
from .stability import stationary_distribution


LOG_2PI = np.log(2 * np.pi)


def normal_logpdf(y, h):
    """ log N(y; 0, h) for variance h """
    return -0.5 * (LOG_2PI + np.log(h) + np.square(y) / h)


@dataclass(frozen=True, eq=False)
class FilterState:
    t: int
    psi: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    w: np.ndarray
    h: np.ndarray
    y_sq_history: np.ndarray = None # newest first, up to K values

    def __post_init__(self):
        if abs(self.psi.sum() - 1) > 1e-12 or np.any(self.psi < 0):
            raise ComputationError('psi is not a probability vector at t={}: {}'.format(
                self.t, self.psi.tolist()))


@dataclass(frozen=True)
class ForecastRecord:
    t: int
    variance: float
    density: float


@dataclass(frozen=True, eq=False)
class FilterRun:
    """ Filter output over a whole series; psi[t] conditions on y_0..y_{t-1} """
    psi: np.ndarray
    variance: np.ndarray
    density: np.ndarray
    log_density: np.ndarray
    paths: object # VariancePath

    def records(self, start=0, stop=None):
        idx = range(len(self.variance))[start:stop]
        return [ForecastRecord(t, float(self.variance[t]), float(self.density[t])) for t in idx]

    @property
    def log_likelihood(self):
        return float(self.log_density.sum())


def _normalize_log(log_a):
    total = logsumexp(log_a)
    if not np.isfinite(total):
        raise ComputationError('All regime likelihoods underflowed')
    return np.exp(log_a - total)


def _advance_psi(psi, log_f, P):
    with np.errstate(divide='ignore'):
        posterior = _normalize_log(np.log(psi) + log_f)
    psi = posterior @ P
    return psi / psi.sum()


def init_filter(spec, presample=None):
    """
    psi from the stationary distribution; h1 = h2 from `presample`.
    """
    m = spec.m
    h0 = np.array([initial_variance(p, presample) for p in spec.regimes])
    if spec.weight_mode == 'fixed':
        w = np.full(m, float(spec.w))
    else:
        w = np.array([logistic_weight(p.gamma, 0.0) for p in spec.regimes])
    return FilterState(
        t=0,
        psi=stationary_distribution(spec.transition),
        h1=h0, h2=h0.copy(), w=w,
        h=regime_variance(None, h0, h0, w),
        y_sq_history=np.zeros(0),
    )


def filter_step(prev, y_prev, spec):
    """
    Advances the filter from t-1 to t after observing y_{t-1}.
    """
    psi = _advance_psi(prev.psi, normal_logpdf(y_prev, prev.h), spec.transition.p)
    K = spec.trunc_K
    history = np.concatenate(([y_prev ** 2], prev.y_sq_history))[:K]
    h1 = np.array([garch_step(p, prev.h1[j], y_prev ** 2)
                   for j, p in enumerate(spec.regimes)])
    h2 = np.array([figarch_step(p, compute_coeffs(p.d, K), prev.h2[j], history)
                   for j, p in enumerate(spec.regimes)])
    if spec.weight_mode == 'fixed':
        w = prev.w
    else:
        w = np.array([logistic_weight(p.gamma, y_prev) for p in spec.regimes])
    return FilterState(t=prev.t + 1, psi=psi, h1=h1, h2=h2, w=w,
                       h=regime_variance(None, h1, h2, w), y_sq_history=history)


def forecast_variance(state):
    return float(state.psi @ state.h)


def predictive_density(state, y):
    return float(state.psi @ norm.pdf(y, scale=np.sqrt(state.h)))


def run_filter(spec, y, presample=None, paths=None):
    """
    Filters the whole series; forecasts for every t use y_0..y_{t-1} only.
    """
    y = np.asarray(y, dtype=float)
    if paths is None:
        paths = variance_paths(spec, y, presample=y if presample is None else presample)
    T, m = paths.h.shape
    P = spec.transition.p
    log_f = normal_logpdf(y[:, None], paths.h)
    psi = np.empty((T, m))
    psi[0] = stationary_distribution(spec.transition)
    for t in range(1, T):
        psi[t] = _advance_psi(psi[t-1], log_f[t-1], P)
    with np.errstate(divide='ignore'):
        log_density = logsumexp(np.log(psi) + log_f, axis=1)
    variance = np.einsum('tk,tk->t', psi, paths.h)
    log.debug('run_filter: T={} m={} loglik={:.4f}'.format(T, m, log_density.sum()))
    return FilterRun(psi=psi, variance=variance, density=np.exp(log_density),
                     log_density=log_density, paths=paths)


def run_metrics(forecasts, realized):
    """
    RMSE of forecast variances against squared returns, and the
    log-likelihood sum of predictive densities.
    """
    variance = np.array([rec.variance for rec in forecasts], dtype=float)
    density = np.array([rec.density for rec in forecasts], dtype=float)
    realized = np.asarray(realized, dtype=float)
    if len(variance) != len(realized):
        raise DomainError('Forecast and realized series differ in length: {} vs {}'.format(
            len(variance), len(realized)))
    if not len(variance):
        raise DomainError('No forecasts to evaluate')
    rmse = float(np.sqrt(np.mean((variance - realized ** 2) ** 2)))
    llv = float(np.sum(np.log(density)))
    return rmse, llv


def segment_metrics(run, y, split):
    """ (RMSE, LLV) for the in-sample [0, split) and out-of-sample [split, T) segments """
    return {
        'insample': run_metrics(run.records(0, split), y[:split]),
        'outsample': run_metrics(run.records(split), y[split:]),
    }

