"""
Value-at-risk forecasts and likelihood-ratio backtests.

VaR_t(rho) = F^{-1}(rho) sigma_t, with F^{-1} the empirical quantile of
in-sample standardized residuals. An exception is a day with y_t < VaR_t.

 * unconditional coverage (Kupiec): exception rate equals rho;
 * independence (Christoffersen): exceptions do not cluster;
 * conditional coverage: both, LR_CC = LR_UC + LR_IND.

All likelihoods use 0 log 0 = 0, so every statistic is defined for
degenerate counts.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy
from scipy.stats import chi2, norm

import config
from .common import log, DomainError


def critical_value(df, confidence=None):
    return float(chi2.ppf(confidence or config.BACKTEST_CONFIDENCE, df))


def _check_level(rho):
    if not 0 < rho < 0.5:
        raise DomainError('Risk level must lie in (0, 0.5), got {}'.format(rho))


@dataclass(frozen=True, eq=False)
class VarSeries:
    rho: float
    quantile: float
    var: np.ndarray # per-day VaR in return units

    def __len__(self):
        return len(self.var)


@dataclass(frozen=True, eq=False)
class ExceptionSeries:
    q: np.ndarray
    n: int
    n00: int
    n01: int
    n10: int
    n11: int

    @property
    def T(self):
        return len(self.q)

    @property
    def counts(self):
        return self.n00, self.n01, self.n10, self.n11


@dataclass(frozen=True)
class BacktestReport:
    rho: float
    T: int
    expected: float
    n: int
    lr_uc: float
    lr_ind: float
    lr_cc: float
    p_uc: float
    p_ind: float
    p_cc: float
    pass_uc: bool
    pass_ind: bool
    pass_cc: bool

    def as_document(self, prefix=''):
        return {prefix + name: getattr(self, name) for name in self.__dataclass_fields__}


def standardized_quantile(in_sample, variances, rho, normal_fallback=False, min_obs=None):
    """
    rho-quantile of y_t / sigma_t over the in-sample window
    (linear interpolation between order statistics).

    With fewer than `min_obs` observations the standard normal
    quantile is used if `normal_fallback` is set, otherwise DomainError.
    """
    _check_level(rho)
    min_obs = config.MIN_QUANTILE_OBS if min_obs is None else min_obs
    y = np.asarray(in_sample, dtype=float)
    variances = np.asarray(variances, dtype=float)
    if y.shape != variances.shape:
        raise DomainError('Returns and variances differ in length: {} vs {}'.format(
            len(y), len(variances)))
    if len(y) < min_obs:
        if normal_fallback:
            log.warning('Only {} in-sample observations; using the normal quantile'.format(len(y)))
            return float(norm.ppf(rho))
        raise DomainError(
            'Need at least {} in-sample observations for the empirical quantile, got {}; '
            'set risk.normal_fallback to use the normal quantile'.format(min_obs, len(y)))
    if np.any(variances <= 0):
        raise DomainError('Variance forecasts must be positive')
    return float(np.quantile(y / np.sqrt(variances), rho))


def var_forecast(sigma, quantile):
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise DomainError('Volatility must be positive')
    ret = quantile * sigma
    return float(ret) if ret.ndim == 0 else ret


def var_series(variances, quantile, rho):
    return VarSeries(rho=rho, quantile=quantile,
                     var=var_forecast(np.sqrt(np.asarray(variances, dtype=float)), quantile))


def kupiec_uc(n, T, rho):
    """
    -2 log[rho^n (1-rho)^(T-n) / (phi^n (1-phi)^(T-n))], phi = n/T
    """
    if T < 1 or not 0 <= n <= T:
        raise DomainError('Need 0 <= n <= T and T >= 1, got n={} T={}'.format(n, T))
    phi = n / T
    null = xlogy(n, rho) + xlogy(T - n, 1 - rho)
    alt = xlogy(n, phi) + xlogy(T - n, 1 - phi)
    return float(max(-2 * (null - alt), 0.0))


def transition_counts(q):
    """ (n00, n01, n10, n11) over the T-1 consecutive pairs of q """
    q = np.asarray(q, dtype=int)
    prev, cur = q[:-1], q[1:]
    return (int(np.sum((prev == 0) & (cur == 0))), int(np.sum((prev == 0) & (cur == 1))),
            int(np.sum((prev == 1) & (cur == 0))), int(np.sum((prev == 1) & (cur == 1))))


def _markov_loglik(n00, n01, n10, n11):
    phi01 = n01 / (n00 + n01) if n00 + n01 else 0.0
    phi11 = n11 / (n10 + n11) if n10 + n11 else 0.0
    return (xlogy(n01, phi01) + xlogy(n00, 1 - phi01)
            + xlogy(n11, phi11) + xlogy(n10, 1 - phi11))


def christoffersen_ind(n00, n01, n10, n11):
    """
    Independence LR over the transition window; the unconditional
    rate is recomputed from the same T-1 pairs.
    """
    counts = (n00, n01, n10, n11)
    if any(c < 0 for c in counts) or sum(counts) < 1:
        raise DomainError('Transition counts must be non-negative with a positive total')
    total = sum(counts)
    n = n01 + n11
    phi = n / total
    null = xlogy(n, phi) + xlogy(total - n, 1 - phi)
    return float(max(-2 * (null - _markov_loglik(*counts)), 0.0))


def christoffersen_cc(n, T, rho, counts):
    """
    -2 log[rho^n (1-rho)^(T-n) / L_markov(counts)]; equals
    kupiec_uc(n, T, rho) + christoffersen_ind(*counts) when n and T
    are taken over the same window as the counts.
    """
    if T < 1 or not 0 <= n <= T:
        raise DomainError('Need 0 <= n <= T and T >= 1, got n={} T={}'.format(n, T))
    null = xlogy(n, rho) + xlogy(T - n, 1 - rho)
    return float(max(-2 * (null - _markov_loglik(*counts)), 0.0))


def exception_series(realized, var):
    realized = np.asarray(realized, dtype=float)
    var = np.asarray(getattr(var, 'var', var), dtype=float)
    if realized.shape != var.shape:
        raise DomainError('Returns and VaR differ in length: {} vs {}'.format(
            len(realized), len(var)))
    q = (realized < var).astype(int)
    return ExceptionSeries(q, int(q.sum()), *transition_counts(q))


def backtest(realized, var):
    """
    UC on all T days, IND on the T-1 transitions, CC as their sum.
    Pass flags at the configured chi-square level (df 1, 1, 2).
    """
    if len(var) < 2:
        raise DomainError('Backtest needs at least two days')
    exc = exception_series(realized, var)
    rho, T = var.rho, exc.T
    lr_uc = kupiec_uc(exc.n, T, rho)
    lr_ind = christoffersen_ind(*exc.counts)
    lr_cc = lr_uc + lr_ind
    crit1, crit2 = critical_value(1), critical_value(2)
    report = BacktestReport(
        rho=rho, T=T, expected=rho * T, n=exc.n,
        lr_uc=lr_uc, lr_ind=lr_ind, lr_cc=lr_cc,
        p_uc=float(chi2.sf(lr_uc, 1)), p_ind=float(chi2.sf(lr_ind, 1)),
        p_cc=float(chi2.sf(lr_cc, 2)),
        pass_uc=lr_uc < crit1, pass_ind=lr_ind < crit1, pass_cc=lr_cc < crit2,
    )
    log.info('Backtest rho={}: {} exceptions of {} expected, LR uc={:.3f} ind={:.3f} cc={:.3f}'.format(
        rho, exc.n, rho * T, lr_uc, lr_ind, lr_cc))
    return report
