"""
Second-moment stability of the Markov-switching HYGARCH model.

The expected regime variances obey H~_t <= Lambda + Q H~_{t-1} with
H~_t = [H_t, H1_t, H2_t, H_{t-1}] stacked over the m regimes. The model
is stable iff the spectral radius of the 4m x 4m matrix Q is below one,
and then lim E(y_t^2) <= pi' [(I-Q)^{-1} Lambda]_{1..m}.

Conventions used to evaluate Q numerically:

 * the backshift powers inside the f block are evaluated at B = 1,
   i.e. the lag series is summed;
 * the transition block is the lag-one matrix pdot[j, r] = p(z_{t-1}=r | z_t=j);
 * the f series is summed exactly for lag_cap terms and its remainder is
   closed with the stationary probabilities, to which the lag
   probabilities have converged by then.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

import config
from .common import log, DomainError, ComputationError
from .fracdiff import compute_coeffs


@dataclass(frozen=True, eq=False)
class StabilityReport:
    rho: float
    stable: bool
    bound: float # None when unstable
    Q: np.ndarray
    Lambda: np.ndarray
    pi: np.ndarray
    lag_cap: int = None

    def as_document(self):
        doc = {
            'rho': self.rho,
            'stable': self.stable,
            'bound': self.bound if self.bound is not None else 'none',
            'lag_cap': self.lag_cap,
            'm': len(self.pi),
        }
        for j, val in enumerate(self.pi, 1):
            doc['pi.{}'.format(j)] = float(val)
        for i, val in enumerate(self.Lambda, 1):
            doc['Lambda.{}'.format(i)] = float(val)
        for i, row in enumerate(self.Q, 1):
            doc['Q.{}'.format(i)] = ' '.join(repr(float(x)) for x in row)
        return doc


def _matrix(P):
    return np.asarray(getattr(P, 'p', P), dtype=float)


def _irreducible(p):
    m = p.shape[0]
    reach = np.linalg.matrix_power((np.eye(m) + p > 0).astype(float), max(m - 1, 1))
    return bool(np.all(reach > 0))


def stationary_distribution(P):
    """
    pi with pi' P = pi', sum(pi) = 1.
    """
    p = _matrix(P)
    m = p.shape[0]
    if m == 1:
        return np.ones(1)
    if not _irreducible(p):
        raise DomainError('Markov chain is reducible; no unique stationary distribution')
    A = p.T - np.eye(m)
    A[-1, :] = 1.0
    b = np.zeros(m)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as e:
        raise ComputationError('Stationary distribution: {}'.format(e)) from e
    pi = np.clip(pi, 0, None)
    return pi / pi.sum()


def lag_probabilities(P, pi, n):
    """
    L[i, r, s] = p(z_{t-i}=r | z_t=s) = pi_r (P^i)_{rs} / pi_s for i = 0..n.
    """
    p = _matrix(P)
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0):
        raise ComputationError('Stationary probability is zero; lag probabilities undefined')
    m = p.shape[0]
    ret = np.empty((n + 1, m, m))
    power = np.eye(m)
    ratio = pi[:, None] / pi[None, :]
    for i in range(n + 1):
        ret[i] = ratio * power
        power = power @ p
    return ret


def lag_probability(P, pi, i, r, s):
    """ p(z_{t-i}=r | z_t=s), states numbered from 0 """
    if i < 1:
        raise DomainError('Lag must be at least 1, got {}'.format(i))
    p = _matrix(P)
    pi = np.asarray(pi, dtype=float)
    if pi[s] <= 0:
        raise ComputationError('Stationary probability of state {} is zero'.format(s))
    return pi[r] / pi[s] * np.linalg.matrix_power(p, i)[r, s]


def build_Q(spec, g=None, lag_cap=None):
    """
    Assembles the 4m x 4m matrix Q and the vector Lambda.

    `g` is an optional per-regime sequence of FracDiffCoeffs; it must
    hold at least lag_cap + 2 coefficients.
    """
    if lag_cap is None:
        lag_cap = config.LAG_CAP
    if int(lag_cap) != lag_cap or lag_cap < 1:
        raise DomainError('lag_cap must be a positive integer, got {}'.format(lag_cap))
    lag_cap = int(lag_cap)
    m = spec.m
    regimes = spec.regimes
    need = lag_cap + 2
    if g is None:
        g = [compute_coeffs(p.d, max(spec.trunc_K, need)) for p in regimes]
    if any(len(coeffs.coeffs) < need for coeffs in g):
        raise DomainError('Need at least {} coefficients per regime'.format(need))

    pi = stationary_distribution(spec.transition)
    L = lag_probabilities(spec.transition, pi, need)
    pdot = L[1].T

    f = np.zeros((m, m))
    for j, (p, coeffs) in enumerate(zip(regimes, g)):
        gj = coeffs.coeffs
        # coefficient of H_{t-2-i}, i = 0..lag_cap
        coef = gj[1:need] - p.b2 * gj[:need-1]
        f[j] = coef @ L[2:need+1, :, j]
        # remainder of the series: sum_{i>lag_cap} (g_{i+2} - b2 g_{i+1})
        tail = (1 - gj[:need].sum()) - p.b2 * (1 - gj[:need-1].sum())
        f[j] += tail * pi

    def diag(name):
        return np.diag([getattr(p, name) for p in regimes])
    nu = np.diag([abs(p.b2 - p.b1 + coeffs.coeffs[0] - p.a2)
                  for p, coeffs in zip(regimes, g)])
    tau = np.diag([p.b2 - p.b1 + coeffs.coeffs[0] for p, coeffs in zip(regimes, g)])
    a1, a2, b1 = diag('a1'), diag('a2'), diag('b1')
    zero = np.zeros((m, m))
    fp = f @ pdot
    Q = np.block([
        [nu @ pdot, a1 @ pdot, b1 @ pdot, fp],
        [a2 @ pdot, a1 @ pdot, zero, zero],
        [tau @ pdot, zero, b1 @ pdot, fp],
        [np.eye(m), zero, zero, zero],
    ])
    a0 = np.array([p.a0 for p in regimes])
    b0 = np.array([p.b0 for p in regimes])
    Lambda = np.concatenate((a0 + np.abs(b0 - a0), a0, b0, np.zeros(m)))
    return Q, Lambda


def power_iteration(M, max_iter=10000, tol=1e-12, seed=0):
    """
    Dominant eigenvalue modulus by power iteration.
    Returns (value, converged).
    """
    M = np.asarray(M, dtype=float)
    rng = np.random.default_rng(seed)
    x = np.abs(rng.normal(size=M.shape[0])) + 1.0
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = M @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0, True
        # two-step ratio is immune to sign alternation of a negative dominant eigenvalue
        y2 = M @ (y / norm)
        lam_new = np.sqrt(norm * np.linalg.norm(y2))
        x = y2 / np.linalg.norm(y2) if np.linalg.norm(y2) > 0 else y / norm
        if abs(lam_new - lam) < tol * max(1.0, lam_new):
            return float(lam_new), True
        lam = lam_new
    return float(lam), False


def spectral_radius(M):
    """
    Largest eigenvalue modulus. Full dense solve; power iteration
    is run alongside as a cross-check.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError('Spectral radius needs a square matrix, got shape {}'.format(M.shape))
    if not np.all(np.isfinite(M)):
        raise DomainError('Matrix has non-finite entries')
    rho = float(np.max(np.abs(linalg.eigvals(M))))
    approx, converged = power_iteration(M)
    if not converged:
        log.debug('spectral_radius: power iteration did not converge, using eigenvalue solve')
    elif abs(approx - rho) > 1e-6 * max(1.0, rho):
        log.debug('spectral_radius: power iteration {:.8f} vs eigenvalues {:.8f}'.format(approx, rho))
    return rho


def stability_report(spec, lag_cap=None):
    if lag_cap is None:
        lag_cap = config.LAG_CAP
    Q, Lambda = build_Q(spec, lag_cap=lag_cap)
    pi = stationary_distribution(spec.transition)
    rho = spectral_radius(Q)
    bound = None
    if rho < 1:
        try:
            steady = linalg.solve(np.eye(len(Q)) - Q, Lambda)
        except linalg.LinAlgError as e:
            raise ComputationError('I - Q is singular although rho(Q) = {}'.format(rho)) from e
        bound = float(pi @ steady[:spec.m])
    log.info('Stability: rho(Q)={:.4f} stable={} bound={}'.format(rho, rho < 1, bound))
    return StabilityReport(rho=rho, stable=rho < 1, bound=bound, Q=Q,
                           Lambda=Lambda, pi=pi, lag_cap=lag_cap)
