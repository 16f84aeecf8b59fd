"""
Domain types shared by the numerical modules.
"""
from dataclasses import dataclass, field, replace

import numpy as np

import config
from .common import DomainError


REGIME_FIELDS = ('a0', 'a1', 'a2', 'b0', 'b1', 'b2', 'd', 'gamma')
WEIGHT_MODES = ('logistic', 'fixed')


@dataclass(frozen=True)
class RegimeParams:
    """
    Parameters of one regime: GARCH(1,1) part (a0, a1, a2),
    FIGARCH(1,d,1) part (b0, b1, b2, d) and the smoothing
    parameter gamma of the logistic weight.

    Instances are plain values; `validate` checks the admissible region.
    """
    a0: float
    a1: float
    a2: float
    b0: float
    b1: float
    b2: float = 0.0
    d: float = 0.5
    gamma: float = 1.0

    def validate(self, label=None):
        prefix = '{}: '.format(label) if label else ''
        for name in ('a0', 'a1', 'a2', 'b0', 'gamma'):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0:
                raise DomainError('{}{} must be positive, got {}'.format(prefix, name, val))
        if not 0 < self.d < 1:
            raise DomainError('{}d must lie in (0, 1), got {}'.format(prefix, self.d))
        if not 0 <= self.b2 <= self.b1 <= self.d:
            raise DomainError('{}need 0 <= b2 <= b1 <= d, got b2={} b1={} d={}'.format(
                prefix, self.b2, self.b1, self.d))
        return self

    def as_tuple(self):
        return tuple(getattr(self, name) for name in REGIME_FIELDS)

    @classmethod
    def from_sequence(cls, values):
        return cls(*map(float, values))


def _is_primitive(p):
    """
    Irreducible and aperiodic: some power of the chain is strictly positive.
    Checked on the zero pattern at the Wielandt bound (m-1)^2+1.
    """
    m = p.shape[0]
    pattern = (p > 0).astype(float)
    power = np.linalg.matrix_power(pattern, (m - 1) ** 2 + 1)
    return bool(np.all(power > 0))


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """ Row-stochastic m x m matrix p[r, s] = P(z_t=s | z_{t-1}=r) """
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float, ndmin=2)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise DomainError('Transition matrix must be square, got shape {}'.format(p.shape))
        if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise DomainError('Transition probabilities must lie in [0, 1]')
        if np.any(np.abs(p.sum(axis=1) - 1) > 1e-12):
            raise DomainError('Transition matrix rows must sum to 1, got {}'.format(
                p.sum(axis=1).tolist()))
        if not _is_primitive(p):
            raise DomainError('Markov chain must be irreducible and aperiodic')
        p.flags.writeable = False
        object.__setattr__(self, 'p', p)

    @property
    def m(self):
        return self.p.shape[0]

    @classmethod
    def two_state(cls, p11, p22):
        return cls(np.array([[p11, 1 - p11], [1 - p22, p22]]))

    @classmethod
    def single(cls):
        return cls(np.ones((1, 1)))

    def permuted(self, order):
        order = np.asarray(order)
        return TransitionMatrix(self.p[np.ix_(order, order)])

    def __eq__(self, other):
        return isinstance(other, TransitionMatrix) and np.array_equal(self.p, other.p)

    def __repr__(self):
        return 'TransitionMatrix({})'.format(self.p.tolist())


@dataclass(frozen=True)
class ModelSpec:
    """
    m regimes plus transition matrix.
    HYGARCH is m=1 with weight_mode 'fixed' and weight w;
    ST-HYGARCH is m=1 with logistic weight.
    Regimes are kept in ascending a0 order (identification).
    """
    regimes: tuple
    transition: TransitionMatrix = None
    weight_mode: str = 'logistic'
    w: float = None
    trunc_K: int = field(default_factory=lambda: config.FRACDIFF_K)

    def __post_init__(self):
        regimes = tuple(self.regimes)
        object.__setattr__(self, 'regimes', regimes)
        if not regimes:
            raise DomainError('At least one regime required')
        if self.transition is None:
            if len(regimes) != 1:
                raise DomainError('Transition matrix required for m > 1')
            object.__setattr__(self, 'transition', TransitionMatrix.single())
        if self.transition.m != len(regimes):
            raise DomainError('Transition matrix is {0}x{0} but {1} regimes given'.format(
                self.transition.m, len(regimes)))
        for j, regime in enumerate(regimes):
            regime.validate('regime {}'.format(j + 1))
        a0 = [regime.a0 for regime in regimes]
        if any(x > y for x, y in zip(a0, a0[1:])):
            raise DomainError('Regimes must be ordered by ascending a0, got {}'.format(a0))
        if self.weight_mode not in WEIGHT_MODES:
            raise DomainError('Unknown weight mode {}'.format(self.weight_mode))
        if self.weight_mode == 'fixed':
            if len(regimes) != 1:
                raise DomainError('Fixed weight is only defined for a single regime')
            if self.w is None or not 0 <= self.w <= 1:
                raise DomainError('Fixed weight w must lie in [0, 1], got {}'.format(self.w))
        if int(self.trunc_K) != self.trunc_K or self.trunc_K < 1:
            raise DomainError('Truncation length must be a positive integer')

    @property
    def m(self):
        return len(self.regimes)

    def with_regimes(self, regimes, transition=None):
        return replace(self, regimes=tuple(regimes),
                       transition=transition or self.transition)


@dataclass(frozen=True, eq=False)
class VariancePath:
    """
    Per time t and regime j: component variances h1, h2,
    weight w and combined variance h = (1-w) h1 + w h2.
    All arrays have shape (T, m).
    """
    h1: np.ndarray
    h2: np.ndarray
    w: np.ndarray
    h: np.ndarray

    def __len__(self):
        return self.h.shape[0]
