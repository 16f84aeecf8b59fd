"""
Model families and their parameter naming.

Parameters are named `<field>_<regime>` (a0_1, d_2, ...), the fixed
weight of classic HYGARCH is `w` and transition probabilities are `p<r><s>`.
For two regimes only p11 and p22 are free.
"""
from functools import lru_cache

import numpy as np

import config
from .common import classproperty, DomainError
from .models import RegimeParams, TransitionMatrix, ModelSpec, REGIME_FIELDS


class ModelFamily:
    name = None # registry key, None for abstract classes
    description = None
    weight_mode = 'logistic'
    min_states = 1
    max_states = 1
    sampled_fields = ('a0', 'a1', 'a2', 'b0', 'b1', 'd', 'gamma')

    @classmethod
    @lru_cache()
    def find(cls, name):
        """
        Tries to find family class for given name.
        Returns None on failure.
        """
        if cls.name == name:
            return cls
        for sub in cls.__subclasses__():
            ret = sub.find(name)
            if ret:
                return ret

    @classmethod
    def get(cls, name):
        family = cls.find(name)
        if not family:
            raise DomainError('Unknown model family {}; expected one of {}'.format(
                name, ', '.join('{} ({})'.format(known, cls.find(known).description)
                                for known in sorted(cls.all_names))))
        return family

    @classmethod
    def allFamilies(cls):
        if cls.name:
            yield cls
        for sub in cls.__subclasses__():
            yield from sub.allFamilies()

    @classproperty
    def all_names(cls):
        return {family.name for family in cls.allFamilies()}

    @classmethod
    def check_states(cls, m):
        if int(m) != m or not cls.min_states <= m <= cls.max_states:
            raise DomainError('{} supports {} regimes, got {}'.format(
                cls.name,
                cls.min_states if cls.min_states == cls.max_states
                else '{}..{}'.format(cls.min_states, cls.max_states),
                m))
        return int(m)

    @classmethod
    def layout(cls, m, sample_b2=False):
        return ParameterLayout(cls, cls.check_states(m), sample_b2)

    @classmethod
    def default_states(cls):
        return cls.min_states


class HYGARCH(ModelFamily):
    name = 'hygarch'
    description = 'single regime, fixed GARCH/FIGARCH weight w'
    weight_mode = 'fixed'
    sampled_fields = ('a0', 'a1', 'a2', 'b0', 'b1', 'd')


class STHYGARCH(ModelFamily):
    name = 'st-hygarch'
    description = 'single regime, logistic weight'


class MSSTHYGARCH(ModelFamily):
    name = 'msst-hygarch'
    description = 'Markov-switching regimes, logistic weight in each'
    min_states = 2
    max_states = 9


def transition_names(m):
    if m == 1:
        return []
    if m == 2:
        return ['p11', 'p22']
    return ['p{}{}'.format(r, s) for r in range(1, m + 1) for s in range(1, m + 1)]


def transition_from_values(values, m):
    if m == 1:
        return TransitionMatrix.single()
    try:
        if m == 2:
            return TransitionMatrix.two_state(float(values['p11']), float(values['p22']))
        return TransitionMatrix(np.array([[float(values['p{}{}'.format(r, s)])
                                           for s in range(1, m + 1)]
                                          for r in range(1, m + 1)]))
    except KeyError as e:
        raise DomainError('Missing transition probability {}'.format(e.args[0]))


def transition_values(P):
    p = np.asarray(getattr(P, 'p', P))
    m = p.shape[0]
    if m == 2:
        return [p[0, 0], p[1, 1]]
    if m == 1:
        return []
    return list(p.ravel())


class ParameterLayout:
    """
    Maps between named parameter values and the (m, 8) regime array
    used inside the sampler.
    """
    def __init__(self, family, m, sample_b2=False):
        self.family = family
        self.m = m
        self.sample_b2 = sample_b2
        fields = list(family.sampled_fields)
        if sample_b2:
            fields.insert(fields.index('b1') + 1, 'b2')
        # slot: (regime index, field) or (None, 'w')
        self.slots = [(j, name) for j in range(m) for name in fields]
        if family.weight_mode == 'fixed':
            self.slots.append((None, 'w'))
        self.names = [name if j is None else '{}_{}'.format(name, j + 1)
                      for j, name in self.slots]
        self.transition_names = transition_names(m)

    @property
    def all_names(self):
        return self.names + self.transition_names

    def regime_array(self, values):
        """ (m, 8) array from a name -> value mapping; b2 defaults to 0, gamma to 1 """
        arr = np.empty((self.m, len(REGIME_FIELDS)))
        for j in range(self.m):
            for k, name in enumerate(REGIME_FIELDS):
                key = '{}_{}'.format(name, j + 1)
                if key in values:
                    arr[j, k] = float(values[key])
                elif name == 'b2':
                    arr[j, k] = 0.0
                elif name == 'gamma' and self.family.weight_mode == 'fixed':
                    arr[j, k] = 1.0
                else:
                    raise DomainError('Missing parameter {}'.format(key))
        return arr

    def spec(self, regimes, transition, w=None, K=None):
        """ ModelSpec from an (m, 8) regime array """
        return ModelSpec(
            regimes=tuple(RegimeParams.from_sequence(row) for row in regimes),
            transition=transition,
            weight_mode=self.family.weight_mode,
            w=w if self.family.weight_mode == 'fixed' else None,
            trunc_K=K or config.FRACDIFF_K,
        )

    def spec_from_values(self, values, K=None):
        w = None
        if self.family.weight_mode == 'fixed':
            if 'w' not in values:
                raise DomainError('Missing parameter w')
            w = float(values['w'])
        return self.spec(self.regime_array(values),
                         transition_from_values(values, self.m), w, K)

    def values(self, spec):
        """ name -> value for every parameter, transitions included """
        ret = {}
        for j, regime in enumerate(spec.regimes):
            for name in REGIME_FIELDS:
                ret['{}_{}'.format(name, j + 1)] = getattr(regime, name)
        if spec.weight_mode == 'fixed':
            ret['w'] = spec.w
        ret.update(zip(self.transition_names, transition_values(spec.transition)))
        return {name: float(ret[name]) for name in self.all_names}

    def row(self, regimes, transition, w=None):
        """ Flat draw row ordered as `all_names` """
        ret = []
        for j, name in self.slots:
            ret.append(w if j is None else regimes[j, REGIME_FIELDS.index(name)])
        ret.extend(transition_values(transition))
        return ret
