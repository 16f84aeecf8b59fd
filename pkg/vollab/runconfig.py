"""
Run configuration: flat `key = value` files plus command-line overrides.

Values are type-checked while parsing, so a bad value is reported with
its file and line. Unknown keys are rejected.
"""
import os
import re

import numpy as np

import config
from .common import log, DomainError, DataError
from .datasets import KINDS, read_document
from .families import ModelFamily
from .gibbs import PriorSpec, GibbsConfig
from .helpers import boolean_field, count_field, levels_field
from .models import REGIME_FIELDS


def text_field(val):
    val = val.strip()
    if not val:
        raise ValueError('must not be empty')
    return val

def family_field(val):
    val = text_field(val).lower()
    ModelFamily.get(val)
    return val

def kind_field(val):
    if val not in KINDS:
        raise ValueError('must be one of {}'.format(', '.join(KINDS)))
    return val

def positive_field(val):
    val = float(val)
    if not val > 0:
        raise ValueError('must be positive')
    return val

def number_field(val):
    val = float(val)
    if not np.isfinite(val):
        raise ValueError('must be finite')
    return val

def bounds_field(val):
    parts = [number_field(x) for x in val.split(',')]
    if len(parts) != 2:
        raise ValueError('expected "lo, hi"')
    return tuple(parts)

def beta_field(val):
    parts = [positive_field(x) for x in val.split(',')]
    if len(parts) == 1:
        return parts[0]
    m = int(round(np.sqrt(len(parts))))
    if m * m != len(parts):
        raise ValueError('expected one value or m*m values (c11, c12, ...)')
    return np.array(parts).reshape(m, m)


KEY_TYPES = {
    'model.family': family_field,
    'model.m': count_field(1),
    'gibbs.iterations': count_field(1),
    'gibbs.warmup': count_field(0),
    'gibbs.grid_points': count_field(3),
    'gibbs.chains': count_field(1),
    'fracdiff.K': count_field(1),
    'stability.lag_cap': count_field(1),
    'risk.levels': levels_field,
    'risk.normal_fallback': boolean_field,
    'seed': count_field(0),
    'simulate.T': count_field(1),
    'simulate.burn_in': count_field(0),
    'data.path': text_field,
    'data.kind': kind_field,
    'data.split': positive_field,
    'fit.save_states': boolean_field,
    'params.from': text_field,
    'backtest.forecasts': text_field,
}

PARAM_RE = re.compile(r'^(?:(?P<field>{})_(?P<regime>[1-9])|w|p[1-9][1-9])$'.format(
    '|'.join(REGIME_FIELDS)))


def convert(key, raw):
    """ Typed value for one configuration entry; ValueError names the key """
    if key in KEY_TYPES:
        ftype = KEY_TYPES[key]
    elif key.startswith('priors.'):
        name = key[len('priors.'):]
        if name == 'beta':
            ftype = beta_field
        elif name.split('_')[0] in config.PRIOR_BOUNDS and (
                '_' not in name or re.match(r'^[a-z0-9]+_[1-9]$', name)):
            ftype = bounds_field
        else:
            raise ValueError('Unknown prior {}'.format(name))
    elif key.startswith('params.') and PARAM_RE.match(key[len('params.'):]):
        ftype = number_field
    else:
        raise ValueError('Unknown key {}'.format(key))
    try:
        return ftype(raw)
    except (TypeError, ValueError) as e:
        raise ValueError('{}: {}'.format(key, e))


class RunConfig:
    """
    Typed view over the merged configuration of one workbench run.
    """
    def __init__(self, values=None, out=None, path=None):
        self.values = dict(values or {})
        self.out = out or config.OUTPUT_DIR
        self.path = path

    @classmethod
    def load(cls, path=None, overrides=(), seed=None, out=None):
        values = read_document(path, convert) if path else {}
        for item in overrides:
            if '=' not in item:
                raise DomainError('Override must look like key=value, got "{}"'.format(item))
            key, raw = (part.strip() for part in item.split('=', 1))
            try:
                values[key] = convert(key, raw)
            except ValueError as e:
                raise DomainError('override {}'.format(e))
        if seed is not None:
            values['seed'] = seed
        ret = cls(values, out, path)
        log.debug('Run config {}: {} keys, output {}'.format(path or '(none)', len(values), ret.out))
        return ret

    def get(self, key, default=None):
        return self.values.get(key, default)

    def output(self, *names):
        return os.path.join(self.out, *names)

    def _resolve(self, path):
        """ relative paths in a config file are taken from its folder """
        if self.path and not os.path.isabs(path) and not os.path.exists(path):
            candidate = os.path.join(os.path.dirname(self.path), path)
            if os.path.exists(candidate):
                return candidate
        return path

    ### Simple settings ###
    @property
    def seed(self):
        return self.get('seed')

    @property
    def K(self):
        return self.get('fracdiff.K', config.FRACDIFF_K)

    @property
    def lag_cap(self):
        return self.get('stability.lag_cap', config.LAG_CAP)

    @property
    def levels(self):
        return list(self.get('risk.levels', config.RISK_LEVELS))

    @property
    def normal_fallback(self):
        return self.get('risk.normal_fallback', False)

    @property
    def data_path(self):
        return self._resolve(self.get('data.path') or self.output('returns.csv'))

    @property
    def data_kind(self):
        return self.get('data.kind', 'returns')

    @property
    def split(self):
        return self.get('data.split')

    @property
    def forecasts_path(self):
        return self._resolve(self.get('backtest.forecasts') or self.output('forecast.csv'))

    ### Model ###
    def posterior_summary(self):
        """ the summary document named by params.from, or None """
        path = self.get('params.from')
        if not path:
            return None
        return read_document(self._resolve(path))

    @property
    def family(self):
        name = self.get('model.family')
        if not name:
            summary = self.posterior_summary()
            name = summary.get('family') if summary else None
        return ModelFamily.get(name or 'msst-hygarch')

    @property
    def m(self):
        m = self.get('model.m')
        if m is None:
            summary = self.posterior_summary()
            if summary and 'm' in summary:
                m = int(summary['m'])
        if m is None:
            m = self._params_states() or self.family.default_states()
        return self.family.check_states(m)

    def _params_states(self):
        regimes = [int(match.group('regime'))
                   for match in map(PARAM_RE.match, self.params())
                   if match and match.group('regime')]
        return max(regimes) if regimes else None

    def params(self):
        return {key[len('params.'):]: val for key, val in self.values.items()
                if key.startswith('params.') and key != 'params.from'}

    def has_params(self):
        return bool(self.params()) or bool(self.get('params.from'))

    def parameter_values(self):
        """
        name -> value: posterior means from params.from,
        overridden by explicit params.* entries.
        """
        values = {}
        summary = self.posterior_summary()
        if summary:
            for key, raw in summary.items():
                if key.endswith('.mean'):
                    try:
                        values[key[:-len('.mean')]] = float(raw)
                    except ValueError:
                        raise DataError('Bad posterior mean {} = {}'.format(key, raw),
                                        path=self.get('params.from'))
        values.update(self.params())
        return values

    def model_spec(self):
        family, m = self.family, self.m
        layout = family.layout(m)
        values = self.parameter_values()
        expected = set(layout.all_names) | {'{}_{}'.format(name, j) for name in REGIME_FIELDS
                                            for j in range(1, m + 1)}
        stray = sorted(set(self.params()) - expected)
        if stray:
            raise DomainError('Parameters {} do not belong to {} with m={}'.format(
                ', '.join(stray), family.name, m))
        return layout.spec_from_values(values, self.K)

    def prior_spec(self):
        bounds = {key[len('priors.'):]: val for key, val in self.values.items()
                  if key.startswith('priors.') and key != 'priors.beta'}
        sample_b2 = any(name.split('_')[0] == 'b2' for name in bounds)
        return PriorSpec(bounds=bounds, beta=self.get('priors.beta', config.BETA_PRIOR),
                         sample_b2=sample_b2)

    def gibbs_config(self):
        return GibbsConfig(
            iterations=self.get('gibbs.iterations', config.GIBBS_ITERATIONS),
            warmup=self.get('gibbs.warmup', min(config.GIBBS_WARMUP,
                            self.get('gibbs.iterations', config.GIBBS_ITERATIONS) // 2)),
            grid_points=self.get('gibbs.grid_points', config.GRID_POINTS),
            seed=self.seed,
            chains=self.get('gibbs.chains', config.GIBBS_CHAINS),
            keep_states=self.get('fit.save_states', False),
        )

    ### Consistency ###
    def require(self, command):
        """ Checks that the settings a subcommand needs are present """
        missing = []
        if command in ('simulate', 'stability', 'forecast') and not self.has_params():
            missing.append('params.* (or params.from)')
        if command == 'simulate' and 'simulate.T' not in self.values:
            missing.append('simulate.T')
        if command in ('fit', 'forecast', 'backtest') and not os.path.exists(self.data_path):
            missing.append('data.path ({} not found)'.format(self.data_path))
        if command == 'backtest' and not os.path.exists(self.forecasts_path):
            missing.append('backtest.forecasts ({} not found)'.format(self.forecasts_path))
        if missing:
            raise DomainError('{} needs {}'.format(command, '; '.join(missing)))
        if command == 'fit' and self.family.weight_mode != 'fixed' and 'priors.w' in self.values:
            raise DomainError('priors.w only applies to the hygarch family')
        if command == 'fit' and self.m > 1:
            beta = np.asarray(self.get('priors.beta', config.BETA_PRIOR))
            if beta.ndim and beta.shape != (self.m, self.m):
                raise DomainError('priors.beta has {} values, need 1 or {}'.format(
                    beta.size, self.m * self.m))
        return self
