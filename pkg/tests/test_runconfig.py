from numpy.testing import assert_array_equal
import pytest

from vollab.common import DomainError, DataError
from vollab.datasets import write_document
from vollab.families import ModelFamily
from vollab.runconfig import RunConfig, convert

from conftest import two_state_spec


@pytest.mark.parametrize('key,raw,expected', [
    ('model.m', '2', 2),
    ('model.family', ' MSST-HYGARCH ', 'msst-hygarch'),
    ('gibbs.warmup', '0', 0),
    ('risk.levels', '0.05, 0.10', [0.05, 0.10]),
    ('risk.normal_fallback', 'yes', True),
    ('data.split', '0.75', 0.75),
    ('priors.a0', '0.01, 2', (0.01, 2.0)),
    ('priors.d_2', '0.5, 0.95', (0.5, 0.95)),
    ('params.gamma_1', '0.6', 0.6),
    ('params.w', '0.3', 0.3),
    ('params.p12', '0.1', 0.1),
])
def test_convert(key, raw, expected):
    assert convert(key, raw) == expected


@pytest.mark.parametrize('key,raw', [
    ('model.m', 'two'),
    ('model.m', '0'),
    ('model.family', 'garch'),
    ('gibbs.iterations', '2.5'),
    ('risk.levels', '0.05, 0.7'),
    ('data.kind', 'volumes'),
    ('priors.a0', '1'),
    ('priors.zeta', '0, 1'),
    ('params.zeta_1', '1'),
    ('params.a0', '1'),
    ('colour', 'blue'),
])
def test_convert_rejects(key, raw):
    with pytest.raises(ValueError):
        convert(key, raw)


def test_beta_prior_values():
    assert convert('priors.beta', '2') == 2.0
    assert_array_equal(convert('priors.beta', '8, 2, 1, 4'), [[8, 2], [1, 4]])
    with pytest.raises(ValueError):
        convert('priors.beta', '1, 2, 3')


def test_simulation_scenario(scenario):
    cfg = RunConfig.load(scenario('msst_two_state.cfg'))
    assert cfg.seed == 20150130
    assert cfg.family.name == 'msst-hygarch'
    assert cfg.m == 2
    assert cfg.levels == [0.05, 0.10]
    spec = cfg.model_spec()
    expected = two_state_spec()
    assert [p.as_tuple() for p in spec.regimes] == [p.as_tuple() for p in expected.regimes]
    assert_array_equal(spec.transition.p, expected.transition.p)
    gibbs = cfg.gibbs_config()
    assert (gibbs.iterations, gibbs.warmup, gibbs.grid_points) == (2000, 1000, 33)
    assert gibbs.seed == 20150130


def test_overrides_and_seed(scenario, tmp_path):
    cfg = RunConfig.load(scenario('msst_two_state.cfg'),
                         overrides=['gibbs.iterations = 40', 'gibbs.warmup=20', 'params.p11=0.9'],
                         seed=7, out=str(tmp_path))
    assert cfg.seed == 7
    assert cfg.model_spec().transition.p[0, 0] == 0.9
    gibbs = cfg.gibbs_config()
    assert (gibbs.iterations, gibbs.warmup) == (40, 20)
    assert cfg.output('fit', 'draws.csv') == str(tmp_path / 'fit' / 'draws.csv')

    with pytest.raises(DomainError):
        RunConfig.load(overrides=['gibbs.iterations'])
    with pytest.raises(DomainError):
        RunConfig.load(overrides=['gibbs.iterations=many'])


def test_default_warmup_is_half_of_short_runs():
    cfg = RunConfig.load(overrides=['gibbs.iterations=400'])
    assert cfg.gibbs_config().warmup == 200
    assert RunConfig.load().gibbs_config().warmup == 5000


def test_bad_file_reports_line(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text('model.m = 2\n# fine\ngibbs.grid_points = 2\n', encoding='utf-8')
    with pytest.raises(DataError) as info:
        RunConfig.load(str(path))
    assert info.value.line == 3
    assert 'gibbs.grid_points' in str(info.value)


def test_parameters_from_posterior_summary(tmp_path):
    layout = ModelFamily.get('msst-hygarch').layout(2)
    means = layout.values(two_state_spec())
    summary = {'family': 'msst-hygarch', 'm': 2}
    summary.update(('{}.mean'.format(name), val) for name, val in means.items())
    write_document(str(tmp_path / 'summary.txt'), summary)
    path = tmp_path / 'run.cfg'
    path.write_text('params.from = summary.txt\nparams.d_2 = 0.8\n', encoding='utf-8')

    cfg = RunConfig.load(str(path))
    assert cfg.family.name == 'msst-hygarch'
    assert cfg.m == 2
    spec = cfg.model_spec()
    assert spec.regimes[0].a0 == 0.18
    assert spec.regimes[1].d == 0.8
    assert spec.transition.p[1, 1] == 0.60


def test_stray_parameters_rejected():
    cfg = RunConfig.load(overrides=['model.family=st-hygarch', 'params.a0_2=0.1'])
    with pytest.raises(DomainError):
        cfg.model_spec()


def test_regime_count_from_parameters():
    overrides = ['params.{}_{}=0.1'.format(name, j) for name in ('a0', 'a1', 'a2', 'b0', 'b1')
                 for j in (1, 2, 3)]
    cfg = RunConfig.load(overrides=overrides)
    assert cfg.m == 3


def test_prior_spec():
    cfg = RunConfig.load(overrides=['priors.a0_2=0.5, 3', 'priors.b2=0, 0.2', 'priors.beta=2'])
    prior = cfg.prior_spec()
    assert prior.sample_b2
    assert prior.support('a0', 1) == (0.5, 3.0)
    assert prior.support('b2') == (0.0, 0.2)
    assert prior.beta == 2.0
    assert not RunConfig.load().prior_spec().sample_b2


def test_require(scenario, tmp_path):
    with pytest.raises(DomainError) as info:
        RunConfig.load(overrides=['model.m=2']).require('simulate')
    assert 'params' in str(info.value)
    assert 'simulate.T' in str(info.value)

    cfg = RunConfig.load(scenario('msst_two_state.cfg'), out=str(tmp_path))
    assert cfg.require('simulate') is cfg
    with pytest.raises(DomainError):
        cfg.require('fit') # no returns written yet

    with pytest.raises(DomainError):
        RunConfig.load(overrides=['priors.w=0, 1']).require('fit')


def test_unknown_family_lists_choices():
    with pytest.raises(DomainError) as info:
        ModelFamily.get('garch')
    message = str(info.value)
    assert message.startswith('Unknown model family garch')
    for name in ('hygarch', 'st-hygarch', 'msst-hygarch'):
        assert '{} ({})'.format(name, ModelFamily.get(name).description) in message
