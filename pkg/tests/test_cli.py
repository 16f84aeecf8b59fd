import os

import pytest

from vollab.common import EXIT_OK, EXIT_UNSTABLE, EXIT_VALIDATION
from vollab.datasets import ingest, read_document, read_series, read_table


def invoke(runner, *args):
    return runner.invoke(args=list(args))


def test_stability_command(runner, scenario, tmp_path):
    result = invoke(runner, 'stability', '--config', scenario('sp500_msst.cfg'),
                    '--out', str(tmp_path))
    assert result.exit_code == EXIT_OK, result.output
    assert 'stable = True' in result.output
    doc = read_document(str(tmp_path / 'stability.txt'))
    assert float(doc['rho']) == pytest.approx(0.91, abs=0.02)
    assert doc['stable'] == 'true'
    assert float(doc['bound']) > 0


def test_unstable_parameters_exit_one(runner, scenario, tmp_path):
    result = invoke(runner, 'stability', '--config', scenario('msst_two_state.cfg'),
                    '--out', str(tmp_path),
                    'params.a1_1=0.6', 'params.a2_1=0.75', 'params.a1_2=1.2', 'params.a2_2=1.05')
    assert result.exit_code == EXIT_UNSTABLE
    assert read_document(str(tmp_path / 'stability.txt'))['bound'] == 'none'


def test_validation_failures_exit_two(runner, scenario, tmp_path):
    # simulate without parameters
    result = invoke(runner, 'simulate', '--out', str(tmp_path), 'simulate.T=100')
    assert result.exit_code == EXIT_VALIDATION
    # malformed override
    result = invoke(runner, 'stability', '--config', scenario('sp500_msst.cfg'),
                    '--out', str(tmp_path), 'params.d_1=1.4')
    assert result.exit_code == EXIT_VALIDATION
    result = invoke(runner, 'stability', '--config', scenario('sp500_msst.cfg'),
                    '--out', str(tmp_path), 'gibbs.colour=blue')
    assert result.exit_code == EXIT_VALIDATION
    # no returns to forecast
    result = invoke(runner, 'forecast', '--config', scenario('sp500_msst.cfg'),
                    '--out', str(tmp_path / 'empty'))
    assert result.exit_code == EXIT_VALIDATION


def test_simulate_is_reproducible(runner, scenario, tmp_path):
    outputs = []
    for name in ('first', 'second'):
        out = str(tmp_path / name)
        result = invoke(runner, 'simulate', '--config', scenario('msst_two_state.cfg'),
                        '--seed', '5', '--out', out, 'simulate.T=400', 'simulate.burn_in=100')
        assert result.exit_code == EXIT_OK, result.output
        outputs.append(read_series(os.path.join(out, 'returns.csv')))
    (dates, y), (dates2, y2) = outputs
    assert len(y) == 300
    assert dates == dates2
    assert (y == y2).all()


def test_pipeline(runner, scenario, tmp_path):
    out = str(tmp_path)
    common = ['--config', scenario('msst_two_state.cfg'), '--out', out]

    result = invoke(runner, 'simulate', *common, 'simulate.T=600', 'simulate.burn_in=200')
    assert result.exit_code == EXIT_OK, result.output
    stats = read_document(os.path.join(out, 'stats.txt'))
    assert stats['count'] == '400'
    assert len(read_table(os.path.join(out, 'states.csv'))) == 400

    result = invoke(runner, 'fit', *common, 'gibbs.iterations=6', 'gibbs.warmup=3',
                    'gibbs.grid_points=5', 'fit.save_states=true')
    assert result.exit_code == EXIT_OK, result.output
    draws = read_table(os.path.join(out, 'draws.csv'))
    assert len(draws) == 3
    assert list(draws.columns[:3]) == ['chain', 'a0_1', 'a1_1']
    posterior = read_document(os.path.join(out, 'posterior.txt'))
    assert posterior['family'] == 'msst-hygarch'
    assert posterior['insample'] == '267'
    assert os.path.exists(os.path.join(out, 'histograms', 'p22.csv'))
    assert set(read_table(os.path.join(out, 'state_draws.csv')).columns) == {
        'draw', 'start', 'length', 'regime'}

    result = invoke(runner, 'forecast', *common)
    assert result.exit_code == EXIT_OK, result.output
    forecast = read_table(os.path.join(out, 'forecast.csv'))
    assert len(forecast) == 400
    assert (forecast['segment'] == 'insample').sum() == 267
    assert ((forecast['psi_1'] + forecast['psi_2'] - 1).abs() < 1e-9).all()
    metrics = read_document(os.path.join(out, 'metrics.txt'))
    assert float(metrics['insample.rmse']) > 0
    assert len(read_series(os.path.join(out, 'high_vol.csv'))[1]) == 400

    result = invoke(runner, 'backtest', *common)
    assert result.exit_code == EXIT_OK, result.output
    report = read_document(os.path.join(out, 'backtest.txt'))
    assert report['T'] == '133'
    for rho in ('0.05', '0.1'):
        prefix = 'var_{}.'.format(rho)
        assert float(report[prefix + 'lr_cc']) == pytest.approx(
            float(report[prefix + 'lr_uc']) + float(report[prefix + 'lr_ind']))
        exceptions = read_table(os.path.join(out, 'exceptions_{}.csv'.format(rho)))
        assert len(exceptions) == 133
        assert exceptions['exception'].sum() == int(report[prefix + 'n'])

    # fitted posterior means feed the stability check and a new forecast
    fitted = tmp_path / 'fitted.cfg'
    fitted.write_text('params.from = {}\n'.format(os.path.join(out, 'posterior.txt')),
                      encoding='utf-8')
    refit = ['--config', str(fitted), '--out', out]
    result = invoke(runner, 'stability', *refit)
    assert result.exit_code in (EXIT_OK, EXIT_UNSTABLE), result.output
    doc = read_document(os.path.join(out, 'stability.txt'))
    assert doc['stable'] == ('true' if result.exit_code == EXIT_OK else 'false')
    result = invoke(runner, 'forecast', *refit)
    assert result.exit_code == EXIT_OK, result.output
    assert len(read_table(os.path.join(out, 'forecast.csv'))) == 400

    # emitted series are valid workbench inputs
    returns = ingest(os.path.join(out, 'returns.csv'))
    high_vol = ingest(os.path.join(out, 'high_vol.csv'))
    assert len(returns) == len(high_vol) == 400
    assert returns.dates == high_vol.dates
    assert returns.split_index == 267


def test_undecodable_config_exits_two(runner, tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_bytes(b'model.m = 2\nmodel.family = msst-\xffhygarch\n')
    result = invoke(runner, 'stability', '--config', str(path), '--out', str(tmp_path))
    assert result.exit_code == EXIT_VALIDATION
