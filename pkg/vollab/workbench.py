"""
Workbench subcommands. Each takes a RunConfig, writes its files under
the configured output directory and announces them on `run_finished`.

    simulate   returns.csv, states.csv, stats.txt
    stability  stability.txt
    fit        draws.csv, posterior.txt, histograms/<name>.csv [, state_draws.csv]
    forecast   forecast.csv, metrics.txt, high_vol.csv
    backtest   backtest.txt, exceptions_<rho>.csv
"""
import numpy as np

from .common import log, DomainError
from .backtest import standardized_quantile, var_series, exception_series, backtest
from .datasets import (ingest, business_dates, descriptive_stats, read_table,
                       write_series, write_table, write_document, write_states_rle)
from .gibbs import run_gibbs
from .regime_filter import run_filter, segment_metrics
from .signals_definitions import run_finished
from .stability import stability_report
from .volatility import simulate_path


COMMANDS = ('simulate', 'stability', 'fit', 'forecast', 'backtest')


def cmd_simulate(cfg):
    cfg.require('simulate')
    spec = cfg.model_spec()
    y, z, paths = simulate_path(spec, cfg.get('simulate.T'), cfg.get('simulate.burn_in', 0),
                                seed=cfg.seed)
    dates = business_dates(len(y))
    stats = descriptive_stats(y)
    outputs = [
        write_series(cfg.output('returns.csv'), dates, y),
        write_table(cfg.output('states.csv'), {
            'date': [day.isoformat() for day in dates],
            'state': z + 1,
            'variance': paths.h[np.arange(len(z)), z],
        }),
        write_document(cfg.output('stats.txt'), dict(stats, seed=cfg.seed if cfg.seed is not None
                                                     else 'none')),
    ]
    run_finished.send('simulate', outputs=outputs, T=len(y), m=spec.m)
    return stats


def cmd_stability(cfg):
    cfg.require('stability')
    report = stability_report(cfg.model_spec(), cfg.lag_cap)
    outputs = [write_document(cfg.output('stability.txt'), report.as_document())]
    run_finished.send('stability', outputs=outputs, rho=round(report.rho, 6), stable=report.stable)
    return report


def cmd_fit(cfg):
    """
    Gibbs sampler on the in-sample segment. Explicit params.* values,
    when given, are the chains' starting point.
    """
    cfg.require('fit')
    data = ingest(cfg.data_path, cfg.data_kind, cfg.split)
    initial = cfg.parameter_values() if cfg.has_params() else None
    draws = run_gibbs(data.in_sample, cfg.family, cfg.m, cfg.prior_spec(), cfg.gibbs_config(),
                      initial=initial, K=cfg.K)

    columns = {'chain': draws.chain + 1}
    columns.update((name, draws.column(name)) for name in draws.names)
    summary = draws.summary()
    summary['insample'] = data.split_index
    outputs = [
        write_table(cfg.output('draws.csv'), columns),
        write_document(cfg.output('posterior.txt'), summary),
    ]
    for name, (edges, mass) in draws.histograms().items():
        outputs.append(write_table(cfg.output('histograms', name + '.csv'), {
            'left': edges[:-1], 'right': edges[1:], 'mass': mass,
        }))
    if draws.states is not None:
        outputs.append(write_states_rle(cfg.output('state_draws.csv'), draws.states))
    run_finished.send('fit', outputs=outputs, family=draws.family, m=draws.m,
                      draws=len(draws.draws))
    return draws


def cmd_forecast(cfg):
    """
    Filters the whole series with the configured (or posterior mean)
    parameters. Initial variances come from the in-sample segment only.
    """
    cfg.require('forecast')
    data = ingest(cfg.data_path, cfg.data_kind, cfg.split)
    spec = cfg.model_spec()
    y, split = data.values, data.split_index
    run = run_filter(spec, y, presample=data.in_sample)
    metrics = segment_metrics(run, y, split)

    columns = {
        'date': [day.isoformat() for day in data.dates],
        't': np.arange(len(y)),
        'variance': run.variance,
        'realized_sq': y ** 2,
        'density': run.density,
        'segment': ['insample' if t < split else 'outsample' for t in range(len(y))],
    }
    for j in range(spec.m):
        columns['psi_{}'.format(j + 1)] = run.psi[:, j]
    doc = {'T': len(y), 'split': split, 'm': spec.m, 'loglik': run.log_likelihood}
    for segment, (rmse, llv) in metrics.items():
        doc[segment + '.rmse'] = rmse
        doc[segment + '.llv'] = llv
    # regimes are ordered by a0, the last one is the high-volatility state
    outputs = [
        write_table(cfg.output('forecast.csv'), columns),
        write_document(cfg.output('metrics.txt'), doc),
        write_series(cfg.output('high_vol.csv'), data.dates, run.psi[:, -1]),
    ]
    run_finished.send('forecast', outputs=outputs, **{key: doc[key] for key in
                                                      ('insample.rmse', 'outsample.rmse')})
    return doc


def _forecast_table(cfg, data):
    table = read_table(cfg.forecasts_path)
    if 'variance' not in table.columns:
        raise DomainError('{} has no variance column'.format(cfg.forecasts_path))
    if len(table) != len(data):
        raise DomainError('Forecast table has {} rows but the series has {}'.format(
            len(table), len(data)))
    if 'date' in table.columns and list(table['date']) != [day.isoformat() for day in data.dates]:
        raise DomainError('Forecast table dates do not match {}'.format(cfg.data_path))
    split = data.split_index
    if 'segment' in table.columns:
        split = int((table['segment'] == 'insample').sum())
    return table['variance'].to_numpy(dtype=float), split


def cmd_backtest(cfg):
    """
    VaR at every configured level over the out-of-sample segment,
    quantiles taken from in-sample standardized residuals.
    """
    cfg.require('backtest')
    data = ingest(cfg.data_path, cfg.data_kind, cfg.split)
    variances, split = _forecast_table(cfg, data)
    y = data.values
    out_dates = [day.isoformat() for day in data.dates[split:]]

    doc = {'T': len(y) - split, 'split': split}
    outputs = []
    reports = []
    for rho in cfg.levels:
        quantile = standardized_quantile(y[:split], variances[:split], rho,
                                         normal_fallback=cfg.normal_fallback)
        var = var_series(variances[split:], quantile, rho)
        report = backtest(y[split:], var)
        exc = exception_series(y[split:], var)
        prefix = 'var_{}.'.format(rho)
        doc[prefix + 'quantile'] = quantile
        doc.update(report.as_document(prefix))
        outputs.append(write_table(cfg.output('exceptions_{}.csv'.format(rho)), {
            'date': out_dates, 'return': y[split:], 'var': var.var, 'exception': exc.q,
        }))
        reports.append(report)
    outputs.insert(0, write_document(cfg.output('backtest.txt'), doc))
    run_finished.send('backtest', outputs=outputs,
                      **{'pass_cc_{}'.format(r.rho): r.pass_cc for r in reports})
    return reports


def run_command(name, cfg):
    if name not in COMMANDS:
        raise DomainError('Unknown command {}; expected one of {}'.format(name, ', '.join(COMMANDS)))
    log.info('Running {} (output {})'.format(name, cfg.out))
    return globals()['cmd_' + name](cfg)
