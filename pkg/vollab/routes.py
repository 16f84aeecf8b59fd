"""
JSON resources mirroring the workbench commands.
Parameters use the run-config names (a0_1, d_2, p11, w, ...).
"""
import flask_restful as restful

import config
from .helpers import * # noqa
from .helpers import MyRequestParser as RequestParser
from .main import api
from .backtest import standardized_quantile, var_series, backtest
from .datasets import default_split, descriptive_stats
from .fracdiff import compute_coeffs, tail_weight
from .gibbs import run_gibbs, GibbsConfig
from .regime_filter import run_filter, segment_metrics
from .runconfig import RunConfig, PARAM_RE, convert
from .stability import stability_report
from .volatility import simulate_path


def model_config(data):
    """ RunConfig built from the model fields of a request body """
    values = {}
    for key, raw in data.items():
        if key in ('family', 'm', 'K'):
            name = {'family': 'model.family', 'm': 'model.m', 'K': 'fracdiff.K'}[key]
        elif key.startswith('priors.'):
            name = key
        elif PARAM_RE.match(key):
            name = 'params.' + key
        else:
            continue
        try:
            values[name] = convert(name, str(raw) if not isinstance(raw, (list, tuple))
                                   else ', '.join(map(str, raw)))
        except ValueError as e:
            abort(str(e), problem=key)
    return RunConfig(values)


def split_index(data, n):
    split = body_field(data, 'split', float)
    if split is None:
        return default_split(n)
    index = int(round(split * n)) if split < 1 else int(split)
    if not 0 < index < n:
        abort('[split]: must fall inside the series', problem='split')
    return index


@api.resource('/fracdiff')
class FracDiffResource(restful.Resource):
    @model_errors
    def get(self):
        parser = RequestParser()
        parser.add_argument('d', type=fraction_field, required=True, location='args')
        parser.add_argument('K', type=count_field(1), default=config.FRACDIFF_K, location='args')
        args = parser.parse_args()
        coeffs = compute_coeffs(args.d, args.K)
        return dict(
            d=coeffs.d,
            K=coeffs.K,
            coeffs=coeffs.coeffs.tolist(),
            tail_weight=tail_weight(coeffs),
        )


@api.resource('/stability')
class StabilityResource(restful.Resource):
    @model_errors
    def post(self):
        data = json_body()
        lag_cap = body_field(data, 'lag_cap', count_field(1), config.LAG_CAP)
        report = stability_report(model_config(data).model_spec(), lag_cap)
        return dict(
            rho=report.rho,
            stable=report.stable,
            bound=report.bound,
            pi=report.pi.tolist(),
            Lambda=report.Lambda.tolist(),
            Q=report.Q.tolist(),
            lag_cap=report.lag_cap,
        )


@api.resource('/simulate')
class SimulateResource(restful.Resource):
    @model_errors
    def post(self):
        data = json_body()
        T = body_field(data, 'T', count_field(1), required=True)
        burn_in = body_field(data, 'burn_in', count_field(0), 0)
        seed = body_field(data, 'seed', count_field(0))
        spec = model_config(data).model_spec()
        y, z, paths = simulate_path(spec, T, burn_in, seed=seed)
        return dict(
            returns=y.tolist(),
            states=(z + 1).tolist(),
            stats=descriptive_stats(y),
        )


@api.resource('/forecast')
class ForecastResource(restful.Resource):
    @model_errors
    def post(self):
        data = json_body()
        y = body_field(data, 'returns', series_field, required=True)
        if len(y) < 2:
            abort('[returns]: need at least two observations', problem='returns')
        split = split_index(data, len(y))
        spec = model_config(data).model_spec()
        run = run_filter(spec, y, presample=y[:split])
        metrics = segment_metrics(run, y, split)
        return dict(
            split=split,
            variance=run.variance.tolist(),
            density=run.density.tolist(),
            psi=run.psi.tolist(),
            loglik=run.log_likelihood,
            metrics={segment: dict(rmse=rmse, llv=llv)
                     for segment, (rmse, llv) in metrics.items()},
        )


@api.resource('/backtest')
class BacktestResource(restful.Resource):
    @model_errors
    def post(self):
        data = json_body()
        y = body_field(data, 'returns', series_field, required=True)
        variances = body_field(data, 'variances', series_field, required=True)
        if len(y) != len(variances):
            abort('[variances]: must match returns in length', problem='variances')
        if len(y) < 3:
            abort('[returns]: need at least three observations', problem='returns')
        split = split_index(data, len(y))
        levels = body_field(data, 'levels', levels_field, list(config.RISK_LEVELS))
        fallback = body_field(data, 'normal_fallback', boolean_field, False)
        reports = []
        for rho in levels:
            quantile = standardized_quantile(y[:split], variances[:split], rho,
                                             normal_fallback=fallback)
            report = backtest(y[split:], var_series(variances[split:], quantile, rho))
            reports.append(dict(report.as_document(), quantile=quantile))
        return dict(split=split, reports=reports)


@api.resource('/fit')
class FitResource(restful.Resource):
    @model_errors
    def post(self):
        data = json_body()
        y = body_field(data, 'returns', series_field, required=True)
        iterations = body_field(data, 'iterations', count_field(1), required=True)
        if iterations > config.HTTP_MAX_ITERATIONS:
            abort('[iterations]: at most {} over HTTP; use the command line for longer runs'.format(
                config.HTTP_MAX_ITERATIONS), problem='iterations')
        cfg = model_config(data)
        gibbs_cfg = GibbsConfig(
            iterations=iterations,
            warmup=body_field(data, 'warmup', count_field(0), iterations // 2),
            grid_points=body_field(data, 'grid_points', count_field(3), config.GRID_POINTS),
            seed=body_field(data, 'seed', count_field(0)),
            chains=body_field(data, 'chains', count_field(1), 1),
        )
        draws = run_gibbs(y, cfg.family, cfg.m, cfg.prior_spec(), gibbs_cfg, K=cfg.K)
        return draws.summary()
