#!/usr/bin/env python
from flask import Flask, jsonify
from flask.cli import FlaskGroup
from flask_restful.utils import http_status_message
from flask_cors import CORS

from werkzeug.exceptions import default_exceptions
import logging
import sys
import click
import datadog

import config


app = Flask(__name__)
app.config['ERROR_404_HELP'] = False # disable this flask_restful feature
app.config['MAX_CONTENT_LENGTH'] = 16 * 1024 * 1024 # limit size of posted series

datadog.initialize(api_key=config.DATADOG_API_KEY)


# JSONful error handling
def make_json_error(ex):
    code = getattr(ex, 'code', 500)
    if hasattr(ex, 'data'):
        response = jsonify(**ex.data)
    else:
        response = jsonify(
            error_code = code,
            error = ex.__dict__.get('description') # __dict__ to avoid using classwide default
                or http_status_message(code),
        )
    response.status_code = code
    return response
for code in default_exceptions.keys():
    # apply decorator
    app.errorhandler(code)(make_json_error)

def init_app(app=app):
    import vollab
    vollab.init_app(app)

    # disable logging for cors beforehand
    logging.getLogger('flask_cors').disabled = True
    CORS(app, origins=config.CORS_ORIGINS)

    return app

def setup_logging(app, f = None, level = logging.DEBUG):
    app.logger.setLevel(level)

    logger = logging.FileHandler(f) if f else logging.StreamHandler()
    logger.setFormatter(logging.Formatter(config.LOG_FORMAT))
    logger.setLevel(level)
    app.logger.addHandler(logger)
    # library code running outside of app context logs here
    logging.getLogger(config.LOGGER_NAME).addHandler(logger)
    logging.getLogger(config.LOGGER_NAME).setLevel(level)

def live(logfile=None):
    setup_logging(app, logfile)
    return init_app()

def debug():
    app.debug = True
    setup_logging(app)
    return init_app()

def console(level=logging.INFO):
    setup_logging(app, level=level)
    return init_app()


### Workbench commands ###
def run_cli(name, config_path=None, seed=None, out=None, overrides=()):
    """
    Runs one workbench command and returns the process exit status.
    """
    from vollab.common import (log, DomainError, ComputationError,
                               EXIT_OK, EXIT_UNSTABLE, EXIT_VALIDATION,
                               EXIT_COMPUTATION, EXIT_IO)
    from vollab.runconfig import RunConfig
    from vollab.workbench import run_command

    try:
        cfg = RunConfig.load(config_path, overrides, seed, out)
        result = run_command(name, cfg)
    except DomainError as e:
        log.error('{}: invalid input: {}'.format(name, e))
        return EXIT_VALIDATION
    except ComputationError as e:
        log.error('{}: computation failed: {}'.format(name, e))
        return EXIT_COMPUTATION
    except OSError as e:
        log.error('{}: I/O failure: {}'.format(name, e))
        return EXIT_IO

    if name == 'stability':
        click.echo('rho = {!r}, stable = {}'.format(result.rho, result.stable))
        if not result.stable:
            return EXIT_UNSTABLE
    click.echo('{}: output written to {}'.format(name, cfg.out))
    return EXIT_OK


def workbench_command(name, help):
    @app.cli.command(name, help=help)
    @click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                  help='run configuration file (key = value lines)')
    @click.option('--seed', type=click.IntRange(min=0), help='random seed, overrides the file')
    @click.option('--out', type=click.Path(file_okay=False),
                  help='output directory (default {})'.format(config.OUTPUT_DIR))
    @click.argument('overrides', nargs=-1)
    def command(config_path, seed, out, overrides):
        sys.exit(run_cli(name, config_path, seed, out, overrides))
    return command

workbench_command('simulate', 'Simulate returns and latent regimes from params.*')
workbench_command('stability', 'Second-moment stability check; exit status 1 if unstable')
workbench_command('fit', 'Gibbs sampler on the in-sample returns')
workbench_command('forecast', 'One-step-ahead variance forecasts with RMSE/LLV per segment')
workbench_command('backtest', 'VaR backtests (unconditional coverage, independence, both)')


if __name__ == '__main__':
    cli = FlaskGroup(create_app=console, help='regime-vol-lab workbench')
    cli()
