from blinker import Namespace

import config
from .common import log
from .helpers import datadog, dd_stat


workbench_namespace = Namespace()
gibbs_progress = workbench_namespace.signal('gibbs-progress')
run_finished = workbench_namespace.signal('run-finished')


@gibbs_progress.connect
def log_gibbs_progress(sender, chain, iteration, total, loglik=None, **extra):
    """Periodic sampler progress line"""
    if iteration % config.GIBBS_LOG_EVERY and iteration != total:
        return
    log.info('{}: chain {} iteration {}/{} loglik={:.3f}'.format(
        sender, chain, iteration, total, loglik if loglik is not None else float('nan')))


@run_finished.connect
def report_run(sender, outputs=(), **summary):
    """Signal handler for finished workbench commands"""
    text = ', '.join('{}={}'.format(*item) for item in sorted(summary.items()))
    datadog('Workbench {} finished'.format(sender), text, command=sender)
    if config.DATADOG_API_KEY:
        dd_stat.increment('workbench.{}'.format(sender))
    for path in outputs:
        log.debug('{}: wrote {}'.format(sender, path))
