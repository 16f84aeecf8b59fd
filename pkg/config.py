import os
try:
    from local_config import DATADOG_API_KEY
except ImportError:
    DATADOG_API_KEY = None
try:
    from local_config import TEST
except ImportError:
    TEST = False

# default directory for workbench output files
OUTPUT_DIR = os.environ.get('REGIME_VOL_LAB_OUTPUT') or 'output'

CORS_ORIGINS = ['http://localhost:8080', 'http://127.0.0.1:8080']

LOG_FORMAT = '[%(asctime)s] [%(name)s] [%(levelname)s] %(message)s'
LOGGER_NAME = 'regime-vol-lab'

# Fractional differencing
FRACDIFF_K = 1000 # truncation of the (1-B)^d expansion
# Stability
LAG_CAP = 500 # terms of the lag-probability series in Q's f block
# Gibbs sampler
GIBBS_ITERATIONS = 10000
GIBBS_WARMUP = 5000
GIBBS_CHAINS = 1
GRID_POINTS = 33
GIBBS_LOG_EVERY = 500
GIBBS_MIN_OBS = 50
HISTOGRAM_BINS = 40
# Risk
RISK_LEVELS = (0.05, 0.10)
MIN_QUANTILE_OBS = 100
BACKTEST_CONFIDENCE = 0.95

# in-sample share of a dataset when no split is given (1000/500)
SPLIT_FRACTION = 2 / 3
# first business day used to date simulated series
SIMULATION_START = '2000-01-03'

# Uniform prior support, shared by all regimes.
# b1 and b2 are further capped by the current d when sampled.
PRIOR_BOUNDS = {
    'a0': (0.001, 5.0),
    'a1': (0.001, 0.999),
    'a2': (0.001, 0.999),
    'b0': (0.001, 5.0),
    'b1': (0.0, 0.999),
    'b2': (0.0, 0.999),
    'd': (0.001, 0.999),
    'gamma': (0.001, 10.0),
    'w': (0.0, 1.0),
}
BETA_PRIOR = 1.0

# largest Gibbs run accepted over HTTP
HTTP_MAX_ITERATIONS = 2000
