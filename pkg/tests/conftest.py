import os

import numpy as np
import pytest

import main
from vollab.models import RegimeParams, TransitionMatrix, ModelSpec


ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIOS = os.path.join(ROOT, 'scenarios')


def two_state_spec(K=1000):
    """ parameters of the bundled two-regime simulation scenario """
    return ModelSpec(
        regimes=(
            RegimeParams(a0=0.18, a1=0.20, a2=0.25, b0=0.15, b1=0.14, b2=0.0, d=0.40, gamma=0.6),
            RegimeParams(a0=1.5, a1=0.40, a2=0.35, b0=1.0, b1=0.18, b2=0.0, d=0.85, gamma=2.0),
        ),
        transition=TransitionMatrix.two_state(0.85, 0.60),
        trunc_K=K,
    )


def equity_spec(K=1000):
    """ two-regime estimates for daily S&P500 returns """
    return ModelSpec(
        regimes=(
            RegimeParams(a0=0.203, a1=0.205, a2=0.406, b0=0.204, b1=0.082, d=0.806, gamma=0.314),
            RegimeParams(a0=0.455, a1=0.405, a2=0.405, b0=0.456, b1=0.102, d=0.856, gamma=1.785),
        ),
        transition=TransitionMatrix.two_state(0.941, 0.977),
        trunc_K=K,
    )


@pytest.fixture
def sim_spec():
    return two_state_spec()


@pytest.fixture
def sp500_spec():
    return equity_spec()


@pytest.fixture
def rng():
    return np.random.default_rng(20150130)


@pytest.fixture(scope='session')
def app():
    main.app.config['TESTING'] = True
    return main.init_app()


@pytest.fixture
def client(app):
    return app.test_client()


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def scenario():
    def path(name):
        return os.path.join(SCENARIOS, name)
    return path
