import pytest

from zslearn import (StrategyProfile, make_brps, make_mne, make_random,
                     solve_stationary, uniform)


def _solved(game, mu=0.1):
    ref = StrategyProfile(uniform(game.rows), uniform(game.cols))
    return game, ref, solve_stationary(game, mu, ref)


@pytest.fixture(scope="session")
def brps_stationary():
    """(game, uniform reference, solved rest point) for the biased RPS game."""
    return _solved(make_brps())


@pytest.fixture(scope="session")
def mne_stationary():
    return _solved(make_mne())


@pytest.fixture(scope="session")
def rand25_stationary():
    return _solved(make_random(25, 7))
