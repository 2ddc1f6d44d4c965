import json as _json
import os

import numpy as np
from numpy.testing import assert_allclose

from epigame import *  # noqa: F403  # for eval to find names in repr tests
from epigame.commands import *  # noqa: F403
from epigame.dynamics import EpidemicParams
from epigame.game import GameParams
from epigame.network import GLOBAL, complete, validate_network
from epigame.registry import get_command

here = os.path.abspath(os.path.dirname(__file__))
fixture_dir = os.path.join(os.path.dirname(here), 'fixture')


def random_network(rng, n, density=0.7, low=0.2, high=1.5):
    """Random irreducible network: a ring plus random chords."""
    weights = np.zeros((n, n))
    for k in range(n):
        l = (k + 1) % n  # noqa: E741
        weights[k, l] = weights[l, k] = rng.uniform(low, high)
    for k in range(n):
        for l in range(k + 2, n):  # noqa: E741
            if rng.random() < density:
                weights[k, l] = weights[l, k] = rng.uniform(low, high)
    return validate_network(weights)


def random_params(rng, n, homogeneous=False, t_bar=None):
    beta = rng.uniform(0.2, 1.5)
    t_bar = rng.uniform(0.2, 2.0) if t_bar is None else t_bar
    if homogeneous:
        x0 = np.full(n, rng.uniform(0.05, 0.6))
    else:
        x0 = rng.uniform(0.0, 0.6, size=n)
        x0[rng.integers(n)] = rng.uniform(0.1, 0.6)
    return EpidemicParams(beta=beta, t_bar=t_bar, x0=x0)


def symmetric_game(n, rho, mode=GLOBAL, delta=1.0, beta=1.0, t_bar=2.0, alpha=0.5):
    """Symmetric game; with the defaults ``delta beta t_bar alpha = 1`` and
    ``beta t_bar (1 - alpha) = 1``."""
    epi = EpidemicParams.homogeneous(beta, t_bar, alpha, n)
    return GameParams(delta=delta, epi=epi, rho=rho, mode=mode)


def symmetric_instance(n, rho, mode=GLOBAL, **kwargs):
    return complete(n), symmetric_game(n, rho, mode=mode, **kwargs)


def check_sandwich(lower, middle, upper, tol=1e-8):
    # componentwise ordering at every grid time
    assert np.all(lower <= middle + tol)
    assert np.all(middle <= upper + tol)


def check_config(command):
    config = command.get_config()
    # round-trip through JSON to check serialization
    config = _json.loads(_json.dumps(config))
    assert command == get_command(config)


def check_repr(stmt):
    # check repr matches instantiation statement
    command = eval(stmt)
    actual = repr(command)
    assert stmt == actual


def check_profile_total(report, expected, atol=1e-6):
    assert_allclose(report.profile.total(), expected, atol=atol)


def write_config(tmp_path, doc, name='config.json'):
    path = tmp_path / name
    path.write_text(_json.dumps(doc), encoding='utf-8')
    return path


def chorded_path_instance(rho=2.0):
    """Path 0-1-2-3 with a weak chord between its ends and heterogeneous agents."""
    weights = np.zeros((4, 4))
    for k in range(3):
        weights[k, k + 1] = weights[k + 1, k] = 1.0
    weights[0, 3] = weights[3, 0] = 0.3
    epi = EpidemicParams(beta=1.0, t_bar=3.0, x0=[0.05, 0.5, 0.1, 0.3])
    return validate_network(weights), GameParams(delta=[1.0, 3.0, 0.5, 2.0], epi=epi, rho=rho)
