import math

import numpy as np
import pandas as pd
import pytest
import scipy.linalg
from numpy.testing import assert_allclose, assert_array_equal

from epigame.dynamics import (
    DEFAULT_GRID,
    EpidemicParams,
    closed_form_upper_bound,
    integrate_mean_field,
    linearized_solution,
    matrix_exponential,
    spectral_approximation,
    time_grid,
    write_trajectory_csv,
)
from epigame.errors import NetworkValidationError
from epigame.network import complete, cycle, star, validate_network

from .common import check_sandwich, random_network, random_params


@pytest.mark.parametrize(
    ('kwargs', 'match'),
    [
        ({'beta': 0.0, 't_bar': 1.0, 'x0': [0.5]}, 'beta'),
        ({'beta': 1.0, 't_bar': -1.0, 'x0': [0.5]}, 't_bar'),
        ({'beta': 1.0, 't_bar': 1.0, 'x0': [1.0, 0.5]}, r'\[0, 1\)'),
        ({'beta': 1.0, 't_bar': 1.0, 'x0': [-0.1, 0.5]}, r'\[0, 1\)'),
        ({'beta': 1.0, 't_bar': 1.0, 'x0': [0.0, 0.0]}, 'positive entry'),
    ],
)
def test_params_errors(kwargs, match):
    with pytest.raises(ValueError, match=match):
        EpidemicParams(**kwargs)


def test_homogeneous_params():
    p = EpidemicParams.homogeneous(1.0, 2.0, 0.25, 3)
    assert p.is_homogeneous
    assert p.alpha == 0.25
    assert p.n == 3
    assert p.with_horizon(4.0).t_bar == 4.0
    q = EpidemicParams(1.0, 2.0, [0.25, 0.5, 0.25])
    assert not q.is_homogeneous
    with pytest.raises(ValueError, match='not homogeneous'):
        _ = q.alpha
    assert p != q


def test_time_grid():
    t = time_grid(2.0)
    assert t.shape == (DEFAULT_GRID,)
    assert t[0] == 0.0
    assert t[-1] == 2.0
    with pytest.raises(ValueError):
        time_grid(1.0, points=1)


def test_matrix_exponential():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(5, 5))
    assert_allclose(matrix_exponential(m), scipy.linalg.expm(m))
    # defective matrix
    assert_allclose(matrix_exponential([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]])


def taylor_exponential(m, terms=60):
    term = np.eye(len(m))
    total = np.array(term)
    for k in range(1, terms):
        term = term @ m / k
        total += term
    return total


@pytest.mark.parametrize('seed', range(5))
def test_matrix_exponential_taylor(seed):
    rng = np.random.default_rng(50 + seed)
    m = rng.normal(size=(4, 4))
    m *= 2.0 / np.linalg.norm(m, 2)
    assert_allclose(matrix_exponential(m), taylor_exponential(m), rtol=1e-12, atol=1e-12)
    # no cancellation in the series of a nonnegative matrix
    p = np.abs(m) * 2.5
    assert_allclose(matrix_exponential(p), taylor_exponential(p), rtol=1e-11)


def test_matrix_exponential_swap():
    h = 0.5
    expected = [[math.cosh(h), math.sinh(h)], [math.sinh(h), math.cosh(h)]]
    assert_allclose(matrix_exponential([[0.0, h], [h, 0.0]]), expected, rtol=1e-13)


def test_mean_field_logistic():
    # two agents with equal initial probability follow the logistic curve
    alpha = 0.2
    params = EpidemicParams(1.0, 3.0, [alpha, alpha])
    traj = integrate_mean_field(complete(2), params)
    t = traj.times
    expected = alpha * np.exp(t) / (1 - alpha + alpha * np.exp(t))
    assert_allclose(traj.values[:, 0], expected, rtol=1e-7)
    assert_allclose(traj.values[:, 1], expected, rtol=1e-7)


def test_zero_horizon():
    net = cycle(4)
    params = EpidemicParams(1.0, 0.0, [0.1, 0.0, 0.3, 0.0])
    for traj in (
        integrate_mean_field(net, params, grid=5),
        closed_form_upper_bound(net, params, grid=5),
        linearized_solution(net, params, grid=5),
    ):
        assert traj.values.shape == (5, 4)
        assert_allclose(traj.values, np.tile(params.x0, (5, 1)), atol=1e-15)


def test_isolated_agents_stay_put():
    net = validate_network(np.zeros((3, 3)))
    params = EpidemicParams(2.0, 1.0, [0.5, 0.0, 0.25])
    traj = integrate_mean_field(net, params)
    assert_allclose(traj.final, params.x0)


@pytest.mark.parametrize('seed', range(50))
def test_sandwich_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    net = random_network(rng, n)
    params = random_params(rng, n)
    mean_field = integrate_mean_field(net, params)
    upper = closed_form_upper_bound(net, params)
    linear = linearized_solution(net, params)
    check_sandwich(mean_field.values, upper.values, linear.values)
    assert np.all(mean_field.values >= -1e-12)
    assert np.all(mean_field.values <= 1.0 + 1e-8)


def test_upper_bound_log_values():
    params = EpidemicParams(0.5, 2.0, [0.3, 0.1, 0.0])
    traj = closed_form_upper_bound(cycle(3), params)
    assert_allclose(traj.values, -np.expm1(-traj.log_values))
    assert_allclose(traj.log_values[0], -np.log1p(-params.x0))


def test_linearized_is_exponential():
    net = cycle(3, weight=0.7)
    params = EpidemicParams(1.5, 1.0, [0.2, 0.0, 0.1])
    traj = linearized_solution(net, params, grid=3)
    assert_allclose(traj.final, scipy.linalg.expm(1.5 * net.weights) @ params.x0)


def test_spectral_complete():
    s = spectral_approximation(complete(4), EpidemicParams.homogeneous(1.0, 1.0, 0.5, 4))
    assert s.mu1 == pytest.approx(3.0, abs=1e-8)
    assert s.mu2 == pytest.approx(-1.0, abs=1e-6)
    assert s.gap == pytest.approx(4.0, abs=1e-6)
    assert_allclose(s.v, np.full(4, 0.5), atol=1e-8)
    assert_allclose(s.rank_one, np.exp(1.5) * np.full((4, 4), 0.25), rtol=1e-8)


def test_spectral_errors():
    params = EpidemicParams.homogeneous(1.0, 1.0, 0.5, 3)
    with pytest.raises(NetworkValidationError, match='aperiodic'):
        spectral_approximation(cycle(4), EpidemicParams.homogeneous(1.0, 1.0, 0.5, 4))
    with pytest.raises(NetworkValidationError, match='irreducible'):
        spectral_approximation(validate_network(np.zeros((3, 3))), params)
    with pytest.raises(ValueError, match='homogeneous'):
        spectral_approximation(cycle(3), EpidemicParams(1.0, 1.0, [0.1, 0.2, 0.3]))


def test_spectral_bipartite_on_request():
    params = EpidemicParams.homogeneous(1.0, 1.0, 0.5, 4)
    s = spectral_approximation(star(4), params, require_aperiodic=False)
    assert s.mu1 == pytest.approx(math.sqrt(3.0), abs=1e-8)
    pair = EpidemicParams.homogeneous(1.0, 1.0, 0.5, 2)
    s = spectral_approximation(complete(2), pair, require_aperiodic=False)
    assert s.mu1 == pytest.approx(1.0, abs=1e-8)
    assert s.gap == pytest.approx(2.0, abs=1e-6)


def test_rank_one_error_decays_with_horizon():
    net = cycle(5)
    errors = []
    for t_bar in (1.0, 2.0, 4.0, 8.0):
        params = EpidemicParams.homogeneous(1.0, t_bar, 0.5, 5)
        exact = scipy.linalg.expm(0.5 * t_bar * net.weights)
        s = spectral_approximation(net, params)
        errors.append(np.linalg.norm(exact - s.rank_one) / np.linalg.norm(exact))
    assert np.all(np.diff(errors) < 0)
    assert errors[-1] < 0.25 * errors[0]


@pytest.mark.parametrize('seed', range(5))
def test_trajectories_are_nondecreasing(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 7))
    net = random_network(rng, n)
    params = random_params(rng, n)
    for traj in (
        integrate_mean_field(net, params, grid=65),
        closed_form_upper_bound(net, params, grid=65),
        linearized_solution(net, params, grid=65),
    ):
        assert np.all(np.diff(traj.values, axis=0) >= -1e-10)


def test_log_transform_of_mean_field():
    # y = -log(1 - x) solves y' = beta A (1 - exp(-y))
    net = cycle(3, weight=0.7)
    params = EpidemicParams(1.0, 1.0, [0.2, 0.0, 0.1])
    traj = integrate_mean_field(net, params, grid=2001)
    y = -np.log1p(-traj.values)
    slope = np.gradient(y, traj.times, axis=0)[1:-1]
    rhs = (params.beta * net.weights @ -np.expm1(-y).T).T[1:-1]
    assert_allclose(slope, rhs, atol=1e-6)


def test_upper_bound_log_values_derivative():
    # y(t) = y0 + [exp(beta t A W) - I] z solves y' = beta A W (y - y0 + z)
    net = cycle(3, weight=0.7)
    params = EpidemicParams(1.0, 1.0, [0.2, 0.0, 0.1])
    traj = closed_form_upper_bound(net, params, grid=2001)
    y = traj.log_values
    w = 1.0 - params.x0
    z = params.x0 / w
    slope = np.gradient(y, traj.times, axis=0)[1:-1]
    rhs = ((params.beta * net.weights * w[None, :]) @ (y - y[0] + z).T).T[1:-1]
    assert_allclose(slope, rhs, atol=1e-6)


def test_write_trajectory_csv(tmp_path):
    params = EpidemicParams(1.0, 1.0, [0.5, 0.0])
    traj = integrate_mean_field(complete(2), params, grid=9)
    path = tmp_path / 'traj.csv'
    write_trajectory_csv(traj, path)
    frame = pd.read_csv(path, float_precision='round_trip')
    assert list(frame.columns) == ['t', 'x_1', 'x_2']
    assert len(frame) == 9
    assert_array_equal(frame.to_numpy(), np.column_stack([traj.times, traj.values]))
