import math

import numpy as np
import pytest
import scipy.optimize
from numpy.testing import assert_allclose

from epigame.equilibrium import equilibrium_welfare, find_equilibrium
from epigame.game import social_welfare, welfare_gradient
from epigame.kkt import Classification, LinkCase
from epigame.network import AggregateInvestment, complete, cycle, validate_network
from epigame.optimum import social_optimum, verify_social_optimum

from .common import chorded_path_instance, symmetric_game


def test_cheap_protection_suppresses_everything():
    # marginal welfare never drops below 2 delta beta t_bar alpha = 2 > rho
    net = complete(3)
    opt = social_optimum(net, symmetric_game(3, rho=1.5))
    assert opt.classification == Classification.FULL_INVESTMENT
    assert opt.is_optimum
    assert_allclose(opt.aggregate.total, net.weights)


def test_expensive_protection_leaves_network():
    opt = social_optimum(complete(3), symmetric_game(3, rho=20.0))
    assert opt.classification == Classification.NO_INVESTMENT
    assert_allclose(opt.aggregate.total, 0.0)


def test_two_agent_optimum():
    # the planner equates 2 exp(h) with rho
    net = complete(2)
    gp = symmetric_game(2, rho=2.5)
    opt = social_optimum(net, gp)
    assert opt.converged
    assert opt.per_link_cases == {(0, 1): LinkCase.INTERIOR}
    assert opt.aggregate.total[0, 1] == pytest.approx(1.0 - math.log(1.25), abs=1e-6)
    eq = find_equilibrium(net, gp)
    assert social_welfare(net, opt.aggregate, gp) >= equilibrium_welfare(net, eq, gp)


def test_cycle_optimum():
    net = cycle(4)
    gp = symmetric_game(4, rho=2.0)
    opt = social_optimum(net, gp)
    assert opt.converged
    assert opt.kkt_residual <= 1e-6
    ok, residual, cases = verify_social_optimum(net, opt.aggregate, gp)
    assert ok
    assert residual == opt.kkt_residual
    assert set(cases) == set(net.links())


def test_warm_start():
    net = complete(2)
    gp = symmetric_game(2, rho=2.5)
    cold = social_optimum(net, gp)
    warm = social_optimum(net, gp, init=cold.aggregate)
    assert warm.iterations <= 1
    assert_allclose(warm.aggregate.total, cold.aggregate.total, atol=1e-8)


def test_verify_rejects_zero():
    gp = symmetric_game(2, rho=2.5)
    ok, residual, cases = verify_social_optimum(complete(2), AggregateInvestment.zeros(2), gp)
    assert not ok
    assert residual > 0
    assert cases == {(0, 1): LinkCase.FULL}


def test_size_mismatch():
    with pytest.raises(ValueError, match='nodes'):
        social_optimum(complete(3), symmetric_game(2, rho=1.0))


def test_no_links():
    opt = social_optimum(validate_network(np.zeros((2, 2))), symmetric_game(2, rho=1.0))
    assert opt.classification == Classification.NO_INVESTMENT
    assert opt.converged


def test_chorded_path_optimum_is_never_beaten():
    net, gp = chorded_path_instance()
    opt = social_optimum(net, gp)
    assert opt.is_optimum
    best = social_welfare(net, opt.aggregate, gp)
    links = net.links()
    ks = [k for k, _ in links]
    ls = [l for _, l in links]  # noqa: E741
    cap = net.weights[ks, ls]

    def welfare(x):
        total = np.zeros((net.n, net.n))
        total[ks, ls] = total[ls, ks] = x
        return social_welfare(net, AggregateInvestment(total), gp)

    quasi_newton = scipy.optimize.minimize(
        lambda x: -welfare(x),
        0.5 * cap,
        method='L-BFGS-B',
        bounds=list(zip(0 * cap, cap, strict=True)),
    )
    assert best >= -quasi_newton.fun - 1e-8
    rng = np.random.default_rng(21)
    x = opt.aggregate.total[ks, ls]
    for _ in range(50):
        nearby = np.clip(x + rng.normal(scale=0.05, size=x.shape), 0.0, cap)
        assert best >= welfare(nearby) - 1e-8


def test_equilibrium_underinvests_against_planner():
    # at the symmetric equilibrium each link is worth rho to one agent but more to all
    net = complete(2)
    gp = symmetric_game(2, rho=2.5)
    eq = find_equilibrium(net, gp)
    assert eq.is_equilibrium
    ok, residual, cases = verify_social_optimum(net, eq.aggregate, gp)
    assert not ok
    assert residual > 1e-3
    assert welfare_gradient(net, eq.aggregate, gp)[0, 1] > gp.rho
    opt = social_optimum(net, gp)
    assert opt.aggregate.total[0, 1] > eq.aggregate.total[0, 1]
