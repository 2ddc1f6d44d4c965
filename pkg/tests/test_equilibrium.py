import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from epigame.closed_forms import symmetric_equilibrium, symmetric_equilibrium_profile
from epigame.equilibrium import (
    best_equilibrium,
    best_response,
    equilibrium_report,
    equilibrium_welfare,
    find_equilibrium,
    induced_equilibrium,
    reallocate_investments,
    search_equilibria,
    verify_equilibrium,
    worst_equilibrium,
)
from epigame.dynamics import EpidemicParams
from epigame.errors import HypothesisError, InfeasibleProfileError
from epigame.game import GameParams, marginal_utility_matrix, payoff
from epigame.kkt import Classification, LinkCase
from epigame.network import GLOBAL, LOCAL, StrategyProfile, complete, cycle

from .common import chorded_path_instance, check_profile_total, symmetric_game

# on a single link of weight 1 the equilibrium leaves h = log(rho)
TWO_AGENT_INVESTMENT = 1.0 - math.log(2.5)


def two_agent_equilibrium(mode=GLOBAL):
    gp = symmetric_game(2, rho=2.5, mode=mode)
    return gp, find_equilibrium(complete(2), gp)


def test_verify_equilibrium():
    net = complete(2)
    gp = symmetric_game(2, rho=2.5)
    ok, residual, cases, eligible = verify_equilibrium(net, StrategyProfile.zeros(2), gp)
    assert not ok
    assert residual > 0.1
    assert cases == {(0, 1): LinkCase.FULL}
    assert eligible == {(0, 1): (0, 1)}

    _, report = two_agent_equilibrium()
    ok, residual, cases, _ = verify_equilibrium(net, report.profile, gp)
    assert ok
    assert residual <= 1e-6
    assert cases == {(0, 1): LinkCase.INTERIOR}


def test_verify_rejects_unwilling_investor():
    # agent 2 values link (0, 1) below its cost but carries part of it
    net = complete(3)
    gp = symmetric_game(3, rho=3.0)
    sol = symmetric_equilibrium(1.0, gp)
    arr = np.array(symmetric_equilibrium_profile(net, sol).per_agent)
    share = sol.link_investment / 2
    arr[:, 0, 1] = arr[:, 1, 0] = [share, 0.0, share]
    ok, residual, _, _ = verify_equilibrium(net, StrategyProfile(arr), gp)
    assert not ok
    assert residual > 1e-3


@pytest.mark.parametrize('mode', [LOCAL, GLOBAL])
def test_find_equilibrium_two_agents(mode):
    gp, report = two_agent_equilibrium(mode)
    assert report.converged
    assert report.is_equilibrium
    assert report.mode == mode
    assert report.order == (0, 1)
    assert report.source == 'order [0, 1]'
    assert not report.oscillation
    check_profile_total(report, TWO_AGENT_INVESTMENT * (1 - np.eye(2)))
    assert report.aggregate.total[0, 1] == report.profile.total()[0, 1]


def test_find_equilibrium_order():
    gp = symmetric_game(2, rho=2.5)
    report = find_equilibrium(complete(2), gp, order=[1, 0], source='reversed')
    assert report.order == (1, 0)
    assert report.source == 'reversed'
    # the first agent in the order carries the link
    assert report.profile.per_agent[1, 0, 1] == pytest.approx(TWO_AGENT_INVESTMENT, abs=1e-6)
    assert report.profile.per_agent[0, 0, 1] == 0.0


def test_find_equilibrium_sweep_limit():
    gp = symmetric_game(2, rho=2.5)
    report = find_equilibrium(complete(2), gp, max_sweeps=1)
    assert report.iterations == 1
    assert not report.converged


def test_find_equilibrium_no_investment():
    gp = symmetric_game(2, rho=10.0)
    report = find_equilibrium(complete(2), gp)
    assert report.converged
    assert report.classification == Classification.NO_INVESTMENT
    assert_allclose(report.profile.per_agent, 0.0)


def test_find_equilibrium_full_investment():
    gp = symmetric_game(2, rho=0.5)
    report = find_equilibrium(complete(2), gp)
    assert report.classification == Classification.FULL_INVESTMENT
    check_profile_total(report, 1 - np.eye(2))


def test_find_equilibrium_errors():
    gp = symmetric_game(2, rho=2.5)
    with pytest.raises(ValueError, match='permutation'):
        find_equilibrium(complete(2), gp, order=[0, 0])
    with pytest.raises(ValueError, match='nodes'):
        find_equilibrium(complete(3), gp)


def test_local_init_is_converted():
    gp = symmetric_game(2, rho=2.5, mode=LOCAL)
    report = find_equilibrium(complete(2), gp, init=StrategyProfile.zeros(2))
    assert report.profile.local


def test_best_response_caps_at_remaining_weight():
    net = complete(2)
    gp = symmetric_game(2, rho=0.5)
    arr = np.zeros((2, 2, 2))
    arr[1, 0, 1] = arr[1, 1, 0] = 0.75
    br = best_response(net, StrategyProfile(arr), gp, 0)
    assert br.converged
    assert br.investment[0, 1] == pytest.approx(0.25)


def test_equilibrium_report():
    net = complete(2)
    gp = symmetric_game(2, rho=2.5)
    report = equilibrium_report(net, StrategyProfile.zeros(2), gp, source='zero')
    assert report.source == 'zero'
    assert not report.is_equilibrium
    assert not report.converged
    assert report.classification == Classification.FULL_INVESTMENT


def test_reallocate_investments():
    gp, eq = two_agent_equilibrium()
    total = eq.profile.total()[0, 1]
    moved = reallocate_investments(complete(2), eq, gp, {(1, 0): {0: total / 2, 1: total / 2}})
    assert moved.is_equilibrium
    assert moved.profile.per_agent[1, 0, 1] == total / 2
    assert_allclose(moved.profile.total(), eq.profile.total())
    assert moved.source == eq.source


def test_reallocate_errors():
    gp, eq = two_agent_equilibrium()
    total = eq.profile.total()[0, 1]
    with pytest.raises(InfeasibleProfileError, match='sum to'):
        reallocate_investments(complete(2), eq, gp, {(0, 1): {0: total / 4}})
    with pytest.raises(InfeasibleProfileError, match='negative'):
        reallocate_investments(complete(2), eq, gp, {(0, 1): {0: -total, 1: 2 * total}})

    net = complete(3)
    gp = symmetric_game(3, rho=3.0)
    sol = symmetric_equilibrium(1.0, gp)
    eq = equilibrium_report(net, symmetric_equilibrium_profile(net, sol), gp)
    with pytest.raises(InfeasibleProfileError, match='not eligible'):
        reallocate_investments(net, eq, gp, {(0, 1): {2: sol.link_investment}})


@pytest.mark.parametrize('mode', [LOCAL, GLOBAL])
def test_induced_equilibrium(mode):
    gp, eq = two_agent_equilibrium(mode)
    induced = induced_equilibrium(complete(2, weight=1.5), complete(2), eq, gp)
    assert induced.is_equilibrium
    assert induced.source == f'induced from {eq.source}'
    check_profile_total(induced, (TWO_AGENT_INVESTMENT + 0.5) * (1 - np.eye(2)))
    # both endpoints are eligible and share the new aggregate equally
    assert induced.profile.per_agent[0, 0, 1] == pytest.approx(induced.profile.per_agent[1, 0, 1])


def test_induced_equilibrium_errors():
    gp, eq = two_agent_equilibrium()
    with pytest.raises(HypothesisError, match='below'):
        induced_equilibrium(complete(2, weight=0.5), complete(2), eq, gp)
    gp = symmetric_game(2, rho=10.0)
    eq = find_equilibrium(complete(2), gp)
    with pytest.raises(HypothesisError, match='not full or interior'):
        induced_equilibrium(complete(2, weight=1.5), complete(2), eq, gp)


def test_search_all_orders():
    net = complete(3)
    gp = symmetric_game(3, rho=3.0)
    reports = search_equilibria(net, gp, max_sweeps=50)
    assert len(reports) == 7
    assert {r.order for r in reports[:-1]} == {
        (0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)
    }
    assert reports[-1].source == 'closed form'
    assert reports[-1].is_equilibrium

    worst = worst_equilibrium(net, gp, reports)
    best = best_equilibrium(net, gp, reports)
    assert worst.welfare <= best.welfare
    assert worst.welfare == pytest.approx(equilibrium_welfare(net, worst.report, gp))
    assert worst.provenance == worst.report.source


def test_search_random_orders():
    net = cycle(5)
    gp = symmetric_game(5, rho=3.0)
    first = search_equilibria(net, gp, starts=3, seed=4, max_sweeps=20)
    second = search_equilibria(net, gp, starts=3, seed=4, max_sweeps=20)
    assert len(first) == 3
    assert [r.order for r in first] == [r.order for r in second]


def test_select_requires_reports():
    with pytest.raises(ValueError, match='no equilibrium'):
        worst_equilibrium(complete(2), symmetric_game(2, rho=2.5), [])


def test_equilibrium_on_chorded_path():
    # the aggregate settles well before the split between agents does
    net, gp = chorded_path_instance()
    report = find_equilibrium(net, gp)
    assert report.converged
    assert report.is_equilibrium
    assert report.kkt_residual <= 1e-6
    ok, residual, _, _ = verify_equilibrium(net, report.profile, gp)
    assert ok
    assert residual == pytest.approx(report.kkt_residual)


def deviations(rng, net, profile, i, count):
    own = profile.per_agent[i]
    cap = np.maximum(net.weights - (profile.total() - own), 0.0)
    for _ in range(count):
        share = np.triu(rng.uniform(0.0, 1.0, own.shape), 1)
        arr = np.array(profile.per_agent)
        arr[i] = (share + share.T) * cap
        yield StrategyProfile(arr)


@pytest.mark.parametrize(
    'gp',
    [
        GameParams(delta=[1.0, 3.0], epi=EpidemicParams(1.3, 1.5, [0.2, 0.4]), rho=1.5),
        GameParams(delta=[2.0, 0.5], epi=EpidemicParams(1.0, 2.0, [0.1, 0.3]), rho=0.8,
                   mode=LOCAL),
        symmetric_game(2, rho=2.5),
    ],
)
def test_no_profitable_unilateral_deviation(gp):
    # with two agents the kernel marginal utility is the exact derivative of the payoff
    net = complete(2, weight=0.9)
    report = find_equilibrium(net, gp)
    assert report.is_equilibrium
    rng = np.random.default_rng(12)
    for i in range(net.n):
        current = payoff(net, report.profile, gp, i)
        for deviation in deviations(rng, net, report.profile, i, 20):
            assert payoff(net, deviation, gp, i) <= current + 1e-6


def test_eligibility_is_monotone_in_marginal_utility():
    net, gp = chorded_path_instance()
    report = find_equilibrium(net, gp)
    mu = marginal_utility_matrix(net, report.profile, gp)
    for (k, l), eligible in report.eligible_sets.items():  # noqa: E741
        for j in eligible:
            for i in range(net.n):
                if mu[i, k, l] >= mu[j, k, l]:
                    assert i in eligible
    # raising an eligible agent's disutility weight keeps it eligible
    link, eligible = next((ln, e) for ln, e in report.eligible_sets.items() if e)
    agent = eligible[0]
    delta = np.array(gp.delta)
    delta[agent] *= 2.0
    _, _, _, sets = verify_equilibrium(net, report.profile, gp.replace(delta=delta))
    assert agent in sets[link]


@pytest.mark.parametrize('mode', [LOCAL, GLOBAL])
def test_regime_flip_through_best_responses(mode):
    # with delta beta t_bar alpha = 1 the endpoints stop investing at rho = chi_tilde(1)
    ceiling = symmetric_equilibrium(1.0, symmetric_game(3, rho=1e6)).chi_tilde
    net = complete(3)

    def regime(rho):
        return find_equilibrium(net, symmetric_game(3, rho=rho, mode=mode)).classification

    assert regime(0.95) == Classification.FULL_INVESTMENT
    assert regime(1.05) != Classification.FULL_INVESTMENT
    assert regime(0.95 * ceiling) != Classification.NO_INVESTMENT
    assert regime(1.05 * ceiling) == Classification.NO_INVESTMENT
