"""The experiment commands run by the command line.

Each command reads what it needs from the ``options`` section of an experiment:

============  ===========================================
command       options
============  ===========================================
simulate      ``grid``, ``samples``, ``seed``
equilibrium   ``max_sweeps``
optimum       (none)
poa           ``multistart``, ``seed``, ``max_sweeps``
pok           ``multistart``, ``seed``, ``max_sweeps``
policy        ``kappa_grid``
============  ===========================================
"""

from __future__ import annotations

import dataclasses
import logging

import numpy as np

from .abc import Command
from .closed_forms import (
    SymmetricSolution,
    complete_weight,
    symmetric_equilibrium,
    symmetric_optimum,
)
from .config import ExperimentConfig
from .dynamics import (
    BOUNDS_TOL,
    DEFAULT_GRID,
    closed_form_upper_bound,
    integrate_mean_field,
    linearized_solution,
    spectral_approximation,
)
from .equilibrium import (
    DEFAULT_STARTS,
    MAX_SWEEPS,
    EquilibriumReport,
    find_equilibrium,
    search_equilibria,
)
from .errors import ConfigError, ConvergenceError, HypothesisError, NetworkValidationError
from .game import GameParams, payoffs, social_welfare
from .kkt import LinkCase
from .markov import MAX_KOLMOGOROV_NODES, simulate_exact_ctmc, solve_exact_kolmogorov
from .metrics import WelfareMetrics, price_of_anarchy, price_of_autarky, symmetric_poa
from .network import GLOBAL, LOCAL, AggregateInvestment, Network, is_aperiodic, is_irreducible
from .optimum import social_optimum
from .policy import optimal_kappa, policy_sweep
from .report import CommandResult, Table

logger = logging.getLogger("epigame")


def _check_option(name: str, value, minimum: int):
    if not value >= minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")


def _require_seed(seed: int | None, reason: str) -> int:
    if seed is None:
        raise ConfigError("options.seed", f"required {reason}")
    return seed


def _symmetric_weight(net: Network, gp: GameParams) -> float | None:
    """Link weight when the game is symmetric on an (a)-complete network, else None."""
    if not gp.is_symmetric:
        return None
    try:
        return complete_weight(net)
    except NetworkValidationError:
        return None


def _solution_summary(sol: SymmetricSolution) -> dict:
    return {
        "regime": sol.regime,
        "h": sol.h,
        "chi": sol.chi,
        "chi_tilde": sol.chi_tilde,
        "link_investment": sol.link_investment,
    }


def _measured_h(net: Network, total: np.ndarray, sol: SymmetricSolution) -> float:
    ks, ls = np.triu_indices(net.n, k=1)
    return float(np.mean(sol.scale * (net.weights[ks, ls] - total[ks, ls])))


def _cases(cases: dict[tuple[int, int], LinkCase]) -> dict:
    return {link: case for link, case in sorted(cases.items())}


def _aggregate_table(net: Network, total: np.ndarray, cases) -> Table:
    rows = [[k, l, float(total[k, l]), cases[(k, l)]] for k, l in net.links()]  # noqa: E741
    return Table(["k", "l", "investment", "case"], rows)


def _profile_table(net: Network, report: EquilibriumReport) -> Table:
    per_agent = report.profile.per_agent
    rows = [
        [i, k, l, float(per_agent[i, k, l])]
        for i in range(net.n)
        for k, l in net.links()  # noqa: E741
    ]
    return Table(["agent", "k", "l", "investment"], rows)


def _equilibrium_summary(report: EquilibriumReport) -> dict:
    return {
        "mode": report.mode,
        "classification": report.classification,
        "kkt_residual": report.kkt_residual,
        "is_equilibrium": report.is_equilibrium,
        "converged": report.converged,
        "iterations": report.iterations,
        "oscillation": report.oscillation,
        "order": list(report.order) if report.order is not None else None,
        "per_link_cases": _cases(report.per_link_cases),
        "eligible_sets": {link: list(s) for link, s in sorted(report.eligible_sets.items())},
    }


def _metrics_summary(metrics: WelfareMetrics) -> dict:
    return dataclasses.asdict(metrics)


class Simulate(Command):
    """Contagion probabilities: the mean-field solution and its bounds, Monte Carlo
    estimates of the exact process and, on small networks, the exact marginals.

    Parameters
    ----------
    grid : int
        Number of time points on ``[0, t_bar]``.
    samples : int
        Monte Carlo runs; 0 skips the simulation.
    seed : int, optional
        Base seed of the Monte Carlo streams, required when `samples` is positive.
    """

    command_id = "simulate"

    def __init__(self, grid: int = DEFAULT_GRID, samples: int = 100_000, seed: int | None = None):
        _check_option("grid", grid, 2)
        _check_option("samples", samples, 0)
        self.grid = grid
        self.samples = samples
        self.seed = seed

    def run(self, experiment: ExperimentConfig) -> CommandResult:
        net = experiment.network
        epi = experiment.game.epi
        mean_field = integrate_mean_field(net, epi, self.grid)
        upper = closed_form_upper_bound(net, epi, self.grid)
        linear = linearized_solution(net, epi, self.grid)
        violation = max(
            float(np.max(mean_field.values - upper.values)),
            float(np.max(upper.values - linear.values)),
            0.0,
        )
        summary = {
            "t_bar": epi.t_bar,
            "grid": self.grid,
            "mean_field": mean_field.final,
            "upper_bound": upper.final,
            "linearized": linear.final,
            "sandwich_violation": violation,
            "sandwich_ok": violation <= BOUNDS_TOL,
        }
        if net.n <= MAX_KOLMOGOROV_NODES:
            summary["exact"] = solve_exact_kolmogorov(net, epi)
        if self.samples > 0:
            seed = _require_seed(self.seed, "when samples > 0")
            mc = simulate_exact_ctmc(net, epi, self.samples, seed)
            summary["monte_carlo"] = {
                "estimate": mc.estimate,
                "stderr": mc.stderr,
                "samples": mc.samples,
                "seed": mc.seed,
            }
        if epi.is_homogeneous and is_irreducible(net) and is_aperiodic(net):
            try:
                spectral = spectral_approximation(net, epi)
                summary["spectral"] = {
                    "mu1": spectral.mu1,
                    "mu2": spectral.mu2,
                    "gap": spectral.gap,
                }
            except ConvergenceError as e:
                logger.warning("spectral approximation skipped: %s", e)
        n = net.n
        header = [
            "t",
            *(f"mean_field_{i + 1}" for i in range(n)),
            *(f"upper_bound_{i + 1}" for i in range(n)),
            *(f"linearized_{i + 1}" for i in range(n)),
        ]
        rows = [
            [float(t), *map(float, a), *map(float, b), *map(float, c)]
            for t, a, b, c in zip(
                mean_field.times, mean_field.values, upper.values, linear.values, strict=True
            )
        ]
        return CommandResult(self.command_id, summary, {"sandwich.csv": Table(header, rows)})


class Equilibrium(Command):
    """A Nash equilibrium by cyclic best responses from zero investment.

    On symmetric games over (a)-complete networks the closed-form solution is reported
    alongside, with the uniform transformed residual weight ``h`` measured on the
    computed equilibrium.
    """

    command_id = "equilibrium"

    def __init__(self, max_sweeps: int = MAX_SWEEPS):
        _check_option("max_sweeps", max_sweeps, 1)
        self.max_sweeps = max_sweeps

    def run(self, experiment: ExperimentConfig) -> CommandResult:
        net, gp = experiment.network, experiment.game
        report = find_equilibrium(net, gp, max_sweeps=self.max_sweeps)
        total = report.profile.total()
        summary = _equilibrium_summary(report)
        summary["welfare"] = social_welfare(net, report.profile, gp)
        summary["payoffs"] = payoffs(net, report.profile, gp)
        a = _symmetric_weight(net, gp)
        if a is not None:
            sol = symmetric_equilibrium(a, gp)
            summary["closed_form"] = _solution_summary(sol)
            summary["h"] = _measured_h(net, total, sol)
        tables = {
            "profile.csv": _profile_table(net, report),
            "aggregate.csv": _aggregate_table(net, total, report.per_link_cases),
        }
        return CommandResult(self.command_id, summary, tables, converged=report.converged)


class Optimum(Command):
    """The social optimum by projected ascent on the aggregate investment."""

    command_id = "optimum"

    def run(self, experiment: ExperimentConfig) -> CommandResult:
        net, gp = experiment.network, experiment.game
        opt = social_optimum(net, gp)
        total = opt.aggregate.total
        summary = {
            "classification": opt.classification,
            "kkt_residual": opt.kkt_residual,
            "is_optimum": opt.is_optimum,
            "converged": opt.converged,
            "iterations": opt.iterations,
            "per_link_cases": _cases(opt.per_link_cases),
            "welfare": social_welfare(net, AggregateInvestment(total), gp),
        }
        a = _symmetric_weight(net, gp)
        if a is not None:
            sol = symmetric_optimum(a, gp)
            summary["closed_form"] = _solution_summary(sol)
            summary["h"] = _measured_h(net, total, sol)
        tables = {"aggregate.csv": _aggregate_table(net, total, opt.per_link_cases)}
        return CommandResult(self.command_id, summary, tables, converged=opt.converged)


class _MultiStart(Command):
    def __init__(
        self,
        multistart: int = DEFAULT_STARTS,
        seed: int | None = None,
        max_sweeps: int = MAX_SWEEPS,
    ):
        _check_option("multistart", multistart, 1)
        _check_option("max_sweeps", max_sweeps, 1)
        self.multistart = multistart
        self.seed = seed
        self.max_sweeps = max_sweeps

    def _search(self, net: Network, gp: GameParams) -> list[EquilibriumReport]:
        # small games try every agent order, larger ones draw orders from the seed
        seed = self.seed if net.n <= 4 else _require_seed(self.seed, "for more than 4 agents")
        return search_equilibria(
            net, gp, starts=self.multistart, seed=seed, max_sweeps=self.max_sweeps
        )


class PoA(_MultiStart):
    """Price of anarchy of the configured game mode, with its bounds when they apply.

    The worst equilibrium is the worst among the multi-start candidates.
    """

    command_id = "poa"

    def run(self, experiment: ExperimentConfig) -> CommandResult:
        net, gp = experiment.network, experiment.game
        reports = self._search(net, gp)
        opt = social_optimum(net, gp)
        metrics = price_of_anarchy(net, gp, reports=reports, optimum=opt)
        summary = _metrics_summary(metrics)
        summary["mode"] = gp.mode
        summary["candidates"] = len(reports)
        summary["verified_candidates"] = sum(r.converged for r in reports)
        if _symmetric_weight(net, gp) is not None and not metrics.degenerate:
            try:
                formula, upper = symmetric_poa(net, gp)
                summary["symmetric"] = {"formula": formula, "upper": upper}
            except HypothesisError as e:
                summary["hypotheses"]["symmetric_poa"] = str(e)
        converged = any(r.converged for r in reports) and opt.converged
        return CommandResult(self.command_id, summary, converged=converged)


class PoK(_MultiStart):
    """Price of autarky: the worst local equilibrium against the best global one."""

    command_id = "pok"

    def run(self, experiment: ExperimentConfig) -> CommandResult:
        net, gp = experiment.network, experiment.game
        local_reports = self._search(net, gp.replace(mode=LOCAL))
        global_reports = self._search(net, gp.replace(mode=GLOBAL))
        metrics = price_of_autarky(
            net, gp, local_reports=local_reports, global_reports=global_reports
        )
        summary = _metrics_summary(metrics)
        summary["candidates"] = {"local": len(local_reports), "global": len(global_reports)}
        converged = any(r.converged for r in local_reports) and any(
            r.converged for r in global_reports
        )
        return CommandResult(self.command_id, summary, converged=converged)


class Policy(Command):
    """Best uniform distancing cap and the welfare curve over the caps."""

    command_id = "policy"

    def __init__(self, kappa_grid: int = 64):
        _check_option("kappa_grid", kappa_grid, 2)
        self.kappa_grid = kappa_grid

    def run(self, experiment: ExperimentConfig) -> CommandResult:
        net, gp = experiment.network, experiment.game
        search = optimal_kappa(net, gp, points=self.kappa_grid)
        sweep = policy_sweep(net, gp, points=self.kappa_grid)
        summary = {
            "kappa": search.kappa,
            "kappa_max": float(net.weights.sum(axis=1).min()),
            "welfare": search.welfare,
            "optimum_welfare": search.optimum_welfare,
            "epsilon_gap": search.epsilon_gap,
        }
        table = Table(["kappa", "welfare", "admissible"], [list(row) for row in sweep])
        return CommandResult(self.command_id, summary, {"policy.csv": table})
