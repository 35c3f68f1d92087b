"""Experiment pipeline: planning modes, Monte Carlo audits, CSV output.

Three planning modes are compared on one instance.  The stochastic mode
plans against mean demand with concentration margins; the two
deterministic baselines plan against the lower / upper support bound of
every demand variable with no margins (renewable stays at its mean).  A
mode's solution is then evaluated two ways: against the true demand means
(common yardstick across modes) and by Monte Carlo over scenarios drawn
from the true distributions (violation rates and realized costs, with the
same scenario draws shared by all modes so cost comparisons are paired).
"""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .chance import compute_margins
from .constraints import (
    CouplingConstraint,
    FeasibilityReport,
    MODES,
    build_coupling,
    feasibility_search,
    local_box,
)
from .game import CostReport, build_cost, expected_cost, monotonicity_constants, step_sizes
from .model import BoundedRV, MicrogridConfig, ScenarioDraw, draw_with_rng
from .solver import Callback, GNEResult, solve_centralized, solve_semidecentralized

__all__ = [
    "ModeResult",
    "ViolationReport",
    "CostHistogram",
    "InfeasibleInstanceError",
    "mode_view",
    "simulate_soc",
    "soc_closed_form",
    "run_mode",
    "montecarlo_validate",
    "montecarlo_costs",
    "realized_costs",
    "write_discharge_profiles",
    "write_grid_exchange",
    "write_violations",
    "write_costs",
    "write_compare_summary",
]

# Scenario batches are generated in fixed-size chunks with per-chunk child
# seeds, so results are identical for any thread count.
CHUNK_SIZE = 8192


class InfeasibleInstanceError(RuntimeError):
    """Raised when the shared constraints admit no strictly feasible point."""

    def __init__(self, mode: str, report: FeasibilityReport):
        super().__init__(
            f"no strictly feasible point found for mode '{mode}' "
            f"(best violation {report.max_violation:.3e} after {report.iterations} iterations)"
        )
        self.mode = mode
        self.report = report


@dataclass(eq=False)
class ModeResult:
    """Solved planning mode with its derived profiles.

    grid_exchange_mean evaluates the aggregate grid draw at the true demand
    means (the common yardstick: sum_j mu_j - sum_j u*_j per slot);
    grid_exchange_planned evaluates it at the demand profile the mode
    planned against (equal to grid_exchange_mean for the stochastic mode).
    soc_mean is the state-of-charge path under mean renewable infeed.
    """

    mode: str
    gne: GNEResult
    grid_exchange_mean: np.ndarray  # (horizon,)
    grid_exchange_planned: np.ndarray  # (horizon,)
    soc_mean: np.ndarray  # (horizon + 1,)
    cost_reports: list[CostReport]  # expected costs under the true distributions
    feasibility: FeasibilityReport


@dataclass(eq=False)
class ViolationReport:
    """Empirical violation frequencies of the probabilistic constraints."""

    soc_rates: np.ndarray  # (horizon,): Pr{x^t outside band}, t = 1..horizon
    soc_se: np.ndarray
    final_rate: float  # Pr{|x^horizon - r_target| > epsilon}
    final_se: float
    grid_rates: np.ndarray  # (horizon,): Pr{g^t outside [0, g_max]}
    grid_se: np.ndarray
    samples: int
    seed: int


@dataclass(eq=False)
class CostHistogram:
    """Realized total group cost per scenario, paired across modes."""

    modes: tuple[str, ...]
    costs: dict[str, np.ndarray]  # mode -> (samples,) realized totals
    means: dict[str, float]
    bin_edges: np.ndarray  # shared Freedman-Diaconis edges over pooled costs
    samples: int
    seed: int


def mode_view(config: MicrogridConfig, mode: str) -> MicrogridConfig:
    """The instance as the given planning mode sees it.

    det_lower / det_upper collapse every demand variable to a point mass at
    its support bound (their planning assumption, used for both constraints
    and costs); the stochastic mode sees the instance unchanged.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode '{mode}', expected one of {MODES}")
    if mode == "stochastic":
        return config
    pick_lower = mode == "det_lower"
    demand = tuple(
        tuple(
            BoundedRV(lower=rv.lower, upper=rv.lower, mean=rv.lower)
            if pick_lower
            else BoundedRV(lower=rv.upper, upper=rv.upper, mean=rv.upper)
            for rv in row
        )
        for row in config.demand
    )
    return dataclasses.replace(config, demand=demand)


def _renewable_of(scenario: ScenarioDraw | np.ndarray | Sequence[float]) -> np.ndarray:
    if isinstance(scenario, ScenarioDraw):
        return np.asarray(scenario.renewable, dtype=float)
    return np.asarray(scenario, dtype=float)


def simulate_soc(
    config: MicrogridConfig, u: np.ndarray, scenario: ScenarioDraw | np.ndarray | Sequence[float]
) -> np.ndarray:
    """State-of-charge path under a realized renewable profile.

    Runs the recursion x^{t+1} = x^t + rho * (r^t - sum_j u_j^t) from x0;
    returns the length-(horizon+1) trajectory.  Out-of-band values are
    returned as-is (violations are measured, not rejected).
    """
    r = _renewable_of(scenario)
    s = np.asarray(u, dtype=float).sum(axis=0)
    rho = config.battery.rho
    x = np.empty(config.horizon + 1)
    x[0] = config.battery.x0
    for t in range(config.horizon):
        x[t + 1] = x[t] + rho * (r[t] - s[t])
    return x


def soc_closed_form(
    config: MicrogridConfig, u: np.ndarray, scenario: ScenarioDraw | np.ndarray | Sequence[float]
) -> np.ndarray:
    """Closed-form state-of-charge path: x0 plus rho times running net inflow."""
    r = _renewable_of(scenario)
    s = np.asarray(u, dtype=float).sum(axis=0)
    x = np.empty(config.horizon + 1)
    x[0] = config.battery.x0
    x[1:] = config.battery.x0 + config.battery.rho * np.cumsum(r - s)
    return x


def run_mode(
    config: MicrogridConfig,
    mode: str,
    *,
    algorithm: str = "semi",
    allow_nonslater: bool = False,
    callback: Callback | None = None,
) -> ModeResult:
    """Solve one planning mode end to end.

    Builds the mode's constraint polyhedron, checks strict feasibility
    (raising InfeasibleInstanceError unless allow_nonslater), synthesizes
    step sizes, and solves with the consistent update.  Non-convergence is
    propagated in the result's gne.converged flag, not as an exception.
    """
    view = mode_view(config, mode)
    cc = build_coupling(view, None, mode)
    box = local_box(view)
    feas = feasibility_search(cc, box, view.n_agents)
    if not feas.strictly_feasible and not allow_nonslater:
        raise InfeasibleInstanceError(mode, feas)
    mc = monotonicity_constants(view)
    params = step_sizes(view, mc, cc)
    gm = build_cost(view)
    solve = solve_centralized if algorithm == "central" else solve_semidecentralized
    gne = solve(view, gm, cc, params, callback=callback)

    u = gne.u_star
    total_u = u.sum(axis=0)
    grid_mean = config.demand_means().sum(axis=0) - total_u
    grid_planned = view.demand_means().sum(axis=0) - total_u
    soc_mean = simulate_soc(config, u, config.renewable_means())
    return ModeResult(
        mode=mode,
        gne=gne,
        grid_exchange_mean=grid_mean,
        grid_exchange_planned=grid_planned,
        soc_mean=soc_mean,
        cost_reports=expected_cost(config, u),
        feasibility=feas,
    )


def _chunk_sizes(samples: int) -> list[int]:
    sizes = [CHUNK_SIZE] * (samples // CHUNK_SIZE)
    if samples % CHUNK_SIZE:
        sizes.append(samples % CHUNK_SIZE)
    return sizes


def _chunked_draws(
    config: MicrogridConfig, samples: int, seed: int
) -> list[tuple[int, np.random.SeedSequence]]:
    sizes = _chunk_sizes(samples)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    return list(zip(sizes, seeds))


def _map_chunks(work, chunks, threads: int) -> list:
    """Evaluate work over chunks, reducing in chunk order regardless of threads."""
    if threads <= 1:
        return [work(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, chunks))


def montecarlo_validate(
    config: MicrogridConfig,
    u: np.ndarray,
    samples: int,
    seed: int,
    threads: int = 1,
) -> ViolationReport:
    """Empirical violation rates of the probabilistic constraints at u.

    Draws `samples` joint scenarios and counts, per slot, how often the
    realized state of charge leaves its band, the terminal state misses its
    window, and the realized grid exchange leaves [0, g_max].  Standard
    errors are binomial.  Output is identical for any thread count.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    u = np.asarray(u, dtype=float)
    s = u.sum(axis=0)
    b = config.battery
    c = config.chance
    rho = b.rho
    tau = config.horizon

    def work(chunk: tuple[int, np.random.SeedSequence]) -> tuple[np.ndarray, int, np.ndarray]:
        size, chunk_seed = chunk
        draw = draw_with_rng(config, size, np.random.default_rng(chunk_seed))
        # SoC path after each slot: x0 + rho * running net inflow. (size, tau)
        x = b.x0 + rho * np.cumsum(draw.renewable - s[None, :], axis=1)
        soc_bad = ((x < b.x_min) | (x > b.x_max)).sum(axis=0)
        final_bad = int(np.sum(np.abs(x[:, -1] - c.r_target) > c.epsilon))
        g = draw.demand.sum(axis=1) - s[None, :]
        grid_bad = ((g < 0.0) | (g > c.g_max)).sum(axis=0)
        return soc_bad.astype(np.int64), final_bad, grid_bad.astype(np.int64)

    soc_counts = np.zeros(tau, dtype=np.int64)
    final_count = 0
    grid_counts = np.zeros(tau, dtype=np.int64)
    for soc_bad, final_bad, grid_bad in _map_chunks(
        work, _chunked_draws(config, samples, seed), threads
    ):
        soc_counts += soc_bad
        final_count += final_bad
        grid_counts += grid_bad

    def rate_se(counts) -> tuple[np.ndarray, np.ndarray]:
        rates = np.asarray(counts, dtype=float) / samples
        return rates, np.sqrt(rates * (1.0 - rates) / samples)

    soc_rates, soc_se = rate_se(soc_counts)
    final_rates, final_se = rate_se(final_count)
    grid_rates, grid_se = rate_se(grid_counts)
    return ViolationReport(
        soc_rates=soc_rates,
        soc_se=soc_se,
        final_rate=float(final_rates),
        final_se=float(final_se),
        grid_rates=grid_rates,
        grid_se=grid_se,
        samples=samples,
        seed=seed,
    )


def realized_costs(
    config: MicrogridConfig,
    u: np.ndarray,
    samples: int,
    seed: int,
    threads: int = 1,
) -> np.ndarray:
    """Realized total group cost at u for `samples` drawn scenarios.

    Per scenario: every agent pays the time-of-use price plus the
    congestion surcharge (proportional to the realized aggregate grid load)
    on its own realized grid draw, plus its battery wear; returned is the
    sum over agents.  Scenario draws depend only on (config, samples,
    seed), so different strategy profiles are evaluated on paired draws.
    """
    u = np.asarray(u, dtype=float)
    s = u.sum(axis=0)
    k = np.array(config.tariff.k_tou, dtype=float)
    k_c = config.tariff.k_c
    wear = float(
        config.tariff.alpha_dch * np.sum(u**2) + config.tariff.beta_dch * np.sum(u)
    )

    def work(chunk: tuple[int, np.random.SeedSequence]) -> np.ndarray:
        size, chunk_seed = chunk
        draw = draw_with_rng(config, size, np.random.default_rng(chunk_seed))
        g = draw.demand.sum(axis=1) - s[None, :]  # aggregate grid load (size, tau)
        return np.sum((k[None, :] + k_c * g) * g, axis=1) + wear

    parts = _map_chunks(work, _chunked_draws(config, samples, seed), threads)
    return np.concatenate(parts)


def montecarlo_costs(
    config: MicrogridConfig,
    mode_results: Iterable[ModeResult],
    samples: int,
    seed: int,
    threads: int = 1,
) -> CostHistogram:
    """Paired realized-cost comparison across solved modes.

    Every mode's strategies are priced on the same scenario draws (derived
    from seed only), so per-scenario differences are meaningful.  Bin edges
    use the Freedman-Diaconis rule on the pooled costs.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    results = list(mode_results)
    costs: dict[str, np.ndarray] = {}
    for result in results:
        costs[result.mode] = realized_costs(config, result.gne.u_star, samples, seed, threads)
    pooled = np.concatenate(list(costs.values())) if costs else np.array([0.0])
    bin_edges = np.histogram_bin_edges(pooled, bins="fd")
    return CostHistogram(
        modes=tuple(r.mode for r in results),
        costs=costs,
        means={mode: float(np.mean(v)) for mode, v in costs.items()},
        bin_edges=bin_edges,
        samples=samples,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# CSV output (deterministic: '.' decimals, '\n' rows, repr round-trip floats)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_rows(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_discharge_profiles(path: str, results: Sequence[ModeResult]) -> None:
    """Per-slot discharge of every agent and the total, one row per (mode, t)."""
    if not results:
        raise ValueError("no results to write")
    n_agents = results[0].gne.u_star.shape[0]
    header = ["t", "mode"] + [f"u_agent_{i}" for i in range(n_agents)] + ["u_total"]
    rows = []
    for result in results:
        u = result.gne.u_star
        for t in range(u.shape[1]):
            rows.append([t, result.mode, *u[:, t], float(u[:, t].sum())])
    _write_rows(path, header, rows)


def write_grid_exchange(path: str, results: Sequence[ModeResult]) -> None:
    """Aggregate grid exchange per slot: at true mean demand and as planned."""
    header = ["t", "mode", "g_mean", "g_planned"]
    rows = []
    for result in results:
        for t in range(len(result.grid_exchange_mean)):
            rows.append(
                [t, result.mode, result.grid_exchange_mean[t], result.grid_exchange_planned[t]]
            )
    _write_rows(path, header, rows)


def write_violations(path: str, report: ViolationReport) -> None:
    """Empirical violation rates: soc rows use t = 1..horizon (state after
    slot t-1), the final row t = horizon, grid rows t = 0..horizon-1."""
    rows = []
    for t in range(len(report.soc_rates)):
        rows.append([t + 1, "soc", report.soc_rates[t], report.soc_se[t]])
    rows.append([len(report.soc_rates), "final", report.final_rate, report.final_se])
    for t in range(len(report.grid_rates)):
        rows.append([t, "grid", report.grid_rates[t], report.grid_se[t]])
    _write_rows(path, ["t", "constraint", "rate", "se"], rows)


def write_costs(path: str, hist: CostHistogram) -> None:
    """Realized cost of every (mode, scenario) pair."""
    rows = []
    for mode in hist.modes:
        for index, value in enumerate(hist.costs[mode]):
            rows.append([mode, index, value])
    _write_rows(path, ["mode", "sample", "realized_total_cost"], rows)


def write_compare_summary(path: str, results: Sequence[ModeResult], hist: CostHistogram) -> None:
    """One row per mode: Monte Carlo mean cost, peak exchanges, solve stats."""
    header = [
        "mode",
        "mean_cost",
        "peak_grid_exchange",
        "peak_grid_exchange_planned",
        "iterations",
        "converged",
        "expected_cost_total",
    ]
    rows = []
    for result in results:
        rows.append(
            [
                result.mode,
                hist.means[result.mode],
                float(np.max(result.grid_exchange_mean)),
                float(np.max(result.grid_exchange_planned)),
                result.gne.iterations,
                result.gne.converged,
                float(sum(r.total_expected for r in result.cost_reports)),
            ]
        )
    _write_rows(path, header, rows)
