"""Instance builders shared by the test suite.

make_config constructs small valid instances directly from plain numbers;
random_config draws fuzzed instances that are valid and strictly feasible
by construction (the all-zero profile has slack in every coupling row).
"""

from __future__ import annotations

import numpy as np

from gridgame import (
    BatteryParams,
    BoundedRV,
    ChanceSpec,
    DependencyGraph,
    ExperimentSettings,
    MicrogridConfig,
    SolverSettings,
    TariffCostParams,
    validate,
)


def _profile(means, dev) -> tuple[BoundedRV, ...]:
    out = []
    for m in means:
        half = abs(float(m)) * float(dev)
        out.append(BoundedRV(lower=float(m) - half, upper=float(m) + half, mean=float(m)))
    return tuple(out)


def make_config(
    n_agents: int = 2,
    horizon: int = 3,
    *,
    x0: float = 0.5,
    x_min: float = 0.1,
    x_max: float = 0.9,
    capacity: float = 100.0,
    dt: float = 1.0,
    eta: float | None = None,
    u_max: float | None = None,
    renewable_mean=None,
    renewable_dev: float = 0.25,
    demand_mean=None,
    demand_dev: float = 0.25,
    delta_x: float = 0.8,
    delta_x_tilde: float = 0.05,
    delta_final: float = 0.9,
    delta_final_tilde: float = 0.05,
    delta_g: float = 0.8,
    delta_g_tilde: float = 0.05,
    r_target: float | None = None,
    epsilon: float | None = None,
    g_max: float | None = None,
    nu_r=None,
    nu_d=None,
    renewable_edges=(),
    demand_edges=(),
    k_tou=None,
    k_c: float = 0.05,
    alpha_dch: float = 0.5,
    beta_dch: float = 0.2,
    variant: str = "consistent",
    zeta: float | None = None,
    l_f: float | None = None,
    alpha=None,
    gamma: float | None = None,
    tol: float = 1e-10,
    max_iters: int = 50_000,
    seed: int = 0,
    check: bool = True,
) -> MicrogridConfig:
    """Build a complete instance; raises if the result fails validation."""
    if renewable_mean is None:
        renewable_mean = [5.0 + 2.0 * (t % 3) for t in range(horizon)]
    if demand_mean is None:
        demand_mean = [[10.0 + i + 0.5 * t for t in range(horizon)] for i in range(n_agents)]
    elif not isinstance(demand_mean[0], (list, tuple, np.ndarray)):
        demand_mean = [list(demand_mean) for _ in range(n_agents)]
    if k_tou is None:
        k_tou = [3.0 + 0.1 * t for t in range(horizon)]
    if r_target is None:
        r_target = x0
    if epsilon is None:
        epsilon = 0.5 * min(r_target - x_min, x_max - r_target)
    if g_max is None:
        g_max = 2.0 * float(np.sum([row for row in demand_mean], axis=0).max()) + 20.0

    config = MicrogridConfig(
        n_agents=n_agents,
        horizon=horizon,
        battery=BatteryParams(
            x0=x0, x_min=x_min, x_max=x_max, capacity=capacity, dt=dt, eta=eta, u_max=u_max
        ),
        chance=ChanceSpec(
            delta_x=(float(delta_x),) * horizon,
            delta_x_tilde=(float(delta_x_tilde),) * horizon,
            delta_final=float(delta_final),
            delta_final_tilde=float(delta_final_tilde),
            delta_g=(float(delta_g),) * horizon,
            delta_g_tilde=(float(delta_g_tilde),) * horizon,
            r_target=float(r_target),
            epsilon=float(epsilon),
            g_max=float(g_max),
            nu_r=None if nu_r is None else tuple(float(v) for v in np.broadcast_to(nu_r, horizon)),
            nu_d=None if nu_d is None else tuple(float(v) for v in np.broadcast_to(nu_d, horizon)),
        ),
        tariff=TariffCostParams(
            k_tou=tuple(float(k) for k in k_tou),
            k_c=float(k_c),
            alpha_dch=float(alpha_dch),
            beta_dch=float(beta_dch),
        ),
        renewable=_profile(renewable_mean, renewable_dev),
        demand=tuple(_profile(row, demand_dev) for row in demand_mean),
        renewable_dependency=DependencyGraph.from_edges(horizon, renewable_edges),
        demand_dependency=DependencyGraph.from_edges(n_agents, demand_edges),
        solver=SolverSettings(
            variant=variant,
            zeta=zeta,
            l_f=l_f,
            alpha=None if alpha is None else tuple(float(a) for a in alpha),
            gamma=gamma,
            tol_u=tol,
            tol_lambda=tol,
            max_iters=max_iters,
        ),
        experiment=ExperimentSettings(seed=seed),
    )
    if check:
        report = validate(config)
        assert report.valid, f"test instance invalid: {report.violations}"
    return config


def random_config(rng: np.random.Generator, n_agents: int | None = None, horizon: int | None = None) -> MicrogridConfig:
    """Fuzzed valid instance; the zero profile is strictly feasible.

    The grid ceiling sits far above aggregate demand, the terminal target
    equals the initial state with a wide window, and storage is large enough
    that no reachable schedule moves the state of charge more than a small
    fraction of its band.
    """
    n = int(n_agents if n_agents is not None else rng.integers(1, 5))
    tau = int(horizon if horizon is not None else rng.integers(1, 7))
    demand_mean = rng.uniform(5.0, 20.0, size=(n, tau))
    renewable_mean = rng.uniform(0.0, 15.0, size=tau)
    u_cap = float(rng.uniform(2.0, 8.0))
    capacity = 20.0 * (float(renewable_mean.sum()) + n * u_cap * tau + 1.0)
    return make_config(
        n,
        tau,
        capacity=capacity,
        u_max=u_cap,
        renewable_mean=renewable_mean,
        renewable_dev=float(rng.uniform(0.05, 0.3)),
        demand_mean=demand_mean.tolist(),
        demand_dev=float(rng.uniform(0.05, 0.3)),
        g_max=2.0 * float(demand_mean.sum(axis=0).max()) + 20.0,
        k_tou=rng.uniform(1.0, 6.0, size=tau),
        k_c=float(rng.uniform(0.01, 0.1)),
        alpha_dch=float(rng.uniform(0.3, 2.0)),
        beta_dch=float(rng.uniform(0.1, 1.0)),
        tol=1e-10,
        max_iters=30_000,
    )
