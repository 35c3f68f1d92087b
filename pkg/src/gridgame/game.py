"""Quadratic game structure and certified step sizes.

Each agent minimizes an expected bill that is quadratic in its own
discharge schedule and linear in the aggregate schedule, so the stacked
first-order conditions form an affine map F(u) = Gamma u + Lambda with

    Gamma = (2*alpha_dch + k_c) I  +  k_c (ones(N, N) kron I_tau).

Gamma is symmetric with eigenvalues 2*alpha_dch + k_c (the strong
monotonicity modulus, multiplicity (N-1)*tau) and
2*alpha_dch + (N+1)*k_c (the Lipschitz constant, multiplicity tau), which
is everything the solver needs: F is evaluated matrix-free and all step
sizes come from these two numbers plus the coupling matrix norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import CouplingConstraint
from .model import MicrogridConfig

__all__ = [
    "GameMatrices",
    "MonotonicityConstants",
    "SolverParams",
    "CostReport",
    "build_cost",
    "pseudo_gradient",
    "gamma_eigenvalues",
    "monotonicity_constants",
    "step_sizes",
    "expected_cost",
    "group_expected_cost",
]


@dataclass(eq=False)
class GameMatrices:
    """Quadratic cost structure; the two matrices are scalar multiples of I."""

    n_agents: int
    horizon: int
    g_scalar: float  # own-quadratic coefficient (battery wear)
    h_scalar: float  # aggregate-interaction coefficient, n_agents * k_c
    k_c: float  # congestion surcharge per unit of aggregate load
    T: np.ndarray  # (n_agents, horizon): per-agent linear terms
    Lambda: np.ndarray  # (n_agents * horizon,): stacked rows of T

    @property
    def grad_self(self) -> float:
        """Coefficient of the agent's own schedule in the gradient."""
        return 2.0 * self.g_scalar + self.k_c


@dataclass(frozen=True)
class MonotonicityConstants:
    """Certified operator constants of the pseudo-gradient."""

    zeta: float  # strong-monotonicity modulus used downstream
    l_f: float  # certified Lipschitz constant used downstream
    eig_min: float  # smallest eigenvalue of the quadratic kernel
    eig_max: float  # largest eigenvalue of the quadratic kernel


@dataclass(eq=False)
class SolverParams:
    """Validated step sizes and stopping rules for the equilibrium solver."""

    alpha: np.ndarray  # per-agent primal steps, each in (0, 2*zeta/l_f^2)
    gamma: float  # coordinator dual step, in (0, gamma_max)
    gamma_max: float  # admissibility cap for gamma
    eps_u: float  # primal stopping tolerance (max-norm iterate movement)
    eps_lambda: float  # dual stopping tolerance
    max_iters: int
    variant: str  # "consistent" or "literal" agent update


@dataclass(frozen=True)
class CostReport:
    """Expected cost of one agent, split into decision and background parts."""

    agent: int
    controllable_cost: float  # terms depending on the agent's own schedule
    constant_c: float  # expectation of everything outside the agent's control
    total_expected: float


def build_cost(config: MicrogridConfig) -> GameMatrices:
    """Assemble the quadratic cost structure from the instance data.

    Row i of T collects the linear price signal seen by agent i:
    -(time-of-use price) - k_c * (own mean demand) - k_c * (aggregate mean
    demand) + (linear wear cost).
    """
    k = np.array(config.tariff.k_tou, dtype=float)
    k_c = config.tariff.k_c
    mu = config.demand_means()
    mu_total = mu.sum(axis=0)
    t_rows = -k[None, :] - k_c * mu - k_c * mu_total[None, :] + config.tariff.beta_dch
    return GameMatrices(
        n_agents=config.n_agents,
        horizon=config.horizon,
        g_scalar=config.tariff.alpha_dch,
        h_scalar=config.n_agents * k_c,
        k_c=k_c,
        T=t_rows,
        Lambda=t_rows.reshape(-1).copy(),
    )


def pseudo_gradient(gm: GameMatrices, u: np.ndarray) -> np.ndarray:
    """Stacked partial gradients, matrix-free.

    Row i is (2*alpha_dch + k_c) * u_i + k_c * sum_j u_j + T_i; equals the
    dense product Gamma u + Lambda without materializing Gamma.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (gm.n_agents, gm.horizon):
        raise ValueError(f"expected shape {(gm.n_agents, gm.horizon)}, got {u.shape}")
    aggregate = u.sum(axis=0)
    return gm.grad_self * u + gm.k_c * aggregate[None, :] + gm.T


def gamma_eigenvalues(config: MicrogridConfig) -> tuple[float, float]:
    """Closed-form spectrum bounds of the quadratic kernel.

    Returns (2*alpha_dch + k_c, 2*alpha_dch + (N+1)*k_c); the kernel has no
    other eigenvalues, with multiplicities (N-1)*tau and tau.
    """
    two_a = 2.0 * config.tariff.alpha_dch
    k_c = config.tariff.k_c
    return two_a + k_c, two_a + (config.n_agents + 1) * k_c


def monotonicity_constants(config: MicrogridConfig, zeta_fraction: float = 0.99) -> MonotonicityConstants:
    """Certified strong-monotonicity and Lipschitz constants.

    zeta comes from the config override when present (must lie in
    (0, eig_min]), else zeta_fraction * eig_min.  l_f is always the
    certified bound (1 + 1e-6) * eig_max; a smaller configured value is not
    a valid Lipschitz constant and is ignored here (callers may warn).
    """
    if not 0.0 < zeta_fraction <= 1.0:
        raise ValueError("zeta_fraction must lie in (0, 1]")
    eig_min, eig_max = gamma_eigenvalues(config)
    zeta = config.solver.zeta
    if zeta is None:
        zeta = zeta_fraction * eig_min
    elif not 0.0 < zeta <= eig_min:
        raise ValueError(f"configured zeta {zeta} outside (0, {eig_min}]")
    l_f = (1.0 + 1e-6) * eig_max
    return MonotonicityConstants(zeta=zeta, l_f=l_f, eig_min=eig_min, eig_max=eig_max)


def _top_singular_value_sq(a: np.ndarray) -> float:
    """Largest squared singular value of a, via the symmetric eigenproblem.

    a^T a is only horizon x horizon, so the exact decomposition is cheap;
    an iterative estimate could undershoot when the top singular values
    cluster, which would overstate the admissible dual step.
    """
    return max(float(np.linalg.eigvalsh(a.T @ a)[-1]), 0.0)


def _preconditioner_min_eig(alpha: np.ndarray, gamma: float, a_matrix: np.ndarray) -> float:
    """Smallest eigenvalue certificate for the preconditioning matrix.

    The block matrix [[diag(1/alpha_i) x I, -A_stack^T], [-A_stack, (1/gamma) I]]
    is positive definite iff its Schur complement
    (1/gamma) I - (sum_i alpha_i) A A^T is, because the primal block is
    diagonal and the coupling repeats A for every agent.  Returns the
    smallest Schur-complement eigenvalue (positive iff PD).
    """
    schur = np.eye(a_matrix.shape[0]) / gamma - float(np.sum(alpha)) * (a_matrix @ a_matrix.T)
    return float(np.linalg.eigvalsh(schur)[0])


def step_sizes(
    config: MicrogridConfig,
    mc: MonotonicityConstants,
    cc: CouplingConstraint,
    alpha_fraction: float = 0.5,
    gamma_fraction: float = 0.5,
) -> SolverParams:
    """Synthesize provably convergent step sizes.

    Per-agent steps alpha_i must lie in the open interval
    (0, 2*zeta/l_f^2); config overrides are validated against it, otherwise
    all agents take alpha_fraction of the cap.  The dual step cap is

        gamma_max = (1 / (N * sigma_max(A)^2)) * (1/alpha_max - l_f^2/(2*zeta))

    with sigma_max(A) from power iteration (the stacked coupling block has
    norm sqrt(N) * sigma_max(A)).  The preconditioner positive-definiteness
    certificate is checked before returning.
    """
    if not 0.0 < alpha_fraction < 1.0 or not 0.0 < gamma_fraction < 1.0:
        raise ValueError("step-size fractions must lie in (0, 1)")
    n = config.n_agents
    alpha_cap = 2.0 * mc.zeta / (mc.l_f**2)
    if config.solver.alpha is not None:
        alpha = np.array(config.solver.alpha, dtype=float)
        if alpha.shape != (n,):
            raise ValueError(f"solver.alpha must have length {n}")
        if np.any(alpha <= 0.0) or np.any(alpha >= alpha_cap):
            raise ValueError(f"solver.alpha entries must lie in (0, {alpha_cap})")
    else:
        alpha = np.full(n, alpha_fraction * alpha_cap)

    sigma_sq = _top_singular_value_sq(cc.a_matrix)
    gamma_max = (1.0 / (n * sigma_sq)) * (1.0 / float(alpha.max()) - mc.l_f**2 / (2.0 * mc.zeta))
    if gamma_max <= 0.0:
        raise ValueError(f"gamma_max = {gamma_max} <= 0; per-agent steps too large")
    if config.solver.gamma is not None:
        gamma = float(config.solver.gamma)
        if not 0.0 < gamma < gamma_max:
            raise ValueError(f"solver.gamma must lie in (0, {gamma_max})")
    else:
        gamma = gamma_fraction * gamma_max

    min_eig = _preconditioner_min_eig(alpha, gamma, cc.a_matrix)
    if min_eig <= 0.0:
        raise ValueError(f"preconditioner not positive definite (min eig {min_eig})")

    return SolverParams(
        alpha=alpha,
        gamma=gamma,
        gamma_max=gamma_max,
        eps_u=config.solver.tol_u,
        eps_lambda=config.solver.tol_lambda,
        max_iters=config.solver.max_iters,
        variant=config.solver.variant,
    )


def expected_cost(config: MicrogridConfig, u: np.ndarray) -> list[CostReport]:
    """Per-agent expected bill at the profile u.

    Agent i pays the energy price (time-of-use plus congestion surcharge on
    the aggregate grid load) for its own grid draw d_i - u_i, plus its own
    battery wear.  Demands are independent across agents with uniform
    marginals, so E[d_i d_j] = mu_i mu_j for i != j and
    E[d_i^2] = mu_i^2 + width_i^2 / 12.
    """
    u = np.asarray(u, dtype=float)
    k = np.array(config.tariff.k_tou, dtype=float)
    k_c = config.tariff.k_c
    a_dch = config.tariff.alpha_dch
    b_dch = config.tariff.beta_dch
    mu = config.demand_means()
    var = config.demand_widths() ** 2 / 12.0
    mu_total = mu.sum(axis=0)
    s = u.sum(axis=0)

    gm = build_cost(config)
    reports = []
    for i in range(config.n_agents):
        controllable = float(
            np.sum(a_dch * u[i] ** 2 + gm.T[i] * u[i] + k_c * s * u[i])
        )
        constant = float(
            np.sum(
                k * mu[i]
                + k_c * (mu[i] * mu_total + var[i])
                - k_c * mu[i] * (s - u[i])
            )
        )
        reports.append(
            CostReport(
                agent=i,
                controllable_cost=controllable,
                constant_c=constant,
                total_expected=controllable + constant,
            )
        )
    return reports


def group_expected_cost(config: MicrogridConfig, u: np.ndarray) -> float:
    """Sum of all agents' expected bills (closed form, cheap to evaluate)."""
    u = np.asarray(u, dtype=float)
    k = np.array(config.tariff.k_tou, dtype=float)
    k_c = config.tariff.k_c
    mu_total = config.demand_means().sum(axis=0)
    var_total = (config.demand_widths() ** 2 / 12.0).sum(axis=0)
    s = u.sum(axis=0)
    net = mu_total - s
    wear = config.tariff.alpha_dch * np.sum(u**2) + config.tariff.beta_dch * np.sum(u)
    return float(np.sum(k * net + k_c * (var_total + net**2)) + wear)
