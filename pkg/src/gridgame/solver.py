"""Projected forward-backward iterations for the discharge game.

Two algorithms compute the same equilibrium: a semi-decentralized loop in
which every agent takes a projected gradient step on its own cost while a
coordinator updates one multiplier vector for the shared constraints, and
a centralized loop that applies the identical operator to the stacked
strategy vector.  Both are preconditioned forward-backward splittings of
the equilibrium KKT system; with valid step sizes the iteration is a
Banach-Picard contraction, so the equilibrium is unique and reached from
any start.

The semi-decentralized agent step supports two variants: "consistent"
(default) includes the congestion price the aggregate schedule exerts on
the agent's margin, making the map identical to the centralized one;
"literal" omits that cross-term, reproducing a simplified broadcast form
that is kept for comparison experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constraints import CouplingConstraint, aggregate_violation, local_box
from .game import GameMatrices, SolverParams, _preconditioner_min_eig
from .model import MicrogridConfig

__all__ = [
    "IterateState",
    "GNEResult",
    "solve_semidecentralized",
    "solve_centralized",
    "fixed_point_residual",
    "check_preconditioner",
]


@dataclass(eq=False)
class IterateState:
    """Snapshot of one iteration, handed to progress callbacks."""

    u: np.ndarray  # (n_agents, horizon) strategies after the step
    lam: np.ndarray  # (4*horizon + 2,) multipliers after the step
    k: int  # iteration counter, starting at 1
    prev_u: np.ndarray
    prev_lam: np.ndarray


@dataclass(eq=False)
class GNEResult:
    """Converged (or best-effort) equilibrium with diagnostics.

    converged is True only when the stopping tolerances were met within the
    iteration budget AND the aggregate constraint residual at u_star is at
    most 1e-6; a tolerance-stop that leaves visible infeasibility is
    reported as non-converged.
    """

    u_star: np.ndarray  # (n_agents, horizon)
    lam_star: np.ndarray  # (4*horizon + 2,)
    iterations: int
    residual_u: np.ndarray  # per-iteration max-norm primal movement
    residual_lam: np.ndarray  # per-iteration max-norm dual movement
    converged: bool
    fixed_point_residual: float
    feasibility_max: float  # max entry of the aggregate violation at u_star


FEASIBILITY_TOL = 1e-6

Callback = Callable[[IterateState], None]


def _prepare_start(
    config: MicrogridConfig,
    cc: CouplingConstraint,
    u0: np.ndarray | None,
    lam0: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    box = local_box(config)
    lower = box.lower_array()
    upper = box.upper_array()
    if u0 is None:
        u = np.tile(box.midpoint(), (config.n_agents, 1))
    else:
        u = np.clip(np.asarray(u0, dtype=float).copy(), lower, upper)
        if u.shape != (config.n_agents, config.horizon):
            raise ValueError(f"u0 must have shape {(config.n_agents, config.horizon)}")
    if lam0 is None:
        lam = np.zeros(cc.n_rows)
    else:
        lam = np.maximum(np.asarray(lam0, dtype=float).copy(), 0.0)
        if lam.shape != (cc.n_rows,):
            raise ValueError(f"lam0 must have shape {(cc.n_rows,)}")
    return u, lam, lower, upper


def _iterate(
    config: MicrogridConfig,
    gm: GameMatrices,
    cc: CouplingConstraint,
    params: SolverParams,
    u0: np.ndarray | None,
    lam0: np.ndarray | None,
    callback: Callback | None,
    literal: bool,
) -> GNEResult:
    """Shared iteration engine; both public solvers delegate here.

    The primal step for every agent is
        u_i <- proj_box[ u_i - alpha_i (grad_self u_i + k_c S + T_i + A^T lam) ]
    (the literal variant replaces the aggregate term k_c S by k_c u_i), and
    the coordinator step is
        lam <- proj_{>=0}[ lam + gamma (A (2 S_new - S) - b) ].
    """
    u, lam, lower, upper = _prepare_start(config, cc, u0, lam0)
    a = cc.a_matrix
    b = cc.b_vector
    alpha_col = params.alpha[:, None]
    gamma = params.gamma
    res_u_hist: list[float] = []
    res_lam_hist: list[float] = []
    aggregate = u.sum(axis=0)
    hit_tolerance = False
    iterations = 0

    for k in range(1, params.max_iters + 1):
        shared_price = a.T @ lam
        if literal:
            grad = gm.grad_self * u + gm.k_c * u + gm.T
        else:
            grad = gm.grad_self * u + gm.k_c * aggregate[None, :] + gm.T
        u_new = np.clip(u - alpha_col * (grad + shared_price[None, :]), lower, upper)
        aggregate_new = u_new.sum(axis=0)
        lam_new = np.maximum(lam + gamma * (a @ (2.0 * aggregate_new - aggregate) - b), 0.0)

        res_u = float(np.max(np.abs(u_new - u)))
        res_lam = float(np.max(np.abs(lam_new - lam))) if lam.size else 0.0
        res_u_hist.append(res_u)
        res_lam_hist.append(res_lam)
        if callback is not None:
            callback(IterateState(u=u_new, lam=lam_new, k=k, prev_u=u, prev_lam=lam))
        u, aggregate, lam = u_new, aggregate_new, lam_new
        iterations = k
        if res_u <= params.eps_u and res_lam <= params.eps_lambda:
            hit_tolerance = True
            break

    feasibility = float(np.max(aggregate_violation(cc, u))) if cc.n_rows else -np.inf
    fpr = fixed_point_residual(config, gm, cc, params, u, lam)
    return GNEResult(
        u_star=u,
        lam_star=lam,
        iterations=iterations,
        residual_u=np.array(res_u_hist),
        residual_lam=np.array(res_lam_hist),
        converged=hit_tolerance and feasibility <= FEASIBILITY_TOL,
        fixed_point_residual=fpr,
        feasibility_max=feasibility,
    )


def solve_semidecentralized(
    config: MicrogridConfig,
    gm: GameMatrices,
    cc: CouplingConstraint,
    params: SolverParams,
    u0: np.ndarray | None = None,
    lam0: np.ndarray | None = None,
    callback: Callback | None = None,
) -> GNEResult:
    """Agent/coordinator iteration.

    Each round the coordinator broadcasts the multiplier and the previous
    aggregate; every agent independently takes one projected step on its
    own cost; the coordinator then collects the new aggregate and updates
    the multiplier.  The variant comes from params: "consistent" keeps the
    aggregate congestion term in the agent step (same fixed points as the
    centralized operator), "literal" drops it.

    Defaults: u0 = box midpoint for every agent, lam0 = 0.  Non-convergence
    within max_iters is reported via converged=False, never an exception.
    """
    return _iterate(
        config, gm, cc, params, u0, lam0, callback, literal=(params.variant == "literal")
    )


def solve_centralized(
    config: MicrogridConfig,
    gm: GameMatrices,
    cc: CouplingConstraint,
    params: SolverParams,
    u0: np.ndarray | None = None,
    lam0: np.ndarray | None = None,
    callback: Callback | None = None,
) -> GNEResult:
    """Single-operator iteration on the stacked strategy vector.

    Identical update law to the consistent semi-decentralized loop (the
    variant field is ignored); kept separate to mirror the two deployment
    architectures and to cross-check them against each other.
    """
    return _iterate(config, gm, cc, params, u0, lam0, callback, literal=False)


def fixed_point_residual(
    config: MicrogridConfig,
    gm: GameMatrices,
    cc: CouplingConstraint,
    params: SolverParams,
    u: np.ndarray,
    lam: np.ndarray,
) -> float:
    """Distance of (u, lam) from being a fixed point of one full sweep.

    Returns the larger of the primal and dual max-norm movements when one
    forward-backward step is applied at (u, lam); zero exactly at the
    equilibrium KKT pair.
    """
    box = local_box(config)
    u = np.asarray(u, dtype=float)
    lam = np.asarray(lam, dtype=float)
    aggregate = u.sum(axis=0)
    grad = gm.grad_self * u + gm.k_c * aggregate[None, :] + gm.T
    shared_price = cc.a_matrix.T @ lam
    u_step = np.clip(
        u - params.alpha[:, None] * (grad + shared_price[None, :]),
        box.lower_array(),
        box.upper_array(),
    )
    lam_step = np.maximum(lam + params.gamma * (cc.a_matrix @ aggregate - cc.b_vector), 0.0)
    res_u = float(np.max(np.abs(u - u_step)))
    res_lam = float(np.max(np.abs(lam - lam_step))) if lam.size else 0.0
    return max(res_u, res_lam)


def check_preconditioner(params: SolverParams, cc: CouplingConstraint, n_agents: int) -> bool:
    """Positive definiteness of the preconditioning matrix.

    The preconditioner is the block matrix [[diag(1/alpha) (x) I, -A_s^T],
    [-A_s, (1/gamma) I]] with A_s the coupling block repeated per agent; it
    is positive definite iff the Schur complement
    (1/gamma) I - sum_i alpha_i A A^T has positive smallest eigenvalue.
    """
    del n_agents  # the complement already sums alpha over agents
    return _preconditioner_min_eig(params.alpha, params.gamma, cc.a_matrix) > 0.0
