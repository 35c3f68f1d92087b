"""Shared constraints of the discharge game.

The agents' discharge schedules are coupled through the battery and the
grid connection.  With M the lower-triangular all-ones matrix (running
sum over slots) and rho the energy-to-SoC factor, the aggregate schedule
s = sum_j u_j must satisfy A s <= b with

    A = [ rho*M; -rho*M; rho*1^T; -rho*1^T; I; -I ]

whose six blocks encode, in order: state-of-charge lower band, upper band,
terminal window lower, terminal window upper, grid exchange lower (>= 0),
grid exchange upper (<= g_max).  The right-hand side b folds in the mean
renewable / demand profiles and the concentration margins, so A s <= b is a
sufficient deterministic certificate for all probabilistic constraints.

Each agent additionally keeps its own box 0 <= u_i <= u_max.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chance import MarginSet, compute_margins, zero_margins
from .model import MicrogridConfig

__all__ = [
    "MODES",
    "CouplingConstraint",
    "LocalBox",
    "FeasibilityReport",
    "build_coupling",
    "local_box",
    "project_box",
    "project_nonneg",
    "aggregate_violation",
    "feasibility_search",
]

MODES = ("stochastic", "det_lower", "det_upper")

# Block labels in row order; slice lengths are (tau, tau, 1, 1, tau, tau).
BLOCKS = ("soc_lower", "soc_upper", "final_lower", "final_upper", "grid_lower", "grid_upper")


@dataclass(eq=False)
class CouplingConstraint:
    """Aggregate polyhedron A s <= b with labeled row blocks.

    Arrays are frozen (non-writeable); blocks maps each label to its row
    slice.  mode records which demand view built b.
    """

    a_matrix: np.ndarray  # shape (4*horizon + 2, horizon)
    b_vector: np.ndarray  # shape (4*horizon + 2,)
    blocks: dict[str, slice]
    mode: str
    margins: MarginSet  # margins folded into b (zeroed for det modes)

    @property
    def n_rows(self) -> int:
        return self.a_matrix.shape[0]

    @property
    def horizon(self) -> int:
        return self.a_matrix.shape[1]

    def row_labels(self) -> list[str]:
        """One label per row, e.g. 'grid_upper[3]'; scalars carry no index."""
        out: list[str] = []
        for name in BLOCKS:
            sl = self.blocks[name]
            length = sl.stop - sl.start
            if length == 1:
                out.append(name)
            else:
                out.extend(f"{name}[{t}]" for t in range(length))
        return out


@dataclass(frozen=True)
class LocalBox:
    """Per-agent strategy box 0 <= u <= upper componentwise."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def lower_array(self) -> np.ndarray:
        return np.array(self.lower, dtype=float)

    def upper_array(self) -> np.ndarray:
        return np.array(self.upper, dtype=float)

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower_array() + self.upper_array())


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the constraint-qualification search."""

    strictly_feasible: bool
    witness: np.ndarray | None  # agent strategies (agents, horizon) if found
    max_violation: float  # max_k (A s - b)_k at the best point seen
    iterations: int


def _cumsum_matrix(horizon: int) -> np.ndarray:
    """Lower-triangular all-ones matrix: (M v)_t = sum_{s<=t} v_s."""
    return np.tril(np.ones((horizon, horizon)))


def build_coupling(
    config: MicrogridConfig,
    margins: MarginSet | None = None,
    mode: str = "stochastic",
) -> CouplingConstraint:
    """Assemble the aggregate polyhedron for one planning mode.

    stochastic: demand at its mean, concentration margins applied (margins
    defaults to compute_margins(config); pass an explicit MarginSet to
    override, e.g. zero_margins for the untightened mean polyhedron).

    det_lower / det_upper: every demand variable replaced by its lower /
    upper support bound, renewable at its mean, all margins zeroed (the
    margins argument is ignored).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode '{mode}', expected one of {MODES}")
    tau = config.horizon
    rho = config.battery.rho
    b_par = config.battery
    c = config.chance

    if mode == "stochastic":
        used_margins = compute_margins(config) if margins is None else margins
        demand_profile = config.demand_means()
    else:
        used_margins = zero_margins(tau)
        demand_profile = config.demand_lowers() if mode == "det_lower" else config.demand_uppers()

    m = _cumsum_matrix(tau)
    ones = np.ones((1, tau))
    eye = np.eye(tau)
    a_matrix = np.vstack([rho * m, -rho * m, rho * ones, -rho * ones, eye, -eye])

    mu_r = config.renewable_means()
    cum_r = m @ mu_r  # running renewable energy
    total_r = float(mu_r.sum())
    demand_sum = demand_profile.sum(axis=0)  # aggregate demand per slot

    q = used_margins
    soc_lower = (b_par.x0 - b_par.x_min) + rho * cum_r - np.array(q.soc_lower)
    soc_upper = (b_par.x_max - b_par.x0) - rho * cum_r - np.array(q.soc_upper)
    final_lower = b_par.x0 + rho * total_r - c.r_target + c.epsilon - q.final_lower
    final_upper = c.r_target + c.epsilon - b_par.x0 - rho * total_r - q.final_upper
    grid_lower = demand_sum - np.array(q.grid_lower)
    grid_upper = c.g_max - demand_sum - np.array(q.grid_upper)

    b_vector = np.concatenate(
        [soc_lower, soc_upper, [final_lower, final_upper], grid_lower, grid_upper]
    )

    blocks = {
        "soc_lower": slice(0, tau),
        "soc_upper": slice(tau, 2 * tau),
        "final_lower": slice(2 * tau, 2 * tau + 1),
        "final_upper": slice(2 * tau + 1, 2 * tau + 2),
        "grid_lower": slice(2 * tau + 2, 3 * tau + 2),
        "grid_upper": slice(3 * tau + 2, 4 * tau + 2),
    }
    a_matrix.setflags(write=False)
    b_vector.setflags(write=False)
    return CouplingConstraint(
        a_matrix=a_matrix, b_vector=b_vector, blocks=blocks, mode=mode, margins=used_margins
    )


def local_box(config: MicrogridConfig) -> LocalBox:
    """The per-agent box [0, u_max]^horizon."""
    return LocalBox(lower=(0.0,) * config.horizon, upper=(config.u_max,) * config.horizon)


def project_box(u: np.ndarray, box: LocalBox) -> np.ndarray:
    """Euclidean projection onto the box; broadcasts over leading axes."""
    return np.clip(u, box.lower_array(), box.upper_array())


def project_nonneg(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the nonnegative orthant."""
    return np.maximum(v, 0.0)


def aggregate_violation(coupling: CouplingConstraint, u: np.ndarray) -> np.ndarray:
    """Row-wise slack A s - b at the profile u (agents, horizon).

    Positive entries are violated rows; negative entries have slack.
    """
    s = np.asarray(u, dtype=float).sum(axis=0)
    return coupling.a_matrix @ s - coupling.b_vector


def feasibility_search(
    coupling: CouplingConstraint,
    box: LocalBox,
    n_agents: int,
    max_iters: int = 100_000,
    strict_threshold: float = -1e-8,
) -> FeasibilityReport:
    """Search for a strictly feasible point of the shared constraints.

    Runs projected subgradient descent on the violation maximum
    f(u) = max_k (A sum_j u_j - b)_k starting from the box midpoint, using a
    Polyak-style step toward a target slightly below zero.  Succeeds as soon
    as some iterate has f(u) < strict_threshold; reports the best point seen
    otherwise.  Deterministic.
    """
    a = coupling.a_matrix
    lower = box.lower_array()
    upper = box.upper_array()
    u = np.tile(box.midpoint(), (n_agents, 1))

    target = min(-1e-6, 2.0 * strict_threshold)
    best_val = np.inf
    best_u = u.copy()
    iterations = 0
    for iterations in range(1, max_iters + 1):
        slack = a @ u.sum(axis=0) - coupling.b_vector
        k = int(np.argmax(slack))
        val = float(slack[k])
        if val < best_val:
            best_val = val
            best_u = u.copy()
        if val < strict_threshold:
            break
        # Subgradient of f at u: row k of A replicated for every agent.
        row = a[k]
        grad_sq = n_agents * float(row @ row)
        step = (val - target) / grad_sq
        u = np.clip(u - step * row[None, :], lower, upper)

    found = best_val < strict_threshold
    return FeasibilityReport(
        strictly_feasible=found,
        witness=best_u if found else None,
        max_violation=best_val,
        iterations=iterations,
    )
