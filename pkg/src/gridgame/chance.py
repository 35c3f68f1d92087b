"""Concentration margins for the probabilistic constraints.

Every chance constraint is replaced by its deterministic counterpart
tightened by a margin of the form

    q = sqrt( -nu * sum_i w_i^2 * ln(delta) )

where the w_i are the support widths of the bounded random variables
involved, delta is the per-tail reliability budget, and nu accounts for
statistical dependence between the variables: nu = chi_hat / 2 with chi_hat
an upper bound on the chromatic number of their dependency graph
(independent variables give chi_hat = 1).  Satisfying the tightened
constraint guarantees the original probabilistic one, so the margins are
conservative by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log, sqrt
from typing import Sequence

import numpy as np

from .model import DependencyGraph, MicrogridConfig

__all__ = [
    "MarginSet",
    "chromatic_upper_bound",
    "hoeffding_margin",
    "soc_margins",
    "final_soc_margins",
    "grid_margins",
    "compute_margins",
    "zero_margins",
]


def chromatic_upper_bound(graph: DependencyGraph) -> int:
    """Greedy upper bound on the chromatic number.

    Nodes are colored in index order 0..n-1, each taking the smallest color
    absent from its already-colored neighbors.  Deterministic, exact on
    edgeless (1) and complete (n) graphs, and never below 1.
    """
    adjacency: dict[int, set[int]] = {i: set() for i in range(graph.node_count)}
    for i, j in graph.edges:
        adjacency[i].add(j)
        adjacency[j].add(i)
    colors: dict[int, int] = {}
    for node in range(graph.node_count):
        used = {colors[nb] for nb in adjacency[node] if nb in colors}
        color = 0
        while color in used:
            color += 1
        colors[node] = color
    return max(colors.values()) + 1 if colors else 1


def hoeffding_margin(widths: Sequence[float] | np.ndarray, nu: float, delta: float) -> float:
    """Margin sqrt(-nu * sum(w^2) * ln(delta)) for one tail budget delta.

    delta is the allowed tail probability, in (0, 1]; delta = 1 gives a zero
    margin (no tightening).  nu must be positive and every width
    nonnegative; violations raise ValueError since they indicate a malformed
    instance rather than data to report.
    """
    w = np.asarray(widths, dtype=float)
    if w.ndim != 1:
        raise ValueError("widths must be one-dimensional")
    if np.any(w < 0):
        raise ValueError("widths must be nonnegative")
    if not nu > 0:
        raise ValueError("nu must be positive")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    return sqrt(-nu * float(np.dot(w, w)) * log(delta))


@dataclass(frozen=True)
class MarginSet:
    """All tightening margins of one instance, in constraint-row order.

    soc_* index slots t = 1..horizon (the state after slot t-1); grid_*
    index slots t = 0..horizon-1; the final pair is scalar.  Lower/upper
    refers to which side of the band the margin tightens.
    """

    soc_lower: tuple[float, ...]
    soc_upper: tuple[float, ...]
    final_lower: float
    final_upper: float
    grid_lower: tuple[float, ...]
    grid_upper: tuple[float, ...]

    @property
    def horizon(self) -> int:
        return len(self.soc_lower)

    def stacked(self) -> np.ndarray:
        """Margins as a vector matching the coupling-row order:
        soc lower, soc upper, final lower, final upper, grid lower, grid upper."""
        return np.concatenate(
            [
                np.array(self.soc_lower, dtype=float),
                np.array(self.soc_upper, dtype=float),
                [self.final_lower, self.final_upper],
                np.array(self.grid_lower, dtype=float),
                np.array(self.grid_upper, dtype=float),
            ]
        )


def _nu_renewable(config: MicrogridConfig) -> np.ndarray:
    """Per-slot dependency coefficient for renewable partial sums.

    Explicit config values win; otherwise each slot t uses the dependency
    graph induced by slots 0..t (the variables entering the partial sum),
    nu = chi_hat / 2.
    """
    if config.chance.nu_r is not None:
        return np.array(config.chance.nu_r, dtype=float)
    out = np.empty(config.horizon)
    for t in range(config.horizon):
        sub = config.renewable_dependency.induced_prefix(t + 1)
        out[t] = 0.5 * chromatic_upper_bound(sub)
    return out


def _nu_demand(config: MicrogridConfig) -> np.ndarray:
    """Per-slot dependency coefficient for the cross-agent demand sum."""
    if config.chance.nu_d is not None:
        return np.array(config.chance.nu_d, dtype=float)
    nu = 0.5 * chromatic_upper_bound(config.demand_dependency)
    return np.full(config.horizon, nu)


def soc_margins(config: MicrogridConfig) -> tuple[np.ndarray, np.ndarray]:
    """Margins for the running state-of-charge band.

    Entry t-1 (t = 1..horizon) covers the state after slot t-1, which
    accumulates the renewable of slots 0..t-1.  The lower-band margin uses
    the delta_x_tilde budget, the upper-band margin the remaining
    delta_x - delta_x_tilde.  Both carry the energy-to-SoC factor rho.
    """
    rho = config.battery.rho
    widths = config.renewable_widths()
    nu = _nu_renewable(config)
    c = config.chance
    lower = np.empty(config.horizon)
    upper = np.empty(config.horizon)
    for t in range(config.horizon):
        w = widths[: t + 1]
        lower[t] = rho * hoeffding_margin(w, nu[t], c.delta_x_tilde[t])
        upper[t] = rho * hoeffding_margin(w, nu[t], c.delta_x[t] - c.delta_x_tilde[t])
    return lower, upper


def final_soc_margins(config: MicrogridConfig) -> tuple[float, float]:
    """Margins for the terminal state-of-charge window (full-horizon sums)."""
    rho = config.battery.rho
    widths = config.renewable_widths()
    nu = float(_nu_renewable(config)[config.horizon - 1])
    c = config.chance
    lower = rho * hoeffding_margin(widths, nu, c.delta_final_tilde)
    upper = rho * hoeffding_margin(widths, nu, c.delta_final - c.delta_final_tilde)
    return lower, upper


def grid_margins(config: MicrogridConfig) -> tuple[np.ndarray, np.ndarray]:
    """Margins for the grid-exchange band, one per slot.

    Slot t sums the demands of all agents at t; no rho factor since grid
    exchange is in power units directly.
    """
    widths = config.demand_widths()
    nu = _nu_demand(config)
    c = config.chance
    lower = np.empty(config.horizon)
    upper = np.empty(config.horizon)
    for t in range(config.horizon):
        w = widths[:, t]
        lower[t] = hoeffding_margin(w, nu[t], c.delta_g_tilde[t])
        upper[t] = hoeffding_margin(w, nu[t], c.delta_g[t] - c.delta_g_tilde[t])
    return lower, upper


def compute_margins(config: MicrogridConfig) -> MarginSet:
    """All margins of an instance, cached in one immutable bundle."""
    soc_lo, soc_up = soc_margins(config)
    fin_lo, fin_up = final_soc_margins(config)
    grid_lo, grid_up = grid_margins(config)
    return MarginSet(
        soc_lower=tuple(soc_lo),
        soc_upper=tuple(soc_up),
        final_lower=fin_lo,
        final_upper=fin_up,
        grid_lower=tuple(grid_lo),
        grid_upper=tuple(grid_up),
    )


def zero_margins(horizon: int) -> MarginSet:
    """MarginSet of all zeros (no tightening), e.g. for deterministic views."""
    zeros = (0.0,) * horizon
    return MarginSet(
        soc_lower=zeros,
        soc_upper=zeros,
        final_lower=0.0,
        final_upper=0.0,
        grid_lower=zeros,
        grid_upper=zeros,
    )
