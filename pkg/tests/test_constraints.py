"""Aggregate polyhedron assembly, projections, and the feasibility search."""

from __future__ import annotations

import numpy as np
import pytest

from gridgame import (
    aggregate_violation,
    build_coupling,
    compute_margins,
    feasibility_search,
    local_box,
    project_box,
    project_nonneg,
    zero_margins,
)
from support import make_config


# ---------------------------------------------------------------------------
# Structure


def test_reference_block_layout(ref_config):
    cc = build_coupling(ref_config)
    tau = ref_config.horizon
    assert cc.n_rows == 4 * tau + 2 == 98
    assert cc.horizon == tau
    assert cc.mode == "stochastic"
    lengths = {name: sl.stop - sl.start for name, sl in cc.blocks.items()}
    assert lengths == {
        "soc_lower": tau,
        "soc_upper": tau,
        "final_lower": 1,
        "final_upper": 1,
        "grid_lower": tau,
        "grid_upper": tau,
    }
    # Slices tile the row range in order without gaps.
    ordered = sorted(cc.blocks.values(), key=lambda sl: sl.start)
    assert ordered[0].start == 0
    assert ordered[-1].stop == cc.n_rows
    for first, second in zip(ordered, ordered[1:]):
        assert first.stop == second.start
    labels = cc.row_labels()
    assert len(labels) == 98
    assert labels[0] == "soc_lower[0]"
    assert labels[48] == "final_lower"
    assert labels[49] == "final_upper"
    assert labels[50] == "grid_lower[0]"
    assert labels[91] == "grid_upper[17]"


def test_matrix_blocks_have_expected_contents(ref_config):
    cc = build_coupling(ref_config)
    tau = ref_config.horizon
    rho = ref_config.battery.rho
    tril = np.tril(np.ones((tau, tau)))
    a = cc.a_matrix
    assert np.array_equal(a[cc.blocks["soc_lower"]], rho * tril)
    assert np.array_equal(a[cc.blocks["soc_upper"]], -rho * tril)
    assert np.array_equal(a[cc.blocks["final_lower"]], rho * np.ones((1, tau)))
    assert np.array_equal(a[cc.blocks["final_upper"]], -rho * np.ones((1, tau)))
    assert np.array_equal(a[cc.blocks["grid_lower"]], np.eye(tau))
    assert np.array_equal(a[cc.blocks["grid_upper"]], -np.eye(tau))


def test_arrays_are_frozen(ref_config):
    cc = build_coupling(ref_config)
    with pytest.raises(ValueError):
        cc.a_matrix[0, 0] = 1.0
    with pytest.raises(ValueError):
        cc.b_vector[0] = 1.0


def test_unknown_mode_rejected(ref_config):
    with pytest.raises(ValueError, match="mode"):
        build_coupling(ref_config, None, "bogus")


# ---------------------------------------------------------------------------
# Right-hand side assembly


def test_margins_shift_b_exactly(ref_config):
    tightened = build_coupling(ref_config)
    untightened = build_coupling(ref_config, margins=zero_margins(ref_config.horizon))
    shift = untightened.b_vector - tightened.b_vector
    assert np.allclose(shift, tightened.margins.stacked(), rtol=1e-9, atol=1e-10)
    assert np.allclose(
        tightened.margins.stacked(), compute_margins(ref_config).stacked(), rtol=0, atol=0
    )


def test_b_vector_terms_by_hand():
    config = make_config(2, 3, nu_r=1.0, nu_d=1.0)
    cc = build_coupling(config)
    b_par = config.battery
    rho = b_par.rho
    mu_r = config.renewable_means()
    mu_d = config.demand_means().sum(axis=0)
    q = cc.margins
    cum = np.cumsum(mu_r)
    assert np.allclose(
        cc.b_vector[cc.blocks["soc_lower"]],
        (b_par.x0 - b_par.x_min) + rho * cum - np.array(q.soc_lower),
    )
    assert np.allclose(
        cc.b_vector[cc.blocks["soc_upper"]],
        (b_par.x_max - b_par.x0) - rho * cum - np.array(q.soc_upper),
    )
    c = config.chance
    assert cc.b_vector[cc.blocks["final_lower"]][0] == pytest.approx(
        b_par.x0 + rho * mu_r.sum() - c.r_target + c.epsilon - q.final_lower
    )
    assert cc.b_vector[cc.blocks["final_upper"]][0] == pytest.approx(
        c.r_target + c.epsilon - b_par.x0 - rho * mu_r.sum() - q.final_upper
    )
    assert np.allclose(cc.b_vector[cc.blocks["grid_lower"]], mu_d - np.array(q.grid_lower))
    assert np.allclose(
        cc.b_vector[cc.blocks["grid_upper"]], c.g_max - mu_d - np.array(q.grid_upper)
    )


def test_planning_bound_modes_zero_margins_and_shift_demand():
    config = make_config(2, 3)
    lower_cc = build_coupling(config, mode="det_lower")
    upper_cc = build_coupling(config, mode="det_upper")
    sto_cc = build_coupling(config)
    assert lower_cc.mode == "det_lower"
    assert np.array_equal(lower_cc.margins.stacked(), np.zeros(14))
    assert np.array_equal(upper_cc.margins.stacked(), np.zeros(14))
    # An explicit margin override is ignored for the planning-bound modes.
    forced = build_coupling(config, margins=compute_margins(config), mode="det_lower")
    assert np.array_equal(forced.b_vector, lower_cc.b_vector)
    # The two bound views differ only in the demand blocks, by the summed
    # support widths.
    widths = config.demand_widths().sum(axis=0)
    diff = upper_cc.b_vector - lower_cc.b_vector
    assert np.allclose(diff[upper_cc.blocks["grid_lower"]], widths)
    assert np.allclose(diff[upper_cc.blocks["grid_upper"]], -widths)
    for name in ("soc_lower", "soc_upper", "final_lower", "final_upper"):
        assert np.array_equal(diff[upper_cc.blocks[name]], np.zeros(diff[upper_cc.blocks[name]].shape))
    # Same coupling matrix in every mode.
    assert np.array_equal(lower_cc.a_matrix, sto_cc.a_matrix)
    assert np.array_equal(upper_cc.a_matrix, sto_cc.a_matrix)


# ---------------------------------------------------------------------------
# Projections and violation


def test_box_projection_clips_and_is_idempotent():
    config = make_config(2, 3, u_max=2.0)
    box = local_box(config)
    assert box.lower == (0.0, 0.0, 0.0)
    assert box.upper == (2.0, 2.0, 2.0)
    assert np.array_equal(box.midpoint(), np.full(3, 1.0))
    u = np.array([[-1.0, 0.5, 9.0], [2.5, -0.1, 1.0]])
    projected = project_box(u, box)
    assert np.array_equal(projected, [[0.0, 0.5, 2.0], [2.0, 0.0, 1.0]])
    assert np.array_equal(project_box(projected, box), projected)


def test_projections_are_nonexpansive():
    config = make_config(1, 4, u_max=3.0)
    box = local_box(config)
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = rng.normal(scale=5.0, size=4)
        y = rng.normal(scale=5.0, size=4)
        assert np.linalg.norm(project_box(x, box) - project_box(y, box)) <= (
            np.linalg.norm(x - y) + 1e-12
        )
        assert np.linalg.norm(project_nonneg(x) - project_nonneg(y)) <= (
            np.linalg.norm(x - y) + 1e-12
        )


def test_nonneg_projection():
    v = np.array([-2.0, 0.0, 3.5])
    assert np.array_equal(project_nonneg(v), [0.0, 0.0, 3.5])


def test_violation_at_zero_is_minus_b(ref_config):
    cc = build_coupling(ref_config)
    u = np.zeros((ref_config.n_agents, ref_config.horizon))
    assert np.array_equal(aggregate_violation(cc, u), -cc.b_vector)


def test_violation_is_affine_in_the_aggregate():
    config = make_config(3, 4)
    cc = build_coupling(config)
    rng = np.random.default_rng(1)
    u = rng.uniform(0.0, 1.0, size=(3, 4))
    v = rng.uniform(0.0, 1.0, size=(3, 4))
    base = aggregate_violation(cc, np.zeros_like(u))
    assert np.allclose(
        aggregate_violation(cc, u + v) - base,
        (aggregate_violation(cc, u) - base) + (aggregate_violation(cc, v) - base),
        atol=1e-12,
    )
    # Permuting agents leaves the aggregate unchanged.
    assert np.allclose(aggregate_violation(cc, u[::-1]), aggregate_violation(cc, u))


# ---------------------------------------------------------------------------
# Strict feasibility search


def test_reference_modes_are_strictly_feasible(ref_config):
    box = local_box(ref_config)
    for mode in ("stochastic", "det_lower", "det_upper"):
        cc = build_coupling(ref_config, mode=mode)
        report = feasibility_search(cc, box, ref_config.n_agents)
        assert report.strictly_feasible
        assert report.iterations <= 1000
        witness = report.witness
        assert witness.shape == (ref_config.n_agents, ref_config.horizon)
        assert np.all(witness >= 0.0) and np.all(witness <= ref_config.u_max)
        assert float(np.max(aggregate_violation(cc, witness))) < -1e-8
        assert report.max_violation < -1e-8


def test_search_is_deterministic(ref_config):
    cc = build_coupling(ref_config)
    box = local_box(ref_config)
    first = feasibility_search(cc, box, ref_config.n_agents)
    second = feasibility_search(cc, box, ref_config.n_agents)
    assert first.iterations == second.iterations
    assert np.array_equal(first.witness, second.witness)


def test_empty_polyhedron_is_reported():
    # Margins wider than the whole grid band leave no feasible aggregate:
    # s_t <= sum(mu) - q_lower and s_t >= sum(mu) + q_upper - g_max collide
    # once q_lower + q_upper > g_max.
    config = make_config(2, 2, demand_mean=[[200.0, 200.0], [200.0, 200.0]], g_max=4.0)
    cc = build_coupling(config)
    q = cc.margins
    assert q.grid_lower[0] + q.grid_upper[0] > config.chance.g_max
    report = feasibility_search(cc, local_box(config), config.n_agents, max_iters=2000)
    assert not report.strictly_feasible
    assert report.witness is None
    assert report.max_violation > 0.0


def test_search_finds_point_needing_movement():
    # The terminal window forces a minimum total discharge, so the box
    # midpoint alone is not feasible and the search must actually descend.
    config = make_config(
        2,
        3,
        capacity=20.0,
        u_max=4.0,
        renewable_mean=[8.0, 8.0, 8.0],
        renewable_dev=0.05,
        epsilon=0.15,
    )
    cc = build_coupling(config)
    box = local_box(config)
    report = feasibility_search(cc, box, config.n_agents)
    assert report.strictly_feasible
    assert float(np.max(aggregate_violation(cc, report.witness))) < -1e-8
