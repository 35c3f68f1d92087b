"""Equilibrium iterations: equivalence, convergence, uniqueness, audits."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from gridgame import (
    aggregate_violation,
    build_coupling,
    build_cost,
    fixed_point_residual,
    local_box,
    monotonicity_constants,
    solve_centralized,
    solve_semidecentralized,
    step_sizes,
)
from support import make_config, random_config


def _setup(config, mode="stochastic"):
    cc = build_coupling(config, mode=mode)
    mc = monotonicity_constants(config)
    params = step_sizes(config, mc, cc)
    gm = build_cost(config)
    return gm, cc, params


# ---------------------------------------------------------------------------
# Closed-form checks


def test_single_agent_interior_and_clamped_solution():
    config = make_config(
        1,
        3,
        capacity=1000.0,
        u_max=6.0,
        demand_mean=[[10.0, 10.0, 10.0]],
        demand_dev=0.1,
        k_tou=[4.0, 0.1, 8.0],
        epsilon=0.2,
    )
    gm, cc, params = _setup(config)
    result = solve_semidecentralized(config, gm, cc, params)
    assert result.converged
    # With one agent the gradient is (2 alpha + 2 k_c) u + T, so away from
    # the shared constraints the equilibrium is the clipped stationary point.
    expected = np.clip(-gm.T[0] / (2.0 * config.tariff.alpha_dch + 2.0 * config.tariff.k_c), 0.0, 6.0)
    assert expected[2] == 6.0  # one slot must actually clamp
    assert 0.0 < expected[0] < 6.0
    assert np.allclose(result.u_star[0], expected, atol=1e-8)
    assert np.array_equal(result.lam_star, np.zeros(cc.n_rows))


def test_zero_is_the_equilibrium_when_discharge_never_pays():
    # Prices are zero and wear is expensive, and the small renewable inflow
    # keeps doing-nothing inside every shared constraint.
    config = make_config(
        2, 3, k_tou=[0.0, 0.0, 0.0], beta_dch=2.0, renewable_mean=[1.0] * 3, renewable_dev=0.1
    )
    gm, cc, params = _setup(config)
    assert np.all(gm.T > 0)
    result = solve_semidecentralized(config, gm, cc, params)
    assert result.converged
    assert np.array_equal(result.u_star, np.zeros((2, 3)))
    assert np.array_equal(result.lam_star, np.zeros(cc.n_rows))
    assert result.fixed_point_residual == 0.0


# ---------------------------------------------------------------------------
# Architecture equivalence


def test_both_architectures_produce_identical_iterates():
    rng = np.random.default_rng(7)
    for _ in range(10):
        config = random_config(rng)
        gm, cc, params = _setup(config)
        budget = dataclasses.replace(params, max_iters=300, eps_u=0.0, eps_lambda=0.0)
        seen = {}
        for name, solve in (("semi", solve_semidecentralized), ("central", solve_centralized)):
            trace = []
            solve(
                config,
                gm,
                cc,
                budget,
                callback=lambda st, trace=trace: trace.append((st.u, st.lam)),
            )
            seen[name] = trace
        # A strongly contracting instance may reach an exact fixed point
        # early; both architectures must stop at the same iteration.
        assert len(seen["semi"]) == len(seen["central"]) > 0
        for (u_a, lam_a), (u_b, lam_b) in zip(seen["semi"], seen["central"]):
            assert np.array_equal(u_a, u_b)
            assert np.array_equal(lam_a, lam_b)


def test_simplified_broadcast_update_changes_the_fixed_point():
    # Large capacity keeps the shared rows slack, so the two update rules
    # settle at their unconstrained fixed points, which differ for n >= 2.
    config = make_config(3, 3, k_c=0.2, capacity=1000.0, u_max=50.0)
    gm, cc, params = _setup(config)
    consistent = solve_semidecentralized(config, gm, cc, params)
    literal = solve_semidecentralized(
        config, gm, cc, dataclasses.replace(params, variant="literal")
    )
    assert consistent.converged and literal.converged
    assert float(np.max(np.abs(consistent.u_star - literal.u_star))) > 1e-4


def test_broadcast_variants_coincide_for_one_agent():
    config = make_config(1, 3)
    gm, cc, params = _setup(config)
    consistent = solve_semidecentralized(config, gm, cc, params)
    literal = solve_semidecentralized(
        config, gm, cc, dataclasses.replace(params, variant="literal")
    )
    assert np.array_equal(consistent.u_star, literal.u_star)


# ---------------------------------------------------------------------------
# Convergence, uniqueness, determinism


def test_fuzzed_instances_converge_to_one_point_from_any_start():
    rng = np.random.default_rng(17)
    for _ in range(6):
        config = random_config(rng)
        gm, cc, params = _setup(config)
        solutions = [solve_semidecentralized(config, gm, cc, params)]
        for _ in range(3):
            u0 = rng.uniform(0.0, config.u_max, size=(config.n_agents, config.horizon))
            lam0 = rng.uniform(0.0, 1.0, size=cc.n_rows)
            solutions.append(solve_semidecentralized(config, gm, cc, params, u0=u0, lam0=lam0))
        for result in solutions:
            assert result.converged
            assert result.feasibility_max <= 1e-6
            assert result.fixed_point_residual <= 1e-6
        anchor = solutions[0].u_star
        for other in solutions[1:]:
            assert float(np.max(np.abs(other.u_star - anchor))) <= 1e-5


def test_solver_is_deterministic():
    config = random_config(np.random.default_rng(23))
    gm, cc, params = _setup(config)
    a = solve_semidecentralized(config, gm, cc, params)
    b = solve_semidecentralized(config, gm, cc, params)
    assert np.array_equal(a.u_star, b.u_star)
    assert np.array_equal(a.lam_star, b.lam_star)
    assert a.iterations == b.iterations
    assert np.array_equal(a.residual_u, b.residual_u)


def test_iterates_respect_the_box():
    config = random_config(np.random.default_rng(29))
    gm, cc, params = _setup(config)
    box = local_box(config)

    def check(state):
        assert np.all(state.u >= box.lower_array() - 0.0)
        assert np.all(state.u <= box.upper_array() + 0.0)
        assert np.all(state.lam >= 0.0)

    solve_semidecentralized(config, gm, cc, params, callback=check)


# ---------------------------------------------------------------------------
# Multipliers and feasibility audit


def test_binding_rows_carry_positive_prices(ref_config, ref_modes):
    result = ref_modes["det_upper"]
    gne = result.gne
    cc = build_coupling(ref_config, mode="det_upper")
    lam = gne.lam_star
    active = {91, 92, 93, 94, 95}  # grid ceiling rows for slots 17..21
    labels = cc.row_labels()
    assert {labels[k] for k in active} == {f"grid_upper[{t}]" for t in range(17, 22)}
    for k in range(cc.n_rows):
        if k in active:
            assert lam[k] > 1.0
        else:
            assert lam[k] <= 1e-6
    # The ceiling rows force aggregate floors equal to -b, met tightly.
    floors = -cc.b_vector[sorted(active)]
    total = gne.u_star.sum(axis=0)
    assert np.allclose(total[17:22], floors, atol=1e-3)
    assert np.all(floors == pytest.approx([75.0, 100.0, 100.0, 75.0, 50.0], abs=1e-9))
    # Complementary slackness at the solution.
    slack = aggregate_violation(cc, gne.u_star)
    assert float(np.max(np.abs(lam * slack))) <= 1e-3


def test_tolerance_stop_without_feasibility_is_not_convergence():
    config = make_config(
        2, 2, demand_mean=[[200.0, 200.0], [200.0, 200.0]], g_max=4.0, tol=1e3
    )
    gm, cc, params = _setup(config)
    result = solve_semidecentralized(config, gm, cc, params)
    assert result.iterations == 1  # the huge tolerance stops immediately
    assert result.feasibility_max > 1e-6
    assert not result.converged


def test_iteration_budget_is_respected():
    config = make_config(2, 3, tol=1e-14, max_iters=5)
    gm, cc, params = _setup(config)
    result = solve_semidecentralized(config, gm, cc, params)
    assert result.iterations == 5
    assert not result.converged
    assert len(result.residual_u) == 5
    assert len(result.residual_lam) == 5


# ---------------------------------------------------------------------------
# Start handling and callbacks


def test_default_start_is_box_midpoint_with_zero_prices():
    config = make_config(2, 3, u_max=4.0)
    gm, cc, params = _setup(config)
    first = {}

    def capture(state):
        if state.k == 1:
            first["u"] = state.prev_u.copy()
            first["lam"] = state.prev_lam.copy()

    solve_semidecentralized(config, gm, cc, params, callback=capture)
    assert np.array_equal(first["u"], np.full((2, 3), 2.0))
    assert np.array_equal(first["lam"], np.zeros(cc.n_rows))


def test_start_values_are_sanitized():
    config = make_config(2, 3, u_max=4.0)
    gm, cc, params = _setup(config)
    wild_u = np.array([[9.0, -5.0, 2.0], [100.0, 0.5, -1.0]])
    wild_lam = -np.ones(cc.n_rows)
    seen = {}

    def capture(state):
        if state.k == 1:
            seen["u"] = state.prev_u.copy()
            seen["lam"] = state.prev_lam.copy()

    solve_semidecentralized(config, gm, cc, params, u0=wild_u, lam0=wild_lam, callback=capture)
    assert np.array_equal(seen["u"], [[4.0, 0.0, 2.0], [4.0, 0.5, 0.0]])
    assert np.array_equal(seen["lam"], np.zeros(cc.n_rows))


def test_wrong_start_shapes_are_rejected():
    config = make_config(2, 3)
    gm, cc, params = _setup(config)
    with pytest.raises(ValueError):
        solve_semidecentralized(config, gm, cc, params, u0=np.zeros((3, 2)))
    with pytest.raises(ValueError):
        solve_semidecentralized(config, gm, cc, params, lam0=np.zeros(cc.n_rows + 1))


def test_callback_sees_every_iteration_in_order():
    config = make_config(2, 3)
    gm, cc, params = _setup(config)
    # Tiny primal steps keep the iteration moving for the whole budget.
    crawl = dataclasses.replace(
        params, alpha=params.alpha * 0.01, eps_u=0.0, eps_lambda=0.0, max_iters=40
    )
    states = []
    solve_semidecentralized(config, gm, cc, crawl, callback=lambda st: states.append(st))
    assert [st.k for st in states] == list(range(1, 41))
    for prev, new in zip(states, states[1:]):
        assert np.array_equal(new.prev_u, prev.u)
        assert np.array_equal(new.prev_lam, prev.lam)


# ---------------------------------------------------------------------------
# Fixed-point residual


def test_residual_vanishes_at_the_solution_only(ref_config, ref_modes):
    gne = ref_modes["stochastic"].gne
    gm, cc, params = _setup(ref_config)
    at_solution = fixed_point_residual(ref_config, gm, cc, params, gne.u_star, gne.lam_star)
    assert at_solution <= 1e-8
    nudged = fixed_point_residual(
        ref_config, gm, cc, params, gne.u_star + 0.01, gne.lam_star
    )
    assert nudged > 1e-5
