"""Equilibrium scheduling for a shared battery in a demand-side microgrid game.

A group of electricity consumers shares one battery charged from an
uncertain renewable source.  Each consumer schedules its discharge to
minimize an expected bill that couples everyone through a congestion-aware
tariff and through shared battery/grid limits.  The library replaces every
probabilistic constraint by a sufficient deterministic one via
concentration margins, and computes the unique variational equilibrium of
the resulting game with projected forward-backward iterations.

Modules:
  model        config schema, validation, scenario sampling
  chance       concentration margins and dependency handling
  constraints  coupling polyhedron, local boxes, strict-feasibility search
  game         quadratic cost structure, operator constants, step sizes
  solver       semi-decentralized and centralized equilibrium iterations
  experiments  mode comparison, Monte Carlo audits, CSV output
  cli          command-line front end (`gridgame`)
"""

__version__ = "0.1.0"

from .chance import (
    MarginSet,
    chromatic_upper_bound,
    compute_margins,
    final_soc_margins,
    grid_margins,
    hoeffding_margin,
    soc_margins,
    zero_margins,
)
from .constraints import (
    MODES,
    CouplingConstraint,
    FeasibilityReport,
    LocalBox,
    aggregate_violation,
    build_coupling,
    feasibility_search,
    local_box,
    project_box,
    project_nonneg,
)
from .experiments import (
    CostHistogram,
    InfeasibleInstanceError,
    ModeResult,
    ViolationReport,
    mode_view,
    montecarlo_costs,
    montecarlo_validate,
    realized_costs,
    run_mode,
    simulate_soc,
    soc_closed_form,
    write_compare_summary,
    write_costs,
    write_discharge_profiles,
    write_grid_exchange,
    write_violations,
)
from .game import (
    CostReport,
    GameMatrices,
    MonotonicityConstants,
    SolverParams,
    build_cost,
    expected_cost,
    gamma_eigenvalues,
    group_expected_cost,
    monotonicity_constants,
    pseudo_gradient,
    step_sizes,
)
from .model import (
    BatteryParams,
    BoundedRV,
    ChanceSpec,
    ConfigError,
    DependencyGraph,
    ExperimentSettings,
    MicrogridConfig,
    ScenarioDraw,
    SolverSettings,
    TariffCostParams,
    ValidationReport,
    config_to_dict,
    dump_config,
    load_config,
    sample_scenario,
    sample_scenarios,
    validate,
)
from .solver import (
    GNEResult,
    IterateState,
    check_preconditioner,
    fixed_point_residual,
    solve_centralized,
    solve_semidecentralized,
)
