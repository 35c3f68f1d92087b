"""Command-line front end for batch equilibrium runs.

Subcommands:
  solve             solve one planning mode, write solution CSVs + iteration log
  compare           solve all three modes, run the Monte Carlo audits, write CSVs
  validate          check a config and report strict feasibility
  dump-constraints  write the coupling polyhedron (A, b, margins) as CSV

Exit codes: 0 success, 2 usage/config/validation error, 3 no strictly
feasible point, 4 non-convergence or failed post-solve audit.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .chance import MarginSet
from .constraints import MODES, aggregate_violation, build_coupling, local_box
from .experiments import (
    InfeasibleInstanceError,
    ModeResult,
    mode_view,
    montecarlo_costs,
    montecarlo_validate,
    run_mode,
    write_compare_summary,
    write_costs,
    write_discharge_profiles,
    write_grid_exchange,
    write_violations,
)
from .game import group_expected_cost, monotonicity_constants
from .model import ConfigError, MicrogridConfig, load_config, validate
from .solver import FEASIBILITY_TOL, IterateState

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NO_CONVERGENCE = 4


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridgame",
        description="Equilibrium scheduling for a shared battery in a demand-side microgrid game.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the YAML config file")
    common.add_argument("--out-dir", default="out", help="directory for CSV outputs")
    common.add_argument("--seed", type=int, default=None, help="override experiment seed")
    common.add_argument(
        "--max-iters", type=_positive_int, default=None, help="override solver iteration budget"
    )
    common.add_argument(
        "--tol-u", type=_positive_float, default=None, help="override primal stopping tolerance"
    )
    common.add_argument(
        "--tol-lambda", type=_positive_float, default=None, help="override dual stopping tolerance"
    )
    common.add_argument(
        "--allow-nonslater",
        action="store_true",
        help="proceed even when no strictly feasible point is found",
    )
    common.add_argument(
        "--threads", type=_positive_int, default=1, help="worker threads for Monte Carlo loops"
    )

    p_solve = sub.add_parser("solve", parents=[common], help="solve one planning mode")
    p_solve.add_argument("--mode", choices=MODES, default="stochastic")
    p_solve.add_argument("--algorithm", choices=("semi", "central"), default="semi")
    p_solve.add_argument("--variant", choices=("consistent", "literal"), default=None)

    p_compare = sub.add_parser(
        "compare", parents=[common], help="solve all modes and run Monte Carlo audits"
    )
    p_compare.add_argument(
        "--samples",
        type=_positive_int,
        default=None,
        help="override both Monte Carlo sample counts",
    )

    p_validate = sub.add_parser("validate", parents=[common], help="validate a config")
    del p_validate

    p_dump = sub.add_parser(
        "dump-constraints", parents=[common], help="write the coupling polyhedron as CSV"
    )
    p_dump.add_argument("--mode", choices=MODES, default="stochastic")

    return parser


def _apply_overrides(config: MicrogridConfig, args: argparse.Namespace) -> MicrogridConfig:
    solver = config.solver
    if args.max_iters is not None:
        solver = dataclasses.replace(solver, max_iters=args.max_iters)
    if args.tol_u is not None:
        solver = dataclasses.replace(solver, tol_u=args.tol_u)
    if args.tol_lambda is not None:
        solver = dataclasses.replace(solver, tol_lambda=args.tol_lambda)
    if getattr(args, "variant", None) is not None:
        solver = dataclasses.replace(solver, variant=args.variant)
    experiment = config.experiment
    if args.seed is not None:
        experiment = dataclasses.replace(experiment, seed=args.seed)
    samples = getattr(args, "samples", None)
    if samples is not None:
        experiment = dataclasses.replace(
            experiment, samples_validate=samples, samples_histogram=samples
        )
    return dataclasses.replace(config, solver=solver, experiment=experiment)


def _load_valid_config(args: argparse.Namespace) -> MicrogridConfig | int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    config = _apply_overrides(config, args)
    report = validate(config)
    if not report.valid:
        for violation in report.violations:
            print(f"invalid: {violation}", file=sys.stderr)
        return EXIT_CONFIG
    return config


def _warn_if_lipschitz_low(config: MicrogridConfig) -> None:
    mc = monotonicity_constants(config)
    configured = config.solver.l_f
    if configured is not None and configured < mc.l_f:
        print(
            f"warning: configured l_f {configured} is below the certified bound "
            f"{mc.l_f:.6f}; using the bound"
        )


def _write_manifest(
    path: str, args: argparse.Namespace, config: MicrogridConfig, modes: list[str], algorithm: str
) -> None:
    lines = {
        "config": args.config,
        "command": args.command,
        "modes": ",".join(modes),
        "algorithm": algorithm,
        "variant": config.solver.variant,
        "seed": config.experiment.seed,
        "samples_validate": config.experiment.samples_validate,
        "samples_histogram": config.experiment.samples_histogram,
        "out_dir": args.out_dir,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in lines.items():
            fh.write(f"{key}={value}\n")


def _write_margins(path: str, margins: MarginSet) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["block", "t", "margin"])
        for t, value in enumerate(margins.soc_lower):
            writer.writerow(["soc_lower", t + 1, repr(float(value))])
        for t, value in enumerate(margins.soc_upper):
            writer.writerow(["soc_upper", t + 1, repr(float(value))])
        writer.writerow(["final_lower", len(margins.soc_lower), repr(float(margins.final_lower))])
        writer.writerow(["final_upper", len(margins.soc_lower), repr(float(margins.final_upper))])
        for t, value in enumerate(margins.grid_lower):
            writer.writerow(["grid_lower", t, repr(float(value))])
        for t, value in enumerate(margins.grid_upper):
            writer.writerow(["grid_upper", t, repr(float(value))])


def _write_multipliers(path: str, cc, lam: np.ndarray) -> None:
    import csv

    labels = cc.row_labels()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "block", "lambda"])
        for index, (label, value) in enumerate(zip(labels, lam)):
            writer.writerow([index, label, repr(float(value))])


def _write_solve_summary(path: str, result: ModeResult, config: MicrogridConfig) -> None:
    import csv

    u = result.gne.u_star
    horizon = u.shape[1]
    header = (
        ["mode", "agent", "converged", "iterations", "fixed_point_residual", "feasibility_max"]
        + ["expected_cost"]
        + [f"u_t{t}" for t in range(horizon)]
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(u.shape[0]):
            writer.writerow(
                [
                    result.mode,
                    i,
                    "true" if result.gne.converged else "false",
                    result.gne.iterations,
                    repr(float(result.gne.fixed_point_residual)),
                    repr(float(result.gne.feasibility_max)),
                    repr(float(result.cost_reports[i].total_expected)),
                ]
                + [repr(float(v)) for v in u[i]]
            )


def cmd_solve(args: argparse.Namespace) -> int:
    config = _load_valid_config(args)
    if isinstance(config, int):
        return config
    os.makedirs(args.out_dir, exist_ok=True)
    _warn_if_lipschitz_low(config)

    view = mode_view(config, args.mode)
    cc = build_coupling(view, None, args.mode)
    stride = config.experiment.log_stride
    log_rows: list[list] = []

    def log_iteration(state: IterateState) -> None:
        if state.k % stride != 0 and state.k != 1:
            return
        res_u = float(np.max(np.abs(state.u - state.prev_u)))
        res_lam = float(np.max(np.abs(state.lam - state.prev_lam)))
        feas = float(np.max(aggregate_violation(cc, state.u)))
        objective = group_expected_cost(view, state.u)
        log_rows.append([state.k, res_u, res_lam, feas, objective])

    try:
        result = run_mode(
            config,
            args.mode,
            algorithm=args.algorithm,
            allow_nonslater=args.allow_nonslater,
            callback=log_iteration,
        )
    except InfeasibleInstanceError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    gne = result.gne
    if not log_rows or log_rows[-1][0] != gne.iterations:
        log_rows.append(
            [
                gne.iterations,
                float(gne.residual_u[-1]),
                float(gne.residual_lam[-1]),
                float(gne.feasibility_max),
                group_expected_cost(view, gne.u_star),
            ]
        )

    import csv

    with open(os.path.join(args.out_dir, "iterates.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "residual_u", "residual_lam", "feasibility_max", "objective_total"])
        for row in log_rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])

    write_discharge_profiles(os.path.join(args.out_dir, "discharge_profiles.csv"), [result])
    write_grid_exchange(os.path.join(args.out_dir, "grid_exchange.csv"), [result])
    _write_margins(os.path.join(args.out_dir, "margins.csv"), cc.margins)
    _write_multipliers(os.path.join(args.out_dir, "multipliers.csv"), cc, gne.lam_star)
    _write_solve_summary(os.path.join(args.out_dir, "summary.csv"), result, config)
    _write_manifest(
        os.path.join(args.out_dir, "manifest.txt"), args, config, [args.mode], args.algorithm
    )

    print(
        f"mode={args.mode} converged={gne.converged} iterations={gne.iterations} "
        f"fixed_point_residual={gne.fixed_point_residual:.3e} "
        f"feasibility_max={gne.feasibility_max:.3e}"
    )
    audits_pass = (
        gne.converged
        and gne.fixed_point_residual <= FEASIBILITY_TOL
        and gne.feasibility_max <= FEASIBILITY_TOL
    )
    return EXIT_OK if audits_pass else EXIT_NO_CONVERGENCE


def cmd_compare(args: argparse.Namespace) -> int:
    config = _load_valid_config(args)
    if isinstance(config, int):
        return config
    os.makedirs(args.out_dir, exist_ok=True)
    _warn_if_lipschitz_low(config)

    results = []
    try:
        for mode in MODES:
            result = run_mode(config, mode, allow_nonslater=args.allow_nonslater)
            results.append(result)
            print(
                f"mode={mode} converged={result.gne.converged} "
                f"iterations={result.gne.iterations}"
            )
    except InfeasibleInstanceError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    stochastic = next(r for r in results if r.mode == "stochastic")
    violations = montecarlo_validate(
        config,
        stochastic.gne.u_star,
        config.experiment.samples_validate,
        config.experiment.seed,
        threads=args.threads,
    )
    hist = montecarlo_costs(
        config,
        results,
        config.experiment.samples_histogram,
        config.experiment.seed,
        threads=args.threads,
    )

    write_discharge_profiles(os.path.join(args.out_dir, "discharge_profiles.csv"), results)
    write_grid_exchange(os.path.join(args.out_dir, "grid_exchange.csv"), results)
    write_violations(os.path.join(args.out_dir, "violations.csv"), violations)
    write_costs(os.path.join(args.out_dir, "costs.csv"), hist)
    write_compare_summary(os.path.join(args.out_dir, "summary.csv"), results, hist)
    _write_manifest(
        os.path.join(args.out_dir, "manifest.txt"), args, config, list(MODES), "semi"
    )

    for mode in MODES:
        print(f"mean_cost[{mode}]={hist.means[mode]:.6f}")
    if not all(r.gne.converged for r in results):
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    config = _apply_overrides(config, args)
    report = validate(config)
    if not report.valid:
        for violation in report.violations:
            print(f"invalid: {violation}")
        return EXIT_CONFIG
    from .constraints import feasibility_search

    cc = build_coupling(config, None, "stochastic")
    feas = feasibility_search(cc, local_box(config), config.n_agents)
    print("OK")
    print(
        f"strictly_feasible={feas.strictly_feasible} "
        f"max_violation={feas.max_violation:.3e} iterations={feas.iterations}"
    )
    if not feas.strictly_feasible and not args.allow_nonslater:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_dump_constraints(args: argparse.Namespace) -> int:
    config = _load_valid_config(args)
    if isinstance(config, int):
        return config
    os.makedirs(args.out_dir, exist_ok=True)
    view = mode_view(config, args.mode)
    cc = build_coupling(view, None, args.mode)
    labels = cc.row_labels()
    margins = cc.margins.stacked()

    import csv

    path = os.path.join(args.out_dir, "constraints.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["row", "block", "b", "margin"] + [f"a_t{t}" for t in range(cc.horizon)]
        )
        for index in range(cc.n_rows):
            writer.writerow(
                [index, labels[index], repr(float(cc.b_vector[index])), repr(float(margins[index]))]
                + [repr(float(v)) for v in cc.a_matrix[index]]
            )
    print(f"wrote {cc.n_rows} constraint rows to {path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "compare": cmd_compare,
        "validate": cmd_validate,
        "dump-constraints": cmd_dump_constraints,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
