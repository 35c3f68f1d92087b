#!/usr/bin/env python3
"""Run the three-mode comparison on the bundled reference scenario.

Solves the stochastic game plus both deterministic baselines for the
20-agent, 24-hour example config, runs the Monte Carlo audits, writes the
CSV bundle, and prints the headline ordering (peak grid exchange and mean
realized cost per mode).
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO_ROOT / "src"))

from gridgame.cli import main as cli_main  # noqa: E402

REFERENCE_CONFIG = REPO_ROOT / "examples" / "paper_sec6.cfg"


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out-dir",
        default=str(REPO_ROOT / "out" / "reference"),
        help="directory for the CSV bundle",
    )
    parser.add_argument(
        "--samples", type=int, default=None, help="override Monte Carlo sample counts"
    )
    parser.add_argument("--seed", type=int, default=None, help="override experiment seed")
    parser.add_argument("--threads", type=int, default=1, help="Monte Carlo worker threads")
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    cli_argv = [
        "compare",
        "--config",
        str(REFERENCE_CONFIG),
        "--out-dir",
        args.out_dir,
        "--threads",
        str(args.threads),
    ]
    if args.samples is not None:
        cli_argv += ["--samples", str(args.samples)]
    if args.seed is not None:
        cli_argv += ["--seed", str(args.seed)]
    code = cli_main(cli_argv)
    if code != 0:
        return code

    summary_path = Path(args.out_dir) / "summary.csv"
    with open(summary_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"\nwrote {summary_path}")
    header = (
        f"{'mode':<12} {'peak exchange':>14} {'peak planned':>13} "
        f"{'mean cost':>14} {'iterations':>11}"
    )
    print(header)
    print("-" * len(header))
    for row in rows:
        print(
            f"{row['mode']:<12} {float(row['peak_grid_exchange']):>14.3f} "
            f"{float(row['peak_grid_exchange_planned']):>13.3f} "
            f"{float(row['mean_cost']):>14.1f} {row['iterations']:>11}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
