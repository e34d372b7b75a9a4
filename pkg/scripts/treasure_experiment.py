#!/usr/bin/env python3
"""Train the two-objective treasure hunt and print the improvement curve.

Writes a full run directory (metrics, relationship matrix, coverage set,
checkpoints) under --out and prints the per-update relative-improvement
column so convergence is visible at a glance.

Usage: python scripts/treasure_experiment.py [--seed N] [--out DIR]
"""

import argparse
import sys
import tempfile
from pathlib import Path

from morlkit.cli import main as cli_main

CONFIG = """\
trainer.objective_count=2
trainer.updates_per_objective=20
trainer.steps_per_update=512
trainer.env_copies=1
trainer.epochs_per_update=10
trainer.minibatch_size=64
trainer.discount=0.95
env.kind=treasure
env.width=3
env.height=3
env.treasures=0,2,3.0;2,2,12.0
env.horizon=10
"""


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="runs/treasure")
    args = parser.parse_args()

    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(CONFIG + f"seed={args.seed}\n")
        cfg_path = fh.name
    code = cli_main(["train", "--config", cfg_path, "--out", args.out])
    if code != 0:
        return code

    print("\nupdate  objective  delta_r")
    for line in (Path(args.out) / "delta_r.csv").read_text().splitlines()[1:]:
        update, objective, _, delta_r = line.split(",")
        print(f"{update:>6}  {objective:>9}  {float(delta_r):.6f}")
    print("\nevaluation:")
    return cli_main(["eval", args.out, "--episodes", "10"])


if __name__ == "__main__":
    sys.exit(main())
