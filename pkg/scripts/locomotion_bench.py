#!/usr/bin/env python3
"""Compare multi-objective training against a forward-only baseline on the
planar locomotion task and emit the side-by-side value table plus a
trade-off explanation for the multi-objective policy.

Usage: python scripts/locomotion_bench.py [--seed N] [--out DIR]
"""

import argparse
import sys
import tempfile
from pathlib import Path

from morlkit.cli import main as cli_main

CONFIG = """\
trainer.objective_count=4
trainer.updates_per_objective=8
trainer.steps_per_update=1024
trainer.env_copies=2
trainer.epochs_per_update=10
trainer.minibatch_size=64
trainer.discount=0.99
env.kind=locomotion
bench.objective_index=3
bench.episodes=10
explain.0.increment=2.0
explain.0.max_value=100.0
explain.0.max_alternatives=2
explain.1.increment=1.0
explain.1.max_value=100.0
explain.1.max_alternatives=2
explain.2.increment=5.0
explain.2.max_value=400.0
explain.2.max_alternatives=2
explain.3.increment=2.0
explain.3.max_value=100.0
explain.3.max_alternatives=2
"""


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="runs/locomotion_bench")
    args = parser.parse_args()

    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(CONFIG + f"seed={args.seed}\n")
        cfg_path = fh.name
    code = cli_main(["bench", "--config", cfg_path, "--out", args.out])
    if code != 0:
        return code

    explanation = Path(args.out) / "explanation.txt"
    code = cli_main(
        ["explain", str(Path(args.out) / "multi"), "--episodes", "5", "--out", str(explanation)]
    )
    if code == 0:
        print()
        print(explanation.read_text())
    return code


if __name__ == "__main__":
    sys.exit(main())
