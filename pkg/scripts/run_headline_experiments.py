#!/usr/bin/env python3
"""Run the shipped headline experiments and summarize their gates.

Each config writes its report and series under runs/; the script exits
nonzero if any experiment's gate fails.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from ergomix.cli import main  # noqa: E402

CONFIGS = [
    "configs/ruelle_cat.cfg",
    "configs/ruelle_baker.cfg",
    "configs/lyapunov_steady_shear.cfg",
    "configs/mixing_alternating.cfg",
    "configs/regularity_alternating.cfg",
]


def run_all():
    root = pathlib.Path(__file__).resolve().parents[1]
    worst = 0
    for name in CONFIGS:
        path = root / name
        print(f"=== {name} ===")
        code = main(["run", str(path)])
        print(f"exit code {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run_all())
