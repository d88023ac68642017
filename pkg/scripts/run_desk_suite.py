#!/usr/bin/env python3
"""
Run the desk-scale experiment suite: fit, report, certify and Monte Carlo.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from services.cli import dispatch  # noqa: E402

STAGES = [
    ("configs/twolink.yml", ["fit", "report", "certify"]),
    ("configs/softrobot.yml", ["fit", "report"]),
    ("configs/montecarlo.yml", ["fit", "montecarlo"]),
]


def run_suite(out_root: str = "runs/desk") -> int:
    """Run every stage in order and stop at the first failure."""
    for config, verbs in STAGES:
        out = Path(out_root) / Path(config).stem
        for verb in verbs:
            print(f"== {verb} {config}")
            argv = [verb, "--config", str(project_root / config), "--out", str(out)]
            code = dispatch(argv)
            if code != 0:
                print(f"❌ {verb} failed for {config} (exit {code})")
                return code
    print("✅ desk suite finished")
    return 0


if __name__ == "__main__":
    sys.exit(run_suite(*sys.argv[1:2]))
