"""Regime sweep over the epsilon grid of configs/regime_sweep.json.

Writes report.csv, jobs.csv, one CSV and one SVG section per epsilon, and a
manifest into the output directory (default: runs/regime_sweep).
"""

import argparse
import sys
from pathlib import Path

from torireform.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-dir", default=str(ROOT / "runs" / "regime_sweep"))
    parser.add_argument("--workers", default="1")
    args = parser.parse_args()
    sys.exit(main(["sweep", "--config", str(ROOT / "configs" / "regime_sweep.json"),
                   "--output-dir", args.output_dir, "--workers", args.workers]))
