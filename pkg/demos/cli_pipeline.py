"""Drive the batch CLI end to end from Python.

Runs the shipped phase-boundary config into a scratch directory, reads the
manifest back, and prints the fitted threshold exponents per bath exponent.
Equivalent shell usage:

    openaqs critical --config configs/phase_boundary.toml --workers 4
"""

import csv
import json
import sys
import tempfile
from pathlib import Path

from openaqs import cli

config = Path(__file__).resolve().parent.parent / "configs" / "phase_boundary.toml"

with tempfile.TemporaryDirectory() as scratch:
    out = Path(scratch) / "boundary.csv"
    code = cli.main(
        ["critical", "--config", str(config), "--output", str(out), "--workers", "4"]
    )
    if code != 0:
        sys.exit(code)

    manifest = json.loads(out.with_suffix(".manifest.json").read_text())
    print(f"subcommand: {manifest['subcommand']}")
    print(f"workers:    {manifest['workers']}")
    print(f"wall time:  {manifest['wall_time_s']:.2f}s")
    print(f"artifacts:  {', '.join(Path(a).name for a in manifest['artifacts'])}")

    with out.with_suffix(".fit.csv").open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    print("\nthreshold exponent by bath exponent:")
    for row in rows:
        print(f"  eta {float(row['eta']):.1f}: slope {float(row['exponent']):+.4f} "
              f"(r^2 {float(row['r_squared']):.5f})")
