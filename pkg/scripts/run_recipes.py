"""Regenerate plot data for every recipe in configs/.

    python3 scripts/run_recipes.py [--output-root out] [names ...]

Each recipe writes points.csv, trajectory.csv and report.json into
<output-root>/<recipe name>.
"""
import argparse
import sys
from pathlib import Path

from greedy_energy.cli import main as cli_main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="recipe names, e.g. interval_s0 radial (default: all)")
    ap.add_argument("--output-root", default="out")
    args = ap.parse_args(argv)
    paths = sorted(CONFIGS.glob("*.cfg"))
    if args.names:
        paths = [CONFIGS / f"{n}.cfg" for n in args.names]
    status = 0
    for path in paths:
        code = cli_main(["run", str(path), "--output-dir", str(Path(args.output_root) / path.stem)])
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
