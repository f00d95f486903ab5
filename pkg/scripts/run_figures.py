"""Run the checked-in sweep configs and write one CSV per config.

    python3 scripts/run_figures.py --threads 4 --outdir results
"""

import argparse
import logging
import sys
from pathlib import Path

from ltsgsprt.cli import main

ROOT = Path(__file__).resolve().parent.parent


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("configs", nargs="*", type=Path,
                   default=sorted((ROOT / "configs").glob("fig*.toml")))
    p.add_argument("--outdir", type=Path, default=ROOT / "results")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p.parse_args(argv)


def run(args):
    args.outdir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for cfg in args.configs:
        target = args.outdir / f"{cfg.stem}.{args.format}"
        code = main(["-v", "run", str(cfg), "-o", str(target), "--threads", str(args.threads),
                     "--format", args.format])
        logging.getLogger("ltsgsprt").info("%s -> %s (exit %d)", cfg.name, target, code)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run(parse_args()))
