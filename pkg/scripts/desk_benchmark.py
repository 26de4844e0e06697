"""Generate the 20-instance desk corpus and run it in both cut modes.

    python scripts/desk_benchmark.py --out runs/desk [--timeout 60] [--workers 1]

Writes instances/, runs.csv, coverage.csv, pairs.csv and summary.json under --out
by delegating to the ``bcprm gen`` and ``bcprm bench`` subcommands.
"""

import argparse
import sys
from pathlib import Path

from bcprm.cli import main


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/desk")
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--timeout", type=float, default=60.0)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 42, 567])
    ap.add_argument("--sampler", choices=("uniform", "halton"), default="halton")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    out = Path(args.out)
    code = main(["gen", "--count", str(args.count), "--size", "30", "--density", "0.35",
                 "--seed", "0", "--out", str(out / "instances")])
    if code:
        return code
    return main(["bench", "--instances", str(out / "instances"), "--seeds", *map(str, args.seeds),
                 "--cut-modes", "multi", "single", "--timeout", str(args.timeout),
                 "--sampler", args.sampler, "--workers", str(args.workers), "--out", str(out)])


if __name__ == "__main__":
    sys.exit(run())
