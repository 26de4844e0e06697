"""Scatter statistics for multi- vs single-edge cuts from one or more bench CSVs.

    python scripts/compare_cut_modes.py runs/desk/runs.csv [runs/desk_uniform/runs.csv ...]

For each CSV prints the solved-pair count, the share of pairs where the
multi-edge plan is no more expensive, both mean costs and the largest gaps,
and saves a PNG scatter next to the CSV when matplotlib is installed.
"""

import statistics
import sys
from pathlib import Path

from bcprm.cli import cost_pairs, read_csv


def report(path: Path):
    rows = read_csv(path)
    pairs = cost_pairs(rows)
    if not pairs:
        print(f"{path}: no pair solved in both modes")
        return
    le = sum(m <= s + 1e-6 for _, _, s, m in pairs)
    ms = statistics.fmean(s for _, _, s, _ in pairs)
    mm = statistics.fmean(m for _, _, _, m in pairs)
    print(f"{path}: {len(pairs)} pairs, multi <= single in {le} ({le / len(pairs):.0%}), "
          f"mean single {ms:.3f}, mean multi {mm:.3f}, median ratio "
          f"{statistics.median(m / s for _, _, s, m in pairs):.3f}")
    gaps = sorted(pairs, key=lambda p: p[3] - p[2])
    for inst, seed, s, m in gaps[:3] + gaps[-3:]:
        print(f"  {inst} seed {seed}: single {s:.3f}  multi {m:.3f}")
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots(figsize=(4, 4))
    xs, ys = [p[2] for p in pairs], [p[3] for p in pairs]
    ax.scatter(xs, ys, s=10)
    hi = max(xs + ys)
    ax.plot([0, hi], [0, hi], "k--", lw=0.8)
    ax.set_xlabel("single-edge cut cost")
    ax.set_ylabel("multi-edge cut cost")
    fig.tight_layout()
    fig.savefig(path.with_name("pairs_scatter.png"), dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    for p in sys.argv[1:] or ["runs/desk/runs.csv"]:
        report(Path(p))
