"""Synthetic occupancy-grid instances in the spirit of BARN maps.

Random noise smoothed by a cellular automaton; the start cell sits at the
bottom center and the goal at the top center of every map.  Maps whose start
and goal are not 4-connected through free cells are regenerated.
"""

from __future__ import annotations

import json
from collections import deque
from fractions import Fraction
from pathlib import Path

import numpy as np

from .geometry import GoalRegion, Instance, Workspace, grid_to_polytopes, instance_to_dict

DEFAULT_CLEARANCE = Fraction(1, 4)


def start_goal_cells(rows: int, cols: int) -> tuple[tuple[int, int], tuple[int, int]]:
    c = cols // 2
    return (1, c), (rows - 2, c)


def smooth(grid: np.ndarray, steps: int) -> np.ndarray:
    g = grid.astype(np.int8)
    for _ in range(steps):
        p = np.pad(g, 1)
        n = sum(
            p[1 + di:1 + di + g.shape[0], 1 + dj:1 + dj + g.shape[1]]
            for di in (-1, 0, 1)
            for dj in (-1, 0, 1)
            if di or dj
        )
        g = np.where(n >= 5, 1, np.where(n <= 2, 0, g)).astype(np.int8)
    return g


def connected(grid: np.ndarray, a, b) -> bool:
    rows, cols = grid.shape
    if grid[a] or grid[b]:
        return False
    seen = np.zeros_like(grid, dtype=bool)
    seen[a] = True
    queue = deque([a])
    while queue:
        i, j = queue.popleft()
        if (i, j) == b:
            return True
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            u, v = i + di, j + dj
            if 0 <= u < rows and 0 <= v < cols and not grid[u, v] and not seen[u, v]:
                seen[u, v] = True
                queue.append((u, v))
    return False


def generate_grid(rows: int, cols: int, density: float, rng, steps: int = 2, max_tries: int = 1000) -> np.ndarray:
    if not 0 <= density < 1:
        raise ValueError("density must lie in [0, 1)")
    s, g = start_goal_cells(rows, cols)
    for _ in range(max_tries):
        grid = (rng.random((rows, cols)) < density).astype(np.int8)
        grid = smooth(grid, steps) if density > 0 else grid
        for (ci, cj) in (s, g):
            grid[max(ci - 1, 0):ci + 2, max(cj - 1, 0):cj + 2] = 0
        if connected(grid, s, g):
            return grid
    raise RuntimeError("could not generate a connected map")


def make_instance(grid: np.ndarray, resolution=1, clearance=DEFAULT_CLEARANCE, name: str = "") -> Instance:
    resolution = Fraction(resolution)
    rows, cols = grid.shape
    cells = grid.astype(int).tolist()
    polys = grid_to_polytopes(cells, resolution)
    ws = Workspace((0, 0), (cols * resolution, rows * resolution), polys, [Fraction(clearance)] * len(polys), resolution)
    (si, sj), (gi, gj) = start_goal_cells(rows, cols)
    q0 = ((sj + Fraction(1, 2)) * resolution, (si + Fraction(1, 2)) * resolution)
    goal = GoalRegion(
        ((gj - Fraction(1, 2)) * resolution, (gi - Fraction(1, 2)) * resolution),
        ((gj + Fraction(3, 2)) * resolution, (gi + Fraction(3, 2)) * resolution),
    )
    return Instance(ws, q0, goal, cells, name)


def gen_instances(count: int, size: int = 30, density: float = 0.35, seed: int = 0, steps: int = 2,
                  resolution=1, clearance=DEFAULT_CLEARANCE) -> list[Instance]:
    rng = np.random.default_rng(seed)
    return [
        make_instance(generate_grid(size, size, density, rng, steps), resolution, clearance, name=f"inst_{k:03d}")
        for k in range(count)
    ]


def write_instances(instances: list[Instance], out_dir, clearance=DEFAULT_CLEARANCE) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for inst in instances:
        p = out / f"{inst.name}.json"
        p.write_text(json.dumps(instance_to_dict(inst, clearance)))
        paths.append(p)
    return paths
