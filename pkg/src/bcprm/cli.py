"""Command-line entry point: plan, gen, bench, render.

    python -m bcprm plan --instance map.json --seed 42 --timeout 60 --out result.json
    python -m bcprm gen --count 20 --size 30 --density 0.35 --seed 0 --out instances/
    python -m bcprm bench --instances instances/ --seeds 1 42 567 --cut-modes multi single --out runs/
    python -m bcprm render --instance map.json --result result.json --svg map.svg
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import statistics
import sys
import tempfile
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

import numpy as np

from .exactnum import DomainError
from .geometry import Instance, Workspace, load_instance
from .instances import gen_instances, write_instances
from .planner import PlannerConfig, PlannerResult, plan
from .spline import SmoothPlan
from .validate import dense_validate

EXIT_SOLVED, EXIT_ERROR, EXIT_TIMEOUT, EXIT_OOM = 0, 1, 2, 3
SVG_SAMPLES_PER_PIECE = 64
CSV_FIELDS = [
    "instance", "seed", "cut_mode", "sampler", "status", "cost", "time_to_first", "total_time",
    "iterations", "geometric_cuts", "kinematic_cuts", "pieces", "vertices", "edges", "valid", "solutions", "error",
]


def write_atomic(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def with_clearance(inst: Instance, clearance) -> Instance:
    ws = inst.workspace
    c = Fraction(clearance)
    ws2 = Workspace(ws.lo, ws.hi, list(ws.obstacles), [c] * len(ws.obstacles), ws.resolution)
    return Instance(ws2, inst.q0, inst.goal, inst.grid, inst.name)


def memory_guard(megabytes: int | None):
    """Cap the address space so runaway searches fail with MemoryError (best effort)."""
    if not megabytes:
        return
    try:
        import resource

        limit = megabytes * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (limit, resource.getrlimit(resource.RLIMIT_AS)[1]))
    except (ImportError, ValueError, OSError):
        pass


def config_from_args(args, seed: int | None = None, cut_mode: str | None = None) -> PlannerConfig:
    return PlannerConfig(
        seed=args.seed if seed is None else seed,
        deadline=args.timeout,
        sampler=args.sampler,
        cut_mode=args.cut_mode if cut_mode is None else cut_mode,
        seed_state=args.seed_state,
        phi_max=args.phi_max,
        anytime=args.anytime,
    )


def run_instance(inst: Instance, cfg: PlannerConfig) -> PlannerResult:
    return plan(inst.workspace, inst.q0, inst.goal, cfg)


def exit_code(status: str) -> int:
    return {"solved": EXIT_SOLVED, "oom": EXIT_OOM}.get(status, EXIT_TIMEOUT)


# --- plan ------------------------------------------------------------------------


def cmd_plan(args) -> int:
    try:
        inst = load_instance(args.instance)
        if args.clearance is not None:
            inst = with_clearance(inst, args.clearance)
        cfg = config_from_args(args)
    except (OSError, ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    memory_guard(args.memory_mb)
    try:
        res = run_instance(inst, cfg)
    except (ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = res.to_json()
    out["instance"] = inst.name
    out["config"] = {k: v for k, v in asdict(cfg).items() if k != "polynomial_constraints"}
    text = json.dumps(out, indent=1)
    if args.out:
        write_atomic(args.out, text)
    else:
        print(text)
    if args.roadmap_dump and res.roadmap is not None:
        write_atomic(args.roadmap_dump, json.dumps(res.roadmap.to_json()))
    if args.svg:
        write_atomic(args.svg, render_svg(inst, res.plan, res.geometric.waypoints if res.geometric else None,
                                          res.roadmap if args.svg_roadmap else None))
    print(f"{inst.name}: {res.status} cost={res.cost} iterations={res.iterations}", file=sys.stderr)
    return exit_code(res.status)


# --- gen -------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if not 0 <= args.density < 1:
        print("error: density must lie in [0, 1)", file=sys.stderr)
        return EXIT_ERROR
    insts = gen_instances(args.count, args.size, args.density, args.seed, clearance=Fraction(args.clearance))
    for p in write_instances(insts, args.out, Fraction(args.clearance)):
        print(p)
    return EXIT_SOLVED


# --- bench -----------------------------------------------------------------------


def bench_row(path: str, seed: int, cut_mode: str, cfg_kwargs: dict) -> dict:
    """One isolated run; failures become rows instead of exceptions."""
    row = {k: "" for k in CSV_FIELDS}
    row.update(instance=Path(path).stem, seed=seed, cut_mode=cut_mode, sampler=cfg_kwargs.get("sampler", "halton"))
    try:
        inst = load_instance(path)
        if cfg_kwargs.get("clearance") is not None:
            inst = with_clearance(inst, cfg_kwargs["clearance"])
        kw = {k: v for k, v in cfg_kwargs.items() if k not in ("clearance", "results_dir")}
        res = run_instance(inst, PlannerConfig(seed=seed, cut_mode=cut_mode, **kw))
    except Exception as exc:  # recorded, never aborts the batch
        row.update(status="error", error=repr(exc))
        return row
    row.update(
        status=res.status,
        cost="" if res.cost is None else repr(res.cost),
        time_to_first="" if res.time_to_first is None else f"{res.time_to_first:.6f}",
        total_time=f"{res.total_time:.6f}",
        iterations=res.iterations,
        geometric_cuts=res.cuts["geometric"],
        kinematic_cuts=res.cuts["kinematic"],
        pieces="" if res.plan is None else res.plan.n_pieces,
        vertices=res.n_vertices,
        edges=res.n_edges,
        solutions=";".join(f"{t:.6f}:{c!r}" for t, c in res.solutions),
    )
    if res.plan is not None:
        row["valid"] = int(dense_validate(res.plan, inst.workspace, kw.get("phi_max", math.pi / 2)).ok)
    if cfg_kwargs.get("results_dir"):
        out = res.to_json()
        out["instance"] = inst.name
        write_atomic(Path(cfg_kwargs["results_dir"]) / f"{inst.name}_{cut_mode}_{seed}.json", json.dumps(out))
    return row


def _bench_task(task):
    return bench_row(*task)


def _worker_init(memory_mb):
    memory_guard(memory_mb)


def run_bench(paths, seeds, cut_modes, cfg_kwargs: dict, workers: int = 1, memory_mb: int | None = None,
              progress=None) -> list[dict]:
    tasks = [(str(p), s, m, cfg_kwargs) for m in cut_modes for p in paths for s in seeds]
    if workers <= 1:
        rows = []
        for t in tasks:
            rows.append(bench_row(*t))
            if progress:
                progress(rows[-1])
        return rows
    import multiprocessing as mp

    with mp.get_context("spawn").Pool(workers, initializer=_worker_init, initargs=(memory_mb,)) as pool:
        rows = []
        for row in pool.imap(_bench_task, tasks):
            rows.append(row)
            if progress:
                progress(row)
    return rows


def write_csv(rows: list[dict], path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        w.writerows(rows)


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def coverage(rows: list[dict]) -> list[tuple[float, int]]:
    """Cumulative number of runs with a first solution by each time."""
    times = sorted(float(r["time_to_first"]) for r in rows if r["time_to_first"] not in ("", None))
    return [(t, i + 1) for i, t in enumerate(times)]


def cost_pairs(rows: list[dict]) -> list[tuple[str, str, float, float]]:
    """(instance, seed, single cost, multi cost) for pairs solved in both modes."""
    by = {}
    for r in rows:
        if r["status"] == "solved" and r["cost"] not in ("", None):
            by[(r["instance"], str(r["seed"]), r["cut_mode"])] = float(r["cost"])
    out = []
    for (inst, seed, mode), c in sorted(by.items()):
        if mode == "single" and (inst, seed, "multi") in by:
            out.append((inst, seed, c, by[(inst, seed, "multi")]))
    return out


def summarize(rows: list[dict]) -> dict:
    """Aggregate statistics computed only from CSV rows."""
    out = {}
    for mode in sorted({r["cut_mode"] for r in rows}):
        rs = [r for r in rows if r["cut_mode"] == mode]
        solved = [r for r in rs if r["status"] == "solved"]
        ttf = [float(r["time_to_first"]) for r in solved]
        costs = [float(r["cost"]) for r in solved]
        pieces = [int(r["pieces"]) for r in solved]
        out[mode] = {
            "runs": len(rs),
            "solved": len(solved),
            "solve_rate": len(solved) / len(rs) if rs else 0.0,
            "statuses": {s: sum(r["status"] == s for r in rs) for s in sorted({r["status"] for r in rs})},
            "median_time_to_first": statistics.median(ttf) if ttf else None,
            "mean_cost": statistics.fmean(costs) if costs else None,
            "valid": sum(str(r["valid"]) == "1" for r in solved),
            "pieces_le6": sum(p <= 6 for p in pieces) / len(pieces) if pieces else None,
            "min_pieces": min(pieces) if pieces else None,
        }
    pairs = cost_pairs(rows)
    if pairs:
        out["pairs"] = {
            "count": len(pairs),
            "multi_le_single": sum(m <= s + 1e-6 for _, _, s, m in pairs) / len(pairs),
            "mean_single": statistics.fmean(s for _, _, s, _ in pairs),
            "mean_multi": statistics.fmean(m for _, _, _, m in pairs),
        }
    return out


def cmd_bench(args) -> int:
    src = Path(args.instances)
    paths = sorted(src.glob("*.json")) if src.is_dir() else []
    if not paths:
        print(f"error: no instance files in {src}", file=sys.stderr)
        return EXIT_ERROR
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg_kwargs = {
        "deadline": args.timeout, "sampler": args.sampler, "seed_state": args.seed_state,
        "phi_max": args.phi_max, "anytime": args.anytime, "clearance": args.clearance,
        "results_dir": str(out / "results") if args.keep_results else None,
    }

    def progress(r):
        print(f"{r['instance']} seed={r['seed']} {r['cut_mode']}: {r['status']} {r['cost']}", file=sys.stderr)

    rows = run_bench(paths, args.seeds, args.cut_modes, cfg_kwargs, args.workers, args.memory_mb, progress)
    write_csv(rows, out / "runs.csv")
    rows = read_csv(out / "runs.csv")
    with open(out / "coverage.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cut_mode", "time", "solved"])
        for mode in args.cut_modes:
            for t, n in coverage([r for r in rows if r["cut_mode"] == mode]):
                w.writerow([mode, f"{t:.6f}", n])
    with open(out / "pairs.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance", "seed", "single_cost", "multi_cost"])
        w.writerows(cost_pairs(rows))
    summary = summarize(rows)
    write_atomic(out / "summary.json", json.dumps(summary, indent=1))
    print(json.dumps(summary, indent=1))
    return EXIT_SOLVED


# --- render ----------------------------------------------------------------------


def polygon_2d(constraints, lo, hi) -> list[tuple[float, float]]:
    """Vertices of ``{x : a.x + b <= 0}`` clipped to the box, by successive half-plane clipping."""
    pts = [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]
    for g in constraints:
        a0, a1, b = float(g.a[0]), float(g.a[1]), float(g.b)
        f = [a0 * x + a1 * y + b for x, y in pts]
        nxt = []
        for i, p in enumerate(pts):
            q, fp, fq = pts[(i + 1) % len(pts)], f[i], f[(i + 1) % len(pts)]
            if fp <= 0:
                nxt.append(p)
            if (fp < 0 < fq) or (fq < 0 < fp):
                s = fp / (fp - fq)
                nxt.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
        pts = nxt
        if not pts:
            break
    return pts


def render_svg(inst: Instance, smooth: SmoothPlan | None = None, waypoints=None, roadmap=None,
               scale: float = 20.0) -> str:
    ws = inst.workspace
    if ws.dim != 2:
        raise DomainError("rendering supports planar instances only")
    lo = [float(v) for v in ws.lo]
    hi = [float(v) for v in ws.hi]
    pad = 1.0
    big_lo = [l - pad for l in lo]
    big_hi = [h + pad for h in hi]
    W, H = (hi[0] - lo[0]) * scale, (hi[1] - lo[1]) * scale

    def xy(p):
        return f"{(p[0] - lo[0]) * scale:.3f},{(hi[1] - p[1]) * scale:.3f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}" viewBox="0 0 {W:.3f} {H:.3f}">',
        f'<rect class="bounds" x="0" y="0" width="{W:.3f}" height="{H:.3f}" fill="white" stroke="black"/>',
    ]
    for poly in ws.expanded:
        pts = polygon_2d(poly.constraints, big_lo, big_hi)
        parts.append(f'<polygon class="expanded" points="{" ".join(xy(p) for p in pts)}" fill="none" stroke="#e9a" stroke-dasharray="3,2"/>')
    for poly in ws.obstacles:
        pts = polygon_2d(poly.constraints, big_lo, big_hi)
        parts.append(f'<polygon class="obstacle" points="{" ".join(xy(p) for p in pts)}" fill="#555"/>')
    g = inst.goal
    glo, ghi = [float(v) for v in g.lo], [float(v) for v in g.hi]
    parts.append(f'<rect class="goal" x="{(glo[0] - lo[0]) * scale:.3f}" y="{(hi[1] - ghi[1]) * scale:.3f}" '
                 f'width="{(ghi[0] - glo[0]) * scale:.3f}" height="{(ghi[1] - glo[1]) * scale:.3f}" fill="#9d9" fill-opacity="0.5"/>')
    if roadmap is not None:
        for u, v in roadmap.edges:
            parts.append(f'<polyline class="roadmap" points="{xy(roadmap.vf[u])} {xy(roadmap.vf[v])}" stroke="#bbb" stroke-width="0.5"/>')
    if smooth is not None:
        ts = np.linspace(0.0, 1.0, SVG_SAMPLES_PER_PIECE)
        pts = []
        for k, piece in enumerate(smooth.pieces):
            for t in ts[1:] if k else ts:
                pts.append(piece.eval_float(float(t)))
        parts.append(f'<polyline class="spline" points="{" ".join(xy(p) for p in pts)}" fill="none" stroke="#27c" stroke-width="1.5"/>')
    if waypoints is not None:
        for q in waypoints:
            x, y = xy([float(v) for v in q]).split(",")
            parts.append(f'<circle class="waypoint" cx="{x}" cy="{y}" r="2.5" fill="#c22"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_render(args) -> int:
    try:
        inst = load_instance(args.instance)
        smooth = waypoints = None
        if args.result:
            data = json.loads(Path(args.result).read_text())
            if data.get("plan"):
                smooth = SmoothPlan.from_json(data["plan"])
            if data.get("waypoints"):
                waypoints = [[Fraction(v) for v in q] for q in data["waypoints"]]
        write_atomic(args.svg, render_svg(inst, smooth, waypoints))
    except (OSError, ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_SOLVED


# --- argument parsing ---------------------------------------------------------------


def _planner_flags(p: argparse.ArgumentParser):
    p.add_argument("--timeout", type=float, default=60.0, help="wall-clock budget in seconds")
    p.add_argument("--sampler", choices=("uniform", "halton"), default="halton")
    p.add_argument("--seed-state", choices=("barycenter", "bk"), default="barycenter")
    p.add_argument("--phi-max", type=float, default=math.pi / 2)
    p.add_argument("--clearance", type=Fraction, default=None, help="override every obstacle clearance")
    p.add_argument("--anytime", action="store_true")
    p.add_argument("--memory-mb", type=int, default=4096, help="address-space cap; 0 disables")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bcprm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("plan", help="plan on one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--cut-mode", choices=("single", "multi"), default="multi")
    _planner_flags(p)
    p.add_argument("--out", help="result JSON path (default: stdout)")
    p.add_argument("--svg", help="also render the result")
    p.add_argument("--svg-roadmap", action="store_true", help="draw the roadmap in the SVG")
    p.add_argument("--roadmap-dump", help="write the final roadmap as JSON")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("gen", help="generate occupancy-grid instances")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--size", type=int, default=30)
    p.add_argument("--density", type=float, default=0.35)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clearance", type=Fraction, default=Fraction(1, 4))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="instance x seed matrix to CSV")
    p.add_argument("--instances", required=True, help="directory of instance JSON files")
    p.add_argument("--seeds", type=int, nargs="+", default=[1, 42, 567])
    p.add_argument("--cut-modes", nargs="+", choices=("single", "multi"), default=["multi"])
    _planner_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--keep-results", action="store_true", help="write per-run result JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="SVG of an instance and optional result")
    p.add_argument("--instance", required=True)
    p.add_argument("--result")
    p.add_argument("--svg", required=True)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
