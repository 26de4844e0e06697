"""Lazy PRM as branch-and-cut: roadmap growth, cut-constrained paths, exact plan checks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cmcp import Cut, SearchAborted, solve_cmcp, solve_mcp
from .exactnum import dyadic_approx
from .geometry import GoalRegion, Workspace, point_free
from .kinematics import (
    DifferentialConstraintSet,
    check_curvature,
    check_polynomial_constraints,
    edge_window,
    kinematic_cut,
)
from .polytrace import CurvePiece, intersects_polytope
from .roadmap import (
    REJECTION_BUDGET,
    Roadmap,
    SamplerStarved,
    SamplerState,
    connection_radius,
    default_r_min,
    grow,
    sample,
)
from .spline import GeometricPlan, SmoothPlan, fit

GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass
class PlannerConfig:
    seed: int = 1
    deadline: float = 500.0
    initial_vertices: int = 20
    vertices_per_round: int = 10
    directed_per_round: int = 5
    sampler: str = "halton"
    cut_mode: str = "multi"  # "multi" | "single"
    seed_state: str = "barycenter"  # "barycenter" | "bk"
    phi_max: float = math.pi / 2
    polynomial_constraints: tuple = ()
    anytime: bool = False
    dedup: str = "dominance"
    node_limit: int = 2_000_000
    # search effort after which a constrained solve counts as undecided and the roadmap grows
    cmcp_budget: int | None = 2_000

    def __post_init__(self):
        if self.initial_vertices < 2 or self.vertices_per_round < 1:
            raise ValueError("vertex budgets must be positive")
        if not 0 <= self.directed_per_round <= self.vertices_per_round:
            raise ValueError("directed split must not exceed the per-round count")
        if self.cut_mode not in ("multi", "single"):
            raise ValueError(f"unknown cut mode {self.cut_mode!r}")
        if self.seed_state not in ("barycenter", "bk"):
            raise ValueError(f"unknown seed-state mode {self.seed_state!r}")
        if self.deadline <= 0:
            raise ValueError("deadline must be positive")


@dataclass
class PlannerResult:
    status: str
    plan: SmoothPlan | None = None
    geometric: GeometricPlan | None = None
    cost: float | None = None
    iterations: int = 0
    cuts: dict = field(default_factory=lambda: {"geometric": 0, "kinematic": 0})
    cut_log: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    total_time: float = 0.0
    time_to_first: float | None = None
    solutions: list = field(default_factory=list)  # (seconds, cost)
    found: list = field(default_factory=list)  # every valid plan: (seconds, graph cost, arc length)
    n_vertices: int = 0
    n_edges: int = 0
    seed: int = 0
    stalled: int = 0  # constrained solves that hit the effort budget
    roadmap: Roadmap | None = None

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "cost": self.cost,
            "iterations": self.iterations,
            "cuts": dict(self.cuts),
            "cut_log": [{"kind": k, "edges": sorted(e)} for k, e in self.cut_log],
            "timings_ms": {k: round(v * 1000, 3) for k, v in self.timings.items()},
            "time_to_first_ms": None if self.time_to_first is None else round(self.time_to_first * 1000, 3),
            "solutions": [{"time_ms": round(t * 1000, 3), "cost": c} for t, c in self.solutions],
            "valid_plans_found": len(self.found),
            "n_pieces": None if self.plan is None else self.plan.n_pieces,
            "waypoints": None if self.geometric is None else [[str(v) for v in q] for q in self.geometric.waypoints],
            "plan": None if self.plan is None else self.plan.to_json(),
            "roadmap": {"vertices": self.n_vertices, "edges": self.n_edges},
            "stalled": self.stalled,
            "seed": self.seed,
        }


def arc_length(plan: SmoothPlan) -> float:
    """Sum over pieces of 16-point Gauss-Legendre quadrature of the speed."""
    total = 0.0
    ts = 0.5 * (GAUSS_NODES + 1.0)
    for piece in plan.pieces:
        vel = piece.derivative()
        sq = np.zeros_like(ts)
        for comp in vel.components:
            c = [float(v) for v in comp.coeffs][::-1] or [0.0]
            sq += np.polyval(c, ts) ** 2
        total += 0.5 * float(np.dot(GAUSS_WEIGHTS, np.sqrt(sq)))
    return total


def piece_bbox(piece: CurvePiece) -> tuple[list, list]:
    """Float box around a cubic piece from its Bernstein control points."""
    lo, hi = [], []
    for comp in piece.components:
        c = list(comp.coeffs) + [Fraction(0)] * (4 - len(comp.coeffs))
        d, k, b, a = c[0], c[1], c[2], c[3]
        ctrl = [d, d + k / 3, d + 2 * k / 3 + b / 3, d + k + b + a]
        lo.append(float(min(ctrl)))
        hi.append(float(max(ctrl)))
    return lo, hi


def first_colliding_piece(plan: SmoothPlan, ws: Workspace) -> int | None:
    """0-based index of the first piece meeting an expanded obstacle or leaving the bounds."""
    for j, piece in enumerate(plan.pieces):
        lo, hi = piece_bbox(piece)
        for wall in ws.walls:
            if intersects_polytope(piece, wall):
                return j
        for i in ws.candidate_obstacles(lo, hi):
            if intersects_polytope(piece, ws.expanded[i]):
                return j
    return None


def window_edges(plan_edges, j: int, single: bool) -> tuple:
    """Edges around 0-based piece ``j``: just ``e_j`` or the window ``j-1 .. j+1``."""
    if single:
        return (plan_edges[j],)
    lo, hi = edge_window(j + 1, len(plan_edges))
    return tuple(plan_edges[lo - 1:hi])


def validity_cut(geometric: GeometricPlan, j: int, single: bool = False, born: int = 0) -> Cut:
    return Cut(frozenset(window_edges(geometric.edges, j, single)), "geometric", born)


def neighborhood_from_cut(cut: Cut, G: Roadmap, radius: float, mode: str = "barycenter") -> list:
    """Seed states for directed sampling: the barycenter of the cut's endpoints, or one midpoint per edge."""
    if mode == "bk":
        out = []
        for e in sorted(cut.edges):
            u, v = G.edges[e]
            out.append((tuple((a + b) / 2 for a, b in zip(G.vertices[u], G.vertices[v])), radius))
        return out
    verts = sorted({x for e in cut.edges for x in G.edges[e]})
    d = len(G.vertices[verts[0]])
    center = tuple(sum(G.vertices[v][k] for v in verts) / len(verts) for k in range(d))
    return [(center, radius)]


def _goal_seed(ws: Workspace, goal: GoalRegion, rng) -> tuple:
    c = goal.center()
    if point_free(c, ws):
        return c
    lo = np.array([float(v) for v in goal.lo])
    hi = np.array([float(v) for v in goal.hi])
    for _ in range(REJECTION_BUDGET):
        q = tuple(dyadic_approx(float(v)) for v in rng.uniform(lo, hi))
        if goal.contains(q) and point_free(q, ws):
            return q
    raise SamplerStarved("no free state in the goal box")


class _Clock:
    def __init__(self):
        self.t = {"graph": 0.0, "cmcp": 0.0, "fit": 0.0, "kinematic": 0.0, "trace": 0.0}

    def add(self, key, start):
        now = time.perf_counter()
        self.t[key] += now - start
        return now


def plan(ws: Workspace, q0, goal: GoalRegion, cfg: PlannerConfig | None = None) -> PlannerResult:
    """Run the branch-and-cut Lazy PRM loop until a valid plan (or the deadline, in anytime mode)."""
    cfg = cfg or PlannerConfig()
    t0 = time.perf_counter()
    deadline = t0 + cfg.deadline
    clock = _Clock()
    res = PlannerResult(status="timeout", seed=cfg.seed)
    if not point_free(q0, ws):
        raise ValueError("initial state is not free")
    constraints = DifferentialConstraintSet(tuple(cfg.polynomial_constraints), cfg.phi_max)

    G = Roadmap(ws, goal)
    sampler = SamplerState(cfg.sampler, cfg.seed)
    diameter = ws.diameter()
    r_min = default_r_min(ws)

    def radius() -> float:
        return connection_radius(len(G), ws.dim, diameter, r_min)

    cuts: list[Cut] = []
    best_bound = None
    best_cost = math.inf
    single = cfg.cut_mode == "single"

    def add_cut(cut: Cut):
        cuts.append(cut)
        res.cuts[cut.kind] += 1
        res.cut_log.append((cut.kind, cut.edges))
        for center, r in neighborhood_from_cut(cut, G, radius(), cfg.seed_state):
            sampler.add_neighborhood(center, r)

    try:
        s = time.perf_counter()
        q0_id = G.add_vertex(q0)
        grow(G, _goal_seed(ws, goal, sampler.rng), radius())
        while len(G) < cfg.initial_vertices:
            grow(G, sample(sampler, ws, directed=False), radius())
        clock.add("graph", s)

        while time.perf_counter() < deadline:
            res.iterations += 1
            s = time.perf_counter()
            if cuts:
                try:
                    path = solve_cmcp(G, cuts, q0_id, best_bound, cfg.dedup, deadline=deadline,
                                      node_limit=cfg.node_limit, max_expansions=cfg.cmcp_budget)
                except SearchAborted as exc:
                    if exc.reason != "budget":
                        raise
                    res.stalled += 1
                    path = None
            else:
                path = solve_mcp(G, q0_id, best_bound)
            s = clock.add("cmcp", s)
            if path is None:
                for i in range(cfg.vertices_per_round):
                    directed = i < cfg.directed_per_round and bool(sampler.neighborhoods)
                    grow(G, sample(sampler, ws, directed=directed), radius())
                clock.add("graph", s)
                continue

            smooth = fit(path)
            s = clock.add("fit", s)

            violations = []
            if ws.dim == 2:
                violations = check_curvature(smooth, cfg.phi_max)
            if not violations:
                violations = check_polynomial_constraints(smooth, constraints)
            s = clock.add("kinematic", s)
            if violations:
                add_cut(kinematic_cut(path.edges, violations, single, res.iterations))
                continue

            j = first_colliding_piece(smooth, ws)
            s = clock.add("trace", s)
            if j is not None:
                add_cut(validity_cut(path, j, single, res.iterations))
                continue

            cost = arc_length(smooth)
            now = time.perf_counter() - t0
            if res.time_to_first is None:
                res.time_to_first = now
            res.found.append((now, path.cost, cost))
            if cost < best_cost:
                best_cost = cost
                res.plan, res.geometric, res.cost = smooth, path, cost
                res.solutions.append((now, cost))
            res.status = "solved"
            if not cfg.anytime:
                break
            best_bound = path.cost if best_bound is None else min(best_bound, path.cost)
    except SamplerStarved:
        res.status = "starved" if res.plan is None else "solved"
    except SearchAborted as exc:
        if exc.reason == "memory":
            res.status = "oom" if res.plan is None else "solved"
    except MemoryError:
        res.status = "oom" if res.plan is None else "solved"

    if res.plan is None and res.status == "solved":
        res.status = "timeout"
    res.total_time = time.perf_counter() - t0
    res.timings = dict(clock.t)
    res.timings["total"] = res.total_time
    res.n_vertices, res.n_edges = len(G), G.n_edges
    res.roadmap = G
    return res
