"""Iterative PRM over freespace with straight-line local plans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exactnum import as_rational, dyadic_approx
from .geometry import GoalRegion, Workspace, point_free, segment_free

REJECTION_BUDGET = 10_000
PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


class SamplerStarved(RuntimeError):
    pass


def radical_inverse(index: int, base: int) -> Fraction:
    """Exact van der Corput radical inverse of ``index`` in ``base``."""
    num, den = 0, 1
    while index > 0:
        index, digit = divmod(index, base)
        num = num * base + digit
        den *= base
    return Fraction(num, den)


def halton_point(index: int, d: int) -> tuple:
    return tuple(radical_inverse(index, PRIMES[k]) for k in range(d))


@dataclass
class SamplerState:
    mode: str = "halton"  # "uniform" | "halton"
    seed: int = 0
    halton_index: int = 0
    neighborhoods: list = field(default_factory=list)  # (seed point, radius)

    def __post_init__(self):
        if self.mode not in ("uniform", "halton"):
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        self.rng = np.random.default_rng(self.seed)

    def add_neighborhood(self, center, radius: float):
        self.neighborhoods.append((tuple(center), float(radius)))


def _dyadic_point(x) -> tuple:
    return tuple(dyadic_approx(float(v)) for v in x)


def sample_undirected(state: SamplerState, ws: Workspace) -> tuple:
    lo = np.array([float(v) for v in ws.lo])
    hi = np.array([float(v) for v in ws.hi])
    for _ in range(REJECTION_BUDGET):
        if state.mode == "uniform":
            q = _dyadic_point(state.rng.uniform(lo, hi))
        else:
            state.halton_index += 1
            h = halton_point(state.halton_index, ws.dim)
            q = tuple(l + (hh - l) * x for l, hh, x in zip(ws.lo, ws.hi, h))
        if point_free(q, ws):
            return q
    raise SamplerStarved("undirected sampler exhausted its rejection budget")


def sample_directed(state: SamplerState, ws: Workspace) -> tuple | None:
    """Free point from a randomly chosen neighborhood ball, or None if none found."""
    if not state.neighborhoods:
        return None
    k = int(state.rng.integers(len(state.neighborhoods)))
    center, radius = state.neighborhoods[k]
    c = np.array([float(v) for v in center])
    for _ in range(REJECTION_BUDGET):
        x = state.rng.uniform(c - radius, c + radius)
        if np.sum((x - c) ** 2) > radius * radius:
            continue
        q = _dyadic_point(x)
        if point_free(q, ws):
            return q
    return None


def sample(state: SamplerState, ws: Workspace, directed: bool | None = None) -> tuple:
    """Draw a free point; directed draws fall back to undirected when starved."""
    if directed is None:
        directed = bool(state.neighborhoods) and bool(state.rng.integers(2))
    if directed:
        q = sample_directed(state, ws)
        if q is not None:
            return q
    return sample_undirected(state, ws)


def connection_radius(k: int, d: int, diameter: float, r_min: float) -> float:
    """Non-increasing radius ``max(r_min, diameter * (log(k+2)/(k+2))**(1/d))``."""
    n = k + 2
    # log(n)/n peaks at n = e, so n = 3 is capped at the n = 2 value
    shape = min(math.log(n) / n, math.log(2) / 2)
    return max(r_min, diameter * shape ** (1.0 / d))


def default_r_min(ws: Workspace) -> float:
    if ws.resolution is not None:
        return 2 * float(ws.resolution)
    return ws.diameter() / 100


class Roadmap:
    """Geometric graph with collision-checked straight edges.

    Edges are undirected with stable integer ids; adjacency is stored in both
    orientations.  ``cost`` is the Euclidean length in machine reals, while
    neighbor-radius tests use the exact squared distance.
    """

    def __init__(self, ws: Workspace, goal: GoalRegion):
        self.ws = ws
        self.goal = goal
        self.vertices: list[tuple] = []
        self.vf: list[tuple] = []
        self.adj: list[dict] = []
        self.edges: list[tuple] = []
        self.edge_cost: list[float] = []
        self.edge_index: dict = {}
        self.goal_ids: set = set()
        self._index: dict = {}
        self._coords = np.zeros((0, ws.dim))

    def __len__(self):
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_id(self, q) -> int | None:
        return self._index.get(tuple(as_rational(v) for v in q))

    def add_vertex(self, q) -> int:
        q = tuple(as_rational(v) for v in q)
        if q in self._index:
            return self._index[q]
        vid = len(self.vertices)
        self.vertices.append(q)
        self.vf.append(tuple(float(v) for v in q))
        self.adj.append({})
        self._index[q] = vid
        self._coords = np.vstack([self._coords, np.array(self.vf[-1])[None, :]])
        if self.goal.contains(q):
            self.goal_ids.add(vid)
        return vid

    def add_edge(self, u: int, v: int) -> int:
        key = (min(u, v), max(u, v))
        if key in self.edge_index:
            return self.edge_index[key]
        eid = len(self.edges)
        self.edges.append(key)
        cost = math.dist(self.vf[u], self.vf[v])
        self.edge_cost.append(cost)
        self.edge_index[key] = eid
        self.adj[u][v] = eid
        self.adj[v][u] = eid
        return eid

    def edge_between(self, u: int, v: int) -> int:
        return self.edge_index[(min(u, v), max(u, v))]

    def within(self, q, r: float, exclude: int | None = None) -> list[int]:
        """Vertex ids at exact distance <= r from q, ascending."""
        if not self.vertices:
            return []
        qf = np.array([float(v) for v in q])
        d2 = np.sum((self._coords - qf) ** 2, axis=1)
        cand = np.nonzero(d2 <= r * r * (1 + 1e-9) + 1e-12)[0]
        rr = Fraction(r) ** 2
        out = []
        for i in cand.tolist():
            if i == exclude:
                continue
            p = self.vertices[i]
            if sum((a - b) ** 2 for a, b in zip(p, q)) <= rr:
                out.append(i)
        return out

    def heuristic(self, vid: int) -> float:
        return self.goal.distance(self.vf[vid])

    def to_json(self) -> dict:
        return {
            "nodes": [{"id": i, "q": [float(v) for v in q]} for i, q in enumerate(self.vertices)],
            "edges": [{"id": e, "u": u, "v": v, "cost": c} for e, ((u, v), c) in enumerate(zip(self.edges, self.edge_cost))],
            "goal_ids": sorted(self.goal_ids),
        }

    def audit(self) -> bool:
        return all(segment_free(self.vertices[u], self.vertices[v], self.ws) for u, v in self.edges)


def grow(G: Roadmap, q, r: float) -> int:
    """Add ``q`` and every collision-free edge to existing vertices within ``r``."""
    q = tuple(as_rational(v) for v in q)
    existing = G.vertex_id(q)
    if existing is not None:
        return existing
    nbrs = G.within(q, r)
    vid = G.add_vertex(q)
    for u in nbrs:
        if segment_free(G.vertices[u], q, G.ws):
            G.add_edge(u, vid)
    return vid


def dispersion_estimate(G: Roadmap, ws: Workspace, samples: int, rng=None, points=None) -> float:
    """Monte-Carlo lower bound on the dispersion of the vertex set over freespace."""
    if points is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        lo = np.array([float(v) for v in ws.lo])
        hi = np.array([float(v) for v in ws.hi])
        pts = []
        while len(pts) < samples:
            x = rng.uniform(lo, hi)
            if point_free(tuple(Fraction(v) for v in x), ws):
                pts.append(x)
        points = np.array(pts)
    V = np.array(G.vf)
    d = np.sqrt(((points[:, None, :] - V[None, :, :]) ** 2).sum(axis=2)).min(axis=1)
    return float(d.max())
