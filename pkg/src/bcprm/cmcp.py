"""Constrained min-cost paths over a roadmap.

The path problem is the usual flow ILP with an implicit dummy sink behind
every goal vertex; cuts forbid using all edges of a given set together.
Without cuts we run plain A*; with cuts, a best-first search over partial
paths whose duplicate key is ``(vertex, per-cut usage)``.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from itertools import count

from .roadmap import Roadmap
from .spline import GeometricPlan

EPS = 1e-9
ORACLE_MAX_VERTICES = 12


class OracleRefused(ValueError):
    pass


class SearchAborted(RuntimeError):
    def __init__(self, reason: str):
        super().__init__(f"search aborted: {reason}")
        self.reason = reason  # "timeout" | "memory" | "budget"


@dataclass(frozen=True)
class Cut:
    edges: frozenset
    kind: str = "geometric"  # "geometric" | "kinematic"
    born: int = 0

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))
        if not self.edges:
            raise ValueError("a cut needs at least one edge")

    def satisfied_by(self, path_edges) -> bool:
        return len(self.edges.intersection(path_edges)) <= len(self.edges) - 1


def _plan(G: Roadmap, verts: list[int], g: float) -> GeometricPlan:
    edges = tuple(G.edge_between(a, b) for a, b in zip(verts, verts[1:]))
    return GeometricPlan(tuple(G.vertices[v] for v in verts), edges, tuple(verts), g)


def _pruned(f: float, bound: float | None) -> bool:
    return bound is not None and f >= bound - EPS * max(1.0, abs(bound))


def solve_mcp(G: Roadmap, q0: int = 0, bound: float | None = None, stats: dict | None = None) -> GeometricPlan | None:
    """Minimum-cost path from ``q0`` to any goal vertex by A*."""
    if not G.goal_ids:
        return None
    tie = count()
    h0 = G.heuristic(q0)
    heap = [(h0, h0, 0, next(tie), 0.0, q0)]
    best_g = {q0: 0.0}
    parent = {q0: None}
    closed = set()
    expanded = 0
    while heap:
        f, h, nedges, _, g, v = heapq.heappop(heap)
        if v in closed:
            continue
        closed.add(v)
        if nedges > 0 and v in G.goal_ids:
            verts = [v]
            while parent[verts[-1]] is not None:
                verts.append(parent[verts[-1]])
            if stats is not None:
                stats["expanded"] = expanded
            return _plan(G, verts[::-1], g)
        expanded += 1
        for w, eid in G.adj[v].items():
            if w in closed:
                continue
            ng = g + G.edge_cost[eid]
            if ng < best_g.get(w, float("inf")):
                hw = G.heuristic(w)
                if _pruned(ng + hw, bound):
                    continue
                best_g[w] = ng
                parent[w] = v
                heapq.heappush(heap, (ng + hw, hw, nedges + 1, next(tie), ng, w))
    if stats is not None:
        stats["expanded"] = expanded
    return None


def goal_distances(G: Roadmap, banned=frozenset()) -> list[float]:
    """Cut-free graph distance from every vertex to the goal set (multi-source Dijkstra).

    Ignoring cuts can only shorten paths, so this is a consistent heuristic
    for the constrained search and dominates the Euclidean one.
    """
    dist = [math.inf] * len(G)
    heap = [(0.0, v) for v in sorted(G.goal_ids)]
    for _, v in heap:
        dist[v] = 0.0
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for w, eid in G.adj[v].items():
            if eid in banned:
                continue
            nd = d + G.edge_cost[eid]
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def _dominated(usage: int, labels: list | None) -> bool:
    """Some label uses no more edges of any cut than ``usage``."""
    if not labels:
        return False
    missing = ~usage
    return any(not (lab & missing) for lab in labels)


def solve_cmcp(
    G: Roadmap,
    cuts: list[Cut],
    q0: int = 0,
    bound: float | None = None,
    dedup: bool | str = True,
    stats: dict | None = None,
    deadline: float | None = None,
    node_limit: int | None = None,
    max_expansions: int | None = None,
) -> GeometricPlan | None:
    """Minimum-cost simple path that uses at most ``|cut| - 1`` edges of every cut.

    Successors completing a cut or revisiting a vertex are pruned when
    generated.  Duplicate handling (``dedup``):

    ``"dominance"`` (default, also ``True``)
        a state is dropped when a state already expanded at the same vertex
        used no more edges of any cut;
    ``"key"``
        states are merged only on an identical ``(vertex, usage)`` key;
    ``"none"`` (also ``False``)
        plain best-first search over simple paths.

    Both merging rules keep optimality: splicing the cheaper prefix onto the
    discarded state's continuation and shortcutting any cycle gives a
    feasible path that is no more expensive.

    Per-cut usage is one integer made of stacked bitmasks: level ``k``
    (bits ``k*m .. k*m + m - 1`` for ``m`` cuts) holds the cuts with at least
    ``k + 1`` edges used, so dominance is a single and-not.  Raises ``SearchAborted`` when ``deadline`` (a
    ``perf_counter`` value), ``node_limit`` (stored states) or
    ``max_expansions`` is exceeded.
    """
    mode = {True: "dominance", False: "none"}.get(dedup, dedup)
    if mode not in ("dominance", "key", "none"):
        raise ValueError(f"unknown dedup mode {dedup!r}")
    if not G.goal_ids:
        return None
    banned = set()  # single-edge cuts simply delete their edge
    cuts_of: dict[int, int] = {}  # edge -> bitmask of multi-edge cuts containing it
    full = [0] * max((len(c.edges) - 1 for c in cuts), default=0)  # cuts saturated at each level
    for ci, c in enumerate(cuts):
        if len(c.edges) == 1:
            banned |= c.edges
            continue
        bit = 1 << ci
        for e in c.edges:
            cuts_of[e] = cuts_of.get(e, 0) | bit
        full[len(c.edges) - 2] |= bit
    levels = len(full)
    m = len(cuts)
    mask = (1 << m) - 1
    saturated = 0
    for k, fl in enumerate(full):
        saturated |= fl << (k * m)

    hdist = goal_distances(G, banned)
    # a goal vertex still needs at least one edge before the path may stop there
    for v in G.goal_ids:
        hdist[v] = G.heuristic(v)
    tie = count()
    # node: (vertex, parent node index, usage levels)
    nodes = [(q0, -1, 0)]
    h0 = hdist[q0]
    if h0 == math.inf:
        return None
    heap = [(h0, h0, 0, next(tie), 0.0, 0, 1 << q0)]
    closed = set()
    labels: dict[int, list] = {}
    expanded = 0
    while heap:
        f, h, nedges, _, g, ni, visited = heapq.heappop(heap)
        v, _, usage = nodes[ni]
        if mode == "key":
            key = (v, usage)
            if key in closed:
                continue
            closed.add(key)
        elif mode == "dominance":
            labs = labels.get(v)
            if _dominated(usage, labs):
                continue
            if labs:
                labs[:] = [lab for lab in labs if usage & ~lab]
                labs.append(usage)
            else:
                labels[v] = [usage]
        if nedges > 0 and v in G.goal_ids:
            verts = []
            while ni >= 0:
                verts.append(nodes[ni][0])
                ni = nodes[ni][1]
            if stats is not None:
                stats["expanded"] = expanded
            return _plan(G, verts[::-1], g)
        expanded += 1
        if max_expansions is not None and expanded > max_expansions:
            if stats is not None:
                stats["expanded"] = expanded
            raise SearchAborted("budget")
        if expanded % 2048 == 0:
            if deadline is not None and time.perf_counter() > deadline:
                raise SearchAborted("timeout")
            if node_limit is not None and len(nodes) > node_limit:
                raise SearchAborted("memory")
        for w, eid in G.adj[v].items():
            if visited >> w & 1 or eid in banned:
                continue
            new_usage = usage
            hit = cuts_of.get(eid)
            if hit:
                spread = 0
                for k in range(levels):
                    spread |= hit << (k * m)
                # a cut whose count is already |cut| - 1 would be completed
                if usage & saturated & spread:
                    continue
                carry = hit
                for k in range(levels):
                    lv = (usage >> (k * m)) & mask
                    new_usage |= carry << (k * m)
                    carry &= lv
                    if not carry:
                        break
            if mode == "key" and (w, new_usage) in closed:
                continue
            if mode == "dominance" and _dominated(new_usage, labels.get(w)):
                continue
            hw = hdist[w]
            if hw == math.inf:
                continue
            ng = g + G.edge_cost[eid]
            if _pruned(ng + hw, bound):
                continue
            nodes.append((w, ni, new_usage))
            heapq.heappush(heap, (ng + hw, hw, nedges + 1, next(tie), ng, len(nodes) - 1, visited | (1 << w)))
    if stats is not None:
        stats["expanded"] = expanded
    return None


def enumerate_oracle(G: Roadmap, cuts: list[Cut], q0: int = 0) -> GeometricPlan | None:
    """Cheapest cut-respecting simple path by exhaustive enumeration (small graphs only)."""
    if len(G) > ORACLE_MAX_VERTICES:
        raise OracleRefused(f"{len(G)} vertices exceeds the oracle budget of {ORACLE_MAX_VERTICES}")
    best = [float("inf"), None]

    def dfs(path, edges, cost):
        v = path[-1]
        if len(path) > 1 and v in G.goal_ids:
            if all(c.satisfied_by(edges) for c in cuts) and cost < best[0]:
                best[0], best[1] = cost, list(path)
        for w, eid in sorted(G.adj[v].items()):
            if w in path:
                continue
            path.append(w)
            edges.append(eid)
            dfs(path, edges, cost + G.edge_cost[eid])
            path.pop()
            edges.pop()

    dfs([q0], [], 0.0)
    if best[1] is None:
        return None
    return _plan(G, best[1], best[0])
