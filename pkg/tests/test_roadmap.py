import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcprm.geometry import GoalRegion, Polytope, Workspace, point_free, segment_free
from bcprm.roadmap import (
    Roadmap,
    SamplerStarved,
    SamplerState,
    connection_radius,
    dispersion_estimate,
    grow,
    halton_point,
    radical_inverse,
    sample,
)


def open_ws(n=10):
    return Workspace((0, 0), (n, n), [], [], None)


def walled_ws():
    wall = Polytope.box((4, 0), (6, 8), id=0)
    return Workspace((0, 0), (10, 10), [wall], [F(1, 4)], None)


def test_radical_inverse_values():
    assert [radical_inverse(i, 2) for i in range(1, 5)] == [F(1, 2), F(1, 4), F(3, 4), F(1, 8)]
    assert [radical_inverse(i, 3) for i in range(1, 4)] == [F(1, 3), F(2, 3), F(1, 9)]
    assert radical_inverse(0, 5) == 0


def test_halton_first_point():
    assert halton_point(1, 2) == (F(1, 2), F(1, 3))
    st_ = SamplerState("halton")
    assert sample(st_, open_ws(1), directed=False) == (F(1, 2), F(1, 3))


@given(st.integers(1, 10 ** 6), st.sampled_from([2, 3, 5, 7]))
def test_radical_inverse_in_unit_interval(i, b):
    r = radical_inverse(i, b)
    assert 0 < r < 1
    assert b ** 30 % r.denominator == 0


def test_uniform_sampler_is_seeded_and_dyadic():
    a = [sample(SamplerState("uniform", seed=5), walled_ws(), directed=False) for _ in range(3)]
    s1, s2 = SamplerState("uniform", seed=9), SamplerState("uniform", seed=9)
    xs = [sample(s1, walled_ws()) for _ in range(20)]
    assert xs == [sample(s2, walled_ws()) for _ in range(20)]
    assert a[0] == a[1] == a[2]
    for q in xs:
        assert point_free(q, walled_ws())
        assert all((1 << 14) % v.denominator == 0 for v in q)


def test_directed_samples_stay_in_ball():
    s = SamplerState("uniform", seed=1)
    s.add_neighborhood((2, 2), 0.5)
    for _ in range(50):
        q = sample(s, walled_ws(), directed=True)
        assert math.dist([float(v) for v in q], (2, 2)) <= 0.5 + 2 ** -13


def test_sampler_starves_when_no_freespace():
    blocked = Workspace((0, 0), (1, 1), [Polytope.box((-1, -1), (2, 2))], [F(0)], None)
    with pytest.raises(SamplerStarved):
        sample(SamplerState("uniform", seed=0), blocked, directed=False)
    with pytest.raises(ValueError):
        SamplerState("sobol")


def test_connection_radius_monotone():
    rs = [connection_radius(k, 2, 14.1, 0.2) for k in range(2000)]
    assert all(a >= b for a, b in zip(rs, rs[1:]))
    assert rs[-1] >= 0.2
    assert connection_radius(10 ** 9, 2, 14.1, 0.2) == 0.2


def test_grow_is_monotone_and_audited():
    ws = walled_ws()
    G = Roadmap(ws, GoalRegion((9, 9), (10, 10)))
    s = SamplerState("halton")
    G.add_vertex((1, 1))
    prev_edges = set()
    for k in range(150):
        grow(G, sample(s, ws), connection_radius(len(G), 2, ws.diameter(), 0.2))
        now = set(G.edges)
        assert prev_edges <= now
        prev_edges = now
    assert G.audit()
    for (u, v), c in zip(G.edges, G.edge_cost):
        assert c == pytest.approx(math.dist(G.vf[u], G.vf[v]))
        assert G.adj[u][v] == G.adj[v][u]
    assert G.goal_ids == {i for i, q in enumerate(G.vertices) if G.goal.contains(q)}
    # regrowing an existing vertex is a no-op
    n, m = len(G), G.n_edges
    grow(G, G.vertices[3], 5.0)
    assert (len(G), G.n_edges) == (n, m)


def test_no_edge_crosses_the_wall():
    ws = walled_ws()
    G = Roadmap(ws, GoalRegion((9, 0), (10, 1)))
    for q in [(1, 1), (9, F(1, 2)), (5, 9), (3, 3), (7, 3)]:
        grow(G, q, 20.0)
    assert G.edge_index.get((0, 1)) is None
    assert not segment_free((3, 3), (7, 3), ws)
    assert G.audit()


def test_halton_roadmap_covers_open_square():
    ws = open_ws(1)
    G = Roadmap(ws, GoalRegion((F(9, 10), F(9, 10)), (1, 1)))
    s = SamplerState("halton")
    for _ in range(400):
        grow(G, sample(s, ws), connection_radius(len(G), 2, ws.diameter(), 0.01))
    pts = np.random.default_rng(0).uniform(0, 1, size=(4000, 2))
    disp = dispersion_estimate(G, ws, 0, points=pts)
    assert disp < 0.1
    # a single central vertex has dispersion close to half the diagonal
    H = Roadmap(ws, G.goal)
    H.add_vertex((F(1, 2), F(1, 2)))
    assert dispersion_estimate(H, ws, 2000) == pytest.approx(math.sqrt(0.5), abs=0.05)


def test_roadmap_json():
    G = Roadmap(open_ws(), GoalRegion((9, 9), (10, 10)))
    grow(G, (1, 1), 20)
    grow(G, (F(19, 2), F(19, 2)), 20)
    out = G.to_json()
    assert out["goal_ids"] == [1]
    assert out["edges"][0]["cost"] == pytest.approx(8.5 * math.sqrt(2))


def test_connection_radius_first_value():
    assert connection_radius(0, 2, 10.0, 0.0) == pytest.approx(10.0 * math.sqrt(math.log(2) / 2))
    assert connection_radius(1, 2, 10.0, 0.0) == connection_radius(0, 2, 10.0, 0.0)


def _connected(G, a, b):
    seen, stack = {a}, [a]
    while stack:
        v = stack.pop()
        for w in G.adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return b in seen


def _build(mode, seed, k=200):
    ws = open_ws(1)
    G = Roadmap(ws, GoalRegion((F(3, 4), F(3, 4)), (1, 1)))
    s = SamplerState(mode, seed=seed)
    q0 = G.add_vertex((F(1, 10), F(1, 10)))
    star = G.add_vertex((F(7, 8), F(7, 8)))
    for i in range(k):
        grow(G, sample(s, ws), connection_radius(len(G), 2, ws.diameter(), ws.diameter() / 100))
    return G, q0, star


def test_obstacle_free_connectivity_rate():
    hits = sum(_connected(*_build("uniform", seed)) for seed in range(40))
    assert hits >= 0.95 * 40


def test_halton_roadmap_is_reproducible():
    a, _, _ = _build("halton", 0, 80)
    b, _, _ = _build("halton", 123, 80)
    assert a.vertices == b.vertices and a.edges == b.edges


def test_dispersion_shrinks_on_supergraph():
    ws = open_ws(1)
    pts = np.random.default_rng(1).uniform(0, 1, size=(3000, 2))
    G = Roadmap(ws, GoalRegion((F(3, 4), F(3, 4)), (1, 1)))
    s = SamplerState("halton")
    last = math.inf
    for _ in range(6):
        for _ in range(10):
            grow(G, sample(s, ws), 0.3)
        est = dispersion_estimate(G, ws, 0, points=pts)
        assert est <= last
        last = est
