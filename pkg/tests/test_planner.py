import math
from fractions import Fraction as F

import numpy as np
import pytest

from bcprm.cmcp import Cut
from bcprm.geometry import GoalRegion, Polytope, Workspace
from bcprm.instances import gen_instances, make_instance
from bcprm.planner import (
    PlannerConfig,
    arc_length,
    first_colliding_piece,
    neighborhood_from_cut,
    piece_bbox,
    plan,
    validity_cut,
)
from bcprm.roadmap import Roadmap
from bcprm.spline import GeometricPlan, SmoothPlan, fit
from bcprm.validate import dense_validate

GEO = GeometricPlan(((0, 0), (1, 0), (2, 0), (3, 0), (4, 0)), edges=(10, 11, 12, 13), vertices=(0, 1, 2, 3, 4))


def trapezoid_length(sp: SmoothPlan, n=20000) -> float:
    ts = np.linspace(0.0, 1.0, n + 1)
    total = 0.0
    for piece in sp.pieces:
        vel = piece.derivative()
        speed = np.sqrt(sum(np.polyval([float(c) for c in comp.coeffs][::-1] or [0.0], ts) ** 2
                            for comp in vel.components))
        total += float(np.sum((speed[1:] + speed[:-1]) / 2) / n)
    return total


def test_validity_cut_windows():
    assert validity_cut(GEO, 1).edges == frozenset({10, 11, 12})
    assert validity_cut(GEO, 1, single=True).edges == frozenset({11})
    assert validity_cut(GEO, 3).edges == frozenset({12, 13})
    assert validity_cut(GEO, 0).edges == frozenset({10, 11})
    assert validity_cut(GEO, 0).kind == "geometric"


def test_neighborhood_seeds():
    ws = Workspace((-5, -5), (5, 5), [], [], None)
    G = Roadmap(ws, GoalRegion((4, 4), (5, 5)))
    for q in [(0, 0), (2, 0), (1, 1), (1, -1)]:
        G.add_vertex(q)
    e1, e2 = G.add_edge(0, 1), G.add_edge(2, 3)
    (center, r), = neighborhood_from_cut(Cut({e1, e2}), G, 0.7)
    assert center == (1, 0) and r == 0.7
    mids = neighborhood_from_cut(Cut({e1, e2}), G, 0.7, mode="bk")
    assert [c for c, _ in mids] == [(1, 0), (1, 0)]


def test_arc_length_examples():
    assert arc_length(fit(GeometricPlan(((0, 0), (3, 4))))) == pytest.approx(5.0, rel=1e-12)
    assert arc_length(fit(GeometricPlan(((0, 0), (1, 0), (2, 0))))) == pytest.approx(2.0, rel=1e-12)


def test_arc_length_matches_trapezoid_rule():
    for pts in [((0, 0), (1, 0), (1, 1)), ((0, 0), (2, 1), (3, 3), (5, 4)), ((1, 1), (4, 2), (6, 0))]:
        sp = fit(GeometricPlan(pts))
        got = arc_length(sp)
        assert abs(got - trapezoid_length(sp, 10 ** 5)) <= 1e-6
        assert got >= sum(math.dist(a, b) for a, b in zip(pts, pts[1:]))


def test_piece_bbox_contains_samples():
    sp = fit(GeometricPlan(((0, 0), (3, 5), (-2, 1), (4, 4))))
    for piece in sp.pieces:
        lo, hi = piece_bbox(piece)
        for t in np.linspace(0, 1, 101):
            x = piece.eval_float(float(t))
            assert all(l - 1e-12 <= v <= h + 1e-12 for l, v, h in zip(lo, x, hi))


def test_first_colliding_piece():
    box = Polytope.box((F(3, 2), F(-1, 2)), (F(5, 2), F(1, 2)), id=0)
    ws = Workspace((-1, -1), (5, 5), [box], [F(0)], None)
    sp = fit(GEO)
    assert first_colliding_piece(sp, ws) == 1
    above = fit(GeometricPlan(((0, 2), (1, 2), (2, 2))))
    assert first_colliding_piece(above, ws) is None
    outside = fit(GeometricPlan(((0, 0), (6, 0))))
    assert first_colliding_piece(outside, ws) == 0


def test_config_validation():
    for bad in ({"cut_mode": "both"}, {"seed_state": "x"}, {"deadline": 0}, {"directed_per_round": 20}):
        with pytest.raises(ValueError):
            PlannerConfig(**bad)


@pytest.fixture(scope="module")
def small_instances():
    return gen_instances(3, size=12, density=0.3, seed=3)


def test_end_to_end_plans_pass_dense_validation(small_instances):
    for inst in small_instances:
        for mode in ("multi", "single"):
            res = plan(inst.workspace, inst.q0, inst.goal, PlannerConfig(seed=1, deadline=30, cut_mode=mode))
            assert res.status == "solved", (inst.name, mode)
            sp = res.plan
            assert sp.n_pieces >= 1
            report = dense_validate(sp, inst.workspace, math.pi / 2)
            assert report.ok, report
            assert tuple(sp.pieces[0](0)) == inst.q0
            assert inst.goal.contains(sp.pieces[-1](1))
            assert res.cost == pytest.approx(arc_length(sp))
            assert res.roadmap.audit()


def test_open_field_is_one_straight_piece():
    inst = make_instance(np.zeros((8, 8), dtype=np.int8))
    res = plan(inst.workspace, inst.q0, inst.goal, PlannerConfig(deadline=10))
    assert res.status == "solved"
    assert res.cuts == {"geometric": 0, "kinematic": 0}


def test_halton_runs_are_deterministic(small_instances):
    inst = small_instances[0]
    a = plan(inst.workspace, inst.q0, inst.goal, PlannerConfig(seed=1, deadline=30))
    b = plan(inst.workspace, inst.q0, inst.goal, PlannerConfig(seed=1, deadline=30))
    assert a.geometric.waypoints == b.geometric.waypoints
    assert a.cut_log == b.cut_log


def test_unfree_start_rejected():
    inst = make_instance(np.zeros((6, 6), dtype=np.int8))
    with pytest.raises(ValueError):
        plan(inst.workspace, (-1, -1), inst.goal)


def test_anytime_costs_strictly_decrease(small_instances):
    inst = small_instances[1]
    res = plan(inst.workspace, inst.q0, inst.goal, PlannerConfig(seed=1, deadline=4, anytime=True))
    assert res.status == "solved"
    costs = [c for _, c in res.solutions]
    assert all(b < a for a, b in zip(costs, costs[1:]))
    assert res.cost == costs[-1]
    times = [t for t, _ in res.solutions]
    assert times == sorted(times)
