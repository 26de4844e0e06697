"""Lazy PRM as branch-and-cut with exact polynomial plan verification."""

from .cmcp import Cut, enumerate_oracle, solve_cmcp, solve_mcp
from .exactnum import Interval, UniPoly, descartes_bound, dyadic_approx, isolate_roots
from .geometry import (
    AffineConstraint,
    GoalRegion,
    Polytope,
    Workspace,
    expand_constraint,
    grid_to_polytopes,
    load_instance,
    point_free,
    segment_free,
)
from .planner import PlannerConfig, PlannerResult, arc_length, plan
from .polytrace import CurvePiece, intersects_obstacle, trace
from .spline import GeometricPlan, SmoothPlan, fit
from .validate import ValidationReport, dense_validate

__all__ = [
    "AffineConstraint", "Cut", "CurvePiece", "GeometricPlan", "GoalRegion", "Interval",
    "PlannerConfig", "PlannerResult", "Polytope", "SmoothPlan", "UniPoly", "ValidationReport", "Workspace",
    "arc_length", "dense_validate", "descartes_bound", "dyadic_approx", "enumerate_oracle", "expand_constraint",
    "fit", "grid_to_polytopes", "intersects_obstacle", "isolate_roots", "load_instance",
    "plan", "point_free", "segment_free", "solve_cmcp", "solve_mcp", "trace",
]
