"""Plan-domain checks: polynomial differential constraints and tangent-turn limits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cmcp import Cut
from .exactnum import DomainError, UniPoly, as_rational
from .polytrace import trace_atoms
from .spline import SmoothPlan

HALF = Fraction(1, 2)
TURN_INTERVALS = ((Fraction(0), HALF), (HALF, Fraction(1)))
COS_TIE_TOL = 1e-12


@dataclass(frozen=True)
class PolyConstraint:
    """Polynomial ``g(x, xdot, xddot) <= 0`` over ``3d`` variables.

    ``terms`` maps exponent tuples (length ``3d``: positions, then
    velocities, then accelerations) to rational coefficients.
    """

    terms: Mapping

    @classmethod
    def speed_cap(cls, d: int, vmax) -> "PolyConstraint":
        vmax = as_rational(vmax)
        terms = {}
        for j in range(d):
            e = [0] * (3 * d)
            e[d + j] = 2
            terms[tuple(e)] = Fraction(1)
        terms[(0,) * (3 * d)] = -vmax * vmax
        return cls(terms)

    @classmethod
    def affine(cls, a: Sequence, b) -> "PolyConstraint":
        terms = {(0,) * len(a): as_rational(b)}
        for i, v in enumerate(a):
            if v:
                e = [0] * len(a)
                e[i] = 1
                terms[tuple(e)] = as_rational(v)
        return cls(terms)

    def compose(self, comps: Sequence[UniPoly]) -> UniPoly:
        out = UniPoly()
        for exps, c in self.terms.items():
            if len(exps) != len(comps):
                raise DomainError("constraint arity does not match 3d")
            term = UniPoly.constant(as_rational(c))
            for e, p in zip(exps, comps):
                if e:
                    term = term * (p ** e)
            out = out + term
        return out


@dataclass(frozen=True)
class DifferentialConstraintSet:
    polynomial: tuple = ()
    phi_max: float = math.pi / 2

    def __post_init__(self):
        if not (0 < self.phi_max <= math.pi):
            raise DomainError("phi_max must lie in (0, pi]")


@dataclass(frozen=True)
class Violation:
    piece_index: int  # 0-based
    kind: str  # "polynomial" | "curvature"


def check_polynomial_constraints(plan: SmoothPlan, cs: DifferentialConstraintSet) -> list[Violation]:
    """Pieces leaving the region where every polynomial constraint holds."""
    if not cs.polynomial:
        return []
    for g in cs.polynomial:
        if not isinstance(g, PolyConstraint):
            raise DomainError("non-polynomial constraint; use check_curvature")
    out = []
    full = frozenset(range(len(cs.polynomial)))
    for j, piece in enumerate(plan.pieces):
        vel = piece.derivative()
        acc = vel.derivative()
        comps = list(piece.components) + list(vel.components) + list(acc.components)
        atoms = [g.compose(comps) for g in cs.polynomial]
        tr = trace_atoms(atoms)
        if any(r != full for r in tr.regions):
            out.append(Violation(j, "polynomial"))
    return out


def turn_cosine(u: Sequence[Fraction], v: Sequence[Fraction]) -> float | None:
    """Cosine of the angle between two tangents; None when either vanishes."""
    nu = sum(x * x for x in u)
    nv = sum(x * x for x in v)
    if nu == 0 or nv == 0:
        return None
    dot = sum(a * b for a, b in zip(u, v))
    if dot == 0:
        return 0.0
    # sign is exact; magnitude via exact square then a single float sqrt
    mag = math.sqrt(float(Fraction(dot * dot) / (nu * nv)))
    return math.copysign(min(mag, 1.0), float(dot))


def check_curvature(plan: SmoothPlan, phi_max: float) -> list[Violation]:
    """Pieces whose tangent turns by more than ``phi_max`` over either half.

    Ties at exactly ``phi_max`` pass.  A vanishing tangent is a cusp and
    counts as a violation.
    """
    if plan.dim != 2:
        raise DomainError("turn-angle check is defined for planar plans")
    cos_max = math.cos(phi_max)
    out = []
    for j, piece in enumerate(plan.pieces):
        vel = piece.derivative()
        for l, r in TURN_INTERVALS:
            c = turn_cosine(vel(l), vel(r))
            if c is None or c < cos_max - COS_TIE_TOL:
                out.append(Violation(j, "curvature"))
                break
    return out


def edge_window(j: int, n: int) -> tuple[int, int]:
    """1-based inclusive range ``[max(1, j-1), min(j+1, n)]`` around piece ``j``."""
    return max(1, j - 1), min(j + 1, n)


def kinematic_cut_edges(plan_edges: Sequence, violations: Sequence[Violation], single: bool = False) -> tuple:
    """Edges of the geometric plan forbidden together after a failed kinematic check."""
    if not violations:
        raise DomainError("kinematic cut needs at least one violation")
    j = violations[0].piece_index + 1
    n = len(plan_edges)
    if single:
        return (plan_edges[j - 1],)
    lo, hi = edge_window(j, n)
    return tuple(plan_edges[lo - 1:hi])


def kinematic_cut(plan, violations: Sequence[Violation], single: bool = False, born: int = 0) -> Cut:
    """Kinematic cut for a smooth plan (edges taken from its source) or a plain edge sequence."""
    edges = plan.source.edges if isinstance(plan, SmoothPlan) else plan
    if not edges:
        raise DomainError("plan carries no roadmap edges")
    return Cut(frozenset(kinematic_cut_edges(edges, violations, single)), "kinematic", born)
