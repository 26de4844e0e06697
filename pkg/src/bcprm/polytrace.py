"""Traces of polynomial curve pieces against constraint systems.

A trace records, for every maximal open sub-interval of ``[0, 1]`` and for
every breakpoint between them, which constraints ``p_l(t) <= 0`` hold.
Breakpoints are the parameters where some atom changes sign; the ends
``t = 0`` and ``t = 1`` are always breakpoints so the closed piece is
covered.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactnum import (
    Interval,
    UniPoly,
    compose_affine_with_curve,
    descartes_bound,
    isolate_roots,
    square_free,
)
from .geometry import AffineConstraint, Polytope, expand_constraint

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class CurvePiece:
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def dim(self) -> int:
        return len(self.components)

    def derivative(self) -> "CurvePiece":
        return CurvePiece(tuple(c.derivative() for c in self.components))

    def __call__(self, t):
        return tuple(c.eval(t) for c in self.components)

    def eval_float(self, t: float) -> tuple:
        return tuple(c.eval_float(t) for c in self.components)

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)


@dataclass(frozen=True)
class Trace:
    """Alternating breakpoint / gap records over ``[0, 1]``.

    ``breakpoints[k]`` is an isolating interval (degenerate when exact);
    ``regions`` has ``2 * len(breakpoints) - 1`` entries: region ``2k`` belongs
    to breakpoint ``k`` and region ``2k + 1`` to the open gap after it.
    """

    breakpoints: tuple
    regions: tuple

    def gap_regions(self):
        return self.regions[1::2]

    def breakpoint_regions(self):
        return self.regions[0::2]

    def to_json(self) -> dict:
        return {
            "breakpoints": [
                {"lo": str(iv.lo), "hi": str(iv.hi), "approx": float(iv.midpoint())}
                for iv in self.breakpoints
            ],
            "regions": [sorted(r) for r in self.regions],
        }


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def inertial_filter(atoms: Sequence[UniPoly]):
    """Split atoms into inertial ones (constant sign on the open unit interval) and active ones.

    Returns ``(inertial, active)`` where ``inertial`` lists ``(index, sign)``
    and ``active`` lists indices.
    """
    inertial = []
    active = []
    for i, p in enumerate(atoms):
        if p.is_zero():
            inertial.append((i, 0))
            continue
        if p.degree == 0:
            inertial.append((i, _sign(p.coeffs[0])))
            continue
        if descartes_bound(p) == 0 or descartes_bound(square_free(p)) == 0:
            inertial.append((i, p.sign_at(HALF)))
        else:
            active.append(i)
    return inertial, active


def trace_atoms(atoms: Sequence[UniPoly], *, use_inertial: bool = True) -> Trace:
    """Trace of the relational atoms ``p_l(t) <= 0`` over ``[0, 1]``."""
    return _trace(atoms, *_split(atoms, use_inertial))


def _split(atoms, use_inertial):
    if use_inertial:
        return inertial_filter(atoms)
    inertial = [(i, 0) for i, p in enumerate(atoms) if p.is_zero()]
    zero = {i for i, _ in inertial}
    return inertial, [i for i in range(len(atoms)) if i not in zero]


def _trace(atoms, inertial, active) -> Trace:
    m = len(atoms)
    const_in = frozenset(i for i, s in inertial if s <= 0)

    sf = {i: square_free(atoms[i]) for i in active}
    product = UniPoly.constant(1)
    for i in active:
        if sf[i].degree > 0:
            product = product * sf[i]
    roots = isolate_roots(product) if product.degree > 0 else []

    inner = [iv for iv in roots if not (iv.degenerate and iv.lo in (0, 1))]
    points = [Interval(Fraction(0), Fraction(0))] + inner + [Interval(Fraction(1), Fraction(1))]

    bp_sets = [_breakpoint_set(iv, atoms, sf, active, const_in, m) for iv in points]
    gap_sets = []
    for a, b in zip(points, points[1:]):
        sample = _gap_sample(a, b)
        s = set(const_in)
        for i in active:
            if atoms[i].eval(sample) < 0:
                s.add(i)
        gap_sets.append(frozenset(s))

    # drop interior breakpoints that record no change (even-multiplicity roots)
    keep_pts = [points[0]]
    regions = [bp_sets[0]]
    for k in range(1, len(points)):
        gap = gap_sets[k - 1]
        if k < len(points) - 1 and bp_sets[k] == gap == gap_sets[k]:
            continue
        regions.append(gap)
        regions.append(bp_sets[k])
        keep_pts.append(points[k])
    return Trace(tuple(keep_pts), tuple(regions))


def _gap_sample(a: Interval, b: Interval) -> Fraction:
    # isolator endpoints are never roots, and adjacent isolators only touch
    # when both are open, so this point lies strictly inside the gap
    if a.hi < b.lo:
        return (a.hi + b.lo) / 2
    return a.hi


def _breakpoint_set(iv, atoms, sf, active, const_in, m) -> frozenset:
    if iv.degenerate:
        t = iv.lo
        s = {i for i in range(m) if atoms[i].eval(t) <= 0}
        return frozenset(s)
    s = set(const_in)
    for i in active:
        q = sf[i]
        lo_v = q.eval(iv.lo)
        hi_v = q.eval(iv.hi)
        if _sign(lo_v) != _sign(hi_v):
            s.add(i)  # atom vanishes inside the isolator
        elif atoms[i].eval(iv.lo) < 0:
            s.add(i)
    return frozenset(s)


def compose_constraints(curve: CurvePiece, constraints: Sequence[AffineConstraint]) -> list[UniPoly]:
    return [compose_affine_with_curve(g.coeffs(), curve.components) for g in constraints]


def trace(curve: CurvePiece, constraints: Sequence[AffineConstraint], *, use_inertial: bool = True) -> Trace:
    if not constraints:
        raise ValueError("trace needs at least one constraint")
    return trace_atoms(compose_constraints(curve, constraints), use_inertial=use_inertial)


def intersects_atoms(atoms: Sequence[UniPoly], *, use_inertial: bool = True) -> bool:
    """Whether some parameter in ``[0, 1]`` satisfies every atom."""
    if use_inertial:
        # a constant or inertial atom positive on the closed piece excludes the set
        for p in atoms:
            if p.degree == 0 and p.coeffs[0] > 0:
                return False
    inertial, active = _split(atoms, use_inertial)
    if use_inertial:
        for i, s in inertial:
            if s > 0 and atoms[i].eval(0) > 0 and atoms[i].eval(1) > 0:
                return False
    full = frozenset(range(len(atoms)))
    return any(r == full for r in _trace(atoms, inertial, active).regions)


def intersects_polytope(curve: CurvePiece, poly: Polytope, *, use_inertial: bool = True) -> bool:
    """Exact test whether the closed piece meets the (already expanded) polytope."""
    return intersects_atoms(compose_constraints(curve, poly.constraints), use_inertial=use_inertial)


def intersects_obstacle(curve: CurvePiece, obstacle: Polytope, delta=0, *, use_inertial: bool = True) -> bool:
    """Exact test whether the piece comes within ``delta`` of ``obstacle`` (touching counts)."""
    expanded = [expand_constraint(g, delta) for g in obstacle.constraints]
    return intersects_atoms(compose_constraints(curve, expanded), use_inertial=use_inertial)
