"""Configuration-space primitives: polytope obstacles, clearance, exact segment tests."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .exactnum import DYADIC_BITS, DomainError, as_rational

Point = tuple  # tuple of Fraction


@dataclass(frozen=True)
class AffineConstraint:
    """``a . x + b <= 0``."""

    a: tuple
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(as_rational(v) for v in self.a))
        object.__setattr__(self, "b", as_rational(self.b))
        if all(v == 0 for v in self.a):
            raise DomainError("affine constraint with zero normal")

    @property
    def dim(self) -> int:
        return len(self.a)

    def __call__(self, x) -> Fraction:
        return sum((ai * as_rational(xi) for ai, xi in zip(self.a, x)), self.b)

    def value_float(self, x) -> float:
        return sum(float(ai) * float(xi) for ai, xi in zip(self.a, x)) + float(self.b)

    def coeffs(self) -> tuple:
        return self.a + (self.b,)


@dataclass(frozen=True)
class Polytope:
    """Closed set where every constraint holds."""

    constraints: tuple
    id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.constraints:
            raise DomainError("polytope needs at least one constraint")

    def contains(self, x) -> bool:
        return all(g(x) <= 0 for g in self.constraints)

    @classmethod
    def box(cls, lo: Sequence, hi: Sequence, id: int = 0) -> "Polytope":
        cons = []
        d = len(lo)
        for i in range(d):
            e = [0] * d
            e[i] = -1
            cons.append(AffineConstraint(tuple(e), as_rational(lo[i])))
            e = [0] * d
            e[i] = 1
            cons.append(AffineConstraint(tuple(e), -as_rational(hi[i])))
        return cls(tuple(cons), id)

    def axis_box(self):
        """``(lo, hi)`` when the polytope is an axis-aligned box, else None."""
        d = self.constraints[0].dim
        lo = [None] * d
        hi = [None] * d
        for g in self.constraints:
            nz = [i for i, v in enumerate(g.a) if v != 0]
            if len(nz) != 1:
                return None
            i = nz[0]
            bound = -g.b / g.a[i]
            if g.a[i] > 0:
                hi[i] = bound if hi[i] is None else min(hi[i], bound)
            else:
                lo[i] = bound if lo[i] is None else max(lo[i], bound)
        if any(v is None for v in lo + hi):
            return None
        return tuple(lo), tuple(hi)


def norm_upper_bound(a: Sequence, bits: int = DYADIC_BITS) -> Fraction:
    """Smallest ``k / 2**bits`` that is >= the Euclidean norm of ``a``."""
    s = sum((as_rational(v) ** 2 for v in a), Fraction(0))
    # need k^2 >= s * 4^bits, i.e. k^2 * den >= num * 4^bits
    target_num = s.numerator << (2 * bits)
    den = s.denominator
    k = math.isqrt(-(-target_num // den))
    while k * k * den < target_num:
        k += 1
    while k > 0 and (k - 1) * (k - 1) * den >= target_num:
        k -= 1
    return Fraction(k, 1 << bits)


def expand_constraint(g: AffineConstraint, delta) -> AffineConstraint:
    """Shift ``g`` outward so its region contains the ``delta``-expansion."""
    delta = as_rational(delta)
    if delta < 0:
        raise DomainError("clearance must be non-negative")
    if delta == 0:
        return g
    return AffineConstraint(g.a, g.b - delta * norm_upper_bound(g.a))


def expand_polytope(p: Polytope, delta) -> Polytope:
    return Polytope(tuple(expand_constraint(g, delta) for g in p.constraints), p.id)


@dataclass(frozen=True)
class GoalRegion:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(as_rational(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(as_rational(v) for v in self.hi))
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise DomainError("goal box must have positive volume")

    def contains(self, x) -> bool:
        return all(l <= as_rational(v) <= h for l, v, h in zip(self.lo, x, self.hi))

    def center(self) -> tuple:
        return tuple((l + h) / 2 for l, h in zip(self.lo, self.hi))

    def distance(self, x) -> float:
        """Euclidean distance from ``x`` to the box (0 inside)."""
        s = 0.0
        for l, v, h in zip(self.lo, x, self.hi):
            v = float(v)
            if v < l:
                s += (float(l) - v) ** 2
            elif v > h:
                s += (v - float(h)) ** 2
        return math.sqrt(s)


@dataclass
class Workspace:
    """Bounded configuration space with clearance-expanded polytope obstacles.

    Points outside ``bounds`` are invalid; the bounding box is handled as
    four zero-clearance half-space walls so that curves leaving it are caught
    by the same exact machinery as obstacles.
    """

    lo: tuple
    hi: tuple
    obstacles: list = field(default_factory=list)
    clearance: list = field(default_factory=list)
    resolution: Fraction | None = None

    def __post_init__(self):
        self.lo = tuple(as_rational(v) for v in self.lo)
        self.hi = tuple(as_rational(v) for v in self.hi)
        if len(self.lo) != len(self.hi) or any(l >= h for l, h in zip(self.lo, self.hi)):
            raise DomainError("bounds must be a nonempty box")
        if not isinstance(self.clearance, (list, tuple)):
            self.clearance = [as_rational(self.clearance)] * len(self.obstacles)
        self.clearance = [as_rational(c) for c in self.clearance]
        if len(self.clearance) != len(self.obstacles):
            raise DomainError("one clearance value per obstacle")
        self.expanded = [expand_polytope(o, c) for o, c in zip(self.obstacles, self.clearance)]
        self.walls = _walls(self.lo, self.hi)
        # float bounding boxes of expanded rectangles, for a conservative prefilter
        self._boxes = []
        for p in self.expanded:
            box = p.axis_box()
            self._boxes.append(None if box is None else (
                tuple(float(v) for v in box[0]), tuple(float(v) for v in box[1])))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def diameter(self) -> float:
        return math.sqrt(sum(float(h - l) ** 2 for l, h in zip(self.lo, self.hi)))

    def in_bounds(self, p) -> bool:
        return all(l < as_rational(v) < h for l, v, h in zip(self.lo, p, self.hi))

    def checked_regions(self) -> list:
        """Every closed set a plan must avoid: expanded obstacles then walls."""
        return list(self.expanded) + list(self.walls)

    def candidate_obstacles(self, lo_f, hi_f) -> list[int]:
        """Indices of expanded obstacles whose box may meet ``[lo_f, hi_f]``."""
        out = []
        eps = 1e-9
        for i, box in enumerate(self._boxes):
            if box is not None and any(
                hi_f[k] < box[0][k] - eps or lo_f[k] > box[1][k] + eps for k in range(len(lo_f))
            ):
                continue
            out.append(i)
        return out


def _walls(lo, hi) -> list[Polytope]:
    d = len(lo)
    walls = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        walls.append(Polytope((AffineConstraint(tuple(e), -lo[i]),), id=-(2 * i + 1)))
        e = [0] * d
        e[i] = -1
        walls.append(Polytope((AffineConstraint(tuple(e), hi[i]),), id=-(2 * i + 2)))
    return walls


def point_free(p, ws: Workspace) -> bool:
    p = tuple(as_rational(v) for v in p)
    if not ws.in_bounds(p):
        return False
    pf = [float(v) for v in p]
    for i in ws.candidate_obstacles(pf, pf):
        if ws.expanded[i].contains(p):
            return False
    return True


def segment_hits(p, q, poly: Polytope) -> bool:
    """Exact test whether segment ``p -> q`` meets the closed polytope."""
    t_lo, t_hi = Fraction(0), Fraction(1)
    for g in poly.constraints:
        u = g(p)
        v = g(q) - u  # g(p + t (q - p)) = u + v t
        if v == 0:
            if u > 0:
                return False
            continue
        root = -u / v
        if v > 0:
            if root < t_hi:
                t_hi = root
        elif root > t_lo:
            t_lo = root
        if t_lo > t_hi:
            return False
    return t_lo <= t_hi


def segment_free(p, q, ws: Workspace) -> bool:
    """True iff the closed segment avoids every clearance-expanded obstacle."""
    p = tuple(as_rational(v) for v in p)
    q = tuple(as_rational(v) for v in q)
    if not (ws.in_bounds(p) and ws.in_bounds(q)):
        return False
    pf = [float(v) for v in p]
    qf = [float(v) for v in q]
    lo_f = [min(a, b) for a, b in zip(pf, qf)]
    hi_f = [max(a, b) for a, b in zip(pf, qf)]
    for i in ws.candidate_obstacles(lo_f, hi_f):
        if segment_hits(p, q, ws.expanded[i]):
            return False
    return True


def grid_to_polytopes(grid, resolution=1, origin=(0, 0)) -> list[Polytope]:
    """Greedy cover of occupied cells by axis-aligned rectangles.

    Row-major scan; each seed cell grows right first, then down while the
    whole row span stays occupied.  Rectangles may overlap.  ``grid[i][j]`` is
    row ``i`` (y axis) and column ``j`` (x axis).
    """
    resolution = as_rational(resolution)
    ox, oy = (as_rational(v) for v in origin)
    rows = len(grid)
    if rows == 0:
        return []
    cols = len(grid[0])
    covered = [[False] * cols for _ in range(rows)]
    out: list[Polytope] = []
    for i in range(rows):
        for j in range(cols):
            if not grid[i][j] or covered[i][j]:
                continue
            w = 1
            while j + w < cols and grid[i][j + w]:
                w += 1
            h = 1
            while i + h < rows and all(grid[i + h][j + k] for k in range(w)):
                h += 1
            for a in range(i, i + h):
                for b in range(j, j + w):
                    covered[a][b] = True
            lo = (ox + j * resolution, oy + i * resolution)
            hi = (ox + (j + w) * resolution, oy + (i + h) * resolution)
            out.append(Polytope.box(lo, hi, id=len(out)))
    return out


# --- instance files -------------------------------------------------------------


def _rat_json(x: Fraction):
    x = as_rational(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class Instance:
    workspace: Workspace
    q0: tuple
    goal: GoalRegion
    grid: list | None = None
    name: str = ""


def load_instance(path) -> Instance:
    data = json.loads(Path(path).read_text())
    return instance_from_dict(data, name=Path(path).stem)


def instance_from_dict(data: dict, name: str = "") -> Instance:
    try:
        d = int(data["d"])
        lo, hi = data["bounds"]
        if len(lo) != d or len(hi) != d:
            raise DomainError("bounds dimension mismatch")
        polys: list[Polytope] = []
        grid = None
        resolution = None
        if data.get("grid") is not None:
            g = data["grid"]
            grid = [[int(v) for v in row] for row in g["cells"]]
            resolution = as_rational(g["resolution"])
            polys.extend(grid_to_polytopes(grid, resolution, origin=tuple(lo)))
        for spec in data.get("polytopes") or []:
            cons = tuple(AffineConstraint(c["a"], c["b"]) for c in spec["constraints"])
            polys.append(Polytope(cons, id=len(polys)))
        if data.get("grid") is None and data.get("polytopes") is None:
            raise DomainError("instance needs a grid or explicit polytopes")
        clearance = data.get("clearance", 0)
        if isinstance(clearance, list):
            clearance = [as_rational(c) for c in clearance]
        else:
            clearance = [as_rational(clearance)] * len(polys)
        ws = Workspace(tuple(lo), tuple(hi), polys, clearance, resolution)
        q0 = tuple(as_rational(v) for v in data["q0"])
        gl, gh = data["goal_box"]
        goal = GoalRegion(tuple(gl), tuple(gh))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed instance: {exc!r}") from exc
    return Instance(ws, q0, goal, grid, name)


def instance_to_dict(inst: Instance, clearance=None) -> dict:
    ws = inst.workspace
    out = {
        "d": ws.dim,
        "bounds": [[_rat_json(v) for v in ws.lo], [_rat_json(v) for v in ws.hi]],
        "q0": [_rat_json(v) for v in inst.q0],
        "goal_box": [[_rat_json(v) for v in inst.goal.lo], [_rat_json(v) for v in inst.goal.hi]],
        "clearance": _rat_json(clearance if clearance is not None else (ws.clearance[0] if ws.clearance else 0)),
    }
    if inst.grid is not None:
        out["grid"] = {"cells": inst.grid, "resolution": _rat_json(ws.resolution)}
    else:
        out["polytopes"] = [
            {"constraints": [{"a": [_rat_json(v) for v in g.a], "b": _rat_json(g.b)} for g in p.constraints]}
            for p in ws.obstacles
        ]
    return out
