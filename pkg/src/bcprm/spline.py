"""C2 piecewise-cubic plans fitted exactly through geometric waypoints."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactnum import DomainError, UniPoly, as_rational, dyadic_approx
from .polytrace import CurvePiece


class FitError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GeometricPlan:
    waypoints: tuple
    edges: tuple = ()
    vertices: tuple = ()
    cost: float = 0.0

    def __post_init__(self):
        wps = tuple(tuple(as_rational(v) for v in q) for q in self.waypoints)
        object.__setattr__(self, "waypoints", wps)
        if len(wps) < 2:
            raise DomainError("a geometric plan needs at least two waypoints")
        for a, b in zip(wps, wps[1:]):
            if a == b:
                raise DomainError("consecutive waypoints must differ")

    @property
    def n_pieces(self) -> int:
        return len(self.waypoints) - 1

    @property
    def dim(self) -> int:
        return len(self.waypoints[0])


@dataclass(frozen=True)
class SmoothPlan:
    pieces: tuple
    source: GeometricPlan | None = field(default=None, compare=False)

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)

    @property
    def dim(self) -> int:
        return self.pieces[0].dim

    def coefficients(self, i: int, j: int) -> tuple:
        """``(alpha, beta, kappa, delta)`` of piece ``i``, dimension ``j``."""
        c = list(self.pieces[i].components[j].coeffs) + [Fraction(0)] * 4
        return c[3], c[2], c[1], c[0]

    def to_json(self) -> list:
        out = []
        for piece in self.pieces:
            comps = []
            for comp in piece.components:
                coeffs = list(comp.coeffs) + [Fraction(0)] * (4 - len(comp.coeffs))
                comps.append({
                    "coeffs": [f"{c.numerator}/{c.denominator}" for c in coeffs],
                    "decimal": [float(c) for c in coeffs],
                })
            out.append({"components": comps})
        return out

    @classmethod
    def from_json(cls, data: list) -> "SmoothPlan":
        pieces = []
        for piece in data:
            pieces.append(CurvePiece(tuple(UniPoly(Fraction(c) for c in comp["coeffs"]) for comp in piece["components"])))
        return cls(tuple(pieces))


def _spline_system(n: int) -> list[dict]:
    """Sparse rows of the 4n x 4n fitting matrix in a banded order.

    Unknown ``4 i + k`` is (alpha, beta, kappa, delta)[k] of piece ``i``.
    The right-hand side is attached later; ``rhs`` tags say which waypoint
    feeds each row.
    """
    rows = [({4 * 0 + 1: 2}, None)]  # zero initial acceleration
    for i in range(n):
        a, b, k, d = 4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3
        rows.append(({d: 1}, i))  # starts at q_i
        rows.append(({a: 1, b: 1, k: 1, d: 1}, i + 1))  # ends at q_{i+1}
        if i < n - 1:
            rows.append(({a: 3, b: 2, k: 1, 4 * (i + 1) + 2: -1}, None))  # C1
            rows.append(({a: 6, b: 2, 4 * (i + 1) + 1: -2}, None))  # C2
    rows.append(({4 * (n - 1): 6, 4 * (n - 1) + 1: 2}, None))  # zero final acceleration
    return rows


def solve_sparse(rows: list[dict], rhs: list[list], n: int) -> list[list]:
    """Exact Gaussian elimination over Q on sparse rows with several right-hand sides."""
    A = [{c: Fraction(v) for c, v in r.items() if v} for r in rows]
    B = [[as_rational(v) for v in r] for r in rhs]
    m = len(B[0]) if B else 0
    pivot_row = {}
    used = [False] * len(A)
    by_col: dict[int, set] = {}
    for ri, r in enumerate(A):
        for c in r:
            by_col.setdefault(c, set()).add(ri)
    for col in range(n):
        cands = [ri for ri in by_col.get(col, ()) if not used[ri] and A[ri].get(col)]
        if not cands:
            raise FitError("singular fitting system")
        p = min(cands, key=lambda ri: (len(A[ri]), ri))
        used[p] = True
        pivot_row[col] = p
        prow = A[p]
        pv = prow[col]
        for ri in cands:
            if ri == p:
                continue
            row = A[ri]
            f = row[col] / pv
            for c, v in prow.items():
                nv = row.get(c, 0) - f * v
                if nv:
                    if c not in row:
                        by_col.setdefault(c, set()).add(ri)
                    row[c] = nv
                else:
                    row.pop(c, None)
            B[ri] = [x - f * y for x, y in zip(B[ri], B[p])]
    x = [[Fraction(0)] * m for _ in range(n)]
    for col in range(n - 1, -1, -1):
        p = pivot_row[col]
        row = A[p]
        acc = list(B[p])
        for c, v in row.items():
            if c != col:
                acc = [a - v * xc for a, xc in zip(acc, x[c])]
        x[col] = [a / row[col] for a in acc]
    return x


def fit(plan: GeometricPlan) -> SmoothPlan:
    """Unique C2 cubic spline through the waypoints with zero end accelerations."""
    n = plan.n_pieces
    d = plan.dim
    rows = _spline_system(n)
    rhs = []
    for _, q in rows:
        rhs.append([Fraction(0)] * d if q is None else list(plan.waypoints[q]))
    x = solve_sparse([r for r, _ in rows], rhs, 4 * n)
    pieces = []
    for i in range(n):
        comps = []
        for j in range(d):
            a, b, k, dd = (x[4 * i + c][j] for c in range(4))
            comps.append(UniPoly((dd, k, b, a)))
        pieces.append(CurvePiece(tuple(comps)))
    return SmoothPlan(tuple(pieces), plan)


def straight_plan(plan: GeometricPlan) -> SmoothPlan:
    """Piecewise-linear plan (C0 only); used for reference and rendering."""
    pieces = []
    for p, q in zip(plan.waypoints, plan.waypoints[1:]):
        pieces.append(CurvePiece(tuple(UniPoly((a, b - a)) for a, b in zip(p, q))))
    return SmoothPlan(tuple(pieces), plan)


def locate(n: int, t) -> tuple[int, Fraction]:
    """Piece index and local parameter for global ``t``; grid points go to the left piece."""
    t = as_rational(t)
    if t < 0 or t > 1:
        raise DomainError(f"t={t} outside [0, 1]")
    s = n * t
    i = -(-s.numerator // s.denominator)  # ceil
    i = max(i, 1)
    return i - 1, s - (i - 1)


def evaluate(plan: SmoothPlan, t, order: int = 0) -> tuple:
    if order not in (0, 1, 2):
        raise DomainError("order must be 0, 1 or 2")
    i, u = locate(plan.n_pieces, t)
    piece = plan.pieces[i]
    for _ in range(order):
        piece = piece.derivative()
    return piece(u)


def constraint_residuals(plan: SmoothPlan, waypoints: Sequence) -> list[Fraction]:
    """Residuals of every interpolation, continuity and boundary equation (all zero for a fit)."""
    n = plan.n_pieces
    out = []
    for j in range(plan.dim):
        coef = [plan.coefficients(i, j) for i in range(n)]
        out.append(2 * coef[0][1])
        for i, (a, b, k, d) in enumerate(coef):
            out.append(d - as_rational(waypoints[i][j]))
            out.append(a + b + k + d - as_rational(waypoints[i + 1][j]))
            if i < n - 1:
                a2, b2, k2, _ = coef[i + 1]
                out.append(3 * a + 2 * b + k - k2)
                out.append(6 * a + 2 * b - 2 * b2)
        a, b, _, _ = coef[-1]
        out.append(6 * a + 2 * b)
    return out


def rationalize(coeffs, waypoints: Sequence | None = None, beta: int = 14) -> SmoothPlan:
    """Map a machine-real spline onto exact dyadic coefficients.

    ``coeffs[i][j]`` is ``(alpha, beta, kappa, delta)`` of piece ``i`` and
    dimension ``j``.  Each coefficient goes through :func:`dyadic_approx`;
    interpolation is then re-imposed exactly by solving for ``delta`` and
    ``kappa``.  If the rounded coefficients do not satisfy the continuity
    equations exactly, the plan is re-fitted from the rounded waypoints,
    which yields the unique exact spline.
    """
    n = len(coeffs)
    if n == 0:
        raise DomainError("empty spline")
    d = len(coeffs[0])
    r = [[tuple(dyadic_approx(float(c), beta) for c in coeffs[i][j]) for j in range(d)] for i in range(n)]
    if waypoints is None:
        waypoints = [tuple(r[i][j][3] for j in range(d)) for i in range(n)]
        waypoints.append(tuple(sum(r[n - 1][j]) for j in range(d)))
    else:
        waypoints = [tuple(as_rational(v) for v in q) for q in waypoints]
    pieces = []
    for i in range(n):
        comps = []
        for j in range(d):
            a, b, _, _ = r[i][j]
            delta = waypoints[i][j]
            kappa = waypoints[i + 1][j] - a - b - delta
            comps.append(UniPoly((delta, kappa, b, a)))
        pieces.append(CurvePiece(tuple(comps)))
    plan = SmoothPlan(tuple(pieces))
    if all(v == 0 for v in constraint_residuals(plan, waypoints)):
        return plan
    return fit(GeometricPlan(tuple(waypoints)))
