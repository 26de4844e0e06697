"""Dense floating-point plan validator, independent of the exact trace machinery.

Pieces are sampled on a uniform grid and checked against the *original*
obstacles using Euclidean distance, so it shares no code with clearance
expansion, composition or root isolation.  Used as a second route in tests
and in the benchmark.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Workspace
from .spline import SmoothPlan

DIST_TOL = 1e-9
ANGLE_TOL = 1e-9


@dataclass
class ValidationReport:
    collisions: list = field(default_factory=list)  # (piece, t, obstacle id or "bounds")
    turns: list = field(default_factory=list)  # (piece, half, angle)

    @property
    def ok(self) -> bool:
        return not self.collisions and not self.turns


def _piece_arrays(plan: SmoothPlan):
    for piece in plan.pieces:
        yield [[float(c) for c in comp.coeffs][::-1] or [0.0] for comp in piece.components]


def _box_distance(pts: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    gap = np.maximum(np.maximum(lo - pts, pts - hi), 0.0)
    return np.sqrt((gap ** 2).sum(axis=1))


def _halfspace_violation(pts: np.ndarray, poly, delta: float) -> np.ndarray:
    inside = np.ones(len(pts), dtype=bool)
    for g in poly.constraints:
        a = np.array([float(v) for v in g.a])
        inside &= pts @ a + float(g.b) - delta * np.linalg.norm(a) <= DIST_TOL
    return inside


def dense_validate(plan: SmoothPlan, ws: Workspace, phi_max: float | None = math.pi / 2,
                   samples: int = 10_000) -> ValidationReport:
    rep = ValidationReport()
    ts = np.linspace(0.0, 1.0, samples)
    lo_b = np.array([float(v) for v in ws.lo])
    hi_b = np.array([float(v) for v in ws.hi])
    boxes = [o.axis_box() for o in ws.obstacles]
    for j, comps in enumerate(_piece_arrays(plan)):
        pts = np.stack([np.polyval(c, ts) for c in comps], axis=1)
        out = np.any((pts <= lo_b + DIST_TOL) | (pts >= hi_b - DIST_TOL), axis=1)
        if out.any():
            rep.collisions.append((j, float(ts[np.argmax(out)]), "bounds"))
        for k, (obs, delta) in enumerate(zip(ws.obstacles, ws.clearance)):
            box, delta = boxes[k], float(delta)
            if box is not None:
                lo = np.array([float(v) for v in box[0]])
                hi = np.array([float(v) for v in box[1]])
                bad = _box_distance(pts, lo, hi) <= delta + DIST_TOL
            else:
                bad = _halfspace_violation(pts, obs, delta)
            if bad.any():
                rep.collisions.append((j, float(ts[np.argmax(bad)]), obs.id))
        if phi_max is not None and ws.dim == 2:
            vel = [np.polyder(np.poly1d(c)) for c in comps]
            for half, (a, b) in enumerate(((0.0, 0.5), (0.5, 1.0))):
                u = np.array([v(a) for v in vel])
                w = np.array([v(b) for v in vel])
                nu, nw = np.linalg.norm(u), np.linalg.norm(w)
                if nu == 0 or nw == 0:
                    rep.turns.append((j, half, math.pi))
                    continue
                ang = math.acos(max(-1.0, min(1.0, float(u @ w) / (nu * nw))))
                if ang > phi_max + ANGLE_TOL:
                    rep.turns.append((j, half, ang))
    return rep
