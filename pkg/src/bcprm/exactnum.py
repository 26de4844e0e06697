"""Exact rational arithmetic and univariate polynomials over Q.

Rationals are :class:`fractions.Fraction`; polynomials are immutable
coefficient tuples, lowest degree first.  Root isolation uses the
Descartes / Vincent-Collins-Akritas bisection on integer polynomials,
which keeps the inner loop in Python ints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

DYADIC_BITS = 14


class DomainError(ValueError):
    """Raised when an exact operation receives an argument outside its domain."""


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite value {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def dyadic_approx(x: float, beta: int = DYADIC_BITS) -> Fraction:
    """Closest rational ``n / 2**b`` to ``x`` with ``b <= beta``.

    Among equally close candidates the one with the smaller reduced
    denominator wins.  The integer part is carried exactly, so the error is
    at most ``2**-(beta + 1)`` regardless of magnitude.
    """
    if beta < 1:
        raise DomainError("beta must be >= 1")
    exact = as_rational(float(x)) if not isinstance(x, Fraction) else x
    scale = 1 << beta
    scaled = exact * scale
    lo = math.floor(scaled)
    hi = lo + 1
    d_lo = scaled - lo
    d_hi = hi - scaled
    if d_lo < d_hi:
        n = lo
    elif d_hi < d_lo:
        n = hi
    else:
        # exact tie; prefer the even numerator (smaller denominator once reduced)
        n = lo if lo % 2 == 0 else hi
    return Fraction(n, scale)


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2


UNIT = Interval(Fraction(0), Fraction(1))


def _trim(coeffs: Iterable) -> tuple:
    c = [as_rational(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class UniPoly:
    """Univariate polynomial with rational coefficients (lowest degree first).

    The zero polynomial has no coefficients and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("UniPoly is immutable")

    @classmethod
    def constant(cls, c) -> "UniPoly":
        return cls((c,))

    @classmethod
    def monomial(cls, degree: int, c=1) -> "UniPoly":
        return cls([0] * degree + [c])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "UniPoly":
        p = cls.constant(lead)
        for r in roots:
            p = p * cls((-as_rational(r), 1))
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __repr__(self):
        return f"UniPoly({[str(c) for c in self.coeffs]})"

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == _trim((other,))
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        other = _coerce(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return UniPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return UniPoly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = UniPoly.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, c) -> "UniPoly":
        c = as_rational(c)
        return UniPoly(c * x for x in self.coeffs)

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t) -> Fraction:
        """Exact Horner evaluation."""
        t = as_rational(t)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def eval_float(self, t: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * t + float(c)
        return acc

    def derivative(self) -> "UniPoly":
        return UniPoly(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def compose(self, inner: "UniPoly") -> "UniPoly":
        out = UniPoly()
        for c in reversed(self.coeffs):
            out = out * inner + c
        return out

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return self.scale(1 / self.lead)

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.lead
        q = [Fraction(0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - dq - 1, -1, -1):
            f = rem[k + dq] / lead
            q[k] = f
            if f:
                for i, c in enumerate(other.coeffs):
                    rem[k + i] -= f * c
        return UniPoly(q), UniPoly(rem[:dq])

    def __floordiv__(self, other):
        return self.divmod(_coerce(other))[0]

    def __mod__(self, other):
        return self.divmod(_coerce(other))[1]

    def sign_at(self, t) -> int:
        v = self.eval(t)
        return (v > 0) - (v < 0)


def _coerce(x) -> UniPoly:
    return x if isinstance(x, UniPoly) else UniPoly.constant(x)


def poly_arith(a: UniPoly, b: UniPoly, op: str) -> UniPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise DomainError(f"unknown op {op!r}")


def poly_eval(p: UniPoly, t) -> Fraction:
    return p.eval(t)


def _primitive_ints(coeffs) -> list[int]:
    """Integer coefficients of a nonzero rational polynomial, content removed, positive lead."""
    den = 1
    for c in coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [c.numerator * (den // c.denominator) for c in coeffs]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if ints[-1] < 0:
        g = -g
    return [v // g for v in ints]


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of integer polynomials (lowest degree first), trimmed."""
    r = list(a)
    lb, nb = b[-1], len(b)
    while len(r) >= nb:
        lr, k = r[-1], len(r) - nb
        r = [lb * c for c in r]
        for i, c in enumerate(b):
            r[k + i] -= lr * c
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    return r


def poly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic gcd by the primitive remainder sequence over Z (keeps coefficients small)."""
    if a.is_zero() or b.is_zero():
        return (b if a.is_zero() else a).monic()
    A, B = _primitive_ints(a.coeffs), _primitive_ints(b.coeffs)
    if len(A) < len(B):
        A, B = B, A
    while len(B) > 1:
        R = _prem(A, B)
        if not R:
            return UniPoly(B).monic()
        A, B = B, _primitive_ints([Fraction(v) for v in R])
    return UniPoly.constant(1)


def square_free(p: UniPoly) -> UniPoly:
    """``p / gcd(p, p')``, made monic; constants and zero pass through."""
    if p.degree <= 0:
        return p
    g = poly_gcd(p, p.derivative())
    if g.degree == 0:
        return p.monic()
    return (p // g).monic()


def compose_affine_with_curve(g_coeffs: Sequence, curve: Sequence[UniPoly]) -> UniPoly:
    """``sum_j a_j * curve_j(t) + b`` for ``g_coeffs = (a_1, ..., a_d, b)``."""
    if len(g_coeffs) != len(curve) + 1:
        raise DomainError(
            f"constraint has {len(g_coeffs) - 1} coefficients, curve has {len(curve)} components"
        )
    out = UniPoly.constant(g_coeffs[-1])
    for a, comp in zip(g_coeffs[:-1], curve):
        a = as_rational(a)
        if a:
            out = out + comp.scale(a)
    return out


# --- integer polynomial kernels -------------------------------------------------


def sign_variations(coeffs: Iterable) -> int:
    count = 0
    prev = 0
    for c in coeffs:
        if c == 0:
            continue
        s = 1 if c > 0 else -1
        if prev and s != prev:
            count += 1
        prev = s
    return count


def _taylor_shift1(c: list) -> list:
    """Coefficients of ``p(x + 1)`` (Horner-style, in place on a copy)."""
    c = list(c)
    n = len(c)
    for i in range(n - 1):
        for k in range(n - 2, i - 1, -1):
            c[k] += c[k + 1]
    return c


def _unit_variations(c: list) -> int:
    """Descartes bound for roots in the open unit interval."""
    return sign_variations(_taylor_shift1(c[::-1]))


def _integer_poly_on(p: UniPoly, lo: Fraction, hi: Fraction) -> list:
    """Integer coefficients proportional to ``p(lo + (hi - lo) y)``."""
    q = p.compose(UniPoly((lo, hi - lo)))
    den = 1
    for c in q.coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in q.coeffs]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def descartes_bound(p: UniPoly, interval: Interval = UNIT) -> int:
    """Sign-variation count of ``p`` Möbius-mapped onto the open interval.

    0 certifies no root in the open interval, 1 certifies exactly one.
    """
    if p.is_zero():
        raise DomainError("Descartes bound of the zero polynomial")
    if interval.degenerate:
        return 0
    return _unit_variations(_integer_poly_on(p, interval.lo, interval.hi))


def _isolate_unit(c: list) -> list[tuple[int, int, bool]]:
    """Isolate roots of a square-free integer poly in the open unit interval.

    Returns ``(k, num, exact)`` triples: the root lies in
    ``(num / 2**k, (num + 1) / 2**k)``, or is exactly ``num / 2**k`` when
    ``exact`` is set.
    """
    out = []
    stack = [(c, 0, 0)]
    while stack:
        q, k, num = stack.pop()
        v = _unit_variations(q)
        if v == 0:
            continue
        if v == 1:
            out.append((k, num, False))
            continue
        n = len(q) - 1
        left = [coef << (n - i) for i, coef in enumerate(q)]  # 2^n q(y/2)
        right = _taylor_shift1(left)  # 2^n q((y+1)/2)
        if right[0] == 0:
            # midpoint is a root; drop it from the right half.  The left half
            # keeps it at y = 1, which maps to t = 0 and leaves the count intact.
            out.append((k + 1, 2 * num + 1, True))
            stack.append((right[1:], k + 1, 2 * num + 1))
            stack.append((left, k + 1, 2 * num))
        else:
            stack.append((right, k + 1, 2 * num + 1))
            stack.append((left, k + 1, 2 * num))
    return out


def isolate_roots(p: UniPoly, interval: Interval = UNIT, *, reduce: bool = True) -> list[Interval]:
    """Disjoint isolating intervals for the real roots of ``p`` in ``interval``.

    Each returned interval holds exactly one root.  Roots landing on a
    rational bisection point (or on the interval ends) come back as
    degenerate intervals ``[r, r]``; non-degenerate ones are open isolators
    whose endpoints are not roots.
    """
    if p.is_zero():
        raise DomainError("cannot isolate roots of the zero polynomial")
    lo, hi = as_rational(interval.lo), as_rational(interval.hi)
    sf = square_free(p) if reduce else p
    if sf.degree <= 0:
        return []
    if lo == hi:
        return [Interval(lo, lo)] if sf.eval(lo) == 0 else []
    found: list[Interval] = []
    if sf.eval(lo) == 0:
        found.append(Interval(lo, lo))
    if sf.eval(hi) == 0:
        found.append(Interval(hi, hi))
    ints = _integer_poly_on(sf, lo, hi)
    width = hi - lo
    for k, num, exact in _isolate_unit(ints):
        scale = Fraction(1, 1 << k)
        a = lo + width * num * scale
        b = lo + width * (num + 1) * scale
        m = (a + b) / 2
        if exact:
            found.append(Interval(a, a))
        elif sf.eval(m) == 0:
            found.append(Interval(m, m))  # the single root sits on the rational midpoint
        else:
            found.append(Interval(a, b))
    found = [_clear_endpoints(sf, iv) for iv in found]
    found.sort(key=lambda iv: (iv.lo, iv.hi))
    # neighbours from adjacent bisection cells may share a (non-root) endpoint
    for i in range(len(found) - 1):
        left = found[i]
        while left.hi >= found[i + 1].lo:
            left = refine(sf, left, (left.hi - left.lo) / 2)
        found[i] = left
    return found


def _clear_endpoints(p: UniPoly, iv: Interval) -> Interval:
    """Shrink an open isolator until neither endpoint is itself a root."""
    lo, hi = iv.lo, iv.hi
    if lo == hi:
        return iv
    while p.eval(lo) == 0 or p.eval(hi) == 0:
        m = (lo + hi) / 2
        if p.eval(m) == 0:
            return Interval(m, m)
        if descartes_bound(p, Interval(lo, m)) > 0:
            hi = m
        else:
            lo = m
    return Interval(lo, hi)


def refine(p: UniPoly, iv: Interval, width) -> Interval:
    """Bisect an isolating interval of square-free ``p`` below ``width``."""
    lo, hi = iv.lo, iv.hi
    if lo == hi:
        return iv
    s_lo = p.sign_at(lo)
    while hi - lo > width:
        m = (lo + hi) / 2
        s = p.sign_at(m)
        if s == 0:
            return Interval(m, m)
        if s == s_lo:
            lo = m
        else:
            hi = m
    return Interval(lo, hi)
