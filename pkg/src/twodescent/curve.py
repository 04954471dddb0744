"""Elliptic curves y^2 = (x - e1)(x - e2)(x - e3) over Q with integral roots."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import sympy

from .arith import REAL, LocalPlace, as_fraction, factor


class CurveError(ValueError):
    pass


class SingularCurve(CurveError):
    pass


class NotFullTwoTorsion(CurveError):
    """The 2-division polynomial does not split completely over Q."""


@dataclass(frozen=True)
class PointE:
    """A rational point; ``x is None`` encodes the point at infinity."""

    x: Fraction | None = None
    y: Fraction | None = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("affine point needs both coordinates")
        if self.x is not None:
            object.__setattr__(self, "x", as_fraction(self.x))
            object.__setattr__(self, "y", as_fraction(self.y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __str__(self):
        return "O" if self.is_infinity else f"({self.x}, {self.y})"


INFINITY = PointE()


def ainv_discriminant(a1, a2, a3, a4, a6) -> Fraction:
    a1, a2, a3, a4, a6 = map(as_fraction, (a1, a2, a3, a4, a6))
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@dataclass(frozen=True)
class CurveE2:
    """y^2 = (x - e1)(x - e2)(x - e3).

    The roots are kept in the order given; :func:`normalize` produces the
    canonical ascending order, and every downstream coordinate (descent
    map components, covering equations) follows ``(e1, e2, e3)``.
    """

    e1: int
    e2: int
    e3: int

    def __post_init__(self):
        for e in (self.e1, self.e2, self.e3):
            if int(e) != e:
                raise ValueError("roots must be integers")
        if len({self.e1, self.e2, self.e3}) < 3:
            raise SingularCurve("repeated root")

    @property
    def roots(self) -> tuple[int, int, int]:
        return (self.e1, self.e2, self.e3)

    @property
    def discriminant(self) -> int:
        e1, e2, e3 = self.roots
        return 16 * ((e1 - e2) * (e1 - e3) * (e2 - e3)) ** 2

    def a_invariants(self) -> tuple[int, int, int, int, int]:
        e1, e2, e3 = self.roots
        return (0, -(e1 + e2 + e3), 0, e1 * e2 + e1 * e3 + e2 * e3, -e1 * e2 * e3)

    def short_weierstrass(self) -> tuple[Fraction, Fraction]:
        """(A, B) with this curve isomorphic to y^2 = x^3 + A x + B via x -> x - a2/3."""
        _, a2, _, a4, a6 = map(Fraction, self.a_invariants())
        A = a4 - a2 * a2 / 3
        B = a6 - a2 * a4 / 3 + 2 * a2 ** 3 / 27
        return A, B

    def j_invariant(self) -> Fraction:
        A, B = self.short_weierstrass()
        return 1728 * 4 * A ** 3 / (4 * A ** 3 + 27 * B * B)

    def bad_primes(self) -> tuple[int, ...]:
        return tuple(sorted(factor(self.discriminant)))

    def ramification_set(self, extra_primes=(), precision: int = 20) -> tuple[LocalPlace, ...]:
        """Finite primes dividing 2*disc (plus ``extra_primes``) in ascending order, then the real place."""
        primes = set(self.bad_primes()) | {2} | {int(p) for p in extra_primes}
        return tuple(LocalPlace(p, precision) for p in sorted(primes)) + (REAL,)

    def real_components(self) -> int:
        # the cubic has three real roots by construction
        return 2

    def f(self, x) -> Fraction:
        x = as_fraction(x)
        return (x - self.e1) * (x - self.e2) * (x - self.e3)

    def contains(self, P: PointE) -> bool:
        return P.is_infinity or P.y * P.y == self.f(P.x)

    def two_torsion(self) -> tuple[PointE, PointE, PointE]:
        return tuple(PointE(e, 0) for e in self.roots)

    def neg(self, P: PointE) -> PointE:
        return P if P.is_infinity else PointE(P.x, -P.y)

    def add(self, P: PointE, Q: PointE) -> PointE:
        if P.is_infinity:
            return Q
        if Q.is_infinity:
            return P
        _, a2, _, a4, _ = self.a_invariants()
        if P.x == Q.x:
            if P.y + Q.y == 0:
                return INFINITY
            lam = (3 * P.x * P.x + 2 * a2 * P.x + a4) / (2 * P.y)
        else:
            lam = (Q.y - P.y) / (Q.x - P.x)
        x3 = lam * lam - a2 - P.x - Q.x
        y3 = lam * (P.x - x3) - P.y
        return PointE(x3, y3)

    def mul(self, n: int, P: PointE) -> PointE:
        if n < 0:
            return self.mul(-n, self.neg(P))
        result, addend = INFINITY, P
        while n:
            if n & 1:
                result = self.add(result, addend)
            addend = self.add(addend, addend)
            n >>= 1
        return result

    def __str__(self):
        terms = "".join(f"(x - {e})" if e > 0 else f"(x + {-e})" if e < 0 else "x" for e in self.roots)
        return f"y^2 = {terms}"


@dataclass(frozen=True)
class CoordinateChange:
    """Standard change of Weierstrass coordinates (u, r, s, t).

    A model point (X, Y) corresponds to the input point
    x = u^2 X + r, y = u^3 Y + s u^2 X + t.
    """

    u: Fraction
    r: Fraction = Fraction(0)
    s: Fraction = Fraction(0)
    t: Fraction = Fraction(0)

    def to_input(self, P: PointE) -> PointE:
        if P.is_infinity:
            return P
        u, r, s, t = self.u, self.r, self.s, self.t
        return PointE(u * u * P.x + r, u ** 3 * P.y + s * u * u * P.x + t)

    def to_model(self, P: PointE) -> PointE:
        if P.is_infinity:
            return P
        u, r, s, t = self.u, self.r, self.s, self.t
        X = (P.x - r) / (u * u)
        return PointE(X, (P.y - s * u * u * X - t) / u ** 3)


def _min_scale(coeffs) -> int:
    """Least integer u >= 1 with c_k * u^(2k) integral for the k-th coefficient (k = 1, 2, 3)."""
    u = 1
    for k, c in enumerate(coeffs, start=1):
        den = as_fraction(c).denominator
        for p, e in factor(den).items():
            need = -(-e // (2 * k))
            while u % p ** need:
                u *= p
    return u


def _integer_roots(coeffs) -> list[int]:
    # monic integral cubic x^3 + A x^2 + B x + C
    x = sympy.Symbol("x")
    A, B, C = coeffs
    poly = sympy.Poly(x ** 3 + A * x ** 2 + B * x + C, x)
    roots = []
    for fac, mult in poly.factor_list()[1]:
        if fac.degree() != 1:
            raise NotFullTwoTorsion("full rational 2-torsion required: 2-division polynomial has an irreducible factor")
        a, b = fac.all_coeffs()
        roots += [int(-b / a)] * mult
    return roots


def normalize(data) -> tuple[CurveE2, CoordinateChange]:
    """Build the canonical integral model with roots in ascending order.

    ``data`` is a 5-sequence of a-invariants or a 3-sequence of roots,
    rationals given as numbers or ``"p/q"`` strings.
    """
    vals = [as_fraction(v) for v in data]
    if len(vals) == 5:
        a1, a2, a3, a4, a6 = vals
        if ainv_discriminant(a1, a2, a3, a4, a6) == 0:
            raise SingularCurve("singular curve")
        # complete the square: (y + (a1 x + a3)/2)^2 = x^3 + b2/4 x^2 + b4/2 x + b6/4
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        cubic = (b2 / 4, b4 / 2, b6 / 4)
        s, t = -a1 / 2, -a3 / 2
    elif len(vals) == 3:
        if len(set(vals)) < 3:
            raise SingularCurve("repeated root")
        e1, e2, e3 = vals
        cubic = (-(e1 + e2 + e3), e1 * e2 + e1 * e3 + e2 * e3, -e1 * e2 * e3)
        s = t = Fraction(0)
    else:
        raise CurveError("curve must be given by 5 a-invariants or 3 roots")
    u = _min_scale(cubic)
    scaled = [int(c * u ** (2 * k)) for k, c in enumerate(cubic, start=1)]
    roots = _integer_roots(scaled)
    if len(set(roots)) < 3:
        raise SingularCurve("repeated root")
    E = CurveE2(*sorted(roots))
    return E, CoordinateChange(Fraction(1, u), Fraction(0), s, t)
