"""Explicit 2-coverings: the conic-pair model, binary quartic models,
local solubility, conic solving and the covering map back to E.

For a class ``(d1, d2, d3)`` the covering is the intersection of two
quadrics in P^3

    H1: d1 u1^2 - d2 u2^2 = (e2 - e1) u0^2
    H2: d1 u1^2 - d3 u3^2 = (e3 - e1) u0^2

obtained from ``x - e_i = d_i (u_i / u0)^2``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd, isqrt, lcm

import sympy

from .arith import (
    REAL,
    LocalPlace,
    PAdic,
    as_fraction,
    hilbert_symbol,
    is_local_square,
    local_class_bits,
    padic_sqrt,
    sqrt_mod,
    squarefree_part,
    valuation,
    factor,
)
from .curve import INFINITY, CurveE2, PointE
from .selmer import SelmerElement


class InsolubleConic(ValueError):
    """A conic without rational points; ``place`` is a place where it has no local point."""

    def __init__(self, place: LocalPlace, message: str = ""):
        self.place = place
        super().__init__(message or f"conic has no points over Q_{place}")


# --- conic-pair model


@dataclass(frozen=True)
class ConicPairModel:
    curve: CurveE2
    d1: int
    d2: int
    d3: int
    t: int

    @property
    def element(self) -> SelmerElement:
        return SelmerElement.from_values(self.d1, self.d2)

    def h1(self) -> tuple[int, int, int]:
        """Diagonal coefficients of H1 in (u0, u1, u2), as a form equal to zero."""
        e1, e2, _ = self.curve.roots
        return (-(e2 - e1), self.d1, -self.d2)

    def h2(self) -> tuple[int, int, int]:
        """Diagonal coefficients of H2 in (u0, u1, u3)."""
        e1, _, e3 = self.curve.roots
        return (-(e3 - e1), self.d1, -self.d3)

    def forms(self) -> dict[str, list[list[int]]]:
        """Both quadrics as sparse symmetric 4x4 forms ``[i, j, coefficient]``."""
        a0, a1, a2 = self.h1()
        b0, b1, b3 = self.h2()
        return {"H1": [[0, 0, a0], [1, 1, a1], [2, 2, a2]], "H2": [[0, 0, b0], [1, 1, b1], [3, 3, b3]]}

    def contains(self, u) -> bool:
        u0, u1, u2, u3 = map(as_fraction, u)
        if not any((u0, u1, u2, u3)):
            return False
        a0, a1, a2 = self.h1()
        b0, b1, b3 = self.h2()
        return a0 * u0 ** 2 + a1 * u1 ** 2 + a2 * u2 ** 2 == 0 and b0 * u0 ** 2 + b1 * u1 ** 2 + b3 * u3 ** 2 == 0


def make_conic_pair(E: CurveE2, xi: SelmerElement) -> ConicPairModel:
    d1, d2, d3 = xi.d1.value, xi.d2.value, xi.d3.value
    t = isqrt(d1 * d2 * d3)
    assert t * t == d1 * d2 * d3
    return ConicPairModel(E, d1, d2, d3, t)


def map_to_E(model: ConicPairModel, u) -> PointE:
    """The degree-4 map (u0 : u1 : u2 : u3) -> (e1 + d1 (u1/u0)^2, t u1 u2 u3 / u0^3).

    Points with u0 = 0 lie over the origin.
    """
    u0, u1, u2, u3 = map(as_fraction, u)
    if not model.contains((u0, u1, u2, u3)):
        raise ValueError("point is not on the covering")
    if u0 == 0:
        return INFINITY
    x = model.curve.e1 + model.d1 * (u1 / u0) ** 2
    y = model.t * u1 * u2 * u3 / u0 ** 3
    return PointE(x, y)


# --- binary quartics


def _polymul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _polypow(a, n):
    out = [1]
    for _ in range(n):
        out = _polymul(out, a)
    return out


def substitute_form(coeffs, M):
    """Coefficients of f(m11 x + m12 z, m21 x + m22 z) for a binary form f.

    ``coeffs[k]`` is the coefficient of x^(n-k) z^k; the result uses the same layout.
    """
    n = len(coeffs) - 1
    (m11, m12), (m21, m22) = M
    X = [m11, m12]  # indexed by power of z
    Z = [m21, m22]
    out = [0] * (n + 1)
    for k, c in enumerate(coeffs):
        if c:
            term = _polymul(_polypow(X, n - k), _polypow(Z, k))
            for i, t in enumerate(term):
                out[i] += c * t
    return out


@dataclass(frozen=True)
class BinaryQuartic:
    """y^2 = a x^4 + b x^3 z + c x^2 z^2 + d x z^3 + e z^4."""

    a: int
    b: int
    c: int
    d: int
    e: int

    def __post_init__(self):
        for v in self.coeffs:
            if int(v) != v:
                raise ValueError("quartic coefficients must be integers")
        object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "b", int(self.b))
        object.__setattr__(self, "c", int(self.c))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "e", int(self.e))

    @property
    def coeffs(self) -> tuple[int, int, int, int, int]:
        return (self.a, self.b, self.c, self.d, self.e)

    @property
    def I(self) -> int:
        a, b, c, d, e = self.coeffs
        return 12 * a * e - 3 * b * d + c * c

    @property
    def J(self) -> int:
        a, b, c, d, e = self.coeffs
        return 72 * a * c * e + 9 * b * c * d - 27 * a * d * d - 27 * b * b * e - 2 * c ** 3

    @property
    def discriminant(self) -> int:
        return (4 * self.I ** 3 - self.J ** 2) // 27

    def __call__(self, x, z=1):
        a, b, c, d, e = self.coeffs
        return (((a * x + b * z) * x + c * z * z) * x + d * z ** 3) * x + e * z ** 4

    def contains(self, x, y, z) -> bool:
        return (x, z) != (0, 0) and y * y == self(x, z)

    def max_norm(self) -> int:
        return max(abs(v) for v in self.coeffs)

    def transform(self, M, lam=1) -> BinaryQuartic:
        """The quartic lam^2 f(M (x, z)); raises if the result is not integral."""
        lam = as_fraction(lam)
        new = [lam * lam * v for v in substitute_form(self.coeffs, M)]
        if any(v.denominator != 1 for v in new):
            raise ValueError("transformed quartic is not integral")
        return BinaryQuartic(*(int(v) for v in new))

    def jacobian(self) -> tuple[int, int]:
        """(A, B) of the Jacobian y^2 = x^3 + A x + B."""
        return -27 * self.I, -27 * self.J

    def __str__(self):
        return "(" + ", ".join(map(str, self.coeffs)) + ")"


def quartic_invariants(q: BinaryQuartic) -> tuple[int, int, int]:
    return q.I, q.J, q.discriminant


def short_j(A, B) -> Fraction:
    A, B = as_fraction(A), as_fraction(B)
    return 1728 * 4 * A ** 3 / (4 * A ** 3 + 27 * B * B)


# --- local solubility


@functools.singledispatch
def is_locally_soluble(model, v: LocalPlace, force: bool = False) -> bool:
    """Whether the model has a point over Q_v.

    At odd primes of good reduction the answer is always yes and is
    returned without search unless ``force`` is set.
    """
    raise TypeError(f"unsupported model {type(model).__name__}")


def _class_triple(vals, v):
    return tuple(local_class_bits(x, v) for x in vals)


def _all_classes(v: LocalPlace):
    return list(product((0, 1), repeat=v.dim))


@functools.lru_cache(maxsize=256)
def realized_class_triples(E: CurveE2, v: LocalPlace) -> frozenset:
    """Local class triples of (x - e1, x - e2, x - e3) as x runs over P^1(Q_v).

    Near e_i the i-th entry takes every class while the others are fixed;
    near infinity all three agree.  Found by exhaustive residue-disk search.
    """
    roots = E.roots
    out = set()
    if v.is_real:
        e = sorted(roots)
        for x in (Fraction(e[0] - 1), Fraction(e[0] + e[1], 2), Fraction(e[1] + e[2], 2), Fraction(e[2] + 1)):
            out.add(_class_triple([x - r for r in roots], v))
        return frozenset(out)
    p = v.p
    m = 3 if p == 2 else 1
    classes = _all_classes(v)
    for c in classes:
        out.add((c, c, c))
    for j in range(1, m):
        for u in range(1, p ** m, 2 if p == 2 else 1):
            if u % p:
                x = Fraction(u, p ** j)
                out.add(_class_triple([x - r for r in roots], v))
    near = []
    for i in range(3):
        others = [j for j in range(3) if j != i]
        need = max(valuation(roots[i] - roots[j], p) for j in others) + m
        fixed = {j: local_class_bits(roots[i] - roots[j], v) for j in others}
        near.append((need, fixed))
    stack = [(0, 0)]
    while stack:
        a, k = stack.pop()
        pk = p ** k
        inside = [i for i in range(3) if (a - roots[i]) % pk == 0]
        if len(inside) == 1 and k >= near[inside[0]][0]:
            i = inside[0]
            for c in classes:
                trip = [None, None, None]
                trip[i] = c
                for j, f in near[i][1].items():
                    trip[j] = f
                out.add(tuple(trip))
            continue
        if not inside and all(k - valuation(a - r, p) >= m for r in roots):
            out.add(_class_triple([Fraction(a - r) for r in roots], v))
            continue
        for r in range(p):
            stack.append((a + r * pk, k + 1))
    return frozenset(out)


@is_locally_soluble.register
def _(model: ConicPairModel, v: LocalPlace, force: bool = False) -> bool:
    E = model.curve
    if not force and not v.is_real and v.p != 2 and (E.discriminant * model.d1 * model.d2) % v.p:
        return True
    target = _class_triple((model.d1, model.d2, model.d3), v)
    return target in realized_class_triples(E, v)


def _taylor(coeffs_low, x0, scale):
    """Coefficients (low degree first) of h(x0 + scale*s) for h given low degree first."""
    n = len(coeffs_low)
    out = [0] * n
    # Horner in the polynomial ring
    for c in reversed(coeffs_low):
        # out = out * (x0 + scale*s) + c
        new = [0] * n
        for i, a in enumerate(out):
            if a:
                new[i] += a * x0
                if i + 1 < n:
                    new[i + 1] += a * scale
        new[0] += c
        out = new
    return out


def _chart_point(coeffs_low, p, x0, k, max_depth, want_point=False):
    """Search x in x0 + p^k Z_p with h(x) a square in Q_p.

    Returns ``(x, value)`` for a witness (value == 0 marks a Hensel root
    near x), or None when the disk has no such x.
    """
    m = 3 if p == 2 else 1
    queue = [(x0, k)]
    head = 0
    while head < len(queue):
        x, k = queue[head]
        head += 1
        if k > max_depth:
            raise RuntimeError("local solubility search exceeded depth bound")
        g = _taylor(coeffs_low, x, p ** k)
        g0 = g[0]
        if g0 == 0:
            return x, 0
        v0 = valuation(g0, p)
        rest = [valuation(c, p) for c in g[1:] if c]
        vary = min(rest) if rest else None
        if vary is None or vary >= v0 + m:
            if is_local_square(g0, LocalPlace(p)):
                return x, g0
            continue
        if not want_point and g[1] and v0 > 2 * valuation(g[1], p):
            return x, 0
        for r in range(p):
            queue.append((x + r * p ** k, k + 1))
    return None


def _depth_bound(q: BinaryQuartic, p: int) -> int:
    return 2 * valuation(q.discriminant, p) + 12


def quartic_local_point(q: BinaryQuartic, v: LocalPlace, want_point: bool = True):
    """A point of y^2 = q over Q_v as ``(x, z, y)``, or None.

    For finite v, ``x, z`` are integers and ``y`` is a :class:`PAdic`
    square root of q(x, z) (or 0 at a root found by Hensel's lemma).
    """
    if q.discriminant == 0:
        raise ValueError("degenerate quartic")
    if v.is_real:
        if q.a >= 0:
            return (1, 0, q.a)
        if q.e > 0:
            return (0, 1, q.e)
        xs = sympy.Symbol("x")
        poly = sympy.Poly([q.a, q.b, q.c, q.d, q.e], xs)
        roots = poly.real_roots()
        return (roots[0], 1, 0) if roots else None
    p = v.p
    depth = _depth_bound(q, p)
    hit = _chart_point(list(reversed(q.coeffs)), p, 0, 0, depth, want_point)
    if hit is not None:
        x, z = hit[0], 1
    else:
        hit = _chart_point(list(q.coeffs), p, 0, 1, depth, want_point)
        if hit is None:
            return None
        x, z = 1, hit[0]
    val = hit[1]
    y = 0 if val == 0 else padic_sqrt(val, v)
    return (x, z, y)


@is_locally_soluble.register
def _(model: BinaryQuartic, v: LocalPlace, force: bool = False) -> bool:
    if not force and not v.is_real and v.p != 2 and model.discriminant % v.p:
        return True
    return quartic_local_point(model, v, want_point=False) is not None


def everywhere_locally_soluble(model, places) -> dict[LocalPlace, bool]:
    return {v: is_locally_soluble(model, v) for v in places}


# --- conics


def _diagonalize(G):
    """Rational P with P^T G P diagonal; returns (diag, P)."""
    n = 3
    A = [[as_fraction(G[i][j]) for j in range(n)] for i in range(n)]
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def congruence(T):
        # A <- T^T A T, P <- P T
        nonlocal A, P
        AT = [[sum(A[i][k] * T[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        A = [[sum(T[k][i] * AT[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        P = [[sum(P[i][k] * T[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    for i in range(n):
        if A[i][i] == 0:
            j = next((j for j in range(i + 1, n) if A[j][j] != 0), None)
            if j is not None:
                T = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]
                T[i][i] = T[j][j] = Fraction(0)
                T[i][j] = T[j][i] = Fraction(1)
                congruence(T)
            else:
                j = next((j for j in range(i + 1, n) if A[i][j] != 0), None)
                if j is None:
                    if any(A[i][c] for c in range(n)):
                        raise ValueError("degenerate form")
                    continue
                T = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]
                T[j][i] = Fraction(1)
                congruence(T)
        if A[i][i] == 0:
            continue
        T = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]
        for j in range(i + 1, n):
            T[i][j] = -A[i][j] / A[i][i]
        congruence(T)
    diag = [A[i][i] for i in range(n)]
    return diag, P


def _primitive(vec):
    vec = [as_fraction(x) for x in vec]
    den = lcm(*(x.denominator for x in vec))
    ints = [int(x * den) for x in vec]
    g = gcd(*ints)
    if g == 0:
        raise ValueError("zero vector")
    ints = [x // g for x in ints]
    first = next(x for x in ints if x)
    return tuple(-x for x in ints) if first < 0 else tuple(ints)


def _legendre(a: int, b: int):
    """Nontrivial integers (x, y, z) with z^2 = a x^2 + b y^2; a, b squarefree and soluble."""
    if a == 1:
        return (1, 0, 1)
    if b == 1:
        return (0, 1, 1)
    if abs(a) > abs(b):
        y, x, z = _legendre(b, a)
        return (x, y, z)
    if abs(b) == 1:
        raise InsolubleConic(REAL)
    t = sqrt_mod(a, b)
    if t is None:
        raise InsolubleConic(LocalPlace(max(factor(b))))
    n = abs(b)
    if t > n // 2:
        t -= n
    m0 = (t * t - a) // b
    m = squarefree_part(m0)
    k = isqrt(m0 // m)
    x1, y1, z1 = _legendre(a, m)
    x, y, z = z1 + t * x1, m * k * y1, t * z1 + a * x1
    g = gcd(x, y, z)
    return (x // g, y // g, z // g)


def conic_obstruction(a, b, c) -> LocalPlace | None:
    """A place where a x^2 + b y^2 + c z^2 = 0 has no nontrivial solution, or None."""
    A, B = -as_fraction(a) * as_fraction(c), -as_fraction(b) * as_fraction(c)
    primes = set()
    for q in (A, B):
        primes |= set(factor(q.numerator)) | set(factor(q.denominator))
    for v in [REAL] + [LocalPlace(p) for p in sorted(primes | {2})]:
        if hilbert_symbol(A, B, v) == -1:
            return v
    return None


def solve_diagonal_conic(a, b, c) -> tuple[int, int, int]:
    a, b, c = map(as_fraction, (a, b, c))
    if 0 in (a, b, c):
        raise ValueError("degenerate form")
    den = lcm(a.denominator, b.denominator, c.denominator)
    a, b, c = (int(v * den) for v in (a, b, c))
    bad = conic_obstruction(a, b, c)
    if bad is not None:
        raise InsolubleConic(bad)
    # (c z)^2 = -ac x^2 - bc y^2
    A, B = -a * c, -b * c
    a0, b0 = squarefree_part(A), squarefree_part(B)
    sa, sb = isqrt(A // a0), isqrt(B // b0)
    X, Y, Z = _legendre(a0, b0)
    sol = _primitive((Fraction(X, sa), Fraction(Y, sb), Fraction(Z, c)))
    assert a * sol[0] ** 2 + b * sol[1] ** 2 + c * sol[2] ** 2 == 0
    return sol


def solve_conic(Q) -> tuple[int, int, int]:
    """A primitive integral zero of a nondegenerate ternary quadratic form.

    ``Q`` is either three diagonal coefficients or a symmetric 3x3 Gram
    matrix (``Q(v) = v^T Q v``).  Raises :class:`InsolubleConic` carrying
    the obstructing place when there is no rational point.
    """
    if len(Q) == 3 and not isinstance(Q[0], (list, tuple)):
        return solve_diagonal_conic(*Q)
    G = [[as_fraction(x) for x in row] for row in Q]
    if sympy.Matrix(G).det() == 0:
        raise ValueError("degenerate form")
    diag, P = _diagonalize(G)
    w = solve_diagonal_conic(*diag)
    v = _primitive([sum(P[i][k] * w[k] for k in range(3)) for i in range(3)])
    assert sum(G[i][j] * v[i] * v[j] for i in range(3) for j in range(3)) == 0
    return v


# --- from the conic pair to a quartic


def _complete_basis(P):
    """Integral A, B with det[P | A | B] = 1 for a primitive integer vector P."""
    a, b, c = P
    g = gcd(a, b)
    if g == 0:
        return (c, 0, 0), (0, 1, 0)
    _, x, y = _xgcd(a, b)
    # need g*u - c*v = 1
    _, u, w = _xgcd(g, c)
    v = -w
    A = (-y, x, 0)
    B = (v * a // g, v * b // g, u)
    return A, B


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _det3(cols):
    (a, b, c), (d, e, f), (g, h, i) = cols  # columns
    return a * (e * i - h * f) - d * (b * i - h * c) + g * (b * f - e * c)


@dataclass(frozen=True)
class QuarticCovering:
    """A binary quartic model of a conic pair, with both correspondence maps.

    ``params[i]`` holds the binary quadratic (coefficients of s^2, st, t^2)
    giving u_i for i = 0, 1, 2, and u3 = y / d3.
    """

    model: ConicPairModel
    quartic: BinaryQuartic
    base_point: tuple[int, int, int]
    basis: tuple[tuple[int, int, int], tuple[int, int, int]]
    params: tuple[tuple[int, int, int], ...]

    def to_conic_pair(self, s, t, y) -> tuple:
        s, t, y = map(as_fraction, (s, t, y))
        u = [a * s * s + b * s * t + c * t * t for a, b, c in self.params]
        return _primitive(u + [y / self.model.d3])

    def from_conic_pair(self, u) -> tuple:
        """(s, t, y) with integer s, t for a point (u0 : u1 : u2 : u3) of the conic pair."""
        u = [as_fraction(x) for x in u]
        P0 = self.base_point
        A, B = self.basis
        cols = (P0, A, B)
        # Cramer's rule; det = 1
        s = _det3((P0, u[:3], B))
        t = _det3((P0, A, u[:3]))
        if s == 0 and t == 0:
            q = self.model.h1()
            bA = sum(q[i] * P0[i] * A[i] for i in range(3))
            bB = sum(q[i] * P0[i] * B[i] for i in range(3))
            s, t = bB, -bA
        s, t = Fraction(s), Fraction(t)
        den = lcm(s.denominator, t.denominator)
        s, t = s * den, t * den
        g = gcd(int(s), int(t))
        s, t = int(s) // g, int(t) // g
        image = [a * s * s + b * s * t + c * t * t for a, b, c in self.params]
        k = next(i for i in range(3) if u[i] != 0)
        lam = Fraction(image[k]) / u[k]
        y = self.model.d3 * lam * u[3]
        return s, t, y

    def point_to_curve(self, s, t, y) -> PointE:
        return map_to_E(self.model, self.to_conic_pair(s, t, y))


def conic_to_quartic(model: ConicPairModel) -> QuarticCovering:
    q = model.h1()
    P0 = solve_conic(q)
    A, B = _complete_basis(P0)
    assert _det3((P0, A, B)) == 1

    def bil(x, w):
        return sum(q[i] * x[i] * w[i] for i in range(3))

    bA, bB = bil(P0, A), bil(P0, B)
    QA, QB, BAB = bil(A, A), bil(B, B), bil(A, B)
    params = []
    for i in range(3):
        params.append((QA * P0[i] - 2 * bA * A[i],
                       2 * BAB * P0[i] - 2 * (bA * B[i] + bB * A[i]),
                       QB * P0[i] - 2 * bB * B[i]))
    g = gcd(*(c for row in params for c in row))
    params = tuple(tuple(c // g for c in row) for row in params)
    e1, _, e3 = model.curve.roots
    u0sq = _polymul(params[0], params[0])
    u1sq = _polymul(params[1], params[1])
    G = [model.d1 * a - (e3 - e1) * b for a, b in zip(u1sq, u0sq)]
    quartic = BinaryQuartic(*(model.d3 * c for c in G))
    if quartic.discriminant == 0:
        raise ArithmeticError("parametrization produced a degenerate quartic")
    if short_j(*quartic.jacobian()) != model.curve.j_invariant():
        raise ArithmeticError("quartic Jacobian does not match the curve")
    return QuarticCovering(model, quartic, P0, (A, B), params)
