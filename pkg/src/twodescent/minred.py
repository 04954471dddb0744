"""Minimization and reduction of binary quartics.

A :class:`TransformWitness` ``(M, lam)`` takes a quartic f to
``lam^2 * f(M (x, z))``, i.e. ``f(m11 x + m12 z, m21 x + m22 z)`` scaled by
``lam^2``.  A point (x : y : z) of the target pulls back to
(M (x, z) : y / lam) on the source.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import mpmath
import numpy as np
import sympy
from scipy.optimize import minimize as _scipy_minimize

from .arith import as_fraction, factor, valuation
from .covering import BinaryQuartic

IDENTITY = ((1, 0), (0, 1))


def _matmul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


@dataclass(frozen=True)
class TransformWitness:
    M: tuple[tuple[int, int], tuple[int, int]] = IDENTITY
    lam: Fraction = Fraction(1)

    def __post_init__(self):
        M = tuple(tuple(int(v) for v in row) for row in self.M)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "lam", as_fraction(self.lam))
        if self.det == 0 or self.lam == 0:
            raise ValueError("singular transform")

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.M
        return a * d - b * c

    def apply(self, q: BinaryQuartic) -> BinaryQuartic:
        return q.transform(self.M, self.lam)

    def then(self, other: TransformWitness) -> TransformWitness:
        """Apply ``self`` first, then ``other``."""
        return TransformWitness(_matmul(self.M, other.M), self.lam * other.lam)

    def pull_back(self, x, y, z):
        """Map a point of the target quartic to the source quartic (primitive coordinates)."""
        (a, b), (c, d) = self.M
        X, Z = a * x + b * z, c * x + d * z
        Y = as_fraction(y) / self.lam
        g = gcd(X, Z)
        return X // g, Y / (g * g), Z // g

    def to_json(self):
        (a, b), (c, d) = self.M
        return [[str(a), str(b)], [str(c), str(d)], str(self.lam.numerator), str(self.lam.denominator)]

    @classmethod
    def from_json(cls, data):
        (a, b), (c, d), num, den = data
        return cls(((int(a), int(b)), (int(c), int(d))), Fraction(int(num), int(den)))


# --- minimization


def _roots_mod_p(q: BinaryQuartic, p: int) -> list:
    """Roots of q in P^1(F_p): residues r for (r : 1), and None for (1 : 0)."""
    out = []
    if q.a % p == 0:
        out.append(None)
    coeffs = [c % p for c in q.coeffs]
    if not any(coeffs[1:]):
        # q(x, 1) = a x^4: the only affine root is 0
        return out + ([0] if coeffs[0] else list(range(p)))
    if p < 5000:
        out += [r for r in range(p) if q(r, 1) % p == 0]
        return out
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(q.coeffs), x, modulus=p)
    if poly.is_zero:
        return out + list(range(p))
    for fac, _ in poly.factor_list()[1]:
        if fac.degree() == 1:
            a, b = (int(c) % p for c in fac.all_coeffs())
            out.append(-b * pow(a, -1, p) % p)
    return sorted(set(out), key=lambda r: (r is not None, r or 0))


def _step_matrices(q: BinaryQuartic, p: int):
    for r in _roots_mod_p(q, p):
        yield ((1, 0), (0, p)) if r is None else ((p, r), (0, 1))


def _content_valuation(q: BinaryQuartic, p: int) -> int:
    return min((valuation(c, p) for c in q.coeffs if c), default=0)


def _try(q: BinaryQuartic, M, lam):
    try:
        return q.transform(M, lam)
    except ValueError:
        return None


def _reducing_move(q: BinaryQuartic, p: int, depth: int = 2):
    """A witness lowering v_p(disc) by 12, or None (searching det p^k moves, k <= depth)."""
    if _content_valuation(q, p) >= 2:
        return TransformWitness(IDENTITY, Fraction(1, p))
    for M in _step_matrices(q, p):
        if _try(q, M, Fraction(1, p * p)) is not None:
            return TransformWitness(M, Fraction(1, p * p))
    if depth <= 1:
        return None
    # a discriminant-preserving step first, then a reducing one
    for M in _step_matrices(q, p):
        mid = _try(q, M, Fraction(1, p))
        if mid is None:
            continue
        nxt = _reducing_move(mid, p, depth - 1)
        if nxt is not None:
            return TransformWitness(M, Fraction(1, p)).then(nxt)
    return None


def candidate_primes(q: BinaryQuartic) -> list[int]:
    """Primes p with p^4 | I and p^6 | J (necessary for non-minimality at p)."""
    I, J = q.I, q.J
    g = gcd(I, J)
    if g == 0:
        raise ValueError("degenerate quartic")
    return [p for p in sorted(factor(g)) if (I == 0 or valuation(I, p) >= 4) and (J == 0 or valuation(J, p) >= 6)]


def minimize(q: BinaryQuartic, primes=None) -> tuple[BinaryQuartic, TransformWitness]:
    """An integral quartic equivalent to q with minimal discriminant at each prime."""
    if q.discriminant == 0:
        raise ValueError("degenerate quartic")
    witness = TransformWitness()
    cur = q
    for p in (candidate_primes(q) if primes is None else sorted(primes)):
        while valuation(cur.discriminant, p) >= 12:
            move = _reducing_move(cur, p)
            if move is None:
                break
            cur = move.apply(cur)
            witness = witness.then(move)
    return cur, witness


# --- reduction


def _roots(q: BinaryQuartic):
    """Complex roots of q(x, 1) (one fewer per vanishing leading coefficient)."""
    coeffs = list(q.coeffs)
    inf = 0
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
        inf += 1
    digits = max(len(str(abs(c))) for c in coeffs)
    with mpmath.workdps(30 + 2 * digits):
        for extra in (10, 50, 200):
            try:
                roots = mpmath.polyroots(coeffs, maxsteps=200 + 20 * digits, extraprec=extra * 4)
                break
            except mpmath.libmp.NoConvergence:
                continue
        else:
            roots = [mpmath.mpc(complex(r)) for r in np.roots([float(c) for c in coeffs])]
        roots = [mpmath.mpc(r) for r in roots]
    return roots, inf


def covariant_point(q: BinaryQuartic):
    """The point of the upper half-plane attached covariantly to q.

    It is the unique minimum over z = x + iy of
    sum_j log(((x - s_j)^2 + y^2 + t_j^2) / y) over the roots s_j + i t_j,
    with a root at infinity contributing -log y.
    """
    roots, inf = _roots(q)
    with mpmath.workdps(60):
        centre = sum(mpmath.re(r) for r in roots) / len(roots) if roots else mpmath.mpf(0)
        spread = max([abs(r - centre) for r in roots] + [mpmath.mpf(1)]) if roots else mpmath.mpf(1)
        if inf == 0:
            spread = max(spread / 2, mpmath.mpf(10) ** -20)
        pts = [((mpmath.re(r) - centre) / spread, mpmath.im(r) / spread) for r in roots]
    S = np.array([float(s) for s, _ in pts])
    T2 = np.array([float(t) ** 2 for _, t in pts])
    n = len(pts) + inf

    def fun(v):
        x, ly = v
        y = np.exp(ly)
        D = (x - S) ** 2 + y * y + T2
        val = np.sum(np.log(D)) - n * ly
        gx = np.sum(2 * (x - S) / D)
        gy = np.sum(2 * y * y / D) - n
        return val, np.array([gx, gy])

    res = _scipy_minimize(fun, np.array([0.0, 0.0]), jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": 500})
    x, ly = res.x
    with mpmath.workdps(60):
        return centre + spread * mpmath.mpf(x), spread * mpmath.exp(mpmath.mpf(ly))


def _gauss_step(x, y):
    """SL2(Z) matrix g (as a substitution) moving z = x + iy into the fundamental domain."""
    M = IDENTITY
    with mpmath.workdps(60):
        z = mpmath.mpc(x, y)
        for _ in range(200):
            n = int(mpmath.nint(mpmath.re(z)))
            if n:
                z -= n
                M = _matmul(M, ((1, n), (0, 1)))
            if abs(z) < 1 - mpmath.mpf(10) ** -30:
                z = -1 / z
                M = _matmul(M, ((0, -1), (1, 0)))
            else:
                break
    return M


def _is_reduced(x, y, tol=1e-7) -> bool:
    return abs(x) <= 0.5 + tol and x * x + y * y >= 1 - tol


_BOUNDARY = (((1, 0), (0, 1)), ((1, 1), (0, 1)), ((1, -1), (0, 1)), ((0, -1), (1, 0)),
             ((1, -1), (1, 0)), ((0, -1), (1, 1)), ((1, 1), (-1, 0)), ((0, 1), (-1, 1)))


def reduce(q: BinaryQuartic) -> tuple[BinaryQuartic, TransformWitness]:
    """Reduce q by a unimodular substitution so its covariant point is Gauss-reduced."""
    if q.discriminant == 0:
        raise ValueError("degenerate quartic")
    total = IDENTITY
    cur = q
    for _ in range(50):
        x, y = covariant_point(cur)
        M = _gauss_step(x, y)
        if M == IDENTITY:
            break
        cur = cur.transform(M)
        total = _matmul(total, M)
    # break ties on the boundary of the fundamental domain: close up under the
    # boundary identifications (a symmetric set of moves) and take the least form
    x, y = covariant_point(cur)
    z0 = mpmath.mpc(x, y)
    seen = {cur.coeffs: (cur, IDENTITY, z0)}
    todo = [cur.coeffs]
    while todo:
        f, M0, z = seen[todo.pop()]
        for B in _BOUNDARY[1:]:
            (a, b), (c, d) = B
            # the covariant point moves by the inverse substitution
            w = (d * z - b) / (-c * z + a)
            if not _is_reduced(float(mpmath.re(w)), float(mpmath.im(w))):
                continue
            g = f.transform(B)
            if g.coeffs not in seen:
                seen[g.coeffs] = (g, _matmul(M0, B), w)
                todo.append(g.coeffs)
    cur, B, _ = seen[min(seen)]
    total = _matmul(total, B)
    witness = TransformWitness(total, Fraction(1))
    assert witness.apply(q) == cur
    return cur, witness


def minimize_and_reduce(q: BinaryQuartic, primes=None):
    qm, wm = minimize(q, primes)
    qr, wr = reduce(qm)
    return qm, wm, qr, wr
