"""Exact arithmetic: square classes over Q and Q_v, Hilbert symbols, p-adic
square roots and F_2 linear algebra.

Everything here works on exact ``int`` / ``Fraction`` values.  Local square
classes of rationals are decided exactly from valuations and residues, so
no p-adic approximation is needed for them; approximants only appear in
:func:`hensel_sqrt`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt, prod

import sympy


class InsufficientPrecision(ArithmeticError):
    """Raised when a p-adic approximant is too coarse to decide a question."""


def as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, str):
        return Fraction(q.strip())
    return Fraction(q)


def factor(n: int) -> dict[int, int]:
    """Prime factorization of ``|n|``."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor 0")
    if n == 1:
        return {}
    return {int(p): int(e) for p, e in sympy.factorint(n).items()}


def is_prime(n: int) -> bool:
    return n > 1 and bool(sympy.isprime(n))


def valuation(q, p: int) -> int:
    q = as_fraction(q)
    if q == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = abs(q.numerator), q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def split_unit(q, p: int) -> tuple[int, int, int]:
    """Return ``(v, num, den)`` with ``q = p**v * num/den`` and ``p`` prime to num, den."""
    q = as_fraction(q)
    if q == 0:
        raise ValueError("zero has no unit part")
    num, den = q.numerator, q.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, num, den


def is_square(q) -> bool:
    q = as_fraction(q)
    if q < 0:
        return False
    return isqrt(q.numerator) ** 2 == q.numerator and isqrt(q.denominator) ** 2 == q.denominator


def squarefree_part(n: int) -> int:
    """Signed squarefree integer in the square class of the integer ``n``."""
    if n == 0:
        raise ValueError("zero has no square class")
    sign = -1 if n < 0 else 1
    return sign * prod(p for p, e in factor(n).items() if e % 2)


@dataclass(frozen=True, order=True)
class SquareClass:
    """A class in Q^x / (Q^x)^2, stored as a sign and a sorted tuple of primes."""

    sign: int
    primes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        ps = tuple(self.primes)
        if any(a >= b for a, b in zip(ps, ps[1:])):
            raise ValueError("primes must be strictly increasing")
        if not all(is_prime(p) for p in ps):
            raise ValueError("non-prime entry in square class")
        object.__setattr__(self, "primes", ps)

    @classmethod
    def identity(cls) -> SquareClass:
        return cls(1, ())

    @classmethod
    def of(cls, q) -> SquareClass:
        return squarefree_class(q)

    @property
    def value(self) -> int:
        return self.sign * prod(self.primes)

    @property
    def is_identity(self) -> bool:
        return self.sign == 1 and not self.primes

    def __mul__(self, other: SquareClass) -> SquareClass:
        primes = tuple(sorted(set(self.primes) ^ set(other.primes)))
        return SquareClass(self.sign * other.sign, primes)

    def __int__(self):
        return self.value

    def __str__(self):
        return str(self.value)


def squarefree_class(q) -> SquareClass:
    q = as_fraction(q)
    if q == 0:
        raise ValueError("zero has no square class")
    exps: dict[int, int] = {}
    for part in (q.numerator, q.denominator):
        for p, e in factor(part).items():
            exps[p] = exps.get(p, 0) + e
    primes = tuple(sorted(p for p, e in exps.items() if e % 2))
    return SquareClass(-1 if q < 0 else 1, primes)


@dataclass(frozen=True)
class LocalPlace:
    """A place of Q: a prime ``p`` or the real place (``p is None``).

    ``precision`` is the number of p-adic digits carried by approximants;
    the real place ignores it.
    """

    p: int | None = None
    precision: int = 20

    def __post_init__(self):
        if self.p is not None and not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.precision < 1:
            raise ValueError("precision must be positive")

    @property
    def is_real(self) -> bool:
        return self.p is None

    @property
    def dim(self) -> int:
        """Dimension of Q_v^x / (Q_v^x)^2 over F_2."""
        if self.p is None:
            return 1
        return 3 if self.p == 2 else 2

    def sort_key(self):
        return (self.p is None, self.p or 0)

    def __str__(self):
        return "inf" if self.p is None else str(self.p)


REAL = LocalPlace(None)


def place(p) -> LocalPlace:
    """Parse a place: an int prime, ``"inf"`` / ``None`` for the real place."""
    if isinstance(p, LocalPlace):
        return p
    if p is None or (isinstance(p, str) and p.strip().lower() in ("inf", "oo", "infinity", "real")):
        return REAL
    return LocalPlace(int(p))


@dataclass(frozen=True)
class LocalSquareClassVector:
    place: LocalPlace
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != self.place.dim:
            raise ValueError("dimension does not match place")

    @property
    def is_zero(self) -> bool:
        return not any(self.coords)


def _unit_bits_2(u: int) -> tuple[int, int]:
    # u odd; the two F_2 coordinates of Z_2^x / (Z_2^x)^2
    u %= 8
    return ((u - 1) // 2) % 2, ((u * u - 1) // 8) % 2


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p, as -1, 0, 1."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def local_class_bits(q, v: LocalPlace) -> tuple[int, ...]:
    q = as_fraction(q)
    if q == 0:
        raise ValueError("zero has no local square class")
    if v.is_real:
        return (1 if q < 0 else 0,)
    val, num, den = split_unit(q, v.p)
    u = num * den
    if v.p == 2:
        return (val % 2, *_unit_bits_2(u))
    return (val % 2, 0 if legendre(u, v.p) == 1 else 1)


def local_square_class(q, v: LocalPlace) -> LocalSquareClassVector:
    return LocalSquareClassVector(v, local_class_bits(q, v))


def is_local_square(q, v: LocalPlace) -> bool:
    """True iff q is a square in Q_v (zero counts as a square)."""
    q = as_fraction(q)
    return q == 0 or not any(local_class_bits(q, v))


def hilbert_symbol(a, b, v: LocalPlace) -> int:
    """Hilbert symbol (a, b)_v for nonzero rationals."""
    a, b = as_fraction(a), as_fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol of zero")
    if v.is_real:
        return -1 if (a < 0 and b < 0) else 1
    p = v.p
    al, an, ad = split_unit(a, p)
    be, bn, bd = split_unit(b, p)
    u, w = an * ad, bn * bd
    if p == 2:
        eu, ou = _unit_bits_2(u)
        ew, ow = _unit_bits_2(w)
        e = eu * ew + al * ow + be * ou
        return -1 if e % 2 else 1
    s = -1 if (al * be * ((p - 1) // 2)) % 2 else 1
    if be % 2:
        s *= legendre(u, p)
    if al % 2:
        s *= legendre(w, p)
    return s


def sqrt_mod_prime(a: int, p: int) -> int | None:
    """A square root of a modulo the prime p (Tonelli-Shanks), or None."""
    a %= p
    if p == 2 or a == 0:
        return a
    if legendre(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def sqrt_mod(a: int, n: int) -> int | None:
    """Some x with x^2 = a (mod n) for squarefree n, or None if none exists."""
    n = abs(n)
    if n == 1:
        return 0
    residues, moduli = [], []
    for p, e in factor(n).items():
        if e != 1:
            raise ValueError("sqrt_mod expects a squarefree modulus")
        r = sqrt_mod_prime(a, p)
        if r is None:
            return None
        residues.append(r)
        moduli.append(p)
    x = 0
    for r, p in zip(residues, moduli):
        m = n // p
        x += r * m * pow(m, -1, p)
    return x % n


@dataclass(frozen=True)
class PAdic:
    """``p**valuation * unit`` with the unit known modulo ``p**precision``."""

    p: int
    valuation: int
    unit: int
    precision: int

    def __post_init__(self):
        if self.unit % self.p == 0:
            raise ValueError("unit part divisible by p")
        object.__setattr__(self, "unit", self.unit % self.p ** self.precision)

    @classmethod
    def from_rational(cls, q, p: int, precision: int) -> PAdic:
        val, num, den = split_unit(q, p)
        mod = p ** precision
        return cls(p, val, num * pow(den, -1, mod) % mod, precision)

    def __pow__(self, n: int) -> PAdic:
        mod = self.p ** self.precision
        return PAdic(self.p, self.valuation * n, pow(self.unit, n, mod), self.precision)

    def agrees_with(self, q, digits: int | None = None) -> bool:
        """Compare with an exact rational to ``digits`` relative digits."""
        digits = self.precision if digits is None else digits
        other = PAdic.from_rational(q, self.p, digits)
        return other.valuation == self.valuation and (other.unit - self.unit) % self.p ** digits == 0


def hensel_sqrt(a, v: LocalPlace) -> PAdic | None:
    """Square root in Q_p of a p-adic number or exact rational.

    Returns None when ``a`` is not a square in Q_p.  The root of an
    approximant with ``r`` unit digits carries ``r`` digits (``r - 1`` at
    p = 2).  Raises :class:`InsufficientPrecision` when ``r`` is too small
    to decide (fewer than 3 digits at p = 2).
    """
    if v.is_real:
        raise ValueError("hensel_sqrt needs a finite place")
    p = v.p
    if not isinstance(a, PAdic):
        a = as_fraction(a)
        if a == 0:
            raise ValueError("square root of zero is not a unit root")
        a = PAdic.from_rational(a, p, v.precision + (1 if p == 2 else 0))
    if a.p != p:
        raise ValueError("place mismatch")
    if a.valuation % 2:
        return None
    r = a.precision
    if p == 2:
        if r < 3:
            raise InsufficientPrecision(f"need 3 unit digits at 2, have {r}")
        if a.unit % 8 != 1:
            return None
        # x_{k+1} = x_k + (u - x_k^2)/2 * x_k^{-1}, correct to k+1 bits each step
        x, k = 1, 3
        while k < r:
            m = 1 << (k + 1)
            x = (x + (a.unit - x * x) // 2 * pow(x, -1, m)) % m
            k += 1
        return PAdic(2, a.valuation // 2, x, max(r - 1, 1))
    x = sqrt_mod_prime(a.unit, p)
    if x is None:
        return None
    k = 1
    while k < r:
        k = min(2 * k, r)
        m = p ** k
        x = (x - (x * x - a.unit) * pow(2 * x, -1, m)) % m
    return PAdic(p, a.valuation // 2, x, r)


def padic_sqrt(q, v: LocalPlace, cap: int = 200) -> PAdic | None:
    """:func:`hensel_sqrt` with the working precision raised on demand up to ``cap``."""
    prec = v.precision
    while True:
        try:
            return hensel_sqrt(q, LocalPlace(v.p, prec))
        except InsufficientPrecision:
            if prec >= cap:
                raise
            prec = min(2 * prec, cap)


# --- F_2 linear algebra (vectors packed into Python ints, bit i = coordinate i)


def pack(bits) -> int:
    return sum(1 << i for i, b in enumerate(bits) if b & 1)


def unpack(word: int, n: int) -> tuple[int, ...]:
    return tuple((word >> i) & 1 for i in range(n))


@dataclass(frozen=True)
class F2Matrix:
    rows: tuple[int, ...]
    ncols: int

    @classmethod
    def from_lists(cls, rows, ncols: int | None = None) -> F2Matrix:
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("matrix is not rectangular")
        return cls(tuple(pack(r) for r in rows), ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def to_lists(self) -> list[list[int]]:
        return [list(unpack(r, self.ncols)) for r in self.rows]

    def apply(self, vec: int) -> int:
        """Matrix-vector product, result packed by row index."""
        return sum((bin(r & vec).count("1") & 1) << i for i, r in enumerate(self.rows))


def _echelon(rows, ncols):
    rows = list(rows)
    pivots = []
    r = 0
    for c in range(ncols):
        bit = 1 << c
        for i in range(r, len(rows)):
            if rows[i] & bit:
                rows[r], rows[i] = rows[i], rows[r]
                break
        else:
            continue
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def f2_rank(m: F2Matrix) -> int:
    return len(_echelon(m.rows, m.ncols)[1])


def f2_kernel_words(m: F2Matrix) -> list[int]:
    red, pivots = _echelon(m.rows, m.ncols)
    free = [c for c in range(m.ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = 1 << f
        for row, c in zip(red, pivots):
            if row >> f & 1:
                vec |= 1 << c
        basis.append(vec)
    return basis


def f2_kernel(m: F2Matrix) -> list[tuple[int, ...]]:
    """Basis of the null space ``{x : M x = 0}``."""
    return [unpack(w, m.ncols) for w in f2_kernel_words(m)]


class F2Span:
    """Incrementally built subspace of F_2^n with membership tests."""

    def __init__(self, n: int, vectors=()):
        self.n = n
        self._pivots: dict[int, int] = {}  # leading bit -> reduced row
        self.basis: list[int] = []
        for v in vectors:
            self.add(v)

    def reduce(self, v: int) -> int:
        for lead in sorted(self._pivots, reverse=True):
            if v >> lead & 1:
                v ^= self._pivots[lead]
        return v

    def add(self, v: int) -> bool:
        r = self.reduce(v)
        if not r:
            return False
        self._pivots[r.bit_length() - 1] = r
        self.basis.append(v)
        return True

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def dim(self) -> int:
        return len(self._pivots)

    def elements(self) -> list[int]:
        out = [0]
        for b in self.basis:
            out += [x ^ b for x in out]
        return sorted(out)

    def annihilator(self) -> list[int]:
        """Basis of ``{c : c . v = 0 for all v in the span}``."""
        return f2_kernel_words(F2Matrix(tuple(self.basis), self.n))
