"""The 2-Selmer group of a curve with full rational 2-torsion.

A class in H^1(Q, E[2]) is a pair ``(d1, d2)`` of square classes; the third
component ``d3 = d1 d2`` is implied because the three values of
``x - e_i`` multiply to a square.  The Selmer group is cut out of
Q(S, 2)^2 by requiring each restriction to land in the local image of the
descent map at every place of S.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import (
    REAL,
    F2Matrix,
    F2Span,
    LocalPlace,
    SquareClass,
    f2_kernel_words,
    is_local_square,
    local_class_bits,
    pack,
    squarefree_class,
    valuation,
)
from .curve import CurveE2, PointE


class SamplingBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class SelmerElement:
    d1: SquareClass
    d2: SquareClass

    @classmethod
    def identity(cls) -> SelmerElement:
        return cls(SquareClass.identity(), SquareClass.identity())

    @classmethod
    def from_values(cls, a, b) -> SelmerElement:
        return cls(squarefree_class(a), squarefree_class(b))

    @property
    def d3(self) -> SquareClass:
        return self.d1 * self.d2

    @property
    def is_identity(self) -> bool:
        return self.d1.is_identity and self.d2.is_identity

    def __mul__(self, other: SelmerElement) -> SelmerElement:
        return SelmerElement(self.d1 * other.d1, self.d2 * other.d2)

    def as_pair(self) -> tuple[int, int]:
        return (self.d1.value, self.d2.value)

    def __str__(self):
        return f"({self.d1.value}, {self.d2.value})"


@dataclass(frozen=True)
class SelmerAmbient:
    """Q(S, 2)^2 with generators ordered -1, then primes ascending, coordinate 1 first."""

    curve: CurveE2
    places: tuple[LocalPlace, ...]
    generators: tuple[tuple[int, int], ...]  # (coordinate index, base value)

    @property
    def dim(self) -> int:
        return len(self.generators)

    @property
    def finite_primes(self) -> tuple[int, ...]:
        return tuple(v.p for v in self.places if not v.is_real)

    def generator(self, k: int) -> SelmerElement:
        coord, base = self.generators[k]
        one = SquareClass.identity()
        c = squarefree_class(base)
        return SelmerElement(c, one) if coord == 0 else SelmerElement(one, c)

    def element(self, vec: int) -> SelmerElement:
        out = SelmerElement.identity()
        for k in range(self.dim):
            if vec >> k & 1:
                out = out * self.generator(k)
        return out

    def vector(self, elt: SelmerElement) -> int:
        index = {g: k for k, g in enumerate(self.generators)}
        vec = 0
        for coord, cls in ((0, elt.d1), (1, elt.d2)):
            if cls.sign < 0:
                vec |= 1 << index[(coord, -1)]
            for p in cls.primes:
                if (coord, p) not in index:
                    raise ValueError(f"{elt} is not supported on S")
                vec |= 1 << index[(coord, p)]
        return vec

    def elements(self):
        for vec in range(1 << self.dim):
            yield self.element(vec)


def build_ambient(E: CurveE2, extra_primes=(), precision: int = 20) -> SelmerAmbient:
    places = E.ramification_set(extra_primes, precision)
    bases = [-1] + [v.p for v in places if not v.is_real]
    gens = tuple((coord, b) for coord in (0, 1) for b in bases)
    return SelmerAmbient(E, places, gens)


def delta_values(E: CurveE2, x) -> tuple[Fraction, Fraction]:
    """Representatives of the descent map on the point(s) with x-coordinate ``x``.

    At a 2-torsion point the vanishing component is replaced by the
    product of the other two.
    """
    x = Fraction(x)
    e1, e2, e3 = E.roots
    if x == e1:
        return Fraction((e1 - e2) * (e1 - e3)), Fraction(e1 - e2)
    if x == e2:
        return Fraction(e2 - e1), Fraction((e2 - e1) * (e2 - e3))
    return x - e1, x - e2


def delta_global(E: CurveE2, P: PointE) -> SelmerElement:
    if P.is_infinity:
        return SelmerElement.identity()
    return SelmerElement.from_values(*delta_values(E, P.x))


def delta_is_consistent(E: CurveE2, P: PointE) -> bool:
    """The three components of the descent map multiply to a square."""
    e1, e2, e3 = E.roots
    d = delta_global(E, P)
    if P.x == e3:
        third = squarefree_class((e3 - e1) * (e3 - e2))
    else:
        third = squarefree_class(P.x - e3)
    return (d.d1 * d.d2 * third).is_identity


def local_bits(elt_values, v: LocalPlace) -> int:
    """Pack the local classes of a pair of rationals as one F_2 vector."""
    a, b = elt_values
    return pack(local_class_bits(a, v) + local_class_bits(b, v))


def restrict(elt: SelmerElement, v: LocalPlace) -> tuple[int, ...]:
    return local_class_bits(elt.d1.value, v) + local_class_bits(elt.d2.value, v)


def restrict_word(elt: SelmerElement, v: LocalPlace) -> int:
    return pack(restrict(elt, v))


def local_target_dim(v: LocalPlace) -> int:
    if v.is_real:
        return 1
    return 3 if v.p == 2 else 2


@dataclass
class LocalImage:
    place: LocalPlace
    basis: list[int]
    dim: int
    samples: int = 0
    points: int = 0

    def __contains__(self, word: int) -> bool:
        return word in F2Span(2 * self.place.dim, self.basis)

    def basis_bits(self) -> list[tuple[int, ...]]:
        n = 2 * self.place.dim
        return [tuple((w >> i) & 1 for i in range(n)) for w in self.basis]


def _real_sample_points(E: CurveE2):
    e = sorted(E.roots)
    pts = [Fraction(e[2] + 1), Fraction(e[0] + e[1], 2), Fraction(e[1] + e[2], 2), Fraction(e[0] - 1)]
    return pts


def _padic_sampler(E: CurveE2, p: int, rng: random.Random):
    roots = E.roots
    span = max(valuation(a - b, p) for a in roots for b in roots if a != b)
    kmax = span + 4
    wbound = p ** 6
    while True:
        mode = rng.randrange(4)
        w = rng.randrange(1, wbound)
        if mode == 0:
            i = rng.randrange(3)
            k = rng.randint(0, kmax)
            yield Fraction(roots[i] + p ** k * w)
        elif mode == 1:
            i = rng.randrange(3)
            k = rng.randint(0, kmax)
            yield Fraction(roots[i]) + Fraction(w, p ** rng.randint(0, 2)) * p ** k
        elif mode == 2:
            yield Fraction(w, p ** (2 * rng.randint(1, 3)))
        else:
            yield Fraction(rng.randint(-wbound, wbound))


def _place_seed(seed: int, v: LocalPlace) -> int:
    return seed * 1000003 + (0 if v.is_real else v.p)


def sample_local_points(E: CurveE2, v: LocalPlace, count: int, seed: int = 0):
    """Yield up to ``count`` x-coordinates of points of E(Q_v) (x rational, f(x) != 0)."""
    if v.is_real:
        for x in _real_sample_points(E):
            if E.f(x) > 0:
                yield x
        return
    rng = random.Random(_place_seed(seed, v))
    n = 0
    for x in _padic_sampler(E, v.p, rng):
        if n >= count:
            return
        fx = E.f(x)
        if fx != 0 and is_local_square(fx, v):
            n += 1
            yield x


def local_image(E: CurveE2, v: LocalPlace, seed: int = 0, budget: int = 10_000) -> LocalImage:
    """Image of E(Q_v)/2E(Q_v) under the local descent map, found by sampling points."""
    target = local_target_dim(v)
    n = 2 * v.dim
    span = F2Span(n)
    for e in E.roots:
        span.add(local_bits(delta_values(E, e), v))
    samples = points = 0
    if v.is_real:
        for x in _real_sample_points(E):
            samples += 1
            if E.f(x) > 0:
                points += 1
                span.add(local_bits(delta_values(E, x), v))
    else:
        rng = random.Random(_place_seed(seed, v))
        gen = _padic_sampler(E, v.p, rng)
        while span.dim < target and samples < budget:
            x = next(gen)
            samples += 1
            fx = E.f(x)
            if fx == 0 or not is_local_square(fx, v):
                continue
            points += 1
            span.add(local_bits(delta_values(E, x), v))
    if span.dim != target:
        raise SamplingBudgetExceeded(f"local image at {v} reached dim {span.dim} < {target} after {samples} samples")
    return LocalImage(v, list(span.basis), span.dim, samples, points)


@dataclass
class SelmerResult:
    ambient: SelmerAmbient
    basis: list[SelmerElement]
    local_images: dict[LocalPlace, LocalImage] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def curve(self) -> CurveE2:
        return self.ambient.curve

    def span(self) -> F2Span:
        return F2Span(self.ambient.dim, [self.ambient.vector(b) for b in self.basis])

    def elements(self) -> list[SelmerElement]:
        return [self.ambient.element(w) for w in self.span().elements()]

    def __contains__(self, elt: SelmerElement) -> bool:
        try:
            return self.ambient.vector(elt) in self.span()
        except ValueError:
            return False

    def diagnostics(self) -> dict:
        return {
            "ambient_generators": [[c + 1, b] for c, b in self.ambient.generators],
            "local_images": {
                str(v): {"dim": img.dim, "samples": img.samples, "points": img.points, "basis": img.basis_bits()}
                for v, img in self.local_images.items()
            },
            "selmer_basis": [list(b.as_pair()) for b in self.basis],
        }


def local_conditions(ambient: SelmerAmbient, image: LocalImage) -> list[int]:
    """Rows (over ambient coordinates) of the conditions 'restriction lies in the image'."""
    v = image.place
    restricted = [restrict_word(ambient.generator(k), v) for k in range(ambient.dim)]
    checks = F2Span(2 * v.dim, image.basis).annihilator()
    rows = []
    for c in checks:
        rows.append(sum((bin(c & r).count("1") & 1) << k for k, r in enumerate(restricted)))
    return rows


def compute_selmer(E: CurveE2, seed: int = 0, extra_primes=(), budget: int = 10_000,
                   precision: int = 20) -> SelmerResult:
    ambient = build_ambient(E, extra_primes, precision)
    images = {}
    rows: list[int] = []
    for v in ambient.places:
        img = local_image(E, v, seed=seed, budget=budget)
        images[v] = img
        rows += local_conditions(ambient, img)
    kernel = f2_kernel_words(F2Matrix(tuple(rows), ambient.dim))
    basis = [ambient.element(w) for w in kernel]
    return SelmerResult(ambient, basis, images)


def rank_bound(selmer: SelmerResult) -> int:
    return selmer.dim - 2
