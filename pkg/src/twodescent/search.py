"""Point search on quartic coverings and the full descent pipeline."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import gcd, isqrt

import numpy as np

from .arith import F2Span, LocalPlace
from .covering import (
    BinaryQuartic,
    ConicPairModel,
    InsolubleConic,
    QuarticCovering,
    conic_to_quartic,
    is_locally_soluble,
    make_conic_pair,
)
from .curve import CurveE2, PointE
from .minred import TransformWitness, minimize, reduce
from .selmer import SelmerElement, SelmerResult, compute_selmer, delta_global

SIEVE_PRIMES = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101)


@dataclass
class SearchReport:
    model: str
    height: int
    points: list[tuple[int, int, int]] = field(default_factory=list)
    mapped_points: list[PointE] = field(default_factory=list)
    pairs_examined: int = 0
    candidates: int = 0


def _sieve_rows(q: BinaryQuartic, H: int):
    """Per sieve prime p and residue of z: packed mask over x in [-H, H] of 'q(x, z) is a square mod p'."""
    n = 2 * H + 1
    rows = {}
    for p in SIEVE_PRIMES:
        sq = np.zeros(p, dtype=bool)
        sq[[(i * i) % p for i in range(p)]] = True
        xs = np.arange(p)
        start = (-H) % p
        idx = (start + np.arange(n)) % p
        per_z = []
        coeffs = [c % p for c in q.coeffs]
        for zr in range(p):
            vals = np.zeros(p, dtype=np.int64)
            for k, c in enumerate(coeffs):
                vals = (vals + c * (xs ** (4 - k) % p) * pow(zr, k, p)) % p
            per_z.append(np.packbits(sq[vals][idx]))
        rows[p] = per_z
    return rows


def _search_block(q: BinaryQuartic, H: int, zs, rows):
    found = []
    examined = candidates = 0
    n = 2 * H + 1
    for z in zs:
        if z == 0:
            examined += 1
            candidates += 1
            v = q.a
            if v >= 0 and isqrt(v) ** 2 == v:
                y = isqrt(v)
                found += [(1, y, 0)] + ([(1, -y, 0)] if y else [])
            continue
        mask = None
        for p, per_z in rows.items():
            r = per_z[z % p]
            mask = r.copy() if mask is None else np.bitwise_and(mask, r, out=mask)
        hits = np.flatnonzero(np.unpackbits(mask)[:n])
        examined += n
        for i in hits.tolist():
            x = i - H
            if gcd(x, z) != 1:
                continue
            candidates += 1
            v = q(x, z)
            if v < 0:
                continue
            y = isqrt(v)
            if y * y == v:
                found += [(x, y, z)] + ([(x, -y, z)] if y else [])
    return found, examined, candidates


def search_quartic(q: BinaryQuartic, H: int, workers: int = 1, block: int = 256) -> SearchReport:
    """All primitive points (x : y : z) with max(|x|, |z|) <= H on y^2 = q(x, z).

    Points are normalized with z > 0, or z = 0 and x = 1, and listed by
    increasing z, then x, positive y first.  Output does not depend on
    ``workers``.
    """
    report = SearchReport(str(q), H)
    if H < 1:
        return report
    rows = _sieve_rows(q, H)
    zvals = list(range(0, H + 1))
    blocks = [zvals[i:i + block] for i in range(0, len(zvals), block)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda zs: _search_block(q, H, zs, rows), blocks))
    else:
        results = [_search_block(q, H, zs, rows) for zs in blocks]
    for found, examined, cands in results:
        report.points += found
        report.pairs_examined += examined
        report.candidates += cands
    return report


def naive_height(x) -> float:
    from fractions import Fraction

    x = Fraction(x)
    return math.log(max(abs(x.numerator), x.denominator))


def projective_height(x: int, z: int) -> float:
    return math.log(max(abs(x), abs(z), 1))


def height_ratio(cover_point, P: PointE) -> float:
    """(h(x(P)) + 1) / (h(covering x) + 1); close to 4 for large points."""
    x, _, z = cover_point
    return (naive_height(P.x) + 1) / (projective_height(x, z) + 1)


@dataclass
class ClassResult:
    element: SelmerElement
    conic_pair: ConicPairModel
    covering: QuarticCovering | None = None
    quartic_min: BinaryQuartic | None = None
    witness_min: TransformWitness | None = None
    quartic_red: BinaryQuartic | None = None
    witness_red: TransformWitness | None = None
    local_solubility: dict = field(default_factory=dict)
    search: SearchReport | None = None
    status: str = "pending"
    error: str | None = None

    @property
    def search_witness(self) -> TransformWitness | None:
        """Witness from the raw quartic to the searched (reduced) one."""
        if self.witness_min is None:
            return None
        return self.witness_min.then(self.witness_red)

    def covering_point_to_curve(self, pt) -> PointE:
        x, y, z = self.search_witness.pull_back(*pt)
        return self.covering.point_to_curve(x, z, y)


@dataclass
class DescentVerdict:
    selmer_dim: int
    rank_lower: int
    rank_upper: int
    unresolved: list[SelmerElement]
    generators: list[PointE]
    partial: bool = False

    @property
    def unresolved_count(self) -> int:
        return len(self.unresolved)


@dataclass
class DescentResult:
    curve: CurveE2
    selmer: SelmerResult
    classes: list[ClassResult]
    verdict: DescentVerdict
    height: int


def build_class(E: CurveE2, xi: SelmerElement, places) -> ClassResult:
    model = make_conic_pair(E, xi)
    res = ClassResult(xi, model)
    try:
        cov = conic_to_quartic(model)
    except InsolubleConic as exc:
        res.status = "conic_failure"
        res.error = f"H1 insoluble at {exc.place}"
        return res
    res.covering = cov
    res.quartic_min, res.witness_min = minimize(cov.quartic)
    res.quartic_red, res.witness_red = reduce(res.quartic_min)
    res.local_solubility = {str(v): is_locally_soluble(res.quartic_red, v) for v in places}
    return res


def full_descent(E: CurveE2, H: int = 10_000, seed: int = 0, extra_primes=(), workers: int = 1,
                 precision: int = 20, selmer: SelmerResult | None = None) -> DescentResult:
    if selmer is None:
        selmer = compute_selmer(E, seed=seed, extra_primes=extra_primes, precision=precision)
    amb = selmer.ambient
    span = F2Span(amb.dim)
    for T in E.two_torsion():
        span.add(amb.vector(delta_global(E, T)))
    generators: list[PointE] = []
    classes = []
    partial = False
    for xi in selmer.elements():
        if xi.is_identity:
            continue
        res = build_class(E, xi, amb.places)
        classes.append(res)
        if res.status == "conic_failure":
            partial = True
            continue
        vec = amb.vector(xi)
        if vec in span:
            res.status = "resolved"
            continue
        if H < 1:
            res.status = "unresolved"
            continue
        res.search = search_quartic(res.quartic_red, H, workers=workers)
        for pt in res.search.points:
            P = res.covering_point_to_curve(pt)
            if not E.contains(P) or delta_global(E, P) != xi:
                raise ArithmeticError(f"covering point {pt} maps to a point outside the class {xi}")
            res.search.mapped_points.append(P)
        if res.search.points:
            res.status = "point_found"
            span.add(vec)
            generators.append(res.search.mapped_points[0])
        else:
            res.status = "unresolved"
    for res in classes:
        if res.status == "unresolved" and amb.vector(res.element) in span:
            res.status = "resolved"
    unresolved = [x for x in selmer.elements() if amb.vector(x) not in span]
    verdict = DescentVerdict(
        selmer_dim=selmer.dim,
        rank_lower=max(span.dim - 2, 0),
        rank_upper=selmer.dim - 2,
        unresolved=unresolved,
        generators=generators,
        partial=partial,
    )
    return DescentResult(E, selmer, classes, verdict, H)
