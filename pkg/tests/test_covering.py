import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from twodescent.arith import REAL, LocalPlace, SquareClass, is_local_square
from twodescent.covering import (
    BinaryQuartic,
    InsolubleConic,
    conic_obstruction,
    conic_to_quartic,
    is_locally_soluble,
    make_conic_pair,
    map_to_E,
    quartic_invariants,
    quartic_local_point,
    short_j,
    solve_conic,
)
from twodescent.curve import INFINITY, CurveE2, PointE
from twodescent.search import search_quartic
from twodescent.selmer import SelmerElement, build_ambient, compute_selmer, delta_global, local_image, restrict_word

MINUS = SelmerElement(SquareClass(-1), SquareClass(-1))


def test_conic_pair_example(congruent5):
    m = make_conic_pair(congruent5, MINUS)
    assert (m.d1, m.d2, m.d3, m.t) == (-1, -1, 1, 1)
    assert m.h1() == (-5, -1, 1)
    assert m.h2() == (5, -1, -1)
    assert m.contains((1, 2, 3, 1))


def test_identity_conic_pair():
    E = CurveE2(-1, 0, 1)
    m = make_conic_pair(E, SelmerElement.identity())
    assert (m.d1, m.d2, m.d3) == (1, 1, 1)
    u = (0, 1, 1, 1)
    assert m.contains(u)
    assert map_to_E(m, u) == INFINITY


def test_conic_pair_coefficients_divide():
    E = CurveE2(-5, 0, 5)
    es = E.roots
    diffs = {abs(a - b) for a in es for b in es if a != b}
    for xi in build_ambient(E).elements():
        m = make_conic_pair(E, xi)
        for c in m.h1() + m.h2():
            assert any((m.d1 * m.d2 * m.d3 * d) % c == 0 for d in diffs)


def test_map_to_E_example(congruent5):
    m = make_conic_pair(congruent5, MINUS)
    assert map_to_E(m, (1, 2, 3, 1)) == PointE(-4, 6)
    with pytest.raises(ValueError):
        map_to_E(m, (1, 1, 1, 1))


def test_degree_four_fibre(congruent5):
    m = make_conic_pair(congruent5, MINUS)
    fibre = set()
    for s1, s2, s3 in itertools.product((1, -1), repeat=3):
        u = (1, 2 * s1, 3 * s2, s3)
        if map_to_E(m, u) == PointE(-4, 6):
            fibre.add(u)
    assert len(fibre) == 4


def test_mapped_points_have_class(congruent5):
    for xi in compute_selmer(congruent5).elements():
        m = make_conic_pair(congruent5, xi)
        try:
            cov = conic_to_quartic(m)
        except InsolubleConic:
            continue
        for x, y, z in search_quartic(cov.quartic, 30).points[:6]:
            P = cov.point_to_curve(x, z, y)
            assert congruent5.contains(P)
            if not P.is_infinity and P.y != 0:
                assert delta_global(congruent5, P) == xi


def test_quartic_solubility_examples():
    assert is_locally_soluble(BinaryQuartic(1, 0, 0, 0, 1), REAL)
    assert not is_locally_soluble(BinaryQuartic(-1, 0, 0, 0, -1), REAL)
    assert is_locally_soluble(BinaryQuartic(2, 0, 0, 0, -34), LocalPlace(17), force=True)
    assert not is_locally_soluble(BinaryQuartic(3, 0, 0, 0, 3), LocalPlace(3), force=True)
    # -1 is not a sum of two squares' worth of 4th powers at 2? check against a found point
    pt = quartic_local_point(BinaryQuartic(2, 0, 0, 0, -34), LocalPlace(2))
    assert pt is not None
    x, z, y = pt
    assert is_local_square(2 * x ** 4 - 34 * z ** 4, LocalPlace(2))


def _quartic_oracle(q, p, k):
    """Residue-disk oracle: a primitive (x, z) mod p^k where q(x, z) is a square
    of valuation small enough that the whole disk shares its square class."""
    m = 3 if p == 2 else 1
    mod = p ** k
    x, z = np.meshgrid(np.arange(mod, dtype=np.int64), np.arange(mod, dtype=np.int64))
    keep = (x % p != 0) | (z % p != 0)
    x, z = x[keep], z[keep]
    val = sum(c * x ** (4 - i) * z ** i for i, c in enumerate(q.coeffs))
    val = val[val != 0]
    vq = np.zeros_like(val)
    for _ in range(k):
        div = val % p == 0
        val = np.where(div, val // p, val)
        vq += div
    ok = (vq + m <= k) & (vq % 2 == 0)
    if p == 2:
        ok &= val % 8 == 1
    else:
        ok &= np.isin(val % p, [i * i % p for i in range(1, p)])
    return bool(ok.any())


@pytest.mark.parametrize("p,k", [(2, 9), (3, 6), (5, 4)])
def test_quartic_solubility_against_brute_force(p, k):
    # coefficients carry random powers of p so that insoluble cases occur
    r = random.Random(p)
    seen = {True: 0, False: 0}
    for _ in range(40):
        q = BinaryQuartic(*(r.randint(-6, 6) * p ** r.randint(0, 2) for _ in range(5)))
        if q.discriminant == 0:
            continue
        got = is_locally_soluble(q, LocalPlace(p), force=True)
        assert got == _quartic_oracle(q, p, k), q
        seen[got] += 1
    assert seen[True] and seen[False]


def test_solve_conic_examples():
    x, y, z = solve_conic((1, 1, -2))
    assert x * x + y * y - 2 * z * z == 0 and (x, y, z) != (0, 0, 0)
    with pytest.raises(InsolubleConic) as info:
        solve_conic((1, 1, 1))
    assert info.value.place == REAL
    u1, u2, u0 = solve_conic((-1, 1, -5))
    assert -u1 ** 2 + u2 ** 2 - 5 * u0 ** 2 == 0


def test_solve_conic_gram_matrix():
    G = [[1, 1, 0], [1, 3, 2], [0, 2, -7]]
    v = solve_conic(G)
    assert sum(G[i][j] * v[i] * v[j] for i in range(3) for j in range(3)) == 0


def test_solve_conic_matches_hilbert_test():
    r = random.Random(9)
    solved = failed = 0
    for _ in range(150):
        a, b, c = (r.choice([-1, 1]) * r.randint(1, 60) for _ in range(3))
        obstruction = conic_obstruction(a, b, c)
        if obstruction is None:
            x, y, z = solve_conic((a, b, c))
            assert a * x * x + b * y * y + c * z * z == 0
            solved += 1
        else:
            with pytest.raises(InsolubleConic):
                solve_conic((a, b, c))
            # the certificate is sound: no small solutions at all
            assert not any(a * x * x + b * y * y + c * z * z == 0
                           for x in range(-6, 7) for y in range(-6, 7) for z in range(0, 7) if (x, y, z) != (0, 0, 0))
            failed += 1
    assert solved and failed


def test_invariants_examples():
    q = BinaryQuartic(1, 0, 0, 0, 1)
    I, J, D = quartic_invariants(q)
    assert (I, J) == (12, 0)
    assert D == (4 * I ** 3 - J ** 2) // 27
    assert BinaryQuartic(0, 0, 1, 0, 0).discriminant == 0
    r = random.Random(2)
    for _ in range(20):
        q = BinaryQuartic(*(r.randint(-9, 9) for _ in range(5)))
        shifted = q.transform(((1, 1), (0, 1)))
        assert (shifted.I, shifted.J) == (q.I, q.J)


def test_quartic_jacobian_matches_curve():
    for roots in ((-1, 0, 1), (-5, 0, 5), (0, 5, -5), (-7, 2, 13)):
        E = CurveE2(*roots)
        for xi in compute_selmer(E).elements():
            try:
                cov = conic_to_quartic(make_conic_pair(E, xi))
            except InsolubleConic:
                continue
            assert short_j(*cov.quartic.jacobian()) == E.j_invariant()


def test_insoluble_class_reports_real_certificate():
    E = CurveE2(-1, 0, 1)
    xi = SelmerElement(SquareClass(-1), SquareClass(1))
    # H1: -u0^2 - u1^2 - u2^2 = 0
    with pytest.raises(InsolubleConic) as info:
        conic_to_quartic(make_conic_pair(E, xi))
    assert info.value.place == REAL


def test_conic_pair_solubility_matches_local_image():
    # the central cross-check: local solubility of the conic pair versus the local image
    for roots in ((-1, 0, 1), (-5, 0, 5), (0, 1, -3)):
        E = CurveE2(*roots)
        amb = build_ambient(E)
        for v in amb.places:
            img = local_image(E, v)
            for xi in amb.elements():
                m = make_conic_pair(E, xi)
                assert is_locally_soluble(m, v, force=True) == (restrict_word(xi, v) in img)


def test_quartic_preserves_local_solubility():
    E = CurveE2(-5, 0, 5)
    places = list(E.ramification_set()) + [LocalPlace(p) for p in (3, 7, 11)]
    for xi in build_ambient(E).elements():
        m = make_conic_pair(E, xi)
        try:
            cov = conic_to_quartic(m)
        except InsolubleConic:
            continue
        for v in places:
            assert is_locally_soluble(cov.quartic, v, force=True) == is_locally_soluble(m, v, force=True), (xi, v)


def test_correspondence_round_trip(congruent5):
    m = make_conic_pair(congruent5, MINUS)
    cov = conic_to_quartic(m)
    pts = search_quartic(cov.quartic, 60).points
    assert pts
    for x, y, z in pts:
        u = cov.to_conic_pair(x, z, y)
        assert m.contains(u)
        s, t, yy = cov.from_conic_pair(u)
        assert cov.quartic.contains(s, yy, t)
        # same point of P^1, same curve point
        assert s * z == t * x
        assert cov.point_to_curve(s, t, yy) == cov.point_to_curve(x, z, y)
    # (1, 2, 3, 1) comes from a quartic point
    s, t, y = cov.from_conic_pair((1, 2, 3, 1))
    assert cov.point_to_curve(s, t, y) == PointE(-4, 6)
