import random
from fractions import Fraction
from math import isqrt

import pytest

from twodescent.arith import LocalPlace, valuation
from twodescent.covering import BinaryQuartic, InsolubleConic, conic_to_quartic, is_locally_soluble, make_conic_pair
from twodescent.curve import CurveE2
from twodescent.minred import (
    TransformWitness,
    candidate_primes,
    covariant_point,
    minimize,
    minimize_and_reduce,
    reduce,
)
from twodescent.selmer import build_ambient


def best_valuation(q, p, kmax=3):
    """Brute-force oracle: least v_p(disc) over lam^2 q(M(x, z)) integral,
    M running over Hermite bases of all sublattices of index p^k, k <= kmax."""
    v0 = valuation(q.discriminant, p)
    best = v0
    for k in range(kmax + 1):
        for i in range(k + 1):
            a, d = p ** i, p ** (k - i)
            for c in range(d):
                M = ((a, 0), (c, d))
                for j in range(0, k + 3):
                    try:
                        q.transform(M, Fraction(1, p ** j))
                    except ValueError:
                        break
                    best = min(best, v0 + 12 * (k - j))
    return best


def covering_quartics(count=12, seed=0):
    r = random.Random(seed)
    out = []
    while len(out) < count:
        roots = r.sample(range(-40, 41), 3)
        E = CurveE2(*roots)
        amb = build_ambient(E)
        xi = amb.element(r.randrange(1, 1 << amb.dim))
        try:
            out.append(conic_to_quartic(make_conic_pair(E, xi)).quartic)
        except InsolubleConic:
            continue
    return out


def test_scalar_content():
    q, w = minimize(BinaryQuartic(16, 0, 0, 0, 16))
    assert q == BinaryQuartic(1, 0, 0, 0, 1)
    assert w.M == ((1, 0), (0, 1)) and w.lam == Fraction(1, 4)


@pytest.mark.parametrize("p,s", [(3, 2), (5, 1), (7, 3)])
def test_lattice_move(p, s):
    src = BinaryQuartic(1, 0, 0, 0, p ** 4 * s)
    q, w = minimize(src)
    assert w.apply(src) == q
    assert valuation(q.discriminant, p) == valuation(src.discriminant, p) - 12


def test_minimal_input_unchanged():
    q, w = minimize(BinaryQuartic(1, 0, 0, 0, 1))
    assert q.discriminant == BinaryQuartic(1, 0, 0, 0, 1).discriminant
    for p in (2, 3):
        assert best_valuation(q, p) == valuation(q.discriminant, p)


def test_minimize_is_minimal_against_brute_force():
    for q in covering_quartics():
        m, w = minimize(q)
        assert w.apply(q) == m
        for p in (2, 3):
            assert valuation(m.discriminant, p) == best_valuation(m, p), (q, m, p)


def test_candidate_primes():
    q = BinaryQuartic(16, 0, 0, 0, 16)
    assert 2 in candidate_primes(q)
    assert candidate_primes(BinaryQuartic(1, 0, 0, 0, 1)) == []


def test_witness_json_round_trip():
    w = TransformWitness(((2, 1), (-3, 5)), Fraction(-2, 9))
    assert TransformWitness.from_json(w.to_json()) == w
    with pytest.raises(ValueError):
        TransformWitness(((1, 2), (2, 4)))


def test_witness_composition_and_pull_back():
    q = BinaryQuartic(1, 0, -6, 0, 1)
    w1 = TransformWitness(((1, 1), (0, 1)))
    w2 = TransformWitness(((2, 0), (1, 1)), Fraction(1, 2))
    assert w1.then(w2).apply(q) == w2.apply(w1.apply(q))
    target = w1.then(w2).apply(q)
    for x in range(-5, 6):
        for z in range(0, 4):
            if (x, z) != (0, 0) and target(x, z) >= 0:
                y = isqrt(target(x, z))
                if y * y == target(x, z):
                    X, Y, Z = w1.then(w2).pull_back(x, y, z)
                    assert Y * Y == q(X, Z)


def test_shift_example():
    src = BinaryQuartic(1, 0, 0, 0, 1).transform(((1, 100), (0, 1)))
    assert src.coeffs[1] == 400
    q, w = reduce(src)
    assert q == BinaryQuartic(1, 0, 0, 0, 1)
    assert w.apply(src) == q
    assert abs(w.det) == 1 and w.lam == 1


def test_reduce_idempotent():
    for q in covering_quartics(8, seed=1):
        m, _ = minimize(q)
        r1, w1 = reduce(m)
        r2, w2 = reduce(r1)
        assert r2 == r1
        assert w1.apply(m) == r1


def test_reduce_scrambles_agree():
    rng = random.Random(5)
    base, _ = reduce(minimize(BinaryQuartic(3, -2, 7, 1, -5))[0])
    norms = []
    for _ in range(30):
        M = random_unimodular(rng)
        q, w = reduce(base.transform(M))
        assert w.apply(base.transform(M)) == q
        assert (q.I, q.J) == (base.I, base.J)
        norms.append(q.max_norm())
    assert max(norms) <= 2 * min(norms)


def random_unimodular(rng, steps=6):
    M = ((1, 0), (0, 1))
    for _ in range(steps):
        k = rng.randint(-4, 4)
        E = ((1, k), (0, 1)) if rng.random() < 0.5 else ((1, 0), (k, 1))
        M = tuple(tuple(sum(M[i][t] * E[t][j] for t in range(2)) for j in range(2)) for i in range(2))
    return M


def test_covariant_point_moves_covariantly():
    q = BinaryQuartic(1, 0, -6, 0, 1)
    x, y = covariant_point(q)
    shifted = q.transform(((1, 3), (0, 1)))
    x2, y2 = covariant_point(shifted)
    assert abs(float(x2 - (x - 3))) < 1e-8
    assert abs(float(y2 - y)) < 1e-8


def test_solubility_preserved():
    places = [LocalPlace(p) for p in (2, 3, 5, 7, 11)]
    for q in covering_quartics(6, seed=2):
        qm, wm, qr, wr = minimize_and_reduce(q)
        for v in places:
            a = is_locally_soluble(q, v, force=True)
            assert is_locally_soluble(qm, v, force=True) == a
            assert is_locally_soluble(qr, v, force=True) == a


def test_degenerate_rejected():
    with pytest.raises(ValueError):
        minimize(BinaryQuartic(1, 2, 1, 0, 0))
    with pytest.raises(ValueError):
        reduce(BinaryQuartic(1, 2, 1, 0, 0))
