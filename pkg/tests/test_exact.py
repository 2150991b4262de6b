"""Tests for the exact arithmetic substrate.

Expected values marked as derived in the module contracts are computed by
independent oracles defined at the top of this file, never copied by hand.
"""

import random
from fractions import Fraction
from itertools import combinations
from math import gcd

import pytest

from sepcert.errors import NotPrime
from sepcert.exact import (
    IntMatrix,
    IntPoly,
    factor_mod_p,
    hnf,
    int_det,
    lattice_divide,
    lattice_intersect,
    lattice_kernel,
    lattice_member,
    lattices_equal,
    poly_discriminant,
    pp_mul,
    qp_gcd,
    qp_resultant,
    smith_normal_form,
    snf_quotient,
    solve_left,
)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def oracle_invariant_factors(rows):
    """Determinantal-divisor oracle: d_k = gcd of all k x k minors."""
    m, n = len(rows), len(rows[0])
    divisors = []
    prev = 1
    for k in range(1, min(m, n) + 1):
        g = 0
        for ri in combinations(range(m), k):
            for ci in combinations(range(n), k):
                sub = [[rows[i][j] for j in ci] for i in ri]
                g = gcd(g, int_det(sub))
        if g == 0:
            break
        divisors.append(g // prev)
        prev = g
    return divisors


def oracle_kernel_vectors(rows, bound=5):
    """All kernel vectors with entries in [-bound, bound], brute force."""
    m, n = len(rows), len(rows[0])
    found = []

    def rec(vec):
        if len(vec) == n:
            if any(vec) and all(
                sum(rows[i][j] * vec[j] for j in range(n)) == 0 for i in range(m)
            ):
                found.append(list(vec))
            return
        for v in range(-bound, bound + 1):
            rec(vec + [v])

    rec([])
    return found


def oracle_roots_mod_p(coeffs, p):
    """Exhaustive root search modulo p."""
    return [r for r in range(p)
            if sum(c * pow(r, i, p) for i, c in enumerate(coeffs)) % p == 0]


def mat_mul_lists(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def snf_checks(rows):
    A = IntMatrix(rows)
    D, U, V = smith_normal_form(A)
    prod = mat_mul_lists(mat_mul_lists(U.to_lists(), rows), V.to_lists())
    assert prod == D.to_lists()
    assert abs(int_det(U.to_lists())) == 1
    assert abs(int_det(V.to_lists())) == 1
    diag = [D.entries[i][i] for i in range(min(A.rows, A.cols))]
    for i in range(len(diag) - 1):
        if diag[i + 1] != 0:
            assert diag[i] != 0 and diag[i + 1] % diag[i] == 0
        assert diag[i] >= 0
    nz = [d for d in diag if d != 0]
    assert nz == oracle_invariant_factors(rows)
    return diag


def test_snf_examples():
    assert snf_checks([[2, 0], [0, 3]])[:2] == [1, 6]
    assert snf_checks([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == [1, 1, 1]
    assert snf_checks([[2, 4], [6, 8]]) == [2, 4]


def test_snf_random_4x4():
    rng = random.Random(7)
    for _ in range(200):
        rows = [[rng.randint(-9, 9) for _ in range(4)] for _ in range(4)]
        snf_checks(rows)


def test_snf_rectangular():
    rng = random.Random(11)
    for _ in range(60):
        m = rng.randint(1, 4)
        n = rng.randint(1, 4)
        rows = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(m)]
        snf_checks(rows)


# ---------------------------------------------------------------------------
# lattice kernel and helpers
# ---------------------------------------------------------------------------

def test_lattice_kernel_examples():
    basis = lattice_kernel(IntMatrix([[1, 2]]))
    assert len(basis) == 1
    assert basis[0] in ([2, -1], [-2, 1])

    assert lattice_kernel(IntMatrix.identity(2)) == []

    full = lattice_kernel(IntMatrix([[0, 0]]))
    assert len(full) == 2
    assert abs(int_det(full)) == 1


def test_lattice_kernel_brute_force_span():
    rng = random.Random(3)
    for _ in range(25):
        m = rng.randint(1, 3)
        n = rng.randint(1, 4)
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
        basis = lattice_kernel(IntMatrix(rows))
        for v in oracle_kernel_vectors(rows, bound=5):
            assert solve_left(basis, v) is not None if basis else not any(v)


def test_hnf_solve_member():
    rows = [[2, 0, 1], [0, 3, 1]]
    h = hnf(rows, 3)
    assert hnf(h, 3) == h
    assert lattice_member(rows, [2, 3, 2])
    assert not lattice_member(rows, [1, 0, 0])
    x = solve_left(rows, [4, 3, 3])
    assert x == [2, 1]
    assert solve_left(rows, [0, 0, 1]) is None


def test_lattice_intersect_divide():
    a = [[2, 0], [0, 3]]
    b = [[3, 0], [0, 2]]
    inter = lattice_intersect(a, b, 2)
    assert lattices_equal(inter, [[6, 0], [0, 6]], 2)
    half = lattice_divide([[4, 0], [0, 6]], 2, 2)
    assert lattices_equal(half, [[2, 0], [0, 3]], 2)


def test_snf_quotient_structure():
    torsion, free = snf_quotient([[2, 0, 0]], 3)
    assert [t[0] for t in torsion] == [2]
    assert len(free) == 2
    torsion, free = snf_quotient([], 2)
    assert torsion == [] and len(free) == 2


# ---------------------------------------------------------------------------
# factor_mod_p
# ---------------------------------------------------------------------------

def test_factor_examples():
    # x^2 + 1 mod 5: the oracle finds roots 2 and 3
    assert oracle_roots_mod_p([1, 0, 1], 5) == [2, 3]
    facs = factor_mod_p(IntPoly([1, 0, 1]), 5)
    assert facs == [(IntPoly([2, 1]), 1), (IntPoly([3, 1]), 1)]

    # x^2 + 1 mod 3: no roots, stays irreducible
    assert oracle_roots_mod_p([1, 0, 1], 3) == []
    assert factor_mod_p(IntPoly([1, 0, 1]), 3) == [(IntPoly([1, 0, 1]), 1)]

    assert factor_mod_p(IntPoly([-1, 1]), 7) == [(IntPoly([6, 1]), 1)]


def test_factor_not_prime():
    with pytest.raises(NotPrime):
        factor_mod_p(IntPoly([1, 1]), 6)


def test_factor_zero_mod_p():
    with pytest.raises(ValueError):
        factor_mod_p(IntPoly([5, 10]), 5)


def test_factor_remultiplication_random():
    rng = random.Random(19)
    for p in (2, 3, 5, 7, 11):
        for _ in range(100):
            deg = rng.randint(1, 6)
            coeffs = [rng.randint(-20, 20) for _ in range(deg)] + [rng.randint(1, 20)]
            f = IntPoly(coeffs)
            fp = f.reduce_mod(p)
            if not fp:
                continue
            facs = factor_mod_p(f, p)
            prod = [fp[-1] % p]
            for g, e in facs:
                for _ in range(e):
                    prod = pp_mul(prod, list(g.coeffs), p)
            assert prod == fp
            for g, _ in facs:
                assert g.is_monic
    # determinism
    f = IntPoly([3, 1, 4, 1, 5, 9, 2])
    assert factor_mod_p(f, 11) == factor_mod_p(f, 11)


def test_factor_irreducibles_have_no_proper_gcd():
    # spot check: every reported factor of a squarefree input is coprime to
    # the others and has no root unless linear
    f = IntPoly([6, 11, 6, 1])  # (x+1)(x+2)(x+3)
    facs = factor_mod_p(f, 7)
    assert sorted((g.degree) for g, _ in facs) == [1, 1, 1]


# ---------------------------------------------------------------------------
# rational helpers
# ---------------------------------------------------------------------------

def test_resultant_and_discriminant():
    # res(x^2 - 1, x - 2) = value of x^2 - 1 at 2 = 3
    f = [Fraction(-1), Fraction(0), Fraction(1)]
    g = [Fraction(-2), Fraction(1)]
    assert qp_resultant(f, g) == 3
    assert poly_discriminant(IntPoly([-2, 0, 1])) == 8
    assert poly_discriminant(IntPoly([1, 0, 1])) == -4
    assert poly_discriminant(IntPoly([0, 1])) == 1
    assert qp_gcd(f, g) == [Fraction(1)]


def test_intpoly_basics():
    f = IntPoly([0, 0, 2, 0])
    assert f.degree == 2
    assert f.coeffs == (0, 0, 2)
    assert (f * IntPoly([1, 1])).coeffs == (0, 0, 2, 2)
    assert f.evaluate(3) == 18
    assert IntPoly([]).is_zero
    assert IntPoly([4, 6]).primitive() == IntPoly([2, 3])
    with pytest.raises(ValueError):
        IntMatrix([])
