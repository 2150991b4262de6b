"""Tests for finite rings, residue maps, closures, and product homomorphisms."""

import random
from fractions import Fraction

import pytest

from sepcert.errors import CapExceeded, MixedFields, NotInvertible, ResidueUndefined
from sepcert.exact import IntPoly, factor_mod_p
from sepcert.nfield import Matrix, NumberField
from sepcert.residue import (
    FiniteRing,
    HomDescription,
    apply_matrix,
    build_residue_map,
    closure_product,
    group_closure,
    product_hom,
)

QQ = NumberField.rationals()
K2 = NumberField(IntPoly([-2, 0, 1]))


def test_build_residue_map_rational():
    phi = build_residue_map(QQ, 5)
    # 1/2 -> 3 since 2 * 3 = 1 (mod 5)
    assert phi.rational(Fraction(1, 2)) == (3,)
    assert phi.rational(7) == (2,)
    with pytest.raises(ResidueUndefined):
        phi.rational(Fraction(1, 5))


def test_build_residue_map_quadratic():
    phi = build_residue_map(K2, 7)
    a = phi.element(K2.alpha())
    ring = phi.target
    assert ring.mul(a, a) == ring.from_int(2)
    # composing with the quotient by the factor (x - 3) of f mod 7 sends
    # the root to 3; the oracle confirms 3^2 = 2 (mod 7)
    assert pow(3, 2, 7) == 2
    facs = [g for g, _ in factor_mod_p(IntPoly([-2, 0, 1]), 7)]
    lin = next(g for g in facs if g.degree == 1 and (-g.coeffs[0]) % 7 == 3)
    proj = phi.quotient_by_factor(lin)
    assert proj.element(K2.alpha()) == (3,)


def test_residue_map_avoid_guard():
    with pytest.raises(ResidueUndefined):
        build_residue_map(QQ, 4, avoid={2})
    # discriminant of x^2 - 2 is 8: q = 2 collides with the index guard
    with pytest.raises(ResidueUndefined):
        build_residue_map(K2, 8)


def test_apply_matrix_examples():
    phi = build_residue_map(QQ, 5)
    hom = HomDescription([phi])
    eye = Matrix.identity(QQ, 2)
    assert apply_matrix(hom, eye)[0] == phi.target.mat_identity(2)
    d = Matrix(QQ, [[2, 0], [0, 1]])
    assert apply_matrix(hom, d)[0] == (((2,), (0,)), ((0,), (1,)))
    m = Matrix(QQ, [[1, Fraction(1, 2)], [0, 1]])
    assert apply_matrix(hom, m)[0] == (((1,), (3,)), ((0,), (1,)))


def test_group_closure_examples():
    ring = FiniteRing(3, IntPoly([0, 1]))
    eye = ring.mat_identity(2)
    assert group_closure(ring, [eye]).order == 1

    u = (((1,), (1,)), ((0,), (1,)))
    assert group_closure(ring, [u]).order == 3

    ring5 = FiniteRing(5, IntPoly([0, 1]))
    t = (((2,), (0,)), ((0,), (1,)))
    a = (((1,), (1,)), ((0,), (1,)))
    grp = group_closure(ring5, [t, a])
    assert grp.order == 20  # 5 unipotents x multiplicative order 4 of 2 mod 5

    with pytest.raises(NotInvertible):
        group_closure(ring5, [(((5,), (0,)), ((0,), (1,)))])
    with pytest.raises(CapExceeded):
        group_closure(ring5, [t, a], cap=6)


def test_group_closure_is_closed():
    ring = FiniteRing(5, IntPoly([0, 1]))
    t = (((2,), (0,)), ((0,), (1,)))
    a = (((1,), (1,)), ((0,), (1,)))
    grp = group_closure(ring, [t, a])
    elems = list(grp.elements)
    for x in elems:
        assert ring.mat_inv(x) in grp.elements
        for y in elems[:5]:
            assert ring.mat_mul(x, y) in grp.elements


def test_finite_ring_field_when_q_prime():
    for q in (2, 3, 5, 7, 11, 13):
        ring = FiniteRing(q, IntPoly([0, 1]))
        for v in range(1, q):
            inv = ring.inv((v,))
            assert ring.mul((v,), inv) == ring.one()


def test_finite_ring_extension_inverse():
    ring = FiniteRing(7, IntPoly([-2, 0, 1]))
    a = (3, 5)
    inv = ring.inv(a)
    assert ring.mul(a, inv) == ring.one()
    # 5 + alpha is a zero divisor candidate check: norm = 25 - 2 = 23 = 2 mod 7, unit
    assert ring.is_unit((5, 1))


def test_product_hom():
    p3 = build_residue_map(QQ, 3)
    p5 = build_residue_map(QQ, 5)
    hom = product_hom([p3, p5])
    d = Matrix(QQ, [[2, 0], [0, 1]])
    images = apply_matrix(hom, d)
    assert images[0] == (((2,), (0,)), ((0,), (1,)))
    assert images[1] == (((2,), (0,)), ((0,), (1,)))
    # 6 maps to (0 mod 3, 1 mod 5): the first component separates 6 from 1
    assert (p3.rational(6), p5.rational(6)) == ((0,), (1,))
    assert p3.rational(1) != p3.rational(6)
    assert product_hom([p3]).components == (p3,)
    pk = build_residue_map(K2, 5)
    with pytest.raises(MixedFields):
        product_hom([p3, pk])


def test_homomorphism_law_random():
    rng = random.Random(41)
    for field, q in ((QQ, 5), (QQ, 7), (K2, 5), (K2, 11)):
        phi = build_residue_map(field, q)
        ring = phi.target
        for _ in range(100):
            def rand_tri():
                n = 2
                rows = [[0] * n for _ in range(n)]
                for i in range(n):
                    rows[i][i] = rng.choice([1, 2, 3, -1])
                    for j in range(i + 1, n):
                        rows[i][j] = rng.randint(-3, 3)
                return Matrix(field, rows)
            M, N = rand_tri(), rand_tri()
            lhs = phi.matrix(M * N)
            rhs = ring.mat_mul(phi.matrix(M), phi.matrix(N))
            assert lhs == rhs


def test_closure_product_tuples():
    p3 = build_residue_map(QQ, 3)
    p5 = build_residue_map(QQ, 5)
    d = Matrix(QQ, [[2, 0], [0, 1]])
    img = (p3.matrix(d), p5.matrix(d))
    closed = closure_product([p3.target, p5.target], [img], n=2)
    assert len(closed) == 4  # lcm(ord mod 3, ord mod 5) = lcm(2, 4)
