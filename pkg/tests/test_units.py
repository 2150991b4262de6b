"""Tests for unit-group structure: relation lattices, torsion, free bases,
complements, and power decompositions."""

from fractions import Fraction

import pytest

from sepcert.errors import AllTorsion, BasisSelectionError, NotInProduct
from sepcert.exact import IntPoly, hnf, lattices_equal
from sepcert.nfield import NumberField, is_root_of_unity
from sepcert.units import (
    Complement,
    UnitList,
    abelian_structure,
    complement_subgroup,
    decompose_power,
    exponent_lattice,
    express_in,
    free_basis,
    torsion_order,
)

QQ = NumberField.rationals()
K2 = NumberField(IntPoly([-2, 0, 1]))
Ki = NumberField(IntPoly([1, 0, 1]))


def ulist(vals, field=QQ, bound=8):
    return UnitList(field, vals, bound)


# ---------------------------------------------------------------------------
# coset-enumeration oracle for complement indices
# ---------------------------------------------------------------------------

def oracle_quotient_order(rows, m, limit=10 ** 4):
    """Order of Z^m / L by BFS over canonical coset representatives."""
    def reduce_vec(v):
        v = list(v)
        for row in hnf(rows, m):
            piv = next(i for i, x in enumerate(row) if x)
            q = v[piv] // row[piv]
            if q:
                v = [a - q * b for a, b in zip(v, row)]
        return tuple(v)

    seen = {reduce_vec([0] * m)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for v in frontier:
            for i in range(m):
                for s in (1, -1):
                    w = list(v)
                    w[i] += s
                    r = reduce_vec(w)
                    if r not in seen:
                        if len(seen) >= limit:
                            return None
                        seen.add(r)
                        nxt.append(r)
        frontier = nxt
    return len(seen)


# ---------------------------------------------------------------------------
# torsion and exponent lattices
# ---------------------------------------------------------------------------

def test_torsion_order_examples():
    p, gen = torsion_order(ulist([-1]))
    assert p == 2 and gen.coords[0] == -1

    p, gen = torsion_order(ulist([2, -2]))
    assert p == 2 and gen.coords[0] == -1

    p, gen = torsion_order(ulist([2, 3]))
    assert p == 1 and gen is None


def test_torsion_order_gaussian():
    # i generates torsion of order 4 in Q(i)
    p, gen = torsion_order(ulist([Ki.alpha(), Ki.from_rational(2)], field=Ki))
    assert p == 4 and is_root_of_unity(gen) == 4


def test_exponent_lattice_examples():
    rows = exponent_lattice(ulist([2, 4]))
    assert lattices_equal(rows, [[-2, 1]], 2)

    assert exponent_lattice(ulist([2, 3])) == []

    rows = exponent_lattice(ulist([-1]))
    assert lattices_equal(rows, [[2]], 1)


def test_exponent_lattice_products_are_identity():
    for vals in ([2, 4], [-1], [2, -2], [6, 2, 3], [Fraction(1, 2), 2]):
        ul = ulist(vals)
        for row in exponent_lattice(ul):
            acc = QQ.one()
            for u, e in zip(ul.units, row):
                acc = acc * u ** e
            assert acc.is_one


def test_exponent_lattice_quadratic_field():
    a = K2.alpha()  # sqrt2
    ul = UnitList(K2, [a, K2.from_rational(2)])
    rows = exponent_lattice(ul)
    # sqrt2^2 = 2: relation (2, -1)
    assert lattices_equal(rows, [[2, -1]], 2)

    # fundamental unit 1 + sqrt2 is independent of sqrt2
    u = K2.element([1, 1])
    ul = UnitList(K2, [u, a])
    assert exponent_lattice(ul) == []


def test_exponent_lattice_gaussian_torsion():
    i = Ki.alpha()
    ul = UnitList(Ki, [i, Ki.from_rational(2)])
    rows = exponent_lattice(ul)
    assert lattices_equal(rows, [[4, 0]], 2)


# ---------------------------------------------------------------------------
# free bases
# ---------------------------------------------------------------------------

def test_free_basis_examples():
    b = free_basis(ulist([2, 4, 8]))
    assert b.torsion_order == 1 and b.basis_indices == (0,)

    b = free_basis(ulist([2, 3]))
    assert b.torsion_order == 1 and b.basis_indices == (0, 1)

    b = free_basis(ulist([2, -2]))
    assert b.torsion_order == 2
    assert b.basis_indices == (0,)
    assert b.power_units()[0].coords[0] == 4
    assert b.index_D == 4


def test_free_basis_all_torsion():
    with pytest.raises(AllTorsion):
        free_basis(ulist([-1, 1]))


def test_free_basis_subset_may_not_generate():
    # <4, 8> = <2> but neither 4 nor 8 generates it
    with pytest.raises(BasisSelectionError):
        free_basis(ulist([4, 8]))


def test_free_basis_brute_independence():
    b = free_basis(ulist([2, -2, 12]))
    p = b.torsion_order
    powers = b.power_units()
    # no relation with small exponents among the chosen powers
    bound = 4
    import itertools
    for exps in itertools.product(range(-bound, bound + 1), repeat=len(powers)):
        if not any(exps):
            continue
        acc = QQ.one()
        for u, e in zip(powers, exps):
            acc = acc * u ** e
        assert is_root_of_unity(acc) is None or not any(exps)
    # every unchosen power is a torsion multiple of a basis product
    for j in range(len(b.units.units)):
        if j in b.basis_indices:
            continue
        target = b.units.units[j] ** p
        vec = express_in(UnitList(QQ, powers + [b.torsion_generator]
                                  if b.torsion_generator else powers), target)
        assert vec is not None


# ---------------------------------------------------------------------------
# express_in
# ---------------------------------------------------------------------------

def test_express_in():
    ul = ulist([-1, 2, 3])

    def check(val):
        vec = express_in(ul, QQ.from_rational(val))
        assert vec is not None
        acc = QQ.one()
        for u, e in zip(ul.units, vec):
            acc = acc * u ** e
        assert acc.coords[0] == val

    check(4)
    check(-6)
    check(1)
    check(Fraction(3, 2))
    assert express_in(ul, QQ.from_rational(5)) is None


# ---------------------------------------------------------------------------
# complements and power decomposition
# ---------------------------------------------------------------------------

def test_complement_examples():
    amb = ulist([-1, 2, 3])
    G = free_basis(ulist([4]))
    T = complement_subgroup(amb, G)
    assert T.index == 4
    assert len(T.generators) == 1
    tval = T.generators[0].coords[0]
    assert tval in (Fraction(3), Fraction(1, 3))

    amb2 = ulist([2])
    G2 = free_basis(ulist([2]))
    T2 = complement_subgroup(amb2, G2)
    assert T2.generators == () and T2.index == 1

    amb3 = ulist([-1, 2])
    G3 = free_basis(ulist([4]))
    T3 = complement_subgroup(amb3, G3)
    assert T3.generators == () and T3.index == 4


def test_complement_index_matches_coset_oracle():
    cases = [
        (ulist([-1, 2, 3]), free_basis(ulist([4]))),
        (ulist([-1, 2]), free_basis(ulist([4]))),
        (ulist([2, 3]), free_basis(ulist([2, 9]))),
    ]
    for amb, G in cases:
        T = complement_subgroup(amb, G)
        pres = amb.presentation()
        rows = ([list(r) for r in T._trows] + [list(r) for r in T._zrows]
                + [list(r) for r in pres.L1])
        order = oracle_quotient_order(rows, pres.m)
        assert order == T.index <= 16


def test_decompose_power_examples():
    amb = ulist([-1, 2, 3])
    G = free_basis(ulist([4]))
    T = complement_subgroup(amb, G)
    assert T.index == 4

    kappa, q = decompose_power(QQ.from_rational(2), 4, T, G)
    assert kappa.is_one and q == [2]  # 2^4 = 16 = 4^2

    kappa, q = decompose_power(QQ.from_rational(3), 4, T, G)
    assert q == [0]
    assert kappa.coords[0] == 81  # 3^4 lies in T

    kappa, q = decompose_power(QQ.from_rational(1), 4, T, G)
    assert kappa.is_one and q == [0]

    with pytest.raises(NotInProduct):
        decompose_power(QQ.from_rational(5), 4, T, G)


def test_abelian_structure():
    tor, free = abelian_structure(ulist([-1, 2, 3]))
    assert tor is not None and tor[0] == 2
    assert len(free) == 2
    tor, free = abelian_structure(ulist([2]))
    assert tor is None and len(free) == 1
    i = Ki.alpha()
    tor, free = abelian_structure(UnitList(Ki, [i, Ki.element([1, 1])]))
    assert tor[0] == 4 and len(free) == 1
