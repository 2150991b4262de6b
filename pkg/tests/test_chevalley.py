"""Tests for the power-residue modulus search."""

import pytest

from sepcert.errors import ModulusNotFound
from sepcert.exact import IntPoly, lattice_member
from sepcert.nfield import NumberField
from sepcert.chevalley import certify_modulus, chevalley_modulus, power_residue_map
from sepcert.units import UnitList

QQ = NumberField.rationals()


# ---------------------------------------------------------------------------
# oracle: exhaustive kernel scan for U = <-1, 2> in Z[1/2]
# ---------------------------------------------------------------------------

def multiplicative_order(a, q):
    assert a % q != 0
    o, x = 1, a % q
    while x != 1:
        x = x * a % q
        o += 1
    return o


def oracle_pm_two(r, qmax):
    """Smallest odd q such that every solution of (-1)^a 2^k = 1 (mod q)
    is an r-th power in <-1, 2>, by brute enumeration."""
    for q in range(3, qmax + 1, 2):
        ok = True
        ord2 = multiplicative_order(2, q)
        for a in (0, 1):
            for k in range(2 * ord2 + 2):
                if (pow(-1, a, q) * pow(2, k, q)) % q == 1 % q:
                    # (-1)^a 2^k = ((-1)^b 2^c)^r needs k = rc and a = rb (mod 2)
                    power = (k % r == 0) and any((a - r * b) % 2 == 0 for b in (0, 1))
                    if not power:
                        ok = False
                        break
            if not ok:
                break
        if ok:
            return q
    return None


def test_chevalley_oracle_agrees():
    assert oracle_pm_two(2, 30) == 15
    U = UnitList(QQ, [-1, 2])
    cm = chevalley_modulus(U, 2, avoid={2})
    assert cm.q == 15

    U2 = UnitList(QQ, [2])
    cm2 = chevalley_modulus(U2, 2, avoid={2})
    assert cm2.q == 3


def test_chevalley_trivial_unit_group():
    U = UnitList(QQ, [])
    cm = chevalley_modulus(U, 5)
    assert cm.q == 2  # kernel empty: the first admissible q certifies


def test_chevalley_certification_invariant():
    """Enumerate the full image and check every vanishing exponent vector
    lies in the power-preimage lattice, independently of the engine."""
    U = UnitList(QQ, [-1, 2])
    cm = chevalley_modulus(U, 2, avoid={2})
    q = cm.q
    ord2 = multiplicative_order(2, q)
    prows = [[2, 0], [0, 2], [2, 0]]  # r Z^2 + (w, 0), w = 2
    for a in range(0, 2 * 2):
        for k in range(0, 2 * ord2 + 1):
            if (pow(-1, a, q) * pow(2, k, q)) % q == 1 % q:
                assert lattice_member(prows, [a, k])


def test_chevalley_monotonicity():
    # if q certifies, so does q * q' for admissible q': spot-check 105
    U = UnitList(QQ, [-1, 2])
    tor = (2, QQ.from_rational(-1))
    gens = [QQ.from_rational(-1), QQ.from_rational(2)]
    assert certify_modulus(QQ, gens, 2, 2, 15) is not None
    assert certify_modulus(QQ, gens, 2, 2, 105) is not None
    assert certify_modulus(QQ, gens, 2, 2, 5) is None


def test_chevalley_determinism():
    U = UnitList(QQ, [-1, 2])
    a = chevalley_modulus(U, 2, avoid={2})
    b = chevalley_modulus(UnitList(QQ, [-1, 2]), 2, avoid={2})
    assert a.q == b.q
    assert a.image_order_data == b.image_order_data


def test_chevalley_not_found():
    U = UnitList(QQ, [-1, 2])
    with pytest.raises(ModulusNotFound):
        chevalley_modulus(U, 2, avoid={2}, search_limit=10)


def test_power_residue_map_contract():
    U = UnitList(QQ, [-1, 2])
    cm, hom = power_residue_map(QQ, U, 2, avoid={2})
    assert cm.q == 15
    phi = hom.components[0]
    # contract witnessed: 16 = 1 (mod 15) and 16 = 4^2 with 4 in <-1, 2>
    assert phi.rational(16) == phi.rational(1)
    # contrapositive side: 4 is not congruent to 1
    assert phi.rational(4) != phi.rational(1)


def test_chevalley_quadratic_field():
    K2 = NumberField(IntPoly([-2, 0, 1]))
    a = K2.alpha()
    U = UnitList(K2, [K2.from_rational(-1), a])
    cm = chevalley_modulus(U, 2, avoid={2})
    # verify the kernel containment on the returned modulus via the engine
    assert cm.q >= 3
    tor, frees = (cm.torsion, cm.free_generators)
    assert certify_modulus(K2, ([tor[1]] if tor else []) + list(frees),
                           tor[0] if tor else None, 2, cm.q) is not None
