"""Congruence moduli for power residues.

Given a finitely generated unit subgroup U of a number field and an
exponent r, find the smallest integer q such that every element of U
congruent to 1 modulo q is an r-th power inside U.  The certificate is a
lattice containment: the kernel of U -> (Z[x]/(f, q))^x, computed by
memoized-table discrete logarithms in the finite image, must lie inside
the preimage lattice of the r-th powers.  The scan is an ascending pass
over integers coprime to the avoided set and the index guard; candidates
whose image tables outgrow the work cap are skipped deterministically.
"""

from __future__ import annotations

from math import gcd

from .errors import ModulusNotFound
from .exact import factor_mod_p, factorint, lattice_member, lcm
from .nfield import NumberField
from .residue import FiniteRing, HomDescription, ResidueMap
from .units import UnitList, _abelian_kernel, abelian_structure

_TABLE_CAP = 60_000


_FACTOR_CACHE: dict = {}


def _factor_min_poly(minimal_poly, p):
    key = (minimal_poly.coeffs, p)
    if key not in _FACTOR_CACHE:
        _FACTOR_CACHE[key] = [(g.degree, e) for g, e in
                              factor_mod_p(minimal_poly, p)]
    return _FACTOR_CACHE[key]


def _unit_group_order(q: int, minimal_poly) -> int:
    """Order of (Z[x]/(f, q))^x from the factorizations of q and f mod p."""
    d = minimal_poly.degree
    total = 1
    for p, a in factorint(q).items():
        if d == 1:
            comp = (p - 1) * p ** (a - 1)
        else:
            comp = p ** (d * (a - 1))
            for di, e in _factor_min_poly(minimal_poly, p):
                comp *= (p ** di - 1) * p ** (di * (e - 1))
        total *= comp
    return total


def _element_order(ring: FiniteRing, u, group_order: int) -> int:
    o = group_order
    for p in factorint(group_order):
        while o % p == 0 and ring.pow(u, o // p) == ring.one():
            o //= p
    return o


class ChevalleyModulus:
    """A certified modulus: congruent-to-1 elements of the unit subgroup
    are r-th powers within it."""

    __slots__ = ("q", "r", "units", "torsion", "free_generators",
                 "image_order_data", "kernel_rows")

    def __init__(self, q, r, units, torsion, free_generators,
                 image_order_data, kernel_rows):
        self.q = q
        self.r = r
        self.units = units
        self.torsion = torsion
        self.free_generators = tuple(free_generators)
        self.image_order_data = image_order_data
        self.kernel_rows = [list(x) for x in kernel_rows]

    def __repr__(self):
        return f"ChevalleyModulus(q={self.q}, r={self.r})"


def _collect_denominators(elements) -> set[int]:
    out = set()
    for e in elements:
        out |= set(factorint(e.denominator())) if e.denominator() > 1 else set()
        inv = e.inverse()
        out |= set(factorint(inv.denominator())) if inv.denominator() > 1 else set()
    return out


def _power_preimage_rows(k: int, w: int | None, r: int):
    """Basis of the preimage in exponent coordinates of the r-th powers."""
    dim = k + (1 if w else 0)
    rows = [[r if i == j else 0 for j in range(dim)] for i in range(dim)]
    if w:
        rows.append([w] + [0] * (dim - 1))
    return rows, dim


def certify_modulus(field: NumberField, gens, w: int | None, r: int, q: int,
                    table_cap: int = _TABLE_CAP):
    """Check one candidate q; returns (orders, kernel rows) or None.

    ``gens`` lists the structure generators, torsion generator first when
    w is not None.  None means q is rejected (either it fails the kernel
    condition or its image table exceeds the work cap).
    """
    try:
        ring = FiniteRing(q, field.minimal_poly)
        rmap = ResidueMap(field, ring, ())
    except Exception:
        return None
    images = []
    for g in gens:
        try:
            img = rmap.element(g)
        except Exception:
            return None
        if ring.try_inv(img) is None:
            return None
        images.append(img)
    prows, dim = _power_preimage_rows(len(gens) - (1 if w else 0), w, r)
    if not gens:
        return ([], [])
    group_order = _unit_group_order(q, field.minimal_poly)
    # a free generator's image order must be divisible by r, and it divides
    # the unit-group order: reject without any powering when r does not
    if len(gens) > (1 if w else 0) and group_order % r:
        return None
    # necessary per-generator conditions, computed one at a time
    orders = []
    est = 1
    for j, img in enumerate(images):
        o = _element_order(ring, img, group_order)
        if w and j == 0:
            if o % gcd(r, w):
                return None
        elif o % r:
            return None
        orders.append(o)
        est *= o
        if est > table_cap:
            return None
    kernel = _abelian_kernel(ring, images, table_cap)
    if kernel is None:
        return None
    for row in kernel:
        if not lattice_member(prows, list(row)):
            return None
    rel_orders = [-kernel[j][j] for j in range(len(kernel))]
    return rel_orders, kernel


def chevalley_modulus(U: UnitList, r: int, avoid=(), search_limit: int = 10 ** 5,
                      table_cap: int = _TABLE_CAP) -> ChevalleyModulus:
    """Smallest certified modulus q <= search_limit for the exponent r.

    Ascending scan over integers coprime to ``avoid``, the index guard,
    and every denominator occurring in the unit subgroup's structure
    generators or their inverses.  Deterministic: the smallest certified
    q wins; exhaustion raises ModulusNotFound.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    field = U.field
    tor, frees = abelian_structure(U) if len(U) else (None, [])
    gens = []
    w = None
    if tor is not None:
        w = tor[0]
        gens.append(tor[1])
    gens.extend(g for g, _row in frees)

    blocked = 1
    for a in avoid:
        blocked *= int(a)
    guard = abs(field.discriminant)
    if guard > 1:
        blocked *= guard
    for p in _collect_denominators(list(U.units) + gens):
        blocked *= p

    skipped = 0
    for q in range(2, search_limit + 1):
        if gcd(q, blocked) != 1:
            continue
        res = certify_modulus(field, gens, w, r, q, table_cap)
        if res is None:
            skipped += 1
            continue
        orders, kernel = res
        return ChevalleyModulus(q, r, U, tor, [g for g, _ in frees],
                                {"relative_orders": orders,
                                 "image_order": _prod(orders)},
                                kernel)
    raise ModulusNotFound(
        f"no certified modulus up to {search_limit} for r={r} "
        f"({skipped} candidates rejected)")


def _prod(vals):
    out = 1
    for v in vals:
        out *= v
    return out


def power_residue_map(K: NumberField, U: UnitList, r: int, avoid=(),
                      search_limit: int = 10 ** 5):
    """A Chevalley modulus packaged with its entrywise-applicable map.

    For x in the generated unit subgroup, phi(x) = 1 forces x = y^r with y
    in the subgroup; this is exactly the certified kernel containment.
    """
    cm = chevalley_modulus(U, r, avoid=avoid, search_limit=search_limit)
    dens = set(int(a) for a in avoid)
    dens |= _collect_denominators(list(U.units) + list(cm.free_generators)
                                  + ([cm.torsion[1]] if cm.torsion else []))
    ring = FiniteRing(cm.q, K.minimal_poly)
    rmap = ResidueMap(K, ring, dens)
    return cm, HomDescription([rmap])
