"""Structure theory of explicitly generated subgroups of unit groups.

A list of nonzero field elements generates a finitely generated abelian
group; this module computes its complete multiplicative relation lattice,
torsion order and generator, a free basis among prescribed generators, a
complement subgroup with its index, and exact power decompositions.

Relation discovery: for rational units exact prime-factorization
valuations decide everything outright.  Over a proper extension the
relation lattice is pinned down by intersecting residue-field kernels for
increasing primes and certifying the candidate basis by exact
multiplication; the result is a certified-complete lattice, with
BoundExceeded raised when the prime budget (driven by relation_bound)
runs out before certification.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    AllTorsion,
    BasisSelectionError,
    BoundExceeded,
    NotInLattice,
    NotInProduct,
    ResidueUndefined,
)
from .exact import (
    IntPoly,
    euler_phi,
    factor_mod_p,
    factorint,
    hnf,
    lattice_divide,
    lattice_index_in_zm,
    lattice_intersect,
    lattice_kernel,
    lattice_sum,
    lattices_equal,
    lcm,
    primes_from,
    snf_quotient,
    solve_left,
    IntMatrix,
)
from .nfield import FieldElement, NumberField, is_root_of_unity
from .residue import FiniteRing, ResidueMap

_KERNEL_TABLE_CAP = 250_000


class UnitList:
    """Nonzero field elements with a relation-search effort budget."""

    __slots__ = ("field", "units", "relation_bound", "_pres")

    def __init__(self, field: NumberField, units, relation_bound: int = 8):
        elems = []
        for u in units:
            if not isinstance(u, FieldElement):
                u = field.from_rational(Fraction(u))
            if u.field != field:
                raise ValueError("unit outside the declared field")
            if u.is_zero:
                raise ValueError("units must be nonzero")
            elems.append(u)
        self.field = field
        self.units = tuple(elems)
        self.relation_bound = relation_bound
        self._pres = None

    def __len__(self):
        return len(self.units)

    def presentation(self) -> "_Presentation":
        if self._pres is None:
            self._pres = _compute_presentation(self)
        return self._pres

    def __repr__(self):
        return f"UnitList({[str(u) for u in self.units]})"


class _Presentation:
    """Certified relation data: L1 = relations to 1, Ltors = relations to
    torsion, plus the torsion order and a generator realizing it."""

    __slots__ = ("m", "L1", "Ltors", "torsion_order", "torsion_generator")

    def __init__(self, m, L1, Ltors, p, zeta):
        self.m = m
        self.L1 = L1
        self.Ltors = Ltors
        self.torsion_order = p
        self.torsion_generator = zeta


def _product_power(units, exps) -> FieldElement:
    field = units[0].field if units else None
    acc = field.one()
    for u, e in zip(units, exps):
        if e:
            acc = acc * u ** e
    return acc


def _rational_valuation_lattices(units):
    """Complete relation lattices for rational units via factorization."""
    vals = [u.coords[0] for u in units]
    support = set()
    for v in vals:
        if abs(v.numerator) > 1:
            support |= set(factorint(v.numerator))
        if v.denominator > 1:
            support |= set(factorint(v.denominator))
    support = sorted(support)
    m = len(vals)
    if support:
        rows = []
        for p in support:
            row = []
            for v in vals:
                vp = 0
                num, den = abs(v.numerator), v.denominator
                while num % p == 0:
                    vp += 1
                    num //= p
                while den % p == 0:
                    vp -= 1
                    den //= p
                row.append(vp)
            rows.append(row)
        ltors = [list(v) for v in lattice_kernel(IntMatrix(rows))]
    else:
        ltors = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    ltors = hnf(ltors, m)
    # sign refinement: relations to +1 form an index <= 2 sublattice
    signs = [0 if v > 0 else 1 for v in vals]
    sigma = [sum(b * s for b, s in zip(row, signs)) % 2 for row in ltors]
    if not any(sigma):
        l1 = ltors
    else:
        j0 = sigma.index(1)
        l1 = [[2 * x for x in ltors[j0]]]
        for j, row in enumerate(ltors):
            if j == j0:
                continue
            if sigma[j] == 0:
                l1.append(list(row))
            else:
                l1.append([a - b for a, b in zip(row, ltors[j0])])
        l1 = hnf(l1, m)
    return l1, ltors


def _abelian_kernel(ring: FiniteRing, images, cap: int):
    """Kernel of Z^m -> <images> inside ring^x, by sequential element tables.

    Returns triangular relation rows of full rank m, or None past the cap.
    """
    m = len(images)
    table = {ring.one(): [0] * m}
    rows = []
    for j, u in enumerate(images):
        pw = u
        t = 1
        while pw not in table:
            pw = ring.mul(pw, u)
            t += 1
            if t > cap:
                return None
        base = table[pw]
        row = list(base)
        row[j] -= t
        rows.append(row)
        if len(table) * t > cap:
            return None
        items = list(table.items())
        for h, vec in items:
            acc = h
            for i in range(1, t):
                acc = ring.mul(acc, u)
                nv = list(vec)
                nv[j] += i
                table[acc] = nv
    return rows


def _prime_residue_kernel(field, units, q):
    """Relation-to-1 lattice of the unit images in a residue field mod q."""
    try:
        facs = factor_mod_p(field.minimal_poly, q)
    except ValueError:
        return None
    if not facs:
        return None
    g = facs[0][0]
    try:
        ring = FiniteRing(q, g)
        rmap = ResidueMap(field, ring, ())
    except (ValueError, ResidueUndefined):
        return None
    images = []
    for u in units:
        try:
            img = rmap.element(u)
        except ResidueUndefined:
            return None
        if img == ring.zero():
            return None
        images.append(img)
    return _abelian_kernel(ring, images, _KERNEL_TABLE_CAP)


def _torsion_exponent_multiple(d: int) -> int:
    """An exponent multiple of the torsion of any degree-d field."""
    w = 1
    for k in range(1, 2 * d * d + 5):
        if euler_phi(k) <= d:
            w = lcm(w, k)
    return w


def _combine_torsion(x, wx, y, wy):
    """Element of order lcm(wx, wy) inside the ambient cyclic torsion."""
    target = lcm(wx, wy)
    a, b = 1, 1
    for prime, e in factorint(target).items():
        pe = prime ** e
        if wx % pe == 0:
            a *= pe
        else:
            b *= pe
    z = (x ** (wx // a)) * (y ** (wy // b))
    return z, target


def _torsion_data(units, ltors):
    """Torsion order and generator of the subgroup generated by ``units``."""
    if not ltors:
        return 1, None, []
    zetas = []
    for row in ltors:
        val = _product_power(units, row)
        w = is_root_of_unity(val)
        assert w is not None, "certified lattice row must be torsion"
        zetas.append((val, w))
    gen, order = zetas[0]
    for val, w in zetas[1:]:
        gen, order = _combine_torsion(gen, order, val, w)
    if order == 1:
        return 1, None, [0] * len(ltors)
    # discrete logs of each basis torsion value against the generator
    powtable = {}
    acc = gen.field.one()
    for k in range(order):
        powtable[acc.coords] = k
        acc = acc * gen
    dlogs = [powtable[val.coords] for val, _w in zetas]
    return order, gen, dlogs


def _refine_to_identity(ltors, dlogs, p, m):
    """Sublattice of Ltors whose products are exactly 1."""
    if not ltors:
        return []
    if p == 1:
        return hnf(ltors, m)
    j_count = len(ltors)
    row = [list(dlogs) + [p]]
    coeff_kernel = lattice_kernel(IntMatrix(row))
    out = []
    for vec in coeff_kernel:
        xs = vec[:j_count]
        combo = [0] * m
        for x, base in zip(xs, ltors):
            if x:
                combo = [c + x * b for c, b in zip(combo, base)]
        if any(combo):
            out.append(combo)
    return hnf(out, m)


def _lattice_box_points(H, bound, m):
    """All points of the full-rank HNF row lattice with max-norm <= bound.

    Row i of H pivots on column i, so coordinate i is final once x_i is
    chosen; the search prunes level by level.
    """
    pts = []

    def rec(i, partial):
        if i == m:
            pts.append(list(partial))
            return
        piv = H[i][i]
        lo = -(bound + partial[i]) // piv
        while partial[i] + lo * piv < -bound:
            lo += 1
        x = lo
        while partial[i] + x * piv <= bound:
            nxt = [c + x * h for c, h in zip(partial, H[i])]
            rec(i + 1, nxt)
            x += 1

    rec(0, [0] * m)
    return pts


_ENUM_CAP = 4000


def _extension_relation_search(ulist: UnitList):
    """Relations-to-torsion over a proper extension field.

    A candidate superset of the true lattice comes from intersecting
    torsion-relaxed residue kernels; its points inside the max-norm box
    are verified one by one.  Completeness is certified within the bound,
    and unconditionally when the candidate collapses onto the verified
    lattice.
    """
    field = ulist.field
    units = list(ulist.units)
    m = len(units)
    bound = ulist.relation_bound
    relax = _torsion_exponent_multiple(field.degree)
    budget = max(12, 4 * ulist.relation_bound)
    cand = None
    used = 0
    est = None
    prime_iter = primes_from(2)
    for q in prime_iter:
        if used >= budget:
            break
        ker = _prime_residue_kernel(field, units, q)
        if ker is None:
            continue
        used += 1
        relaxed = lattice_divide(ker, relax, m)
        cand = relaxed if cand is None else lattice_intersect(cand, relaxed, m)
        H = hnf(cand, m)
        assert len(H) == m, "residue kernels must have full rank"
        est = 1
        for i in range(m):
            est *= 2 * bound // H[i][i] + 1
        if used >= 2 and est <= _ENUM_CAP:
            break
    if cand is None or est is None or est > _ENUM_CAP:
        raise BoundExceeded(
            "relation search space not reduced within the prime budget")
    H = hnf(cand, m)
    verified = []
    for e in _lattice_box_points(H, bound, m):
        if not any(e):
            continue
        if is_root_of_unity(_product_power(units, e)) is not None:
            verified.append(e)
    ltors = hnf(verified, m)
    # try to upgrade bounded completeness to full certification
    fully = lattices_equal(ltors, hnf(cand, m), m)
    extra = 0
    while not fully and extra < 6 and used < budget:
        q = next(prime_iter)
        ker = _prime_residue_kernel(field, units, q)
        if ker is None:
            continue
        used += 1
        extra += 1
        cand = lattice_intersect(cand, lattice_divide(ker, relax, m), m)
        fully = lattices_equal(ltors, hnf(cand, m), m)
    return ltors, fully


def _compute_presentation(ulist: UnitList) -> _Presentation:
    field = ulist.field
    units = list(ulist.units)
    m = len(units)
    if m == 0:
        return _Presentation(0, [], [], 1, None)
    if field.degree == 1:
        l1, ltors = _rational_valuation_lattices(units)
        p, zeta, dlogs = _torsion_data(units, ltors)
        l1b = _refine_to_identity(ltors, dlogs, p, m)
        assert lattices_equal(l1b, l1, m)
        return _Presentation(m, l1, ltors, p, zeta)
    ltors, _fully = _extension_relation_search(ulist)
    p, zeta, dlogs = _torsion_data(units, ltors)
    l1 = _refine_to_identity(ltors, dlogs, p, m)
    return _Presentation(m, l1, ltors, p, zeta)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def exponent_lattice(units: UnitList) -> list[list[int]]:
    """Basis rows of the lattice {e : prod units^e = 1}.

    Every returned relation multiplies out to the identity exactly (a root
    of unity in particular).
    """
    if len(units) == 0:
        raise ValueError("units must be nonempty")
    return [list(r) for r in units.presentation().L1]


def torsion_order(units: UnitList):
    """(order, generator) of the torsion subgroup of the generated group."""
    if len(units) == 0:
        raise ValueError("units must be nonempty")
    pres = units.presentation()
    return pres.torsion_order, pres.torsion_generator


class UnitBasis:
    """Free-basis data: torsion order p, generator, index subset I with
    {u_i^p : i in I} a basis of the p-power subgroup, and the relation
    lattice it was certified against."""

    __slots__ = ("torsion_order", "torsion_generator", "basis_indices",
                 "exponent_lattice", "index_D", "units")

    def __init__(self, torsion_order, torsion_generator, basis_indices,
                 exponent_lattice_rows, index_D, units):
        self.torsion_order = torsion_order
        self.torsion_generator = torsion_generator
        self.basis_indices = tuple(basis_indices)
        self.exponent_lattice = [list(r) for r in exponent_lattice_rows]
        self.index_D = index_D
        self.units = units

    def basis_units(self):
        return [self.units.units[i] for i in self.basis_indices]

    def power_units(self):
        p = self.torsion_order
        return [u ** p for u in self.basis_units()]

    def __repr__(self):
        return (f"UnitBasis(p={self.torsion_order}, I={list(self.basis_indices)}, "
                f"D={self.index_D})")


def free_basis(units: UnitList) -> UnitBasis:
    """Greedy ascending index subset I with {u_i^p : i in I} a free basis
    of the subgroup generated by all p-th powers.

    Raises AllTorsion when no unit has infinite order and
    BasisSelectionError when no index subset generates (the caller may
    recombine generators and retry).
    """
    if len(units) == 0:
        raise ValueError("units must be nonempty")
    pres = units.presentation()
    m = pres.m
    p = pres.torsion_order
    rank_rel = len(hnf(pres.Ltors, m))
    if rank_rel == m:
        raise AllTorsion("every unit is a root of unity")
    chosen = []
    span = [list(r) for r in pres.Ltors]
    for i in range(m):
        e = [1 if j == i else 0 for j in range(m)]
        if len(hnf(span + [e], m)) > len(hnf(span, m)):
            chosen.append(i)
            span.append(e)
    # the chosen p-th powers must generate the full p-power subgroup
    p_rows_I = [[p if j == i else 0 for j in range(m)] for i in chosen]
    p_rows_all = [[p if j == i else 0 for j in range(m)] for i in range(m)]
    l1 = [list(r) for r in pres.L1]
    lhs = lattice_sum(p_rows_I, l1, m)
    rhs = lattice_sum(p_rows_all, l1, m)
    if not lattices_equal(lhs, rhs, m):
        raise BasisSelectionError(
            "no ascending index subset generates the power subgroup")
    D = lattice_index_in_zm(rhs, m)
    assert D >= 1 and D <= p ** m
    return UnitBasis(p, pres.torsion_generator, chosen, pres.L1, D, units)


def express_in(units: UnitList, g: FieldElement):
    """Exponent vector e with prod units^e = g, or None when g is outside."""
    m = len(units)
    for idx, u in enumerate(units.units):
        if u == g:
            return [1 if j == idx else 0 for j in range(m)]
    if g.is_one:
        return [0] * m
    if m == 0:
        return None
    # with g first, the first HNF pivot (when on column 0) is the least
    # positive exponent c with g^c inside the group; c = 1 gives the answer
    ext = UnitList(units.field, [g] + list(units.units), units.relation_bound)
    l1 = ext.presentation().L1
    h = hnf(l1, m + 1)
    if not h:
        return None
    row = h[0]
    piv = next(i for i, v in enumerate(row) if v)
    if piv != 0 or row[0] != 1:
        return None
    out = [-x for x in row[1:]]
    assert _product_power(list(units.units), out) == g
    return out


class Complement:
    """T with T intersect G = 1, T x G of finite index d in the ambient."""

    __slots__ = ("generators", "index", "ambient", "_trows", "_zrows", "_basis")

    def __init__(self, generators, index, ambient, trows, zrows, basis):
        self.generators = tuple(generators)
        self.index = index
        self.ambient = ambient
        self._trows = trows
        self._zrows = zrows
        self._basis = basis

    def __repr__(self):
        return f"Complement(rank={len(self.generators)}, d={self.index})"


def complement_subgroup(ambient: UnitList, G: UnitBasis) -> Complement:
    """Lift of the free part of ambient/G, with the index of T*G.

    Follows the quotient construction: write ambient/G as a product of a
    finite part and a free part, lift free generators, and compute the
    index lattice-theoretically.
    """
    pres = ambient.presentation()
    M = pres.m
    p = G.torsion_order
    zrows = []
    for u in G.basis_units():
        vec = express_in(ambient, u)
        if vec is None:
            raise NotInLattice("basis unit does not lie in the ambient group")
        zrows.append([p * x for x in vec])
    l1 = [list(r) for r in pres.L1]
    _torsion, free = snf_quotient(zrows + l1, M)
    tgens = [_product_power(list(ambient.units), row) for row in free]
    d = lattice_index_in_zm(free + zrows + l1, M)
    if d == 0:
        raise NotInLattice("complement construction degenerated")
    # T and G intersect trivially: (T + L1) meet (Z + L1) = L1
    lhs = lattice_intersect(lattice_sum(free, l1, M),
                            lattice_sum(zrows, l1, M), M)
    assert lattices_equal(lhs, hnf(l1, M), M)
    return Complement(tgens, d, ambient, free, zrows, G)


def decompose_power(nu: FieldElement, d: int, T: Complement, G: UnitBasis):
    """Exact decomposition nu^d = kappa * prod z_i^{q_i} with kappa in T.

    The exponents are unique because G's power basis is free and meets T
    trivially; the result is re-verified by exact multiplication.
    """
    ambient = T.ambient
    vec = express_in(ambient, nu)
    if vec is None:
        raise NotInProduct("the element does not lie in the ambient group")
    target = [d * x for x in vec]
    rows = [list(r) for r in T._zrows] + [list(r) for r in T._trows] \
        + [list(r) for r in ambient.presentation().L1]
    sol = solve_left(rows, target)
    if sol is None:
        raise NotInProduct("power does not decompose over T x G")
    nz = len(T._zrows)
    nt = len(T._trows)
    q_exps = sol[:nz]
    t_exps = sol[nz:nz + nt]
    kappa = ambient.field.one()
    for g, e in zip(T.generators, t_exps):
        if e:
            kappa = kappa * g ** e
    check = kappa
    for z, e in zip(G.power_units(), q_exps):
        if e:
            check = check * z ** e
    assert check == nu ** d, "decomposition failed verification"
    return kappa, list(q_exps)


def abelian_structure(units: UnitList):
    """Explicit C_w x Z^k presentation of the generated group.

    Returns (torsion, free) where torsion is None or (w, element, row) and
    free is a list of (element, row); rows are exponent vectors over the
    unit list.
    """
    pres = units.presentation()
    m = pres.m
    torsion_parts, free = snf_quotient([list(r) for r in pres.L1], m)
    assert len(torsion_parts) <= 1, "unit-group torsion must be cyclic"
    tor = None
    if torsion_parts:
        w, row = torsion_parts[0]
        elt = _product_power(list(units.units), row)
        assert is_root_of_unity(elt) == w
        tor = (w, elt, row)
    frees = [(_product_power(list(units.units), row), row) for row in free]
    return tor, frees
