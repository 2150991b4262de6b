"""Separation certificates for abelian unipotent-free subgroups.

Given a finitely generated matrix group, an abelian unipotent-free
subgroup H, and an element h outside H, this module produces a finite
quotient (a tuple of entrywise residue maps) under which the image of h
avoids the image of H, and verifies the result by exhaustive closure.

The construction triangularizes H, splits off torsion cosets, and runs a
descending induction on the free rank: at each level a pivot column is
chosen whose last generator entry has infinite order, the pivot units are
normalized so that non-basis generators carry pivot entry exactly 1, and
the target's pivot entry is decomposed over a complement-times-basis
product.  Divisibility of the exponents by the complement index routes
each torsion coset either to a power-residue map (case one) or to a
recursive call on strictly smaller rank followed by a product map
(case two).  Every certificate is re-verified before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import gcd

from .errors import (
    CosetMembership,
    FallbackExhausted,
    InSubgroup,
    MixedFields,
    NotApplicable,
    NotCommuting,
    NotInLattice,
    NotUnipotentFree,
    ResidueUndefined,
)
from .exact import (
    IntPoly,
    factorint,
    hnf,
    int_det,
    lattice_index_in_zm,
    lattice_intersect,
    lcm,
    primes_from,
    qp_clear_denominators,
    qp_trim,
    smith_normal_form,
    snf_quotient,
    solve_left,
    IntMatrix,
    int_matrix_inverse,
)
from .nfield import (
    FieldElement,
    GroupDescription,
    Matrix,
    NumberField,
    extend_by_rational_root,
    field_torsion,
    is_root_of_unity,
    pairwise_commuting,
    triangularize_abelian,
)
from .residue import (
    FiniteRing,
    HomDescription,
    ResidueMap,
    apply_matrix,
    closure_product,
)
from .errors import BasisSelectionError, NeedsFieldExtension
from .units import (
    Complement,
    UnitBasis,
    UnitList,
    complement_subgroup,
    decompose_power,
    express_in,
    free_basis,
)


@dataclass
class Config:
    relation_bound: int = 8
    search_limit: int = 100_000
    closure_cap: int = 10 ** 6
    fast_path: bool = False
    fast_path_limit: int = 97
    jobs: int = 1
    auto_extend: bool = True


# ---------------------------------------------------------------------------
# small predicates
# ---------------------------------------------------------------------------

def is_unipotent(M: Matrix) -> bool:
    """True iff (M - I)^n vanishes exactly."""
    n = M.n
    shifted = M.sub(Matrix.identity(M.field, n))
    acc = shifted
    for _ in range(n - 1):
        acc = Matrix(M.field, [[sum((acc.entries[i][k] * shifted.entries[k][j]
                                     for k in range(n)), M.field.zero())
                                for j in range(n)] for i in range(n)])
    return all(e.is_zero for row in acc.entries for e in row)


def _diagonal_relation_lattice(gens, field, bound):
    """Joint lattice {e : prod g^e has all diagonal entries equal to 1}."""
    m = len(gens)
    n = gens[0].n if gens else 0
    rows = None
    for s in range(n):
        ul = UnitList(field, [g.entries[s][s] for g in gens], bound)
        ls = [list(r) for r in ul.presentation().L1]
        rows = ls if rows is None else lattice_intersect(rows, ls, m)
    return rows if rows is not None else []


def check_unipotent_free(H: GroupDescription, config: Config | None = None):
    """(True, None) or (False, witness) for a commuting subgroup.

    The subgroup is triangularized; its unipotent part is the kernel of
    the diagonal-character map, generated by the images of the kernel
    lattice basis.  Any non-identity image is the witness.
    """
    config = config or Config()
    mats = H.matrices()
    if not mats:
        return True, None
    if not pairwise_commuting(mats):
        raise NotCommuting("subgroup generators do not commute")
    P, HT = triangularize_abelian(H)
    rows = _diagonal_relation_lattice(HT.matrices(), H.field, config.relation_bound)
    tmats = HT.matrices()
    for e in rows:
        w = Matrix.identity(H.field, H.n)
        for g, k in zip(tmats, e):
            if k:
                w = w * g ** k
        if not w.is_identity:
            witness = P * w * P.inverse()
            assert is_unipotent(witness)
            return False, witness
    return True, None


def _member_of_triangular_abelian(gens, target: Matrix, field, bound) -> bool:
    """Exact membership in a triangular abelian unipotent-free group."""
    if not gens:
        return target.is_identity
    if not target.is_upper_triangular:
        return False
    m = len(gens)
    n = target.n
    offset = [0] * m
    lattice = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    for s in range(n):
        lam = [g.entries[s][s] for g in gens]
        ul = UnitList(field, lam, bound)
        ls = [list(r) for r in ul.presentation().L1]
        e0 = express_in(ul, target.entries[s][s])
        if e0 is None:
            return False
        # intersect the affine solution sets column by column
        diff = [b - a for a, b in zip(offset, e0)]
        stacked = [list(r) for r in lattice] + [[-x for x in r] for r in ls]
        sol = solve_left(stacked, diff) if stacked else ([] if not any(diff) else None)
        if sol is None:
            return False
        move = [0] * m
        for coef, row in zip(sol[:len(lattice)], lattice):
            if coef:
                move = [a + coef * b for a, b in zip(move, row)]
        offset = [a + b for a, b in zip(offset, move)]
        lattice = lattice_intersect(lattice, ls, m)
    w = Matrix.identity(field, n)
    for g, k in zip(gens, offset):
        if k:
            w = w * g ** k
    return w == target


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

class SeparationCertificate:
    """Serialized finite-quotient data with a machine-checkable witness."""

    __slots__ = ("field", "n", "conjugator", "conjugator_inv", "maps",
                 "gamma_images", "h_generator_images", "h_image",
                 "closure_order", "witness", "trace")

    def __init__(self, field, n, conjugator, conjugator_inv, maps,
                 gamma_images, h_generator_images, h_image, closure_order,
                 witness, trace=None):
        self.field = field
        self.n = n
        self.conjugator = conjugator
        self.conjugator_inv = conjugator_inv
        self.maps = tuple(maps)
        self.gamma_images = dict(gamma_images)
        self.h_generator_images = dict(h_generator_images)
        self.h_image = h_image
        self.closure_order = closure_order
        self.witness = witness
        self.trace = trace or []

    def hom(self) -> HomDescription:
        return HomDescription(self.maps)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        def frac(x):
            return str(x)

        def felt(e):
            return [frac(c) for c in e.coords]

        def mat(M):
            return [[felt(e) for e in row] for row in M.entries]

        def finmat(fm):
            return [[list(entry) for entry in row] for row in fm]

        def tup(images):
            return [finmat(fm) for fm in images]

        return {
            "format": "sepcert.certificate/1",
            "field": {"minimal_poly": [int(c) for c in self.field.minimal_poly.coeffs]},
            "n": self.n,
            "conjugator": mat(self.conjugator),
            "conjugator_inv": mat(self.conjugator_inv),
            "maps": [m.describe() for m in self.maps],
            "gamma_images": {k: tup(v) for k, v in sorted(self.gamma_images.items())},
            "h_generator_images": {k: tup(v) for k, v in
                                   sorted(self.h_generator_images.items())},
            "h_image": tup(self.h_image),
            "closure_order": self.closure_order,
            "witness": self.witness,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SeparationCertificate":
        field = NumberField(IntPoly(data["field"]["minimal_poly"]))
        n = int(data["n"])

        def felt(coords):
            return field.element([Fraction(c) for c in coords])

        def mat(rows):
            return Matrix(field, [[felt(e) for e in row] for row in rows])

        def finmat(rows):
            return tuple(tuple(tuple(int(c) for c in entry) for entry in row)
                         for row in rows)

        def tup(images):
            return tuple(finmat(fm) for fm in images)

        maps = []
        for m in data["maps"]:
            ring = FiniteRing(int(m["modulus"]), IntPoly(m["defining_poly"]))
            maps.append(ResidueMap(field, ring, set(m.get("denominators", ()))))
        return cls(
            field, n, mat(data["conjugator"]), mat(data["conjugator_inv"]),
            maps,
            {k: tup(v) for k, v in data["gamma_images"].items()},
            {k: tup(v) for k, v in data["h_generator_images"].items()},
            tup(data["h_image"]),
            int(data["closure_order"]),
            data.get("witness", ""),
        )


class Verification:
    """Outcome of verify_certificate: truthy with a diagnostic reason."""

    __slots__ = ("ok", "reason")

    def __init__(self, ok: bool, reason: str = ""):
        self.ok = ok
        self.reason = reason

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return f"Verification(ok={self.ok}, reason={self.reason!r})"


@dataclass
class InductionState:
    """Per-level record of the rank induction (pivot data and normalization)."""

    generators: list
    pivot: int
    torsion_order: int
    basis_indices: tuple
    index_D: int
    depth: int
    normalized: list | None = None
    shift_exponents: dict | None = None
    complement: Complement | None = None
    subgroup_index: int = 0
    case_log: list = dc_field(default_factory=list)
    context: "object | None" = None


class _Ctx:
    """Working data shared across one separation query."""

    __slots__ = ("field", "n", "gamma", "hgens", "conjugator", "conjugator_inv",
                 "avoid", "config", "trace", "initial_rank")

    def __init__(self, field, n, gamma, hgens, conjugator, conjugator_inv,
                 avoid, config):
        self.field = field
        self.n = n
        self.gamma = gamma
        self.hgens = hgens
        self.conjugator = conjugator
        self.conjugator_inv = conjugator_inv
        self.avoid = avoid
        self.config = config
        self.trace = []
        self.initial_rank = None


def _denominator_primes(mats) -> set[int]:
    out = set()
    for M in mats:
        d = M.denominator()
        if d > 1:
            out |= set(factorint(d))
    return out


def _admissible_primes(ctx):
    guard = abs(ctx.field.discriminant)
    for p in primes_from(2):
        if p in ctx.avoid:
            continue
        if guard > 1 and guard % p == 0:
            continue
        yield p


def _build_certificate(ctx, maps, h_conj, witness_note):
    """Assemble and closure-check a certificate from residue maps."""
    seen = set()
    ordered = []
    for m in maps:
        key = (m.target.modulus, m.target.defining_poly)
        if key not in seen:
            seen.add(key)
            ordered.append(m)
    hom = HomDescription(ordered)
    rings = hom.rings()
    gamma_images = {}
    for label, g in ctx.gamma:
        gamma_images[label] = apply_matrix(hom, g)
    h_generator_images = {}
    for label, g in ctx.hgens:
        h_generator_images[label] = apply_matrix(hom, g)
    h_image = apply_matrix(hom, h_conj)
    closure = closure_product(rings, list(h_generator_images.values()),
                              ctx.config.closure_cap, n=ctx.n)
    if h_image in closure:
        return None
    return SeparationCertificate(
        ctx.field, ctx.n, ctx.conjugator, ctx.conjugator_inv, ordered,
        gamma_images, h_generator_images, h_image, len(closure),
        witness_note, trace=ctx.trace)


# ---------------------------------------------------------------------------
# Borel-path separation
# ---------------------------------------------------------------------------

def separate_from_borel(Gamma: GroupDescription, h: Matrix,
                        subgroup=None, config: Config | None = None,
                        _ctx: "_Ctx | None" = None) -> SeparationCertificate:
    """Separate a matrix with a nonzero strictly-lower entry from the
    upper-triangular part.

    The residue map keeps upper-triangular images upper triangular while
    the chosen lower entry survives as a unit, so the closure of the
    subgroup images cannot contain the image of h.
    """
    config = config or Config()
    if h.is_upper_triangular:
        raise NotApplicable("h is upper triangular")
    if _ctx is None:
        hgens = subgroup if subgroup is not None else \
            [(l, m) for l, m in Gamma.generators if m.is_upper_triangular]
        avoid = _denominator_primes(
            [m for _, m in Gamma.generators]
            + [m.inverse() for _, m in Gamma.generators]
            + [m for _, m in hgens] + [m.inverse() for _, m in hgens]
            + [h, h.inverse()])
        eye = Matrix.identity(Gamma.field, Gamma.n)
        _ctx = _Ctx(Gamma.field, Gamma.n, list(Gamma.generators), list(hgens),
                    eye, eye, avoid, config)
    ctx = _ctx
    entry = None
    for i in range(h.n):
        for j in range(i):
            if not h.entries[i][j].is_zero:
                entry = h.entries[i][j]
                break
        if entry is not None:
            break
    norm_num = abs(entry.norm().numerator)
    for p in _admissible_primes(ctx):
        if norm_num % p == 0:
            continue
        try:
            rmap = ResidueMap(ctx.field, FiniteRing(p, ctx.field.minimal_poly),
                              ctx.avoid)
            cert = _build_certificate(
                ctx, [rmap], h,
                "image of h has a nonzero strictly-lower entry; the closure "
                "of the subgroup images is upper triangular")
        except (ResidueUndefined, ValueError):
            continue
        if cert is not None:
            return cert
    raise FallbackExhausted("no admissible prime separates h from the Borel part")


# ---------------------------------------------------------------------------
# diagonal-character splitting
# ---------------------------------------------------------------------------

def split_S_plus(S: GroupDescription, config: Config | None = None):
    """(S+ generators, free-part generators of S1, coset representatives).

    S+ is the kernel of the diagonal-character map; S1 is the preimage of
    the free part of the character image, with representatives of its
    cosets in S enumerated from the torsion part.
    """
    config = config or Config()
    mats = S.matrices()
    field, n = S.field, S.n
    if not mats:
        return [], [], [Matrix.identity(field, n)]
    for m in mats:
        if not m.is_upper_triangular:
            raise NotApplicable("split_S_plus expects upper-triangular generators")
    mcount = len(mats)
    rows = _diagonal_relation_lattice(mats, field, config.relation_bound)

    def word(e):
        w = Matrix.identity(field, n)
        for g, k in zip(mats, e):
            if k:
                w = w * g ** k
        return w

    s_plus = [w for w in (word(e) for e in rows) if not w.is_identity]
    torsion, free = snf_quotient([list(r) for r in rows], mcount)
    s1 = [w for w in (word(r) for r in free) if not w.is_identity]
    reps = [Matrix.identity(field, n)]
    for order, row in torsion:
        t = word(row)
        new = []
        for r in reps:
            acc = r
            new.append(acc)
            for _ in range(order - 1):
                acc = acc * t
                new.append(acc)
        reps = new
    return s_plus, s1, reps


# ---------------------------------------------------------------------------
# claim-level machinery
# ---------------------------------------------------------------------------

def _rebase_to_free(ctx, gens):
    """Replace generators by a free generating set of the same group."""
    gens = [g for g in gens if not g.is_identity]
    if not gens:
        return []
    m = len(gens)
    rows = _diagonal_relation_lattice(gens, ctx.field, ctx.config.relation_bound)
    if not rows:
        return gens
    torsion, free = snf_quotient([list(r) for r in rows], m)
    assert not torsion, "free-part generators must span a torsion-free group"
    out = []
    for row in free:
        w = Matrix.identity(ctx.field, ctx.n)
        for g, k in zip(gens, row):
            if k:
                w = w * g ** k
        if not w.is_identity:
            out.append(w)
    return out


def _recombine_for_pivot(ctx, gens, s):
    """Unimodular change of generators so an index subset of pivot units
    powers to a basis of the pivot power subgroup."""
    m = len(gens)
    field = ctx.field
    lam = [g.entries[s][s] for g in gens]
    ul = UnitList(field, lam, ctx.config.relation_bound)
    pres = ul.presentation()
    p = pres.torsion_order
    from .exact import lattice_divide
    kernel = lattice_divide([list(r) for r in pres.L1], p, m)
    if not kernel:
        return gens
    D_, U_, V_ = smith_normal_form(IntMatrix([list(r) for r in kernel]))
    vinv = int_matrix_inverse(V_.to_lists())
    k = len(kernel)
    order = list(range(k, m)) + list(range(k))  # free positions first
    out = []
    for j in order:
        w = Matrix.identity(field, ctx.n)
        for g, e in zip(gens, vinv[j]):
            if e:
                w = w * g ** e
        out.append(w)
    return out


def _pivot_column(gens):
    lam = gens[-1].diagonal()
    for s, entry in enumerate(lam):
        if is_root_of_unity(entry) is None:
            return s
    raise NotInLattice("last generator has torsion diagonal only")


def _power_basis_for(sub_units: UnitList, p: int, tg) -> UnitBasis:
    """UnitBasis wrapper for <u^p : u in sub_units> with an outer torsion order."""
    return UnitBasis(p, tg, tuple(range(len(sub_units.units))), [], 1, sub_units)


def normalize_generators(state: InductionState) -> InductionState:
    """Fill in the normalized generators: p-th powers on the basis set, and
    pivot-trivialized combinations elsewhere.

    The exponents come from an exact discrete logarithm in the pivot-unit
    presentation; the pivot entry of every non-basis normalized generator
    is checked to be exactly 1.
    """
    ctx = state.context
    gens = state.generators
    s = state.pivot
    p = state.torsion_order
    I = list(state.basis_indices)
    D = state.index_D
    m = len(gens)
    field = ctx.field
    lam = [g.entries[s][s] for g in gens]
    ul = UnitList(field, lam, ctx.config.relation_bound)
    l1 = [list(r) for r in ul.presentation().L1]
    normalized = [None] * m
    shift = {}
    for i in I:
        normalized[i] = gens[i] ** p
    rows = [[p if j == i else 0 for j in range(m)] for i in I] + l1
    for t in range(m):
        if t in I:
            continue
        target = [D if j == t else 0 for j in range(m)]
        sol = solve_left(rows, target)
        if sol is None:
            raise NotInLattice(
                "pivot power does not lie in the basis power subgroup")
        t_exps = sol[:len(I)]
        w = Matrix.identity(field, ctx.n)
        for i, ti in zip(I, t_exps):
            if ti:
                w = w * gens[i] ** (-p * ti)
        gbar = w * gens[t] ** D
        assert gbar.entries[s][s].is_one, "pivot entry must normalize to 1"
        normalized[t] = gbar
        shift[t] = list(t_exps)
    state.normalized = normalized
    state.shift_exponents = shift
    # index of the normalized subgroup: p^|I| * D^(m - |I|), certified by SNF
    erows = []
    for i in range(m):
        if i in I:
            erows.append([p if j == i else 0 for j in range(m)])
        else:
            row = [0] * m
            row[i] = D
            for iidx, ti in zip(I, shift[i]):
                row[iidx] -= p * ti
            erows.append(row)
    idx = lattice_index_in_zm(erows, m)
    bound = p ** len(I) * D ** (m - len(I))
    assert idx == abs(int_det(erows)) == bound and idx <= bound
    state.subgroup_index = idx
    return state


def _quotient_reps(erows, m):
    """Ascending representatives of Z^m modulo the row lattice."""
    D_, U_, V_ = smith_normal_form(IntMatrix([list(r) for r in erows]))
    vinv = int_matrix_inverse(V_.to_lists())
    invariants = [D_.entries[j][j] for j in range(m)]
    assert all(d > 0 for d in invariants)
    reps = [[0] * m]
    for j, d in enumerate(invariants):
        if d == 1:
            continue
        new = []
        for r in reps:
            for a in range(d):
                new.append([x + a * y for x, y in zip(r, vinv[j])])
        reps = new
    return reps


def _tuple_order(rings, tup, cap=10 ** 6):
    identity = tuple(r.mat_identity(len(tup[0])) for r in rings)
    acc = tup
    k = 1
    while acc != identity:
        acc = tuple(r.mat_mul(x, y) for r, x, y in zip(rings, acc, tup))
        k += 1
        if k > cap:
            raise FallbackExhausted("image order exceeded the cap")
    return k


def separate_case1(state: InductionState, h: Matrix, nu_decomposition):
    """Power-residue map for the complement index; sound when the index
    fails to divide some basis exponent."""
    ctx = state.context
    kappa, q_exps = nu_decomposition
    d = state.complement.index
    assert any(q % d for q in q_exps)
    from .chevalley import power_residue_map
    _cm, hom = power_residue_map(ctx.field, state.complement.ambient, d,
                                 avoid=set(ctx.avoid),
                                 search_limit=ctx.config.search_limit)
    return list(hom.components)


def separate_case2(state: InductionState, h: Matrix, nu_decomposition,
                   recursion):
    """Shift the target by normalized basis powers, recurse on the
    non-basis generators, then adjoin a power-residue map for d times the
    exponent of the recursive images of the basis generators."""
    ctx = state.context
    _kappa, q_exps = nu_decomposition
    d = state.complement.index
    assert all(q % d == 0 for q in q_exps)
    I = list(state.basis_indices)
    hbar = h
    for i, q in zip(I, q_exps):
        e = q // d
        if e:
            hbar = state.normalized[i] ** (-e) * hbar
    assert not hbar.is_identity
    sub_gens = [state.normalized[t] for t in range(len(state.generators))
                if t not in set(I)]
    hint = [state.normalized[i] for i in I]
    sub_maps = recursion(ctx, sub_gens, hbar, state.depth + 1, hint)
    hom = HomDescription(sub_maps)
    rings = hom.rings()
    x = 1
    for i in I:
        images = apply_matrix(hom, state.normalized[i])
        x = lcm(x, _tuple_order(rings, images))
    ell = d * x
    from .chevalley import power_residue_map
    _cm, phi_ell = power_residue_map(ctx.field, state.complement.ambient, ell,
                                     avoid=set(ctx.avoid),
                                     search_limit=ctx.config.search_limit)
    return sub_maps + list(phi_ell.components)


def _matrix_order_mod(ring, img, cap=100_000):
    eye = ring.mat_identity(len(img))
    acc = img
    k = 1
    while acc != eye:
        acc = ring.mat_mul(acc, img)
        k += 1
        if k > cap:
            return None
    return k


def _base_level_map(ctx, target: Matrix, order_hint=()):
    """A residue map whose image of the target is not the identity.

    When hint matrices are supplied, the candidate primes are ranked by
    the least common multiple of their image orders; keeping those orders
    small keeps the exponent of the enclosing power-residue map small.
    """
    assert not target.is_identity
    best = None
    candidates = 0
    for p in _admissible_primes(ctx):
        try:
            rmap = ResidueMap(ctx.field, FiniteRing(p, ctx.field.minimal_poly),
                              ctx.avoid)
            img = rmap.matrix(target)
        except (ResidueUndefined, ValueError):
            continue
        if img == rmap.target.mat_identity(target.n):
            continue
        if not order_hint:
            return rmap
        x = 1
        for hm in order_hint:
            o = _matrix_order_mod(rmap.target, rmap.matrix(hm))
            if o is None:
                x = None
                break
            x = lcm(x, o)
        candidates += 1
        if x is not None and (best is None or (x, p) < best[0]):
            best = ((x, p), rmap)
        if candidates >= 12:
            break
    if best is not None:
        return best[1]
    raise FallbackExhausted("no admissible prime distinguishes the target")


def _ambient_for_level(ctx, lam, nu, extra=()):
    """The explicitly generated unit subgroup the level works inside:
    the field torsion, the pivot-column units, and the target's pivot
    entry.  The induction argument only ever manipulates pivot-column
    values, and a lean ambient keeps the certified moduli small."""
    field = ctx.field
    items = []
    zeta = field_torsion(field)[1]
    if not zeta.is_one:
        items.append(zeta)
    items.extend(lam)
    items.append(nu)
    items.extend(extra)
    dedup = []
    for e in items:
        if e.is_zero or e.is_one:
            continue
        if e not in dedup:
            dedup.append(e)
    return UnitList(field, dedup, ctx.config.relation_bound)


def _claim_separate(ctx, free_gens, h_cur: Matrix, depth, order_hint=(),
                    extra_ambient=()):
    """Residue maps whose product separates h_cur from <free_gens>.

    Implements the rank induction; the returned maps are verified at this
    level by closing the generator images and checking the target stays
    outside.
    """
    gens = _rebase_to_free(ctx, free_gens)
    m = len(gens)
    if ctx.initial_rank is None:
        ctx.initial_rank = m
    assert depth <= max(ctx.initial_rank, 1), "recursion must shrink the rank"
    if m == 0:
        if h_cur.is_identity:
            raise CosetMembership("target collapses into the subgroup")
        return [_base_level_map(ctx, h_cur, order_hint)]

    s = _pivot_column(gens)
    lam = [g.entries[s][s] for g in gens]
    basis = None
    for _attempt in range(2):
        ul = UnitList(ctx.field, lam, ctx.config.relation_bound)
        try:
            basis = free_basis(ul)
            break
        except BasisSelectionError:
            gens = _recombine_for_pivot(ctx, gens, s)
            s = _pivot_column(gens)
            lam = [g.entries[s][s] for g in gens]
    if basis is None:
        raise BasisSelectionError("generator recombination did not converge")

    state = InductionState(
        generators=gens, pivot=s, torsion_order=basis.torsion_order,
        basis_indices=basis.basis_indices, index_D=basis.index_D,
        depth=depth, context=ctx)
    normalize_generators(state)

    I = list(state.basis_indices)
    p = state.torsion_order
    D = state.index_D
    nu_h = h_cur.entries[s][s]
    ambient = _ambient_for_level(ctx, lam, nu_h, extra_ambient)
    sub_units = UnitList(ctx.field, [lam[i] for i in I], ctx.config.relation_bound)
    gbasis = _power_basis_for(sub_units, p, basis.torsion_generator)
    complement = complement_subgroup(ambient, gbasis)
    state.complement = complement
    d = complement.index

    erows = []
    for i in range(m):
        if i in I:
            erows.append([p if j == i else 0 for j in range(m)])
        else:
            row = [0] * m
            row[i] = D
            for iidx, ti in zip(I, state.shift_exponents[i]):
                row[iidx] -= p * ti
            erows.append(row)
    reps = _quotient_reps(erows, m)

    maps = []
    case1_maps = None
    for rv in reps:
        w = Matrix.identity(ctx.field, ctx.n)
        for g, k in zip(gens, rv):
            if k:
                w = w * g ** k
        target = w.inverse() * h_cur
        if _member_of_triangular_abelian(state.normalized, target, ctx.field,
                                         ctx.config.relation_bound):
            raise CosetMembership(
                "target lies in the subgroup generated at this level")
        nu = target.entries[s][s]
        kappa, q_exps = decompose_power(nu, d, complement, gbasis)
        if any(q % d for q in q_exps):
            state.case_log.append({"rep": rv, "case": 1, "q": list(q_exps), "d": d})
            if case1_maps is None:
                case1_maps = separate_case1(state, target, (kappa, q_exps))
            maps.extend(case1_maps)
        else:
            state.case_log.append({"rep": rv, "case": 2, "q": list(q_exps), "d": d})
            maps.extend(separate_case2(state, target, (kappa, q_exps),
                                       _claim_separate))
    ctx.trace.append(state)

    # level contract: the product of the maps separates h_cur from <gens>
    seen = set()
    hom_maps = []
    for mp in maps:
        key = (mp.target.modulus, mp.target.defining_poly)
        if key not in seen:
            seen.add(key)
            hom_maps.append(mp)
    hom = HomDescription(hom_maps)
    rings = hom.rings()
    gen_images = [apply_matrix(hom, g) for g in gens]
    closure = closure_product(rings, gen_images, ctx.config.closure_cap, n=ctx.n)
    if apply_matrix(hom, h_cur) in closure:
        if extra_ambient:
            raise FallbackExhausted(
                "claim-level verification failed after ambient enlargement")
        enlarged = [nu_h, nu_h.inverse()]
        return _claim_separate(ctx, free_gens, h_cur, depth, order_hint,
                               extra_ambient=tuple(enlarged))
    return hom_maps


# ---------------------------------------------------------------------------
# finite-index lifting
# ---------------------------------------------------------------------------

def finite_index_lift(H: GroupDescription, Hprime_certs, reps, h: Matrix,
                      hprime_gens=None, config: Config | None = None,
                      _ctx=None) -> SeparationCertificate:
    """Product certificate over the cosets of a finite-index subgroup.

    For each representative r there must be a certificate separating
    r^-1 h from the subgroup; the product homomorphism then separates h
    from the full group.
    """
    config = config or Config()
    if hprime_gens is not None:
        for r in reps:
            target = r.inverse() * h
            if _member_of_triangular_abelian(hprime_gens, target, H.field,
                                             config.relation_bound):
                raise CosetMembership("a coset representative absorbs h")
    maps = []
    for cert in Hprime_certs:
        maps.extend(cert.maps)
    if _ctx is None:
        eye = Matrix.identity(H.field, H.n)
        avoid = _denominator_primes(
            [m for _, m in H.generators] + [m.inverse() for _, m in H.generators]
            + [h, h.inverse()])
        _ctx = _Ctx(H.field, H.n, list(H.generators), list(H.generators),
                    eye, eye, avoid, config)
    cert = _build_certificate(
        _ctx, maps, h,
        "image of h avoids the closure of the subgroup generator images")
    if cert is None:
        raise FallbackExhausted("lifted product certificate failed the closure check")
    return cert


# ---------------------------------------------------------------------------
# the main pipeline
# ---------------------------------------------------------------------------

def _fast_path(ctx, h_conj):
    for p in _admissible_primes(ctx):
        if p > ctx.config.fast_path_limit:
            return None
        try:
            rmap = ResidueMap(ctx.field, FiniteRing(p, ctx.field.minimal_poly),
                              ctx.avoid)
            cert = _build_certificate(
                ctx, [rmap], h_conj,
                "image of h avoids the closure of the subgroup generator images")
        except (ResidueUndefined, ValueError):
            continue
        if cert is not None:
            return cert
    return None


def separate_abelian(Gamma: GroupDescription, H: GroupDescription, h: Matrix,
                     config: Config | None = None) -> SeparationCertificate:
    """Produce a verified certificate that h lies outside H inside Gamma.

    H must be abelian and unipotent-free; h is trusted to be a word in
    Gamma.  The pipeline triangularizes H (extending the field from the
    rationals once when an eigenvalue requires it), delegates to the
    Borel path when the conjugated h is not upper triangular, and runs
    the split-and-induct machinery otherwise.
    """
    config = config or Config()
    if H.field != Gamma.field or H.n != Gamma.n:
        raise MixedFields("subgroup and group live in different settings")
    if h.field != Gamma.field or h.n != Gamma.n:
        raise MixedFields("target lives in a different setting")
    if not pairwise_commuting(H.matrices()):
        raise NotCommuting("H is not abelian")

    try:
        P, HT = triangularize_abelian(H)
    except NeedsFieldExtension as exc:
        if not (config.auto_extend and Gamma.field.degree == 1):
            raise
        ints, _ = qp_clear_denominators(qp_trim([Fraction(c) for c in exc.factor]))
        _K2, embed = extend_by_rational_root(IntPoly(ints))
        Gamma = embed.group(Gamma)
        H = embed.group(H)
        h = embed.matrix(h)
        P, HT = triangularize_abelian(H)

    field, n = Gamma.field, Gamma.n
    ok, witness = _unipotent_check_triangular(H, HT, P, config)
    if not ok:
        raise NotUnipotentFree(witness)

    Pinv = P.inverse()
    gamma_conj = [(l, Pinv * m * P) for l, m in Gamma.generators]
    hgens_conj = list(HT.generators)
    h_conj = Pinv * h * P

    avoid = _denominator_primes(
        [m for _, m in gamma_conj] + [m.inverse() for _, m in gamma_conj]
        + [m for _, m in hgens_conj] + [m.inverse() for _, m in hgens_conj]
        + [h_conj, h_conj.inverse(), P, Pinv])
    ctx = _Ctx(field, n, gamma_conj, hgens_conj, P, Pinv, avoid, config)

    if not h_conj.is_upper_triangular:
        cert = separate_from_borel(Gamma, h_conj, _ctx=ctx)
        _assert_verified(cert, Gamma, H, h)
        return cert

    if _member_of_triangular_abelian([m for _, m in hgens_conj], h_conj,
                                     field, config.relation_bound):
        raise InSubgroup("h lies in H")

    if config.fast_path:
        cert = _fast_path(ctx, h_conj)
        if cert is not None:
            _assert_verified(cert, Gamma, H, h)
            return cert

    s_plus, s1_gens, reps = split_S_plus(
        GroupDescription(field, n, hgens_conj), config)
    assert not s_plus, "a unipotent-free subgroup has trivial character kernel"

    maps = []
    for rep in reps:
        target = rep.inverse() * h_conj
        maps.extend(_claim_separate(ctx, s1_gens, target, 0))

    cert = _build_certificate(
        ctx, maps, h_conj,
        "image of h avoids the closure of the subgroup generator images")
    if cert is None:
        raise FallbackExhausted("assembled certificate failed the closure check")
    _assert_verified(cert, Gamma, H, h)
    return cert


def _unipotent_check_triangular(H, HT, P, config):
    rows = _diagonal_relation_lattice(HT.matrices(), H.field,
                                      config.relation_bound) if HT.matrices() else []
    tmats = HT.matrices()
    for e in rows:
        w = Matrix.identity(H.field, H.n)
        for g, k in zip(tmats, e):
            if k:
                w = w * g ** k
        if not w.is_identity:
            witness = P * w * P.inverse()
            assert is_unipotent(witness)
            return False, witness
    return True, None


def _assert_verified(cert, Gamma, H, h):
    res = verify_certificate(cert, Gamma, H, h)
    assert res.ok, f"internal verification failed: {res.reason}"


def verify_certificate(cert: SeparationCertificate, Gamma: GroupDescription,
                       H: GroupDescription, h: Matrix,
                       config: Config | None = None) -> Verification:
    """Independently rebuild every image and re-run the closure check."""
    config = config or Config()
    field = cert.field
    if Gamma.field != field:
        if Gamma.field.degree == 1:
            try:
                from .nfield import RationalEmbedding
                embed = RationalEmbedding(field)
                Gamma = embed.group(Gamma)
                H = embed.group(H)
                h = embed.matrix(h)
            except Exception as exc:
                return Verification(False, f"field mismatch: {exc}")
        else:
            return Verification(False, "certificate field differs from the input field")
    if not (cert.conjugator * cert.conjugator_inv).is_identity:
        return Verification(False, "conjugator pair is not inverse")
    for m in cert.maps:
        expected = field.minimal_poly.reduce_mod(m.target.modulus)
        if list(m.target.defining_poly) != expected:
            return Verification(False, "defining polynomial mismatch")
    P, Pinv = cert.conjugator, cert.conjugator_inv
    try:
        hom = HomDescription(cert.maps)
        gamma_conj = {l: Pinv * mat * P for l, mat in Gamma.generators}
        hgens_conj = {l: Pinv * mat * P for l, mat in H.generators}
        h_conj = Pinv * h * P
        for label, mat in gamma_conj.items():
            if label not in cert.gamma_images:
                return Verification(False, f"missing image for generator {label!r}")
            if apply_matrix(hom, mat) != cert.gamma_images[label]:
                return Verification(False, f"image mismatch on generator {label!r}")
        for label, mat in hgens_conj.items():
            if label not in cert.h_generator_images:
                return Verification(False, f"missing image for subgroup generator {label!r}")
            if apply_matrix(hom, mat) != cert.h_generator_images[label]:
                return Verification(False, f"image mismatch on subgroup generator {label!r}")
        if apply_matrix(hom, h_conj) != cert.h_image:
            return Verification(False, "image mismatch on h")
        closure = closure_product(hom.rings(),
                                  list(cert.h_generator_images.values()),
                                  config.closure_cap, n=cert.n)
    except Exception as exc:
        return Verification(False, f"recomputation failed: {exc}")
    if len(closure) != cert.closure_order:
        return Verification(False, "closure order mismatch")
    if cert.h_image in closure:
        return Verification(False, "membership: image of h lies in the closure")
    return Verification(True, "verified")


# ---------------------------------------------------------------------------
# the standard non-separable contrast
# ---------------------------------------------------------------------------

def bs12_odd_order(p_list):
    """Orders of the unitriangular generator image modulo odd primes.

    For each prime the order is reported (always odd) together with an
    exact check of the defining relation t a t^-1 = a^2 in the quotient.
    """
    rows = []
    QQ = NumberField.rationals()
    for p in p_list:
        if p == 2:
            raise ValueError("p must be odd and coprime to the denominator 2")
        ring = FiniteRing(p, QQ.minimal_poly)
        t = ((ring.from_int(2), ring.zero()), (ring.zero(), ring.one()))
        a = ((ring.one(), ring.one()), (ring.zero(), ring.one()))
        order = 1
        acc = a
        eye = ring.mat_identity(2)
        while acc != eye:
            acc = ring.mat_mul(acc, a)
            order += 1
        relation = ring.mat_mul(ring.mat_mul(t, a), ring.mat_inv(t)) == \
            ring.mat_mul(a, a)
        rows.append({"p": p, "order": order, "odd": order % 2 == 1,
                     "relation": relation})
    return rows
