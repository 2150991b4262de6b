"""Number fields, their elements and matrices, characteristic polynomials,
torsion detection, and desk-scale triangularization of abelian matrix groups.

A field is Q[x]/(f) for a monic integer polynomial f irreducible over Q;
elements are coordinate vectors over the distinguished root.  Eigenvalues
are extracted exactly: over Q by integer factorization of the characteristic
polynomial, over a proper extension by squarefree-norm reduction back to Q.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .errors import (
    MixedFields,
    NeedsFieldExtension,
    NotCommuting,
    NotInvertible,
    Reducible,
    UnsupportedTower,
)
from .exact import (
    IntPoly,
    euler_phi,
    factor_mod_p,
    is_prime,
    lcm,
    poly_discriminant,
    pp_deriv,
    pp_gcd,
    primes_from,
    qp_clear_denominators,
    qp_degree,
    qp_derivative,
    qp_divmod,
    qp_eval,
    qp_gcd,
    qp_mul,
    qp_resultant,
    qp_scale,
    qp_sub,
    qp_trim,
    qp_xgcd,
)

# ---------------------------------------------------------------------------
# factorization over Q (Zassenhaus at desk degrees)
# ---------------------------------------------------------------------------

def _pm_trim(a, m):
    a = [c % m for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def _pm_mul(a, b, m):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % m
    return _pm_trim(out, m)


def _pm_add(a, b, m):
    n = max(len(a), len(b))
    return _pm_trim([( (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % m
                     for i in range(n)], m)


def _pm_sub(a, b, m):
    n = max(len(a), len(b))
    return _pm_trim([( (a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % m
                     for i in range(n)], m)


def _pm_divmod_monic(a, b, m):
    """Division by a monic polynomial, valid modulo any m."""
    assert b and b[-1] == 1
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        c = a[-1] % m
        k = len(a) - len(b)
        q[k] = c
        for i, bc in enumerate(b):
            a[k + i] = (a[k + i] - c * bc) % m
        while a and a[-1] == 0:
            a.pop()
    return _pm_trim(q, m), _pm_trim(a, m)


def _pp_sub(a, b, p):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p
           for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return out


def _pp_xgcd(a, b, p):
    """Extended gcd over F_p[x]: returns (g, s, t) with s a + t b = g, g monic."""
    from .exact import pp_divmod, pp_mul, pp_trim

    r0, r1 = pp_trim(a, p), pp_trim(b, p)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = pp_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _pp_sub(s0, pp_mul(q, s1, p), p)
        t0, t1 = t1, _pp_sub(t0, pp_mul(q, t1, p), p)
    if r0:
        inv = pow(r0[-1], -1, p)
        r0 = [c * inv % p for c in r0]
        s0 = [c * inv % p for c in s0]
        t0 = [c * inv % p for c in t0]
    return r0, s0, t0


def _hensel_pair(f, g, h, a, b, p, target):
    """Lift f = g*h (mod p) with a*g + b*h = 1 (mod p) to modulus >= target."""
    m = p
    while m < target:
        m = m * m
        e = _pm_sub(f, _pm_mul(g, h, m), m)
        q, r = _pm_divmod_monic(_pm_mul(b, e, m), g, m)
        g1 = _pm_add(g, r, m)
        h1 = _pm_add(h, _pm_add(_pm_mul(a, e, m), _pm_mul(q, h, m), m), m)
        e2 = _pm_sub(_pm_add(_pm_mul(a, g1, m), _pm_mul(b, h1, m), m), [1], m)
        q2, r2 = _pm_divmod_monic(_pm_mul(b, e2, m), g1, m)
        b1 = _pm_sub(b, r2, m)
        a1 = _pm_sub(a, _pm_add(_pm_mul(a, e2, m), _pm_mul(q2, h1, m), m), m)
        g, h, a, b = g1, h1, a1, b1
    return g, h, m


def _hensel_tree(f, facs, p, target):
    """Lift the modular factorization f = prod(facs) (mod p) to mod target."""
    if len(facs) == 1:
        return [_pm_trim(f, target)]
    k = len(facs) // 2
    gs, hs = facs[:k], facs[k:]
    g0, h0 = [1], [1]
    for fac in gs:
        g0 = _pm_mul(g0, fac, p)
    for fac in hs:
        h0 = _pm_mul(h0, fac, p)
    _g, s, t = _pp_xgcd(g0, h0, p)
    g, h, _m = _hensel_pair(_pm_trim(f, target), g0, h0, s, t, p, target)
    return _hensel_tree(g, gs, p, target) + _hensel_tree(h, hs, p, target)


def _int_divmod_monic(a, b):
    """Exact integer-polynomial division by a monic divisor."""
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        c = a[-1]
        k = len(a) - len(b)
        q[k] = c
        for i, bc in enumerate(b):
            a[k + i] -= c * bc
        while a and a[-1] == 0:
            a.pop()
    return q, a


def _mignotte_bound(coeffs):
    n = len(coeffs) - 1
    s = 0
    for c in coeffs:
        s += c * c
    norm = 1
    while norm * norm < s:
        norm *= 2
    return (1 << n) * norm


_RECOMBINATION_CAP = 24


def _zassenhaus_monic(G: IntPoly) -> list[IntPoly]:
    """Irreducible factors of a monic squarefree integer polynomial."""
    n = G.degree
    if n == 1:
        return [G]
    p = None
    for cand in primes_from(3):
        gp = G.reduce_mod(cand)
        if len(gp) - 1 == n and pp_gcd(gp, pp_deriv(gp, cand), cand) == [1]:
            p = cand
            break
    modfacs = [list(g.coeffs) for g, _ in factor_mod_p(G, p)]
    if len(modfacs) == 1:
        return [G]
    if len(modfacs) > _RECOMBINATION_CAP:
        raise ArithmeticError("modular factor recombination too large for desk scale")
    bound = _mignotte_bound(G.coeffs)
    target = p
    while target <= 2 * bound:
        target *= target
    lifted = _hensel_tree([c % target for c in G.coeffs], modfacs, p, target)

    def center(poly):
        return [c - target if c > target // 2 else c for c in poly]

    result = []
    rem = list(G.coeffs)
    avail = list(range(len(lifted)))
    s = 1
    while 2 * s <= len(avail):
        hit = False
        for subset in combinations(avail, s):
            cand = [1]
            for i in subset:
                cand = _pm_mul(cand, lifted[i], target)
            cand = center(cand)
            # trailing-coefficient divisibility is a cheap pre-filter
            if cand[0] != 0 and rem[0] % cand[0] != 0:
                continue
            q, r = _int_divmod_monic(rem, cand)
            if not r:
                result.append(IntPoly(cand))
                rem = q
                avail = [i for i in avail if i not in subset]
                hit = True
                break
        if not hit:
            s += 1
    if len(rem) > 1:
        result.append(IntPoly(rem))
    return result


def _factor_primitive_squarefree(F: IntPoly) -> list[IntPoly]:
    lc = F.leading
    if lc == 1:
        return _zassenhaus_monic(F)
    n = F.degree
    # G(y) = lc^(n-1) F(y/lc) is monic with integer coefficients
    G = IntPoly([c * lc ** (n - 1 - i) for i, c in enumerate(F.coeffs[:-1])] + [1])
    out = []
    for g in _zassenhaus_monic(G):
        mapped = IntPoly([c * lc ** i for i, c in enumerate(g.coeffs)])
        out.append(mapped.primitive())
    return out


def _qp_yun(f):
    """Squarefree decomposition of a monic rational polynomial."""
    out = []
    d = qp_derivative(f)
    a = qp_gcd(f, d)
    b = qp_divmod(f, a)[0]
    c = qp_divmod(d, a)[0]
    z = qp_sub(c, qp_derivative(b))
    i = 1
    while qp_degree(b) > 0:
        g = qp_gcd(b, z)
        if qp_degree(g) > 0:
            out.append((g, i))
        b = qp_divmod(b, g)[0] if qp_degree(g) > 0 else b
        if qp_degree(g) > 0:
            z = qp_divmod(z, g)[0]
        z = qp_sub(z, qp_derivative(b))
        i += 1
    return out


def factor_rational_poly(coeffs) -> tuple[Fraction, list[tuple[list[Fraction], int]]]:
    """Factor a rational polynomial into monic irreducibles over Q.

    Returns (leading coefficient, [(monic factor, multiplicity)]), factors
    sorted by degree then coefficient sequence.
    """
    a = qp_trim([Fraction(c) for c in coeffs])
    if qp_degree(a) <= 0:
        return (a[0] if a else Fraction(0)), []
    lead = a[-1]
    monic = qp_scale(a, 1 / lead)
    out = []
    for sf, mult in _qp_yun(monic):
        ints, _ = qp_clear_denominators(sf)
        F = IntPoly(ints).primitive()
        if F.degree == 0:
            continue
        for g in _factor_primitive_squarefree(F):
            gm = [Fraction(c, g.leading) for c in g.coeffs]
            out.append((gm, mult))
    out.sort(key=lambda t: (qp_degree(t[0]), tuple(t[0])))
    return lead, out


def is_irreducible_over_q(f: IntPoly) -> bool:
    """Irreducibility over Q: rational roots, mod-p degree analysis, full
    factorization as the deciding fallback."""
    n = f.degree
    if n < 1:
        return False
    if n == 1:
        return True
    fq = [Fraction(c) for c in f.coeffs]
    if qp_degree(qp_gcd(fq, qp_derivative(fq))) > 0:
        return False
    # rational roots p/q with p | a0, q | lc
    a0, an = f.coeffs[0], f.leading
    if a0 == 0:
        return False
    for p in {d for d in range(1, abs(a0) + 1) if abs(a0) % d == 0}:
        for q in {d for d in range(1, abs(an) + 1) if abs(an) % d == 0}:
            for cand in (Fraction(p, q), Fraction(-p, q)):
                if qp_eval(fq, cand) == 0:
                    return False
    # mod-p factor-degree patterns
    possible = set(range(n + 1))
    used = 0
    for p in primes_from(2):
        if used >= 12:
            break
        if f.leading % p == 0:
            continue
        fp = f.reduce_mod(p)
        if len(fp) - 1 != n or pp_gcd(fp, pp_deriv(fp, p), p) != [1]:
            continue
        used += 1
        degs = [g.degree for g, _ in factor_mod_p(f, p)]
        if len(degs) == 1:
            return True
        sums = {0}
        for d in degs:
            sums |= {s + d for s in sums}
        possible &= sums
        if not (possible & set(range(1, n))):
            return True
    _lead, facs = factor_rational_poly(fq)
    return len(facs) == 1 and facs[0][1] == 1


# ---------------------------------------------------------------------------
# number fields and their elements
# ---------------------------------------------------------------------------

class NumberField:
    """Q[x]/(f) for a monic integer polynomial f irreducible over Q."""

    __slots__ = ("minimal_poly", "degree", "discriminant", "_red", "_torsion")

    def __init__(self, minimal_poly: IntPoly):
        f = minimal_poly
        if f.is_zero or not f.is_monic:
            raise ValueError("minimal polynomial must be monic")
        if f.degree < 1:
            raise ValueError("minimal polynomial must have positive degree")
        if f.degree > 1 and not is_irreducible_over_q(f):
            raise Reducible("minimal polynomial factors over Q")
        self.minimal_poly = f
        self.degree = f.degree
        self.discriminant = poly_discriminant(f)
        # reduction rows: x^k mod f for k = d .. 2d-2
        d = self.degree
        rows = []
        cur = [Fraction(-c) for c in f.coeffs[:-1]]  # x^d
        rows.append(tuple(cur))
        for _ in range(d - 2):
            nxt = [Fraction(0)] + cur[:]
            if len(nxt) > d:
                top = nxt.pop()
                for i in range(d):
                    nxt[i] += top * rows[0][i]
            while len(nxt) < d:
                nxt.append(Fraction(0))
            cur = nxt
            rows.append(tuple(cur))
        self._red = tuple(rows)
        self._torsion = None

    @classmethod
    def rationals(cls) -> "NumberField":
        return cls(IntPoly([0, 1]))

    @property
    def is_rationals(self) -> bool:
        return self.degree == 1

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minimal_poly == other.minimal_poly

    def __hash__(self):
        return hash(self.minimal_poly)

    def element(self, coords) -> "FieldElement":
        c = [Fraction(v) for v in coords]
        if len(c) > self.degree:
            raise ValueError("too many coordinates")
        c += [Fraction(0)] * (self.degree - len(c))
        return FieldElement(self, tuple(c))

    def from_rational(self, q) -> "FieldElement":
        return self.element([Fraction(q)])

    def zero(self) -> "FieldElement":
        return self.from_rational(0)

    def one(self) -> "FieldElement":
        return self.from_rational(1)

    def alpha(self) -> "FieldElement":
        """The distinguished root of the minimal polynomial."""
        if self.degree == 1:
            return self.from_rational(-self.minimal_poly.coeffs[0])
        return self.element([0, 1])

    def __repr__(self):
        return f"NumberField({self.minimal_poly!r})"


class FieldElement:
    """Element of a NumberField as a coordinate vector over the root."""

    __slots__ = ("field", "coords")

    def __init__(self, field: NumberField, coords: tuple):
        self.field = field
        self.coords = coords

    def _check(self, other):
        if self.field != other.field:
            raise MixedFields("elements of different fields")

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    @property
    def is_one(self) -> bool:
        return self.coords[0] == 1 and all(c == 0 for c in self.coords[1:])

    @property
    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def __bool__(self):
        return not self.is_zero

    def __eq__(self, other):
        return (isinstance(other, FieldElement) and self.field == other.field
                and self.coords == other.coords)

    def __hash__(self):
        return hash((self.coords, self.field.minimal_poly.coeffs))

    def __add__(self, other):
        self._check(other)
        return FieldElement(self.field,
                            tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, tuple(a * other for a in self.coords))
        self._check(other)
        d = self.field.degree
        a, b = self.coords, other.coords
        raw = [Fraction(0)] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    raw[i + j] += ai * bj
        out = raw[:d]
        red = self.field._red
        for k in range(d, 2 * d - 1):
            c = raw[k]
            if c:
                row = red[k - d]
                for i in range(d):
                    out[i] += c * row[i]
        return FieldElement(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero field element")
        d = self.field.degree
        if d == 1:
            return FieldElement(self.field, (1 / self.coords[0],))
        fq = [Fraction(c) for c in self.field.minimal_poly.coeffs]
        g, s, _t = qp_xgcd(list(self.coords), fq)
        assert qp_degree(g) == 0
        inv = qp_scale(s, 1 / g[0])
        inv += [Fraction(0)] * (d - len(inv))
        return FieldElement(self.field, tuple(inv[:d]))

    def __truediv__(self, other):
        return self * other.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def norm(self) -> Fraction:
        """Field norm down to Q (product over all embeddings)."""
        if self.field.degree == 1:
            return self.coords[0]
        fq = [Fraction(c) for c in self.field.minimal_poly.coeffs]
        return qp_resultant(fq, list(self.coords))

    def denominator(self) -> int:
        den = 1
        for c in self.coords:
            den = lcm(den, c.denominator)
        return den

    def key(self):
        return self.coords

    def __repr__(self):
        if self.is_rational:
            return f"FE({self.coords[0]})"
        return f"FE{tuple(str(c) for c in self.coords)}"


def is_root_of_unity(u: FieldElement):
    """Exact multiplicative order of u when torsion, else None.

    Only orders w with phi(w) <= [K : Q] can occur, so the check terminates.
    """
    if u.is_zero:
        raise ValueError("zero is not a unit")
    d = u.field.degree
    limit = 2 * d * d + 4
    for w in range(1, limit + 1):
        if euler_phi(w) <= d and (u ** w).is_one:
            return w
    return None


def cyclotomic_poly(w: int, _cache={}) -> IntPoly:
    if w in _cache:
        return _cache[w]
    num = IntPoly([-1] + [0] * (w - 1) + [1])  # x^w - 1
    rem = list(num.coeffs)
    for dd in range(1, w):
        if w % dd == 0:
            phi_d = cyclotomic_poly(dd)
            rem, r = _int_divmod_monic(rem, list(phi_d.coeffs))
            assert not r
    out = IntPoly(rem)
    _cache[w] = out
    return out


def field_torsion(field: NumberField) -> tuple[int, FieldElement]:
    """(W, zeta): the order of the torsion of K^x and a generator."""
    if field._torsion is not None:
        return field._torsion
    d = field.degree
    best_w, best_zeta = 1, field.one()
    for w in range(2, 2 * d * d + 5):
        phi = euler_phi(w)
        if phi > d or d % phi != 0:
            continue
        roots = element_roots([field.from_rational(Fraction(c))
                               for c in cyclotomic_poly(w).coeffs], field)[0]
        if roots and w > best_w:
            best_w, best_zeta = w, roots[0]
    assert (best_zeta ** best_w).is_one
    field._torsion = (best_w, best_zeta)
    return field._torsion


# ---------------------------------------------------------------------------
# polynomials over K (lists of FieldElement, ascending)
# ---------------------------------------------------------------------------

def kp_trim(a):
    a = list(a)
    while a and a[-1].is_zero:
        a.pop()
    return a


def kp_degree(a):
    return len(a) - 1


def kp_sub(a, b, field):
    n = max(len(a), len(b))
    z = field.zero()
    return kp_trim([(a[i] if i < len(a) else z) - (b[i] if i < len(b) else z)
                    for i in range(n)])


def kp_mul(a, b, field):
    if not a or not b:
        return []
    out = [field.zero() for _ in range(len(a) + len(b) - 1)]
    for i, ai in enumerate(a):
        if not ai.is_zero:
            for j, bj in enumerate(b):
                out[i + j] = out[i + j] + ai * bj
    return kp_trim(out)


def kp_scale(a, s):
    return kp_trim([c * s if isinstance(s, (int, Fraction)) else s * c for c in a])


def kp_monic(a, field):
    a = kp_trim(a)
    if not a:
        return a
    inv = a[-1].inverse()
    return [c * inv for c in a]


def kp_divmod(a, b, field):
    b = kp_trim(b)
    if not b:
        raise ZeroDivisionError
    a = kp_trim(a)
    q = [field.zero() for _ in range(max(0, len(a) - len(b) + 1))]
    inv = b[-1].inverse()
    r = list(a)
    while len(r) >= len(b):
        c = r[-1] * inv
        k = len(r) - len(b)
        q[k] = c
        for i, bc in enumerate(b):
            r[k + i] = r[k + i] - c * bc
        r = kp_trim(r)
    return kp_trim(q), r


def kp_gcd(a, b, field):
    a, b = kp_trim(a), kp_trim(b)
    while b:
        a, b = b, kp_divmod(a, b, field)[1]
    return kp_monic(a, field)


def kp_derivative(a, field):
    return kp_trim([c * i for i, c in enumerate(a)][1:])


def kp_eval(a, x, field):
    acc = field.zero()
    for c in reversed(a):
        acc = acc * x + c
    return acc


def kp_from_rational(coeffs, field):
    return kp_trim([field.from_rational(Fraction(c)) for c in coeffs])


def _kp_shift_alpha(a, k: int, field):
    """Substitute x -> x + k*alpha."""
    if k == 0:
        return kp_trim(a)
    shift = field.alpha() * k
    lin = [shift, field.one()]  # x + k*alpha
    res = []
    for c in reversed(kp_trim(a)):
        res = kp_mul(res, lin, field)
        if res:
            res[0] = res[0] + c
        else:
            res = [c]
    return kp_trim(res)


def _norm_kpoly(a, field) -> list[Fraction]:
    """Norm of a monic K[x] polynomial down to Q[x], by interpolation."""
    d = field.degree
    e = kp_degree(a)
    if d == 1:
        return [c.coords[0] for c in a]
    deg_n = e * d
    fq = [Fraction(c) for c in field.minimal_poly.coeffs]
    pts = []
    vals = []
    for t in range(deg_n + 1):
        # C(t, y): collapse the x-variable at x = t
        cy = [Fraction(0)] * d
        tp = Fraction(1)
        for ci in a:
            for j in range(d):
                cy[j] += ci.coords[j] * tp
            tp *= t
        pts.append(Fraction(t))
        vals.append(qp_resultant(fq, qp_trim(cy)))
    # Lagrange interpolation
    out = [Fraction(0)] * (deg_n + 1)
    for i, (xi, yi) in enumerate(zip(pts, vals)):
        li = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(pts):
            if j != i:
                li = qp_mul(li, [-xj, Fraction(1)])
                denom *= xi - xj
        scale = yi / denom
        for k, c in enumerate(li):
            out[k] += c * scale
    return qp_trim(out)


def element_roots(cpoly, field):
    """All roots of a K[x] polynomial lying in K.

    Returns (sorted roots, obstruction) where obstruction is a rational
    irreducible polynomial witnessing a root outside K (None when every
    root of the squarefree part lies in K or the polynomial is constant).
    """
    c = kp_trim(list(cpoly))
    if kp_degree(c) <= 0:
        return [], None
    c = kp_monic(c, field)
    g = kp_gcd(c, kp_derivative(c, field), field)
    if kp_degree(g) > 0:
        c = kp_divmod(c, g, field)[0]
    e = kp_degree(c)
    if e == 1:
        return [-c[0]], None

    if field.degree == 1:
        qcoeffs = [x.coords[0] for x in c]
        _lead, facs = factor_rational_poly(qcoeffs)
        roots = [field.from_rational(-g0[0]) for g0, _ in facs if qp_degree(g0) == 1]
        obst = next((g0 for g0, _ in facs if qp_degree(g0) > 1), None)
        for r in roots:
            assert kp_eval(c, r, field).is_zero
        roots.sort(key=lambda r: r.key())
        return roots, (qp_trim(obst) if obst else None)

    d = field.degree
    max_shift = (e * d) * (e * d) + 1
    shift = None
    norm = None
    k = 0
    tried = 0
    while tried <= max_shift:
        ck = _kp_shift_alpha(c, k, field)
        n = _norm_kpoly(ck, field)
        if qp_degree(qp_gcd(n, qp_derivative(n))) == 0:
            shift, norm = k, n
            break
        tried += 1
        k = -k + (1 if k <= 0 else 0)
    assert shift is not None, "no squarefree shift found"
    ck = _kp_shift_alpha(c, shift, field)
    _lead, facs = factor_rational_poly(norm)
    roots = []
    obst = None
    alpha_shift = field.alpha() * shift
    for g0, _mult in facs:
        gk = kp_from_rational(g0, field)
        h = kp_gcd(ck, gk, field)
        if kp_degree(h) == 1:
            beta = -h[0]
            root = beta + alpha_shift
            assert kp_eval(c, root, field).is_zero
            roots.append(root)
        elif kp_degree(h) >= 1 and obst is None:
            obst = qp_trim(g0)
    roots.sort(key=lambda r: r.key())
    return roots, obst


# ---------------------------------------------------------------------------
# matrices over a number field
# ---------------------------------------------------------------------------

class Matrix:
    """Square matrix over a NumberField; immutable."""

    __slots__ = ("field", "n", "entries")

    def __init__(self, field: NumberField, entries):
        rows = []
        for r in entries:
            row = []
            for v in r:
                if isinstance(v, FieldElement):
                    if v.field != field:
                        raise MixedFields("matrix entry in a different field")
                    row.append(v)
                else:
                    row.append(field.from_rational(Fraction(v)))
            rows.append(tuple(row))
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("matrix must be square and nonempty")
        self.field = field
        self.n = n
        self.entries = tuple(rows)

    @classmethod
    def identity(cls, field: NumberField, n: int) -> "Matrix":
        return cls(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.field == other.field
                and self.entries == other.entries)

    def __hash__(self):
        return hash(tuple(tuple(e.coords for e in row) for row in self.entries))

    def __mul__(self, other: "Matrix") -> "Matrix":
        if self.n != other.n or self.field != other.field:
            raise MixedFields("matrix product shape/field mismatch")
        n = self.n
        z = self.field.zero()
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = z
                for k in range(n):
                    a = self.entries[i][k]
                    if not a.is_zero:
                        acc = acc + a * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return Matrix(self.field, out)

    def det(self) -> FieldElement:
        n = self.n
        a = [list(r) for r in self.entries]
        det = self.field.one()
        for c in range(n):
            piv = None
            for i in range(c, n):
                if not a[i][c].is_zero:
                    piv = i
                    break
            if piv is None:
                return self.field.zero()
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                det = -det
            det = det * a[c][c]
            inv = a[c][c].inverse()
            for i in range(c + 1, n):
                if not a[i][c].is_zero:
                    f = a[i][c] * inv
                    a[i] = [x - f * y for x, y in zip(a[i], a[c])]
        return det

    def inverse(self) -> "Matrix":
        n = self.n
        one = self.field.one()
        zero = self.field.zero()
        a = [list(r) + [one if i == j else zero for j in range(n)]
             for i, r in enumerate(self.entries)]
        for c in range(n):
            piv = None
            for i in range(c, n):
                if not a[i][c].is_zero:
                    piv = i
                    break
            if piv is None:
                raise NotInvertible("singular matrix")
            a[c], a[piv] = a[piv], a[c]
            inv = a[c][c].inverse()
            a[c] = [x * inv for x in a[c]]
            for i in range(n):
                if i != c and not a[i][c].is_zero:
                    f = a[i][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[c])]
        return Matrix(self.field, [row[n:] for row in a])

    def __pow__(self, e: int) -> "Matrix":
        if e < 0:
            return self.inverse() ** (-e)
        result = Matrix.identity(self.field, self.n)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    @property
    def is_identity(self) -> bool:
        for i in range(self.n):
            for j in range(self.n):
                e = self.entries[i][j]
                if i == j and not e.is_one:
                    return False
                if i != j and not e.is_zero:
                    return False
        return True

    @property
    def is_upper_triangular(self) -> bool:
        return all(self.entries[i][j].is_zero
                   for i in range(self.n) for j in range(i))

    def sub(self, other: "Matrix") -> "Matrix":
        return Matrix(self.field, [[a - b for a, b in zip(r1, r2)]
                                   for r1, r2 in zip(self.entries, other.entries)])

    def diagonal(self) -> list[FieldElement]:
        return [self.entries[i][i] for i in range(self.n)]

    def denominator(self) -> int:
        den = 1
        for row in self.entries:
            for e in row:
                den = lcm(den, e.denominator())
        return den

    def map_entries(self, fn) -> list[list]:
        return [[fn(e) for e in row] for row in self.entries]

    def __repr__(self):
        return f"Matrix({[[str(e) for e in row] for row in self.entries]})"


def char_poly(M: Matrix) -> list[FieldElement]:
    """Monic characteristic polynomial det(xI - M), ascending coefficients.

    Faddeev-LeVerrier: exact in characteristic zero.
    """
    n = M.n
    field = M.field
    coeffs = [field.zero() for _ in range(n + 1)]
    coeffs[n] = field.one()
    Mk = M
    ident = Matrix.identity(field, n)
    ck = field.zero()
    for k in range(1, n + 1):
        if k > 1:
            shifted = Matrix(field, [[Mk.entries[i][j] + (ck if i == j else field.zero())
                                      for j in range(n)] for i in range(n)])
            Mk = M * shifted
        tr = field.zero()
        for i in range(n):
            tr = tr + Mk.entries[i][i]
        ck = tr * Fraction(-1, k)
        coeffs[n - k] = ck
    return coeffs


def pairwise_commuting(mats: list[Matrix]) -> bool:
    for a, b in combinations(mats, 2):
        if a * b != b * a:
            return False
    return True


class GroupDescription:
    """Finite generating list of invertible matrices over a number field."""

    __slots__ = ("field", "n", "generators")

    def __init__(self, field: NumberField, n: int, generators):
        gens = []
        labels = set()
        for label, mat in generators:
            if not isinstance(mat, Matrix):
                mat = Matrix(field, mat)
            if mat.field != field or mat.n != n:
                raise MixedFields("generator field/size mismatch")
            if mat.det().is_zero:
                raise NotInvertible(f"generator {label!r} is singular")
            if label in labels:
                raise ValueError(f"duplicate generator label {label!r}")
            labels.add(label)
            gens.append((str(label), mat))
        self.field = field
        self.n = n
        self.generators = tuple(gens)

    def matrices(self) -> list[Matrix]:
        return [m for _, m in self.generators]

    def labels(self) -> list[str]:
        return [l for l, _ in self.generators]

    def __repr__(self):
        return f"GroupDescription(n={self.n}, labels={self.labels()})"


# ---------------------------------------------------------------------------
# row reduction, eigenvectors, triangularization
# ---------------------------------------------------------------------------

def _rref(rows, field):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    a = [list(r) for r in rows]
    if not a:
        return [], []
    ncols = len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(a)):
            if not a[i][c].is_zero:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and not a[i][c].is_zero:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def _kernel_vectors(rows, field, ncols):
    """Canonical kernel basis of the linear map given by ``rows``.

    One vector per free column, ordered by free column index; the free
    coordinate is 1 (lexicographically-first pivot pattern first).
    """
    rr, pivots = _rref(rows, field)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    out = []
    for fc in free:
        v = [field.zero()] * ncols
        v[fc] = field.one()
        for r, pc in zip(rr, pivots):
            v[pc] = -r[fc]
        out.append(v)
    return out


def _mat_vec(M: Matrix, v):
    return [sum((M.entries[i][j] * v[j] for j in range(M.n)), M.field.zero())
            for i in range(M.n)]


def _solve_columns(V_cols, targets, field):
    """Solve V x = t for each target; V has full column rank."""
    n = len(V_cols[0])
    k = len(V_cols)
    rows = [[V_cols[j][i] for j in range(k)] + [t[i] for t in targets]
            for i in range(n)]
    rr, pivots = _rref(rows, field)
    assert pivots[:k] == list(range(k)), "basis columns must be independent"
    sols = []
    for idx in range(len(targets)):
        col = k + idx
        x = [field.zero()] * k
        for r, pc in zip(rr, pivots):
            if pc < k:
                x[pc] = r[col]
        sols.append(x)
    # consistency: rows whose pivot lies in the target block mean no solution
    for pc in pivots:
        if pc >= k:
            raise ArithmeticError("inconsistent solve: subspace not invariant")
    return sols


def common_eigenvector(gens: list[Matrix]):
    """A vector v != 0 with M v = lambda_M v for every generator.

    Raises NotCommuting when the generators fail to commute and
    NeedsFieldExtension when some eigenvalue falls outside the field.
    """
    if not gens:
        raise ValueError("need at least one matrix")
    field = gens[0].field
    n = gens[0].n
    if not pairwise_commuting(gens):
        raise NotCommuting("matrices do not pairwise commute")

    def restrict(M, basis_cols):
        targets = [_mat_vec(M, col) for col in basis_cols]
        sols = _solve_columns(basis_cols, targets, field)
        # M' columns: image of basis vector j in basis coordinates
        k = len(basis_cols)
        return Matrix(field, [[sols[j][i] for j in range(k)] for i in range(k)])

    def rec(basis_cols, idx):
        if idx == len(gens):
            return basis_cols[0]
        Mr = restrict(gens[idx], basis_cols)
        roots, obst = element_roots(char_poly(Mr), field)
        if not roots:
            raise NeedsFieldExtension(
                obst if obst is not None else [Fraction(0)],
                "no eigenvalue of a generator lies in the working field")
        last = None
        for lam in roots:
            shifted = Matrix(field, [[Mr.entries[i][j] - (lam if i == j else field.zero())
                                      for j in range(Mr.n)] for i in range(Mr.n)])
            kern = _kernel_vectors(list(shifted.entries), field, Mr.n)
            new_basis = []
            for w in kern:
                col = [sum((basis_cols[j][i] * w[j] for j in range(len(basis_cols))),
                           field.zero()) for i in range(n)]
                new_basis.append(col)
            try:
                return rec(new_basis, idx + 1)
            except NeedsFieldExtension as exc:
                last = exc
        raise last

    eye = Matrix.identity(field, n)
    start = [[eye.entries[i][j] for i in range(n)] for j in range(n)]
    v = rec(start, 0)
    # canonical scale: first nonzero coordinate becomes 1
    lead = next(c for c in v if not c.is_zero)
    inv = lead.inverse()
    return [c * inv for c in v]


def _complete_basis(v, field, n):
    """Deterministically extend v to a basis using standard basis vectors."""
    cols = [list(v)]
    for j in range(n):
        cand = [field.one() if i == j else field.zero() for i in range(n)]
        trial = cols + [cand]
        rows = [[trial[c][i] for c in range(len(trial))] for i in range(n)]
        _rr, pivots = _rref(rows, field)
        if len(pivots) == len(trial):
            cols.append(cand)
        if len(cols) == n:
            break
    assert len(cols) == n
    return Matrix(field, [[cols[j][i] for j in range(n)] for i in range(n)])


def triangularize_abelian(G: GroupDescription) -> tuple[Matrix, GroupDescription]:
    """Conjugate a commuting generating set to upper-triangular form.

    Returns (P, G') with G' = P^-1 G P upper triangular.  Raises
    NeedsFieldExtension when an eigenvalue leaves the field.
    """
    field, n = G.field, G.n
    mats = G.matrices()
    if not pairwise_commuting(mats):
        raise NotCommuting("generators do not pairwise commute")

    def build(ms, size):
        if size <= 1 or not ms:
            return Matrix.identity(field, size)
        if all(m.is_upper_triangular for m in ms):
            return Matrix.identity(field, size)
        v = common_eigenvector(ms)
        P1 = _complete_basis(v, field, size)
        P1inv = P1.inverse()
        conj = [P1inv * m * P1 for m in ms]
        for cm in conj:
            assert all(cm.entries[i][0].is_zero for i in range(1, size))
        subs = [Matrix(field, [[cm.entries[i][j] for j in range(1, size)]
                               for i in range(1, size)]) for cm in conj]
        P2 = build(subs, size - 1)
        block = [[field.one() if (i == 0 and j == 0) else field.zero()
                  for j in range(size)] for i in range(size)]
        for i in range(size - 1):
            for j in range(size - 1):
                block[i + 1][j + 1] = P2.entries[i][j]
        return P1 * Matrix(field, block)

    P = build(mats, n)
    Pinv = P.inverse()
    new_gens = []
    for label, m in G.generators:
        t = Pinv * m * P
        assert t.is_upper_triangular
        new_gens.append((label, t))
    return P, GroupDescription(field, n, new_gens)


# ---------------------------------------------------------------------------
# extension from Q
# ---------------------------------------------------------------------------

class RationalEmbedding:
    """Coefficient-wise embedding of rational objects into an extension."""

    def __init__(self, target: NumberField):
        self.target = target

    def element(self, e: FieldElement) -> FieldElement:
        if e.field.degree != 1:
            raise UnsupportedTower("embedding is only defined from Q")
        return self.target.from_rational(e.coords[0])

    def matrix(self, M: Matrix) -> Matrix:
        if M.field.degree != 1:
            raise UnsupportedTower("embedding is only defined from Q")
        return Matrix(self.target, [[self.element(e) for e in row]
                                    for row in M.entries])

    def group(self, G: GroupDescription) -> GroupDescription:
        return GroupDescription(self.target, G.n,
                                [(l, self.matrix(m)) for l, m in G.generators])


def extend_by_rational_root(f) -> tuple[NumberField, RationalEmbedding]:
    """Build Q[x]/(f) and the embedding of rational matrices into it."""
    if isinstance(f, (list, tuple)):
        fq = qp_trim([Fraction(c) for c in f])
        ints, _ = qp_clear_denominators(fq)
        f = IntPoly(ints)
        if not f.is_monic:
            lead = f.leading
            scaled = [c * lead ** (f.degree - 1 - i) for i, c in enumerate(f.coeffs)]
            f = IntPoly(scaled)
    if f.degree <= 1:
        raise Reducible("degree-1 adjunction is the base field")
    if not f.is_monic:
        raise ValueError("minimal polynomial must be monic")
    if not is_irreducible_over_q(f):
        raise Reducible("polynomial factors over Q")
    K = NumberField(f)
    return K, RationalEmbedding(K)
