"""Finite quotient rings Z[x]/(f, q), residue maps applied entrywise to
matrices, finite matrix-group closure by breadth-first multiplication, and
product homomorphisms.

Ring elements are coefficient tuples of length deg(f) with entries in
[0, q); matrices over a ring are tuples of tuples of such elements.  The
canonical byte encoding used in certificates lays out coefficients in
row-major order, little-endian per coefficient.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from math import gcd

from .errors import (
    CapExceeded,
    MixedFields,
    NotInvertible,
    ResidueUndefined,
)
from .exact import IntPoly, int_det
from .nfield import FieldElement, Matrix, NumberField


class FiniteRing:
    """Z[x]/(f, q) with q >= 2 and f monic modulo q."""

    __slots__ = ("modulus", "defining_poly", "degree")

    def __init__(self, modulus: int, defining_poly: IntPoly):
        if modulus < 2:
            raise ValueError("modulus must be at least 2")
        f = defining_poly.reduce_mod(modulus)
        if not f or f[-1] != 1:
            raise ValueError("defining polynomial must be monic mod q")
        self.modulus = modulus
        self.defining_poly = tuple(f)
        self.degree = len(f) - 1

    def __eq__(self, other):
        return (isinstance(other, FiniteRing) and self.modulus == other.modulus
                and self.defining_poly == other.defining_poly)

    def __hash__(self):
        return hash((self.modulus, self.defining_poly))

    def __repr__(self):
        return f"FiniteRing(q={self.modulus}, f={list(self.defining_poly)})"

    # -- element arithmetic --------------------------------------------------

    def zero(self):
        return (0,) * self.degree

    def one(self):
        if self.degree == 0:
            return ()
        return (1,) + (0,) * (self.degree - 1)

    def from_int(self, v: int):
        return (v % self.modulus,) + (0,) * (self.degree - 1)

    def add(self, a, b):
        q = self.modulus
        return tuple((x + y) % q for x, y in zip(a, b))

    def neg(self, a):
        q = self.modulus
        return tuple((-x) % q for x in a)

    def mul(self, a, b):
        q = self.modulus
        d = self.degree
        if d == 1:
            return (a[0] * b[0] % q,)
        raw = [0] * (2 * d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    raw[i + j] += x * y
        f = self.defining_poly
        for k in range(2 * d - 2, d - 1, -1):
            c = raw[k] % q
            if c:
                # x^k = x^(k-d) * (x^d); x^d = -(f minus leading)
                for i in range(d):
                    raw[k - d + i] -= c * f[i]
            raw[k] = 0
        return tuple(v % q for v in raw[:d])

    def pow(self, a, e: int):
        if e < 0:
            return self.pow(self.inv(a), -e)
        result = self.one()
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def is_unit(self, a) -> bool:
        return self.try_inv(a) is not None

    def try_inv(self, a):
        """Inverse in the ring or None; valid for composite moduli."""
        d = self.degree
        q = self.modulus
        if d == 1:
            g = gcd(a[0], q)
            if g != 1:
                return None
            return (pow(a[0], -1, q),)
        # multiplication-by-a as a d x d matrix over Z/q; invert via adjugate
        cols = []
        basis = [tuple(1 if i == j else 0 for i in range(d)) for j in range(d)]
        for bj in basis:
            cols.append(self.mul(a, bj))
        m = [[cols[j][i] for j in range(d)] for i in range(d)]
        det = int_det(m) % q
        if gcd(det, q) != 1:
            return None
        det_inv = pow(det, -1, q)
        # adjugate via cofactors (desk-scale degree)
        adj = [[0] * d for _ in range(d)]
        for i in range(d):
            for j in range(d):
                sub = [[m[r][c] for c in range(d) if c != j]
                       for r in range(d) if r != i]
                co = int_det(sub) if sub else 1
                adj[j][i] = ((-1) ** (i + j)) * co % q
        one = [1 if i == 0 else 0 for i in range(d)]
        out = tuple(sum(adj[i][k] * one[k] for k in range(d)) * det_inv % q
                    for i in range(d))
        assert self.mul(a, out) == self.one()
        return out

    def inv(self, a):
        out = self.try_inv(a)
        if out is None:
            raise NotInvertible("ring element is not a unit")
        return out

    # -- matrices over the ring ----------------------------------------------

    def mat_identity(self, n: int):
        return tuple(tuple(self.one() if i == j else self.zero()
                           for j in range(n)) for i in range(n))

    def mat_mul(self, A, B):
        n = len(A)
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = self.zero()
                for k in range(n):
                    if any(A[i][k]):
                        acc = self.add(acc, self.mul(A[i][k], B[k][j]))
                row.append(acc)
            out.append(tuple(row))
        return tuple(out)

    def mat_det(self, A):
        n = len(A)
        if n == 1:
            return A[0][0]
        acc = self.zero()
        for j in range(n):
            sub = tuple(tuple(A[i][k] for k in range(n) if k != j)
                        for i in range(1, n))
            term = self.mul(A[0][j], self.mat_det(sub))
            if j % 2:
                term = self.neg(term)
            acc = self.add(acc, term)
        return acc

    def mat_inv(self, A):
        n = len(A)
        det = self.mat_det(A)
        det_inv = self.try_inv(det)
        if det_inv is None:
            raise NotInvertible("matrix determinant is not a unit")
        if n == 1:
            return ((det_inv,),)
        adj = [[self.zero()] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                sub = tuple(tuple(A[r][c] for c in range(n) if c != j)
                            for r in range(n) if r != i)
                co = self.mat_det(sub)
                if (i + j) % 2:
                    co = self.neg(co)
                adj[j][i] = co
        return tuple(tuple(self.mul(adj[i][j], det_inv) for j in range(n))
                     for i in range(n))

    def mat_key(self, A) -> bytes:
        """Canonical byte encoding: row-major coefficients, little-endian."""
        width = max(1, ((self.modulus - 1).bit_length() + 7) // 8)
        out = bytearray()
        for row in A:
            for e in row:
                for c in e:
                    out += int(c).to_bytes(width, "little")
        return bytes(out)


class ResidueMap:
    """Ring homomorphism from a number field's admissible elements onto a
    finite ring, sending the distinguished root to x."""

    __slots__ = ("source", "target", "denominator_set")

    def __init__(self, source: NumberField, target: FiniteRing, denominator_set):
        q = target.modulus
        for d in denominator_set:
            if gcd(int(d), q) != 1:
                raise ResidueUndefined(f"denominator {d} shares a factor with q={q}")
        guard = abs(source.discriminant)
        if guard > 1 and gcd(guard, q) != 1:
            raise ResidueUndefined(f"q={q} collides with the index guard {guard}")
        self.source = source
        self.target = target
        self.denominator_set = frozenset(int(d) for d in denominator_set)

    def element(self, e: FieldElement):
        if e.field != self.source:
            raise MixedFields("element outside the map's source field")
        q = self.target.modulus
        ring = self.target
        acc = ring.zero()
        xpow = ring.one()
        if ring.degree > 1:
            x = tuple(1 if i == 1 else 0 for i in range(ring.degree))
        else:
            # x reduces to the root of the (monic linear) defining polynomial
            x = ((-ring.defining_poly[0]) % q,)
        for i, c in enumerate(e.coords):
            if c != 0:
                den = c.denominator
                if gcd(den, q) != 1:
                    raise ResidueUndefined(
                        f"denominator {den} is not invertible mod {q}")
                val = c.numerator % q * pow(den, -1, q) % q
                acc = ring.add(acc, ring.mul(ring.from_int(val), xpow))
            if i + 1 < len(e.coords):
                xpow = ring.mul(xpow, x)
        return acc

    def rational(self, v) -> tuple:
        return self.element(self.source.from_rational(Fraction(v)))

    def matrix(self, M: Matrix):
        return tuple(tuple(self.element(e) for e in row) for row in M.entries)

    def quotient_by_factor(self, factor: IntPoly) -> "ResidueMap":
        """Compose with the quotient by a monic factor of f mod q."""
        return ResidueMap(self.source,
                          FiniteRing(self.target.modulus, factor),
                          self.denominator_set)

    def describe(self) -> dict:
        return {
            "modulus": self.target.modulus,
            "defining_poly": list(self.target.defining_poly),
            "denominators": sorted(self.denominator_set),
        }

    def __eq__(self, other):
        return (isinstance(other, ResidueMap) and self.source == other.source
                and self.target == other.target)

    def __hash__(self):
        return hash((self.source, self.target))

    def __repr__(self):
        return f"ResidueMap(q={self.target.modulus}, f={list(self.target.defining_poly)})"


def build_residue_map(K: NumberField, q: int, avoid=()) -> ResidueMap:
    """The projection of K's admissible elements onto Z[x]/(f, q).

    ``avoid`` lists integers whose prime factors must stay invertible; the
    discriminant of the minimal polynomial is enforced as an index guard.
    """
    if q < 2:
        raise ValueError("q must be at least 2")
    for d in avoid:
        if gcd(int(d), q) != 1:
            raise ResidueUndefined(f"q={q} shares a factor with avoided {d}")
    ring = FiniteRing(q, K.minimal_poly)
    return ResidueMap(K, ring, avoid)


class HomDescription:
    """A product homomorphism: a nonempty tuple of residue maps."""

    __slots__ = ("components",)

    def __init__(self, components):
        comps = tuple(components)
        if not comps:
            raise ValueError("a product homomorphism needs at least one component")
        src = comps[0].source
        for c in comps:
            if c.source != src:
                raise MixedFields("product homomorphism components disagree on the field")
        self.components = comps

    @property
    def source(self):
        return self.components[0].source

    def rings(self):
        return [c.target for c in self.components]

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


def product_hom(maps) -> HomDescription:
    """Concatenate homomorphisms; the kernel is the intersection of kernels."""
    comps = []
    for m in maps:
        if isinstance(m, HomDescription):
            comps.extend(m.components)
        else:
            comps.append(m)
    return HomDescription(comps)


def apply_matrix(hom, M: Matrix):
    """Componentwise entrywise image of an invertible matrix.

    The inverse must be admissible too; the product of both images is
    checked to be the identity, which certifies invertibility over every
    component ring.
    """
    if isinstance(hom, ResidueMap):
        hom = HomDescription([hom])
    Minv = M.inverse()
    images = []
    for comp in hom.components:
        img = comp.matrix(M)
        img_inv = comp.matrix(Minv)
        ring = comp.target
        if ring.mat_mul(img, img_inv) != ring.mat_identity(M.n):
            raise NotInvertible("image matrix is not invertible over the ring")
        images.append(img)
    return tuple(images)


class FiniteMatrixGroup:
    """Closure of a finite set of invertible matrices over a finite ring."""

    __slots__ = ("ring", "n", "elements", "generator_images")

    def __init__(self, ring: FiniteRing, n: int, elements, generator_images):
        self.ring = ring
        self.n = n
        self.elements = elements
        self.generator_images = tuple(generator_images)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, mat):
        return mat in self.elements

    def __repr__(self):
        return f"FiniteMatrixGroup(order={self.order}, q={self.ring.modulus})"


def closure_generic(identity, gens, mul, cap: int):
    """Breadth-first multiplicative closure; deterministic iteration order."""
    seen = {identity: None}
    queue = deque([identity])
    while queue:
        cur = queue.popleft()
        for g in gens:
            nxt = mul(cur, g)
            if nxt not in seen:
                if len(seen) >= cap:
                    raise CapExceeded(f"closure exceeded the cap {cap}")
                seen[nxt] = None
                queue.append(nxt)
    return list(seen)


def group_closure(ring: FiniteRing, gens, cap: int = 10 ** 6,
                  n: int | None = None) -> FiniteMatrixGroup:
    """Full closure under product (hence inverse: the set is finite)."""
    gens = [tuple(tuple(tuple(c) for c in row) for row in g) for g in gens]
    if n is None:
        if not gens:
            raise ValueError("matrix size needed when there are no generators")
        n = len(gens[0])
    for g in gens:
        ring.mat_inv(g)  # raises NotInvertible on a non-unit determinant
    elements = closure_generic(ring.mat_identity(n), gens, ring.mat_mul, cap)
    group = FiniteMatrixGroup(ring, n, set(elements), gens)
    return group


def closure_product(rings, gen_tuples, cap: int = 10 ** 6, n: int | None = None):
    """Closure of tuples of matrices over a list of component rings."""
    if n is None and gen_tuples:
        n = len(gen_tuples[0][0])
    identity = tuple(r.mat_identity(n) for r in rings)

    def mul(a, b):
        return tuple(r.mat_mul(x, y) for r, x, y in zip(rings, a, b))

    gens = [tuple(g) for g in gen_tuples]
    return set(closure_generic(identity, gens, mul, cap))
