"""Exact arithmetic substrate.

Arbitrary-precision integers and rationals (Python's ``int`` and
``fractions.Fraction``), univariate integer polynomials, integer matrices
with Smith normal form, lattice utilities built on it, and deterministic
polynomial factorization over prime fields.  Every operation is pure and
exact; nothing here ever rounds.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import gcd, isqrt

from .errors import NotPrime

# ---------------------------------------------------------------------------
# integers
# ---------------------------------------------------------------------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; the base set covers all n below 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_from(start: int):
    """Yield primes >= start in increasing order."""
    n = max(2, start)
    if n > 2 and n % 2 == 0:
        if n == 2:
            yield 2
        n += 1
    while True:
        if is_prime(n):
            yield n
        n += 1 if n == 2 else 2


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) >= 0 and a*x + b*y = g."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def lcm(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return abs(a // gcd(a, b) * b)


def factorint(n: int) -> dict[int, int]:
    """Prime factorization by trial division; desk-scale inputs only."""
    if n == 0:
        raise ValueError("cannot factor zero")
    n = abs(n)
    out: dict[int, int] = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 7
    inc = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while f * f <= n:
        if n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        else:
            f += inc[i % 8]
            i += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    phi = 1
    for p, e in factorint(n).items():
        phi *= (p - 1) * p ** (e - 1)
    return phi


# ---------------------------------------------------------------------------
# integer polynomials (ascending coefficients)
# ---------------------------------------------------------------------------

class IntPoly:
    """Univariate integer polynomial, coefficients ascending by degree.

    The zero polynomial has an empty coefficient tuple; otherwise the
    leading coefficient is nonzero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = list(coeffs)
        for v in c:
            if not isinstance(v, int):
                raise TypeError("IntPoly coefficients must be int")
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __eq__(self, other):
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPoly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                        for i in range(n)])

    def __neg__(self):
        return IntPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPoly([])
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return IntPoly(out)

    def evaluate(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPoly":
        return IntPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def reduce_mod(self, p: int) -> list[int]:
        out = [c % p for c in self.coeffs]
        while out and out[-1] == 0:
            out.pop()
        return out

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = gcd(g, c)
        return g

    def primitive(self) -> "IntPoly":
        g = self.content()
        if g == 0:
            return self
        if self.coeffs[-1] < 0:
            g = -g
        return IntPoly([c // g for c in self.coeffs])

    def __repr__(self):
        if self.is_zero:
            return "IntPoly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}*x^{i}" if i else str(c))
        return "IntPoly(" + " + ".join(terms) + ")"


# ---------------------------------------------------------------------------
# rational polynomials as plain Fraction lists (ascending)
# ---------------------------------------------------------------------------

def qp_trim(a: list[Fraction]) -> list[Fraction]:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def qp_degree(a) -> int:
    return len(a) - 1


def qp_add(a, b):
    n = max(len(a), len(b))
    return qp_trim([(a[i] if i < len(a) else Fraction(0))
                    + (b[i] if i < len(b) else Fraction(0)) for i in range(n)])


def qp_neg(a):
    return [-c for c in a]


def qp_sub(a, b):
    return qp_add(a, qp_neg(b))


def qp_scale(a, s):
    s = Fraction(s)
    return qp_trim([c * s for c in a])


def qp_mul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return qp_trim(out)


def qp_divmod(a, b):
    """Quotient and remainder in Q[x]; b must be nonzero."""
    b = qp_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = qp_trim(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    inv = 1 / b[-1]
    while len(r) >= len(b):
        c = r[-1] * inv
        k = len(r) - len(b)
        q[k] = c
        for i, bc in enumerate(b):
            r[k + i] -= c * bc
        r = qp_trim(r)
        if not r:
            break
    return qp_trim(q), r


def qp_mod(a, b):
    return qp_divmod(a, b)[1]


def qp_gcd(a, b):
    """Monic gcd in Q[x]."""
    a, b = qp_trim(a), qp_trim(b)
    while b:
        a, b = b, qp_mod(a, b)
    if a:
        a = qp_scale(a, 1 / a[-1])
    return a


def qp_xgcd(a, b):
    """(g, s, t) with s*a + t*b = g, g monic (or zero)."""
    r0, r1 = qp_trim(a), qp_trim(b)
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]
    while r1:
        q, r = qp_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, qp_sub(s0, qp_mul(q, s1))
        t0, t1 = t1, qp_sub(t0, qp_mul(q, t1))
    if r0:
        u = 1 / r0[-1]
        r0, s0, t0 = qp_scale(r0, u), qp_scale(s0, u), qp_scale(t0, u)
    return r0, s0, t0


def qp_derivative(a):
    return qp_trim([i * c for i, c in enumerate(a)][1:])


def qp_eval(a, x):
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def qp_squarefree_part(a):
    a = qp_trim(a)
    if qp_degree(a) <= 0:
        return a
    g = qp_gcd(a, qp_derivative(a))
    if qp_degree(g) <= 0:
        return qp_scale(a, 1 / a[-1])
    q, r = qp_divmod(a, g)
    assert not r
    return qp_scale(q, 1 / q[-1])


def qp_resultant(a, b) -> Fraction:
    """Resultant via the Euclidean recurrence; exact over Q."""
    a, b = qp_trim(a), qp_trim(b)
    if not a or not b:
        return Fraction(0)
    sign = 1
    res = Fraction(1)
    while True:
        da, db = qp_degree(a), qp_degree(b)
        if db == 0:
            return res * sign * b[0] ** da
        r = qp_mod(a, b)
        r = qp_trim(r)
        if not r:
            return Fraction(0)
        dr = qp_degree(r)
        res *= b[-1] ** (da - dr)
        if (da * db) % 2 == 1:
            sign = -sign
        a, b = b, r


def qp_clear_denominators(a) -> tuple[list[int], Fraction]:
    """Return (primitive integer coefficients, scale) with a = scale * ints."""
    a = qp_trim(a)
    if not a:
        return [], Fraction(1)
    den = 1
    for c in a:
        den = lcm(den, c.denominator)
    ints = [int(c * den) for c in a]
    g = 0
    for c in ints:
        g = gcd(g, c)
    if ints[-1] < 0:
        g = -g
    ints = [c // g for c in ints]
    return ints, Fraction(g, den)


def poly_discriminant(f: IntPoly) -> int:
    """Discriminant of an integer polynomial (1 for degree <= 1)."""
    n = f.degree
    if n <= 1:
        return 1
    fq = [Fraction(c) for c in f.coeffs]
    res = qp_resultant(fq, [Fraction(c) for c in f.derivative().coeffs])
    d = res / f.leading
    if n % 4 in (2, 3):
        d = -d
    assert d.denominator == 1
    return int(d)


# ---------------------------------------------------------------------------
# integer matrices and Smith normal form
# ---------------------------------------------------------------------------

class IntMatrix:
    """Rectangular integer matrix with positive dimensions."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = [tuple(int(v) for v in r) for r in entries]
        if not rows or not rows[0]:
            raise ValueError("IntMatrix dimensions must be positive")
        w = len(rows[0])
        if any(len(r) != w for r in rows):
            raise ValueError("IntMatrix rows must have equal length")
        self.entries = tuple(rows)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __mul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        bt = list(zip(*other.entries))
        return IntMatrix([[sum(a * b for a, b in zip(row, col)) for col in bt]
                          for row in self.entries])

    def transpose(self) -> "IntMatrix":
        return IntMatrix(list(zip(*self.entries)))

    def to_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def __repr__(self):
        return f"IntMatrix({self.to_lists()})"


def int_det(rows: list[list[int]]) -> int:
    """Determinant of a square integer matrix, fraction-free Bareiss."""
    a = [list(r) for r in rows]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant needs a square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def smith_normal_form(A: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (D, U, V) with U*A*V = D, D diagonal, d1 | d2 | ..., U, V unimodular.

    Elementary row/column reduction with pivot-by-minimal-absolute-value;
    intermediate growth is contained by always reducing against the current
    pivot.
    """
    m, n = A.rows, A.cols
    a = A.to_lists()
    U = IntMatrix.identity(m).to_lists()
    V = IntMatrix.identity(n).to_lists()

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def addmul_row(i, j, c):
        # row i += c * row j
        a[i] = [x + c * y for x, y in zip(a[i], a[j])]
        U[i] = [x + c * y for x, y in zip(U[i], U[j])]

    def addmul_col(i, j, c):
        # col i += c * col j
        for r in a:
            r[i] += c * r[j]
        for r in V:
            r[i] += c * r[j]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the trailing block
        piv = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = a[i][j]
                if v != 0 and (best is None or abs(v) < best):
                    best = abs(v)
                    piv = (i, j)
        if piv is None:
            break
        if piv != (t, t):
            if piv[0] != t:
                swap_rows(t, piv[0])
            if piv[1] != t:
                swap_cols(t, piv[1])
        while True:
            restart = False
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    if q:
                        addmul_row(i, t, -q)
                    if a[i][t]:
                        swap_rows(t, i)  # strictly smaller pivot
                        restart = True
                        break
            if restart:
                continue
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    if q:
                        addmul_col(j, t, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        restart = True
                        break
            if restart:
                continue
            # divisibility: the pivot must divide the trailing block
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if a[i][j] % a[t][t]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            addmul_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1

    D = [[a[i][j] if i == j else 0 for j in range(n)] for i in range(m)]
    return IntMatrix(D), IntMatrix(U), IntMatrix(V)


def lattice_kernel(A: IntMatrix) -> list[list[int]]:
    """Basis of the integer kernel {v : A v = 0}, via Smith normal form."""
    D, _U, V = smith_normal_form(A)
    m, n = A.rows, A.cols
    rank = sum(1 for i in range(min(m, n)) if D.entries[i][i] != 0)
    basis = []
    for j in range(rank, n):
        v = [V.entries[i][j] for i in range(n)]
        assert all(sum(A.entries[r][i] * v[i] for i in range(n)) == 0
                   for r in range(m))
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# lattices as row lists in Z^m
# ---------------------------------------------------------------------------

def hnf(rows: list[list[int]], m: int) -> list[list[int]]:
    """Canonical row Hermite normal form of the lattice spanned by ``rows``."""
    work = [list(r) for r in rows if any(r)]
    res: list[list[int]] = []
    for col in range(m):
        keep = []
        piv = None
        for r in work:
            if r[col] == 0:
                keep.append(r)
            elif piv is None:
                piv = r
            else:
                g, s, t = xgcd(piv[col], r[col])
                u, v = piv[col] // g, r[col] // g
                new_piv = [s * x + t * y for x, y in zip(piv, r)]
                new_r = [-v * x + u * y for x, y in zip(piv, r)]
                piv, r = new_piv, new_r
                keep.append(r)
        if piv is not None:
            if piv[col] < 0:
                piv = [-x for x in piv]
            res.append(piv)
        work = keep
    # reduce entries above each pivot into [0, pivot)
    for k in range(len(res) - 1, -1, -1):
        c = next(i for i, v in enumerate(res[k]) if v)
        p = res[k][c]
        for i in range(k):
            q = res[i][c] // p
            if q:
                res[i] = [x - q * y for x, y in zip(res[i], res[k])]
    return res


def lattices_equal(r1, r2, m) -> bool:
    return hnf(r1, m) == hnf(r2, m)


def solve_left(rows: list[list[int]], target: list[int]) -> list[int] | None:
    """Solve x * rows = target over the integers; None when unsolvable."""
    if not rows:
        return [] if not any(target) else None
    k, m = len(rows), len(rows[0])
    D, U, V = smith_normal_form(IntMatrix(rows))
    s = [sum(target[i] * V.entries[i][j] for i in range(m)) for j in range(m)]
    y = [0] * k
    for j in range(m):
        d = D.entries[j][j] if j < k else 0
        if d:
            if s[j] % d:
                return None
            y[j] = s[j] // d
        elif s[j]:
            return None
    x = [sum(y[i] * U.entries[i][j] for i in range(k)) for j in range(k)]
    assert all(sum(x[i] * rows[i][j] for i in range(k)) == target[j]
               for j in range(m))
    return x


def lattice_member(rows, v) -> bool:
    return solve_left(rows, list(v)) is not None


def lattice_sum(r1, r2, m):
    return hnf(list(r1) + list(r2), m)


def lattice_intersect(r1, r2, m):
    """Basis of the intersection of two row lattices in Z^m."""
    r1 = hnf(r1, m)
    r2 = hnf(r2, m)
    if not r1 or not r2:
        return []
    stacked = [list(r) for r in r1] + [[-x for x in r] for r in r2]
    # left kernel of `stacked` = right kernel of its transpose
    ker = lattice_kernel(IntMatrix([list(col) for col in zip(*stacked)]))
    out = []
    k1 = len(r1)
    for w in ker:
        vec = [sum(w[i] * r1[i][j] for i in range(k1)) for j in range(m)]
        if any(vec):
            out.append(vec)
    return hnf(out, m)


def lattice_divide(rows, w: int, m):
    """Basis of {e in Z^m : w*e in L}."""
    if w == 1:
        return hnf(rows, m)
    scaled = [[w if i == j else 0 for j in range(m)] for i in range(m)]
    inter = lattice_intersect(rows, scaled, m)
    return hnf([[x // w for x in r] for r in inter], m)


def lattice_index_in_zm(rows, m) -> int:
    """Index [Z^m : L]; 0 when the lattice has rank below m."""
    if not rows:
        return 0 if m > 0 else 1
    D, _, _ = smith_normal_form(IntMatrix(rows))
    idx = 1
    for j in range(m):
        d = D.entries[j][j] if j < D.rows else 0
        if d == 0:
            return 0
        idx *= d
    return idx


def int_matrix_inverse(rows: list[list[int]]) -> list[list[int]]:
    """Inverse of a unimodular integer matrix (exact, via rational Gauss)."""
    n = len(rows)
    a = [[Fraction(v) for v in r] + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, r in enumerate(rows)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [v * inv for v in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [v - f * w for v, w in zip(a[i], a[c])]
    out = [[v for v in r[n:]] for r in a]
    assert all(v.denominator == 1 for r in out for v in r)
    return [[int(v) for v in r] for r in out]


def snf_quotient(rows, m) -> tuple[list[tuple[int, list[int]]], list[list[int]]]:
    """Structure of Z^m / L for the row lattice L.

    Returns (torsion, free) where torsion is a list of (order, generator
    vector) with order > 1 and free is a list of generator vectors of the
    free part; generator vectors are exponent rows in Z^m.
    """
    rows = [r for r in rows if any(r)]
    if not rows:
        eye = IntMatrix.identity(m).to_lists()
        return [], [eye[i] for i in range(m)]
    D, _U, V = smith_normal_form(IntMatrix(rows))
    vinv = int_matrix_inverse(V.to_lists())
    torsion = []
    free = []
    k = len(rows)
    for j in range(m):
        d = D.entries[j][j] if j < k else 0
        gen = list(vinv[j])
        if d == 0:
            free.append(gen)
        elif d > 1:
            torsion.append((d, gen))
    return torsion, free


# ---------------------------------------------------------------------------
# polynomials over F_p (plain int lists, ascending)
# ---------------------------------------------------------------------------

def pp_trim(a, p):
    a = [c % p for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def pp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    while out and out[-1] == 0:
        out.pop()
    return out


def pp_divmod(a, b, p):
    if not b:
        raise ZeroDivisionError
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        k = len(a) - len(b)
        q[k] = c
        for i, bc in enumerate(b):
            a[k + i] = (a[k + i] - c * bc) % p
        while a and a[-1] == 0:
            a.pop()
    return q, a


def pp_monic(a, p):
    if not a:
        return a
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def pp_gcd(a, b, p):
    a, b = pp_trim(a, p), pp_trim(b, p)
    while b:
        a, b = b, pp_divmod(a, b, p)[1]
    return pp_monic(a, p)


def pp_pow_mod(base, e, mod, p):
    result = [1]
    base = pp_divmod(base, mod, p)[1]
    while e:
        if e & 1:
            result = pp_divmod(pp_mul(result, base, p), mod, p)[1]
        base = pp_divmod(pp_mul(base, base, p), mod, p)[1]
        e >>= 1
    return result


def pp_deriv(a, p):
    return pp_trim([i * c for i, c in enumerate(a)][1:], p)


def _pp_squarefree_decomposition(f, p):
    """Yun decomposition over F_p; f monic. Returns [(g, multiplicity)]."""
    out = []
    d = pp_deriv(f, p)
    if not d:
        # f = v(x^p); take the p-th root (Frobenius fixes F_p coefficients)
        v = [f[i] for i in range(0, len(f), p)]
        for g, e in _pp_squarefree_decomposition(pp_monic(v, p), p):
            out.append((g, e * p))
        return out
    c = pp_gcd(f, d, p)
    w = pp_divmod(f, c, p)[0]
    i = 1
    while len(w) > 1:
        y = pp_gcd(w, c, p)
        fac = pp_divmod(w, y, p)[0]
        if len(fac) > 1:
            out.append((pp_monic(fac, p), i))
        w = y
        c = pp_divmod(c, y, p)[0]
        i += 1
    if len(c) > 1:
        v = [c[j] for j in range(0, len(c), p)]
        for g, e in _pp_squarefree_decomposition(pp_monic(v, p), p):
            out.append((g, e * p))
    return out


def _pp_distinct_degree(f, p):
    """Split squarefree monic f into products of equal-degree factors."""
    out = []
    h = [0, 1]  # x
    g = list(f)
    d = 0
    while len(g) - 1 >= 2 * (d + 1):
        d += 1
        h = pp_pow_mod(h, p, g, p)
        sub = list(h) if h else [0]
        while len(sub) < 2:
            sub.append(0)
        sub[1] = (sub[1] - 1) % p  # h - x
        sub = pp_trim(sub, p)
        gd = pp_gcd(sub, g, p)
        if len(gd) > 1:
            out.append((gd, d))
            g = pp_divmod(g, gd, p)[0]
            h = pp_divmod(h, g, p)[1]
    if len(g) > 1:
        out.append((g, len(g) - 1))
    return out


def _pp_equal_degree(f, d, p, rng):
    """Cantor-Zassenhaus splitting of monic squarefree f (all factors degree d)."""
    n = len(f) - 1
    if n == d:
        return [f]
    while True:
        r = [rng.randrange(p) for _ in range(n)]
        r = pp_trim(r, p)
        if len(r) < 2:
            continue
        if p == 2:
            t = list(r)
            acc = list(r)
            for _ in range(d - 1):
                acc = pp_pow_mod(acc, 2, f, p)
                t = pp_trim([x + y for x, y in
                             zip(t + [0] * len(acc), acc + [0] * len(t))], p)
            g = pp_gcd(t, f, p)
        else:
            t = pp_pow_mod(r, (p ** d - 1) // 2, f, p)
            t = list(t) if t else [0]
            t[0] = (t[0] - 1) % p
            g = pp_gcd(pp_trim(t, p), f, p)
        if 0 < len(g) - 1 < n:
            rest = pp_divmod(f, g, p)[0]
            return (_pp_equal_degree(g, d, p, rng)
                    + _pp_equal_degree(rest, d, p, rng))


def factor_mod_p(f: IntPoly, p: int) -> list[tuple[IntPoly, int]]:
    """Factor f modulo a prime p into monic irreducibles with multiplicities.

    Deterministic: the equal-degree splitting runs on a fixed seed and the
    output is sorted by degree, then by coefficient sequence.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    fp = f.reduce_mod(p)
    if not fp:
        raise ValueError("polynomial vanishes mod p")
    if len(fp) == 1:
        return []
    fp = pp_monic(fp, p)
    rng = random.Random(987654321 + p)
    out = []
    for g, e in _pp_squarefree_decomposition(fp, p):
        for h, d in _pp_distinct_degree(g, p):
            for irr in _pp_equal_degree(h, d, p, rng):
                out.append((IntPoly(irr), e))
    out.sort(key=lambda t: (t[0].degree, t[0].coeffs))
    return out
