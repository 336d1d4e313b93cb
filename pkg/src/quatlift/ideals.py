"""Left ideals of quaternion orders: class sets, suborders, subideals.

Ideal equivalence, unit counts and the height pairing are all exact.
Locally principal lattices are recognized through the volume test
[O : a] = n(a)^2 together with left stability; the class-set search is
certified by the Eichler mass identity  sum_i 1/|O_r(a_i)^x| = (p-1)/24.
"""

from collections import Counter
from fractions import Fraction
from math import gcd, isqrt

from .numtheory import is_prime, legendre
from .qalg import Order, QAlgebra, QuatElement, QuatLattice, is_order


# ---------------------------------------------------------------------------
# exact short-vector enumeration


def _cholesky(gram):
    """Rational Cholesky data (q_i, u_ij) for q(x) = sum q_i (x_i + sum u_ij x_j)^2."""
    n = len(gram)
    A = [[Fraction(gram[r][c]) for c in range(n)] for r in range(n)]
    q = [Fraction(0)] * n
    u = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        q[i] = A[i][i]
        if q[i] <= 0:
            raise ArithmeticError("form is not positive definite")
        for j in range(i + 1, n):
            u[i][j] = A[i][j] / q[i]
        for r in range(i + 1, n):
            for c in range(r, n):
                A[r][c] -= A[r][i] * A[i][c] / q[i]
                A[c][r] = A[r][c]
    return q, u


def enumerate_quadratic(gram, bound, yield_value=False):
    """All nonzero integer vectors x with q(x) <= bound, up to sign.

    gram is the matrix of the bilinear form 2*q; exact rational arithmetic,
    emitted as (vector, value) when yield_value else vector.
    """
    n = len(gram)
    half = [[Fraction(gram[r][c], 2) for c in range(n)] for r in range(n)]
    q, u = _cholesky(half)
    bound = Fraction(bound)
    x = [0] * n
    out = []

    def recurse(i, rem, shifts):
        # shifts[i] = sum_{j>i} u_ij x_j already fixed
        s = shifts[i]
        if rem < 0:
            return
        # float window, then exact boundary checks
        import math
        r = math.sqrt(float(rem / q[i])) if rem > 0 else 0.0
        lo = math.floor(-float(s) - r) - 1
        hi = math.ceil(-float(s) + r) + 1
        for xi in range(lo, hi + 1):
            t = q[i] * (xi + s) ** 2
            if t > rem:
                continue
            x[i] = xi
            if i == 0:
                if any(x):
                    vec = tuple(x)
                    # keep one representative per +-pair: first nonzero > 0
                    for v in vec:
                        if v:
                            keep = v > 0
                            break
                    if keep:
                        out.append((vec, bound - rem + t) if yield_value else vec)
            else:
                new_shifts = shifts[:]
                for t2 in range(i):
                    new_shifts[t2] = new_shifts[t2] + u[t2][i] * xi
                recurse(i - 1, rem - t, new_shifts)
        x[i] = 0

    recurse(n - 1, bound, [Fraction(0)] * n)
    return out


def vectors_of_norm(L: QuatLattice, value) -> list[QuatElement]:
    """Lattice elements of reduced norm exactly `value` (both signs included)."""
    value = Fraction(value)
    gram = L.norm_gram()
    bas = L.basis()
    found = []
    for vec, val in enumerate_quadratic(gram, value, yield_value=True):
        if val == value:
            e = QuatElement(L.alg, (0, 0, 0, 0))
            for c, b in zip(vec, bas):
                if c:
                    e = e + b * c
            found.append(e)
            found.append(-e)
    return found


def unit_count(O: Order) -> int:
    """Number of norm-1 elements of the order; always even."""
    return len(vectors_of_norm(O.lattice, 1))


# ---------------------------------------------------------------------------
# left ideals


def _inverse_rows(L: QuatLattice):
    """Exact inverse of the basis matrix of L, as Fraction rows."""
    from .qalg import _adjugate4

    adj = _adjugate4([list(r) for r in L.mat])
    det = 1
    for t in range(4):
        det *= L.mat[t][t]
    return [[Fraction(L.den * adj[r][c], det) for c in range(4)] for r in range(4)]


def right_transporter(L: QuatLattice) -> QuatLattice:
    """The lattice {x in H : L x <= L}."""
    alg = L.alg
    basis = L.basis()
    binv = _inverse_rows(L)
    units = [alg.one, alg.i, alg.j, alg.k]
    rows = []
    for b in basis:
        cols = [(b * e).c for e in units]  # cols[c] = coords of b * e_c
        for l in range(4):
            rows.append([sum(cols[c][t] * binv[t][l] for t in range(4)) for c in range(4)])
    span = QuatLattice.from_rows(alg, rows)
    return span.dual_rows()


class LeftIdeal:
    """A locally principal left O-lattice with cached norm and right order."""

    __slots__ = ("left_order", "lattice", "_norm", "_right_order")

    def __init__(self, left_order: Order, lattice: QuatLattice):
        self.left_order = left_order
        self.lattice = lattice
        self._norm = None
        self._right_order = None

    @classmethod
    def principal(cls, O: Order, x: QuatElement) -> "LeftIdeal":
        return cls(O, O.lattice.mul_right(x))

    @property
    def norm(self) -> Fraction:
        if self._norm is None:
            self._norm = self.lattice.lattice_norm()
        return self._norm

    @property
    def right_order(self) -> Order:
        if self._right_order is None:
            self._right_order = Order(right_transporter(self.lattice), check=False)
        return self._right_order

    def is_locally_principal(self) -> bool:
        """Volume criterion: [O : a] = n(a)^2, plus left stability."""
        if self.lattice.index_in(self.left_order.lattice) != self.norm ** 2:
            return False
        ob = self.left_order.lattice.basis()
        ab = self.lattice.basis()
        return all((g * x) in self.lattice for g in ob for x in ab)

    def mul_right(self, x: QuatElement) -> "LeftIdeal":
        return LeftIdeal(self.left_order, self.lattice.mul_right(x))

    def __eq__(self, other):
        return (isinstance(other, LeftIdeal) and self.left_order == other.left_order
                and self.lattice == other.lattice)

    def __hash__(self):
        return hash((self.left_order.lattice, self.lattice))

    def __repr__(self):
        return f"LeftIdeal(n={self.norm}, {self.lattice!r})"


def equivalent(a: LeftIdeal, b: LeftIdeal) -> QuatElement | None:
    """Witness x with a = b x when the classes agree, else None."""
    if a.left_order != b.left_order:
        raise ValueError("ideals with distinct left orders")
    target = a.norm * b.norm
    pair = b.lattice.conj().mul_lattice(a.lattice)
    for y in vectors_of_norm(pair, target):
        x = y / b.norm
        if b.lattice.mul_right(x) == a.lattice:
            return x
    return None


# ---------------------------------------------------------------------------
# class sets


class ClassSet:
    """Complete set of left ideal class representatives for an order."""

    def __init__(self, order: Order, reps: list[LeftIdeal]):
        self.order = order
        self.reps = reps
        self.unit_orders = [unit_count(a.right_order) for a in reps]

    def __len__(self):
        return len(self.reps)

    def mass(self) -> Fraction:
        return sum((Fraction(1, u) for u in self.unit_orders), Fraction(0))

    def class_index(self, a: LeftIdeal) -> int:
        for t, rep in enumerate(self.reps):
            if equivalent(a, rep) is not None:
                return t
        raise ValueError("ideal not equivalent to any representative")

    def vector(self, coords) -> "ModuleVector":
        return ModuleVector(self, coords)

    def basis_vector(self, t: int) -> "ModuleVector":
        coords = [Fraction(0)] * len(self.reps)
        coords[t] = Fraction(1)
        return ModuleVector(self, coords)


class ModuleVector:
    """Vector in the free module on the ideal classes, exact coordinates."""

    __slots__ = ("class_set", "coords")

    def __init__(self, class_set: ClassSet, coords):
        self.class_set = class_set
        self.coords = tuple(Fraction(c) for c in coords)

    def __add__(self, other):
        self._check(other)
        return ModuleVector(self.class_set, [x + y for x, y in zip(self.coords, other.coords)])

    def __sub__(self, other):
        self._check(other)
        return ModuleVector(self.class_set, [x - y for x, y in zip(self.coords, other.coords)])

    def __mul__(self, s):
        return ModuleVector(self.class_set, [c * Fraction(s) for c in self.coords])

    __rmul__ = __mul__

    def _check(self, other):
        if self.class_set is not other.class_set:
            raise ValueError("vectors over different class sets")

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def __eq__(self, other):
        return (isinstance(other, ModuleVector) and self.class_set is other.class_set
                and self.coords == other.coords)

    def __repr__(self):
        return f"ModuleVector{self.coords}"


def height(v: ModuleVector, w: ModuleVector) -> Fraction:
    """Height pairing: sum_i v_i w_i |O_r(a_i)^x| / 2."""
    v._check(w)
    us = v.class_set.unit_orders
    return sum((x * y * Fraction(u, 2) for x, y, u in zip(v.coords, w.coords, us)),
               Fraction(0))


def _fp_rref(rows, p):
    """Row-reduce over F_p; returns (reduced rows, pivot columns)."""
    rows = [[v % p for v in r] for r in rows]
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((t for t in range(r, len(rows)) if rows[t][c] % p), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [v * inv % p for v in rows[r]]
        for t in range(len(rows)):
            if t != r and rows[t][c]:
                f = rows[t][c]
                rows[t] = [(a - f * b) % p for a, b in zip(rows[t], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _subspaces_dim2(q):
    """All RREF bases of 2-dimensional subspaces of F_q^4."""
    subs = []
    for p1 in range(4):
        for p2 in range(p1 + 1, 4):
            free1 = [c for c in range(p1 + 1, 4) if c != p2]
            free2 = [c for c in range(p2 + 1, 4)]
            nfree = len(free1) + len(free2)
            for code in range(q ** nfree):
                vals = []
                c2 = code
                for _ in range(nfree):
                    vals.append(c2 % q)
                    c2 //= q
                r1 = [0] * 4
                r2 = [0] * 4
                r1[p1] = 1
                r2[p2] = 1
                for t, c in enumerate(free1):
                    r1[c] = vals[t]
                for t, c in enumerate(free2):
                    r2[c] = vals[len(free1) + t]
                subs.append((r1, r2))
    return subs


def _action_matrices(gens: list[QuatElement], L: QuatLattice):
    """Integer matrices C with row t of C_g = coordinates of g*b_t in the basis of L."""
    mats = []
    bas = L.basis()
    for g in gens:
        rows = []
        for b in bas:
            coords = L.coords_of(g * b)
            if coords is None:
                raise ArithmeticError("lattice not stable under claimed left order")
            rows.append(coords)
        mats.append(rows)
    return mats


def _lattice_from_subspace(a: LeftIdeal, rows_modp: list[list[int]], p: int) -> QuatLattice:
    """Sublattice of a spanned by p*a and lifts of the given F_p row span."""
    bas = a.lattice.basis()
    gens = []
    for b in bas:
        gens.append((b * p).c)
    for w in rows_modp:
        e = QuatElement(a.lattice.alg, (0, 0, 0, 0))
        for c, b in zip(w, bas):
            if c % p:
                e = e + b * (c % p)
        gens.append(e.c)
    return QuatLattice.from_rows(a.lattice.alg, gens)


def norm_q_neighbors(a: LeftIdeal, q: int) -> list[LeftIdeal]:
    """Integral left ideals of norm q*n(a) inside a (index q^2 sublattices)."""
    O = a.left_order
    mats = _action_matrices(O.lattice.basis(), a.lattice)
    out = []
    for r1, r2 in _subspaces_dim2(q):
        # stability of the span under every action matrix, over F_q
        w = [r1, r2]
        ok = True
        for C in mats:
            for row in w:
                img = [sum(row[t] * C[t][c] for t in range(4)) % q for c in range(4)]
                red, _ = _fp_rref(w + [img], q)
                if len(red) > 2:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        lat = _lattice_from_subspace(a, [r1, r2], q)
        b = LeftIdeal(O, lat)
        if b.norm != q * a.norm:
            continue
        if b.lattice.index_in(a.lattice) != q * q:
            continue
        if not b.is_locally_principal():
            continue
        out.append(b)
    return out


def class_set(O: Order, p: int, q_bound: int = 50) -> ClassSet:
    """Class set of a maximal order of disc p, by neighbor search.

    Terminates exactly when the mass identity sum 1/|O_r^x| = (p-1)/24 holds.
    """
    target = Fraction(p - 1, 24)
    reps = [LeftIdeal(O, O.lattice)]
    cs_mass = Fraction(1, unit_count(reps[0].right_order))
    q = 2
    while cs_mass != target:
        if cs_mass > target:
            raise ArithmeticError("mass identity overshot: enumeration bug")
        q += 1
        while not is_prime(q) or (2 * p) % q == 0:
            q += 1
        if q > q_bound:
            raise ArithmeticError(f"mass not reached with neighbor primes up to {q_bound}")
        frontier = list(reps)
        while frontier and cs_mass != target:
            a = frontier.pop()
            for b in norm_q_neighbors(a, q):
                if all(equivalent(b, r) is None for r in reps):
                    reps.append(b)
                    frontier.append(b)
                    cs_mass += Fraction(1, unit_count(b.right_order))
                    if cs_mass == target:
                        break
    reps.sort(key=lambda r: (r.norm, r.lattice.den, r.lattice.mat))
    return ClassSet(O, reps)


# ---------------------------------------------------------------------------
# the index-p suborder tower


def suborder_tilde(O: Order, p: int) -> Order:
    """The unique index-p suborder {x in O : p | normx(x)} of a maximal order."""
    bas = O.lattice.basis()
    vals = [[0] * 4 for _ in range(4)]
    for r in range(4):
        for c in range(4):
            v = Fraction((bas[r] + bas[c]).normx() - bas[r].normx() - bas[c].normx(), 2) \
                if r != c else bas[r].normx()
            vals[r][c] = v
    # solutions of normx = 0 mod p among coordinate vectors
    sols = []
    for y0 in range(p):
        for y1 in range(p):
            for y2 in range(p):
                for y3 in range(p):
                    y = (y0, y1, y2, y3)
                    q = 0
                    for r in range(4):
                        q += vals[r][r] * y[r] * y[r]
                        for c in range(r + 1, 4):
                            q += 2 * vals[r][c] * y[r] * y[c]
                    if Fraction(q).numerator % p == 0:
                        sols.append(list(y))
    if len(sols) != p ** 3:
        raise ArithmeticError("normx kernel mod p does not have index p")
    red, _ = _fp_rref(sols, p)
    rows = [(b * p).c for b in bas]
    for w in red:
        e = QuatElement(O.alg, (0, 0, 0, 0))
        for c, b in zip(w, bas):
            if c:
                e = e + b * c
        rows.append(e.c)
    Ot = Order(QuatLattice.from_rows(O.alg, rows))
    if Ot.lattice.index_in(O.lattice) != p:
        raise ArithmeticError("tilde suborder does not have index p")
    return Ot


def order_sign(Oprime: Order, O: Order, p: int) -> int:
    """Sign of an index-p suborder of the tilde order: the Legendre symbol of
    -normx(x)/p mod p for x in O' outside Z + pO."""
    L0 = QuatLattice.from_rows(O.alg, [(1, 0, 0, 0)] + [(b * p).c for b in O.lattice.basis()])
    obas = O.lattice.basis()
    candidates = []
    for x in Oprime.lattice.basis():
        if x in L0:
            continue
        candidates.append(x)
        candidates.extend(x + obas[t] * (s * p) for t in range(4) for s in (1, 2))
    for y in candidates:
        v = -y.normx()
        if v.denominator != 1:
            continue
        v = int(v)
        if v % p == 0 and (v // p) % p != 0:
            return legendre(v // p, p)
    raise ArithmeticError("sign of suborder undefined (normx always divisible by p^2)")


def suborders_sigma(Ot: Order, O: Order, p: int) -> list[tuple[Order, int]]:
    """The p+1 orders strictly between Z + pO and the tilde order, with signs."""
    alg = O.alg
    L0 = QuatLattice.from_rows(alg, [(1, 0, 0, 0)] + [(b * p).c for b in O.lattice.basis()])
    tb = Ot.lattice.basis()
    # relation matrix of L0 in the tilde basis
    rel = []
    for b in L0.basis():
        coords = Ot.lattice.coords_of(b)
        if coords is None:
            raise ArithmeticError("Z + pO not contained in tilde order")
        rel.append(coords)
    from .qalg import _hnf
    D = _hnf(rel, 4)
    gens = [t for t in range(4) if D[t][t] == p]
    if len(gens) != 2 or any(D[t][t] not in (1, p) for t in range(4)):
        raise ArithmeticError("tilde/(Z+pO) is not elementary of rank 2")
    w1, w2 = tb[gens[0]], tb[gens[1]]
    candidates = [w2] + [w1 + w2 * t for t in range(p)]
    out = []
    for x in candidates:
        rows = [r[:] for r in [[Fraction(v, L0.den) for v in row] for row in L0.mat]]
        rows.append(list(x.c))
        Op = Order(QuatLattice.from_rows(alg, rows))
        if Op.lattice.index_in(Ot.lattice) != p:
            raise ArithmeticError("suborder candidate of wrong index")
        out.append((Op, order_sign(Op, O, p)))
    plus = sum(1 for _, s in out if s == 1)
    if len(out) != p + 1 or plus != (p + 1) // 2:
        raise ArithmeticError("suborders do not split evenly by sign")
    out.sort(key=lambda t: (-t[1], t[0].lattice.den, t[0].lattice.mat))
    return out


def _common_eigencovectors(mats, p: int) -> list[tuple[int, ...]]:
    """Projective column vectors phi with C phi in span(phi) for every C.

    Candidate spaces are refined generator by generator; within a space
    spanned by the rows of V, phi = V^T s is an eigenvector of C for the
    eigenvalue lam iff (C - lam) V^T s = 0.
    """
    spaces = [[[1 if r == c else 0 for c in range(4)] for r in range(4)]]
    for C in mats:
        new_spaces = []
        for V in spaces:
            k = len(V)
            for lam in range(p):
                mat = []
                for r in range(4):
                    mat.append([
                        (sum(C[r][c] * V[t][c] for c in range(4)) - lam * V[t][r]) % p
                        for t in range(k)
                    ])
                red, piv = _fp_rref(mat, p)
                sols = []
                for f in (c for c in range(k) if c not in piv):
                    s = [0] * k
                    s[f] = 1
                    for t, c in enumerate(piv):
                        s[c] = (-red[t][f]) % p
                    sols.append(s)
                if not sols:
                    continue
                W = [[sum(s[t] * V[t][c] for t in range(k)) % p for c in range(4)]
                     for s in sols]
                red2, _ = _fp_rref(W, p)
                if red2:
                    new_spaces.append(red2)
        spaces = new_spaces
    seen = set()
    out = []
    for V in spaces:
        k = len(V)
        if k == 1:
            vecs = [V[0]]
        else:
            vecs = []
            for code in range(1, p ** k):
                s, c2 = [], code
                for _ in range(k):
                    s.append(c2 % p)
                    c2 //= p
                vecs.append([sum(s[t] * V[t][c] for t in range(k)) % p for c in range(4)])
        for v in vecs:
            pivot = next((t for t in range(4) if v[t]), None)
            if pivot is None:
                continue
            inv = pow(v[pivot], -1, p)
            vn = tuple(x * inv % p for x in v)
            if vn not in seen:
                seen.add(vn)
                out.append(vn)
    return out


def subideals(a: LeftIdeal, Oprime: Order, p: int) -> list[LeftIdeal]:
    """Index-p sublattices of a that are locally principal left O'-ideals
    of the same norm, for O' one step down the index-p tower."""
    mats = _action_matrices(Oprime.lattice.basis(), a.lattice)
    phis = _common_eigencovectors(mats, p)
    out = []
    for phi in phis:
        # hyperplane y . phi = 0 in a/pa
        red, piv = _fp_rref([list(phi)], p)
        pivcol = piv[0]
        basis = []
        for c in range(4):
            if c == pivcol:
                continue
            v = [0] * 4
            v[c] = 1
            v[pivcol] = (-red[0][c]) % p
            basis.append(v)
        lat = _lattice_from_subspace(a, basis, p)
        b = LeftIdeal(Oprime, lat)
        if b.norm != a.norm:
            continue
        if b.lattice.index_in(a.lattice) != p:
            continue
        if not b.is_locally_principal():
            continue
        out.append(b)
    out.sort(key=lambda b: (b.lattice.den, b.lattice.mat))
    return out


def chi_sign(b: LeftIdeal, p: int) -> int:
    """Legendre symbol of n(x)/n(b) mod p for x in b with p not dividing it."""
    nb = b.norm
    bound = 4 * nb
    while bound <= 4096 * nb:
        for x in vectors_of_norm_up_to(b.lattice, bound):
            ratio = x.norm() / nb
            if ratio.denominator == 1 and int(ratio) % p != 0:
                return legendre(int(ratio), p)
        bound *= 4
    raise ArithmeticError("no element with norm ratio prime to p found")


def vectors_of_norm_up_to(L: QuatLattice, bound) -> list[QuatElement]:
    gram = L.norm_gram()
    bas = L.basis()
    out = []
    for vec in enumerate_quadratic(gram, Fraction(bound)):
        e = QuatElement(L.alg, (0, 0, 0, 0))
        for c, b in zip(vec, bas):
            if c:
                e = e + b * c
        out.append(e)
    return out


def tilde_class_set(cs: ClassSet, Ot: Order, p: int) -> tuple[ClassSet, list[Counter]]:
    """Class set for the tilde order plus, per parent class, the multiset of
    tilde classes among its subideals (the data of the summation map)."""
    reps: list[LeftIdeal] = []
    multisets: list[Counter] = []
    for a in cs.reps:
        subs = subideals(a, Ot, p)
        counter: Counter = Counter()
        for b in subs:
            idx = None
            for t, r in enumerate(reps):
                if equivalent(b, r) is not None:
                    idx = t
                    break
            if idx is None:
                reps.append(b)
                idx = len(reps) - 1
            counter[idx] += 1
        multisets.append(counter)
    order_key = sorted(range(len(reps)),
                       key=lambda t: (reps[t].norm, reps[t].lattice.den, reps[t].lattice.mat))
    rank = {old: new for new, old in enumerate(order_key)}
    reps = [reps[t] for t in order_key]
    multisets = [Counter({rank[t]: m for t, m in c.items()}) for c in multisets]
    return ClassSet(Order(Ot.lattice, check=False), reps), multisets
