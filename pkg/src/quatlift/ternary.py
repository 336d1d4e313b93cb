"""Integral positive-definite ternary quadratic forms.

Forms are kept in the six-coefficient convention
    Q(X1,X2,X3) = a1 X1^2 + a2 X2^2 + a3 X3^2 + a23 X2X3 + a13 X1X3 + a12 X1X2.
Canonical reduction picks, among all unimodular images, the
lexicographically least coefficient tuple; its diagonal is the triple of
successive minima, so the representative is provably unique per class.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .numtheory import factorize, legendre, valuation
from .ideals import enumerate_quadratic
from .qalg import Order


@dataclass(frozen=True)
class TernaryForm:
    a1: int
    a2: int
    a3: int
    a23: int
    a13: int
    a12: int

    def coefficients(self):
        return (self.a1, self.a2, self.a3, self.a23, self.a13, self.a12)

    def doubled_gram(self):
        a1, a2, a3, a23, a13, a12 = self.coefficients()
        return [[2 * a1, a12, a13], [a12, 2 * a2, a23], [a13, a23, 2 * a3]]

    def value(self, v):
        x, y, z = v
        return (self.a1 * x * x + self.a2 * y * y + self.a3 * z * z
                + self.a23 * y * z + self.a13 * x * z + self.a12 * x * y)

    def det_doubled(self) -> int:
        (a, b, c), (d, e, f), (g, h, i) = self.doubled_gram()
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def content(self) -> int:
        g = 0
        for c in self.coefficients():
            g = gcd(g, c)
        return g

    def is_positive_definite(self) -> bool:
        A = self.doubled_gram()
        if A[0][0] <= 0:
            return False
        if A[0][0] * A[1][1] - A[0][1] ** 2 <= 0:
            return False
        return self.det_doubled() > 0

    def transform(self, U) -> "TernaryForm":
        """Form in the basis given by the rows of the integer matrix U."""
        A = self.doubled_gram()
        B = [[sum(U[r][s] * A[s][t] for s in range(3)) for t in range(3)] for r in range(3)]
        C = [[sum(B[r][t] * U[c][t] for t in range(3)) for c in range(3)] for r in range(3)]
        return TernaryForm(C[0][0] // 2, C[1][1] // 2, C[2][2] // 2,
                           C[1][2], C[0][2], C[0][1])

    def __repr__(self):
        return f"TernaryForm{self.coefficients()}"


def _det3(U):
    (a, b, c), (d, e, f), (g, h, i) = U
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def _greedy_reduce(Q: TernaryForm) -> TernaryForm:
    """Size reduction to bound the exhaustive search; not canonical by itself."""
    U = [[1 if r == c else 0 for c in range(3)] for r in range(3)]
    cur = Q
    changed = True
    guard = 0
    while changed and guard < 200:
        guard += 1
        changed = False
        A = cur.doubled_gram()
        # order rows by diagonal
        order = sorted(range(3), key=lambda t: A[t][t])
        if order != [0, 1, 2]:
            P = [[1 if c == order[r] else 0 for c in range(3)] for r in range(3)]
            U = [[sum(P[r][s] * U[s][c] for s in range(3)) for c in range(3)] for r in range(3)]
            cur = Q.transform(U)
            A = cur.doubled_gram()
        for j in range(1, 3):
            for i in range(j):
                if A[i][i] == 0:
                    continue
                t = -round(Fraction(A[i][j], A[i][i]))
                if t:
                    newrow = [U[j][c] + t * U[i][c] for c in range(3)]
                    cand = [r[:] for r in U]
                    cand[j] = newrow
                    cf = Q.transform(cand)
                    if cf.doubled_gram()[j][j] < A[j][j]:
                        U = cand
                        cur = cf
                        A = cur.doubled_gram()
                        changed = True
    return cur


def _short_vectors(Q: TernaryForm, bound):
    """Nonzero vectors with Q(v) <= bound, one per +-pair, with Q-values."""
    return enumerate_quadratic(Q.doubled_gram(), Fraction(bound), yield_value=True)


def _successive_minima(Q: TernaryForm):
    """(m1, m2, m3) and the vectors attaining each minimum (up to sign)."""
    bound = max(Q.a1, Q.a2, Q.a3)
    vecs = [(val, v) for v, val in _short_vectors(Q, bound)]
    vecs.sort(key=lambda t: t[0])
    minima = []
    basis_rows: list[list[int]] = []
    attain: list[list[tuple[int, ...]]] = []
    for val, v in vecs:
        rows = basis_rows + [list(v)]
        if _rank(rows) > len(basis_rows):
            basis_rows.append(list(v))
            minima.append(val)
            attain.append([])
            if len(minima) == 3:
                break
    if len(minima) < 3:
        raise ArithmeticError("form does not have rank 3 within the search bound")
    for val, v in vecs:
        for t in range(3):
            if val == minima[t]:
                attain[t].append(v)
    return [int(m) for m in minima], attain


def _rank(rows) -> int:
    m = [[Fraction(v) for v in r] for r in rows]
    rank = 0
    ncols = 3
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


@lru_cache(maxsize=4096)
def reduce_form(Q: TernaryForm) -> TernaryForm:
    """Canonical representative of the Z-equivalence class of Q."""
    if not Q.is_positive_definite():
        raise ValueError("form must be positive definite")
    G = _greedy_reduce(Q)
    minima, attain = _successive_minima(G)
    A = G.doubled_gram()

    def cross(u, v):
        return sum(u[r] * A[r][c] * v[c] for r in range(3) for c in range(3))

    best = None
    for v1 in attain[0]:
        for s1 in (1, -1):
            w1 = [s1 * x for x in v1]
            for v2 in attain[1]:
                for s2 in (1, -1):
                    w2 = [s2 * x for x in v2]
                    for v3 in attain[2]:
                        for s3 in (1, -1):
                            w3 = [s3 * x for x in v3]
                            if abs(_det3([w1, w2, w3])) != 1:
                                continue
                            tup = (minima[0], minima[1], minima[2],
                                   cross(w2, w3), cross(w1, w3), cross(w1, w2))
                            if best is None or tup < best:
                                best = tup
    if best is None:
        raise ArithmeticError("no unimodular basis attains the successive minima")
    return TernaryForm(*best)


def equivalent_ternary(Q1: TernaryForm, Q2: TernaryForm) -> bool:
    return reduce_form(Q1) == reduce_form(Q2)


def _hilbert(a: Fraction, b: Fraction, ell: int) -> int:
    """Hilbert symbol (a, b) over Q_ell for nonzero rationals."""
    ai = a.numerator * a.denominator
    bi = b.numerator * b.denominator
    al, bl = valuation(ai, ell), valuation(bi, ell)
    u, v = ai // ell ** al, bi // ell ** bl
    if ell == 2:
        def eps(x):
            return ((x - 1) // 2) % 2

        def omega(x):
            return ((x * x - 1) // 8) % 2

        e = eps(u) * eps(v) + al * omega(v) + bl * omega(u)
        return -1 if e % 2 else 1
    s = 1
    if bl % 2:
        s *= legendre(u, ell)
    if al % 2:
        s *= legendre(v, ell)
    if al % 2 and bl % 2 and legendre(-1, ell) == -1:
        s = -s
    return s


def _diagonalize(Q: TernaryForm):
    """Rational congruent diagonalization of the Gram matrix."""
    G = [[Fraction(v, 2) for v in row] for row in Q.doubled_gram()]
    diag = []
    for t in range(3):
        d = G[t][t]
        diag.append(d)
        for r in range(t + 1, 3):
            f = G[r][t] / d
            for c in range(t, 3):
                G[r][c] -= f * G[t][c]
    return diag


def hasse_invariant(Q: TernaryForm, ell: int) -> int:
    d = _diagonalize(Q)
    s = 1
    for r in range(3):
        for c in range(r + 1, 3):
            s *= _hilbert(d[r], d[c], ell)
    return s


def _jordan_symbol_odd(Q: TernaryForm, ell: int):
    """Jordan invariants over Z_ell, ell odd: per scale ell^v the block
    dimension and the Legendre symbol of the block determinant's unit part.
    """
    A = [[Fraction(v) for v in row] for row in Q.doubled_gram()]
    n = 3
    diag: list[Fraction] = []

    def val(x: Fraction) -> int:
        return valuation(x.numerator, ell) - valuation(x.denominator, ell)

    idx = list(range(n))
    while idx:
        # entry of minimal ell-valuation among the active block
        best = None
        for r in idx:
            for c in idx:
                if A[r][c] == 0:
                    continue
                v = val(A[r][c])
                if best is None or v < best[0]:
                    best = (v, r, c)
        if best is None:
            raise ArithmeticError("degenerate block in Jordan splitting")
        _, r, c = best
        if r != c and val(A[r][r]) > best[0] and val(A[c][c]) > best[0]:
            # make a diagonal entry of minimal valuation: row/col r += row/col c
            for t in range(n):
                A[r][t] += A[c][t]
            for t in range(n):
                A[t][r] += A[t][c]
            if val(A[r][r]) > best[0]:
                for t in range(n):
                    A[r][t] -= 2 * A[c][t]
                for t in range(n):
                    A[t][r] -= 2 * A[t][c]
        piv = r if (r == c or val(A[r][r]) <= best[0]) else c
        d = A[piv][piv]
        for t in idx:
            if t == piv:
                continue
            f = A[t][piv] / d
            if f:
                for s in range(n):
                    A[t][s] -= f * A[piv][s]
                for s in range(n):
                    A[s][t] -= f * A[s][piv]
        diag.append(d)
        idx.remove(piv)
    scales: dict[int, list[int]] = {}
    for d in diag:
        v = val(d)
        unit = d / Fraction(ell) ** v
        u = unit.numerator * unit.denominator
        scales.setdefault(v, []).append(u)
    return tuple(sorted((v, len(us), legendre(_prod(us), ell)) for v, us in scales.items()))


def _prod(xs):
    r = 1
    for x in xs:
        r *= x
    return r


def same_genus(Q1: TernaryForm, Q2: TernaryForm) -> bool:
    """Equal determinant, equal 2-adic Hasse invariant, and equal Jordan
    invariants at every odd prime of the determinant."""
    if Q1.det_doubled() != Q2.det_doubled():
        return False
    if hasse_invariant(Q1, 2) != hasse_invariant(Q2, 2):
        return False
    for ell in sorted(set(factorize(Q1.det_doubled()))):
        if ell == 2:
            continue
        if _jordan_symbol_odd(Q1, ell) != _jordan_symbol_odd(Q2, ell):
            return False
    return True


class ThetaCoeffs:
    """Coefficients of (half the) representation numbers of a form, to a bound."""

    __slots__ = ("bound", "coeffs")

    def __init__(self, bound: int, coeffs):
        self.bound = bound
        self.coeffs = tuple(Fraction(c) for c in coeffs)

    def __getitem__(self, d: int) -> Fraction:
        if d > self.bound:
            raise IndexError(f"coefficient {d} beyond computed bound {self.bound}")
        return self.coeffs[d]

    def scaled(self, s) -> "ThetaCoeffs":
        s = Fraction(s)
        return ThetaCoeffs(self.bound, [c * s for c in self.coeffs])

    def add(self, other: "ThetaCoeffs") -> "ThetaCoeffs":
        bound = min(self.bound, other.bound)
        return ThetaCoeffs(bound, [self.coeffs[d] + other.coeffs[d] for d in range(bound + 1)])

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def content(self) -> Fraction:
        """gcd of the coefficients at d >= 1 (0 if all vanish)."""
        num = 0
        den = 1
        from math import lcm
        for c in self.coeffs[1:]:
            num = gcd(num, c.numerator)
            den = lcm(den, c.denominator)
        return Fraction(num, den)


@lru_cache(maxsize=2048)
def theta_coeffs(Q: TernaryForm, bound: int) -> ThetaCoeffs:
    """Theta coefficients of a single form: c(0) = 1/2, c(d) = #{x : Q(x) = d}/2."""
    counts = [0] * (bound + 1)
    for v, val in _short_vectors(Q, bound):
        if val.denominator == 1 and val <= bound:
            counts[int(val)] += 1
    coeffs = [Fraction(1, 2)] + [Fraction(c) for c in counts[1:]]
    return ThetaCoeffs(bound, coeffs)


def ternary_of_order(O: Order) -> TernaryForm:
    """Canonical ternary form -normx/omega_x on O/Z."""
    raw = O.ternary_coefficients()
    w = O.omega_x
    Q = TernaryForm(*(c // w for c in raw))
    if Q.content() != 1:
        raise ArithmeticError("scaled ternary form is not primitive")
    if not Q.is_positive_definite():
        raise ArithmeticError("ternary form of an order must be positive definite")
    return reduce_form(Q)
