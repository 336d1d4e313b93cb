"""Brandt matrices and the Hecke module over a class set.

The stored count r_ij(m) is the number of lattice vectors of reduced norm
m * n_i * n_j in conj(a_j) a_i; it is symmetric in (i, j).  The Brandt
matrix entry is B_m(i, j) = r_ij(m) / u_j and the Hecke operator acts by
(t_m v)_i = (1/u_i) sum_j r_ij(m) v_j, which is self-adjoint for the
height pairing and has B_1 = identity.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

from .ideals import ClassSet, ModuleVector, enumerate_quadratic
from .numtheory import is_prime


# ---------------------------------------------------------------------------
# exact rational linear algebra on row vectors


def rref(rows):
    """Reduced row echelon form over Q; returns (rows, pivot_columns)."""
    m = [[Fraction(v) for v in r] for r in rows]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((t for t in range(r, len(m)) if m[t][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][c]
        m[r] = [v / inv for v in m[r]]
        for t in range(len(m)):
            if t != r and m[t][c] != 0:
                f = m[t][c]
                m[t] = [a - f * b for a, b in zip(m[t], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def kernel_basis(rows):
    """Basis of the right kernel {x : rows . x = 0} over Q."""
    red, piv = rref(rows)
    ncols = len(rows[0])
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for t, c in enumerate(piv):
            v[c] = -red[t][f]
        out.append(v)
    return out


def solve_in_span(basis_rows, target):
    """Coefficients expressing target as a combination of the basis rows."""
    ncols = len(target)
    aug = [list(b) + [Fraction(0)] * len(basis_rows) for b in basis_rows]
    for t in range(len(basis_rows)):
        aug[t][ncols + t] = Fraction(1)
    red, piv = rref(aug)
    coeffs = [Fraction(0)] * len(basis_rows)
    rem = [Fraction(v) for v in target]
    for t, c in enumerate(piv):
        if c >= ncols:
            continue
        f = rem[c]
        if f:
            for s in range(ncols):
                rem[s] -= f * red[t][s]
            for s in range(len(basis_rows)):
                coeffs[s] += f * red[t][ncols + s]
    if any(rem):
        raise ArithmeticError("vector not in span")
    return coeffs


def primitive_rational_row(row):
    """Scale a rational row to a primitive integer row (first nonzero > 0)."""
    from math import lcm
    den = 1
    for v in row:
        den = lcm(den, Fraction(v).denominator)
    ints = [int(Fraction(v) * den) for v in row]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g:
        ints = [v // g for v in ints]
    lead = next((v for v in ints if v), 0)
    if lead < 0:
        ints = [-v for v in ints]
    return ints


# ---------------------------------------------------------------------------
# Brandt series


class BrandtSeries:
    """All pair counts r_ij(m) for m up to a bound, over one class set."""

    def __init__(self, class_set: ClassSet, bound: int, counts):
        self.class_set = class_set
        self.bound = bound
        self.counts = counts  # dict (i,j) i<=j -> list indexed by m

    @classmethod
    def compute(cls, class_set: ClassSet, bound: int) -> "BrandtSeries":
        n = len(class_set)
        counts = {}
        for i in range(n):
            for j in range(i, n):
                counts[(i, j)] = _pair_counts_exact(class_set, i, j, bound)
        return cls(class_set, bound, counts)

    def r(self, i: int, j: int, m: int) -> int:
        if m > self.bound:
            raise IndexError(f"m={m} beyond Brandt bound {self.bound}")
        key = (i, j) if i <= j else (j, i)
        return self.counts[key][m]

    def matrix(self, m: int):
        """The Brandt matrix B_m as integer rows; B_1 is the identity."""
        n = len(self.class_set)
        us = self.class_set.unit_orders
        B = []
        for i in range(n):
            row = []
            for j in range(n):
                r = self.r(i, j, m)
                if r % us[j]:
                    raise ArithmeticError("Brandt count not divisible by unit order")
                row.append(r // us[j])
            B.append(row)
        return B

    def hecke_apply(self, m: int, v: ModuleVector) -> ModuleVector:
        """t_m v, the transpose convention on the stored matrix."""
        us = self.class_set.unit_orders
        n = len(self.class_set)
        out = []
        for i in range(n):
            s = sum(Fraction(self.r(i, j, m)) * v.coords[j] for j in range(n))
            out.append(s / us[i])
        return ModuleVector(self.class_set, out)


def _pair_lattice(class_set: ClassSet, i: int, j: int):
    a_i = class_set.reps[i]
    a_j = class_set.reps[j]
    return a_j.lattice.conj().mul_lattice(a_i.lattice), a_i.norm * a_j.norm


def _pair_counts_exact(class_set: ClassSet, i: int, j: int, bound: int):
    pair, nu = _pair_lattice(class_set, i, j)
    gram = pair.norm_gram()
    counts = [0] * (bound + 1)
    for vec, val in enumerate_quadratic(gram, Fraction(bound) * nu, yield_value=True):
        m = val / nu
        if m.denominator != 1:
            raise ArithmeticError("norm not a multiple of the ideal norm product")
        if 1 <= m <= bound:
            counts[int(m)] += 2
    return counts


def _reduce_gram4(A):
    """Integer size-reduction of a 4x4 doubled Gram matrix (congruence)."""
    A = [row[:] for row in A]
    n = 4
    for _ in range(100):
        changed = False
        order = sorted(range(n), key=lambda t: A[t][t])
        if order != list(range(n)):
            A = [[A[order[r]][order[c]] for c in range(n)] for r in range(n)]
            changed = True
        for i in range(n):
            for j in range(n):
                if i == j or A[i][i] == 0:
                    continue
                t = round(Fraction(A[i][j], A[i][i]))
                if t:
                    newdiag = A[j][j] - 2 * t * A[i][j] + t * t * A[i][i]
                    if newdiag < A[j][j]:
                        for s in range(n):
                            A[j][s] -= t * A[i][s]
                        for s in range(n):
                            A[s][j] -= t * A[s][i]
                        changed = True
        if not changed:
            return A
    return A


def pair_count_series(class_set: ClassSet, i: int, j: int, bound: int) -> np.ndarray:
    """r_ij(m) for 1 <= m <= bound as an int64 array (index m), vectorized.

    Enumerates the integral quadratic form n(y)/(n_i n_j) over a
    size-reduced basis; ranges come from a float Cholesky widened by a
    margin, membership from exact integer evaluation.
    """
    pair, nu = _pair_lattice(class_set, i, j)
    gram = pair.norm_gram()
    A = [[gram[r][c] / nu for c in range(4)] for r in range(4)]
    if any(v.denominator != 1 for row in A for v in row):
        raise ArithmeticError("pair Gram not integral after norm scaling")
    A = _reduce_gram4([[int(v) for v in row] for row in A])

    # float Cholesky of A/2 for the search ranges
    C = np.array(A, dtype=float) / 2.0
    q = np.zeros(4)
    u = np.zeros((4, 4))
    for t in range(4):
        q[t] = C[t][t]
        for s in range(t + 1, 4):
            u[t][s] = C[t][s] / q[t]
        for r in range(t + 1, 4):
            for c in range(t + 1, 4):
                C[r][c] -= C[r][t] * C[t][c] / q[t]

    h = [A[t][t] // 2 for t in range(4)]
    counts = np.zeros(bound + 1, dtype=np.int64)
    M = float(bound)
    pad = 1e-9 * M + 1e-6

    r4 = isqrt(int(2 * bound // max(A[3][3], 1))) + 2
    for x4 in range(-r4, r4 + 1):
        t4 = q[3] * x4 * x4
        if t4 > M + pad:
            continue
        rem3 = M + pad - t4
        c3 = -u[2][3] * x4
        w3 = (rem3 / q[2]) ** 0.5 if rem3 > 0 else 0.0
        for x3 in range(int(np.floor(c3 - w3)) - 1, int(np.ceil(c3 + w3)) + 2):
            t3 = q[2] * (x3 - c3) ** 2
            if t3 > rem3:
                continue
            rem2 = rem3 - t3
            c2 = -u[1][2] * x3 - u[1][3] * x4
            w2 = (rem2 / q[1]) ** 0.5 if rem2 > 0 else 0.0
            lo2, hi2 = int(np.floor(c2 - w2)) - 1, int(np.ceil(c2 + w2)) + 1
            if hi2 < lo2:
                continue
            x2 = np.arange(lo2, hi2 + 1, dtype=np.int64)
            # x1 window: centers vary with x2, take the extremes
            cc1 = -(u[0][1] * x2 + u[0][2] * x3 + u[0][3] * x4)
            w1 = (rem2 / q[0]) ** 0.5 + 1.0
            lo1, hi1 = int(np.floor(cc1.min() - w1)) - 1, int(np.ceil(cc1.max() + w1)) + 1
            x1 = np.arange(lo1, hi1 + 1, dtype=np.int64)[:, None]
            lin1 = A[0][1] * x2[None, :] + (A[0][2] * x3 + A[0][3] * x4)
            base = (h[1] * x2 * x2 + (A[1][2] * x3 + A[1][3] * x4) * x2
                    + h[2] * x3 * x3 + A[2][3] * x3 * x4 + h[3] * x4 * x4)
            vals = h[0] * x1 * x1 + x1 * lin1 + base[None, :]
            vals = vals.ravel()
            good = vals[(vals >= 1) & (vals <= bound)]
            if good.size:
                counts += np.bincount(good, minlength=bound + 1)
    out = counts * 2
    out[0] = 0
    return out


# ---------------------------------------------------------------------------
# isotypical decomposition


@dataclass
class Eigencomponent:
    """Simultaneous rational eigenspace of the Hecke operators."""

    class_set: ClassSet
    basis: list  # list of ModuleVector
    eigenvalues: dict  # probe prime -> integer
    rational: bool = True
    label: str | None = None

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def is_eisenstein(self) -> bool:
        return self.rational and all(abs(l) == q + 1 for q, l in self.eigenvalues.items())

    def contains(self, v: ModuleVector) -> bool:
        try:
            solve_in_span([b.coords for b in self.basis], v.coords)
            return True
        except ArithmeticError:
            return False


def probe_primes(disc: int, count: int) -> list[int]:
    out = []
    q = 2
    while len(out) < count:
        q += 1
        if is_prime(q) and (2 * disc) % q != 0:
            out.append(q)
    return out


def isotypical(bs: BrandtSeries, probe_count: int = 5) -> list[Eigencomponent]:
    """Split the module into simultaneous rational eigencomponents.

    Integer eigenvalue candidates for t_q are |lambda| <= 2 sqrt(q)
    together with +-(q+1); subspaces exhausting no candidate are
    reported with rational=False and no eigenvalues.
    """
    cs = bs.class_set
    disc = cs.order.disc
    probes = probe_primes(disc, probe_count)
    if probes and probes[-1] > bs.bound:
        raise ValueError("Brandt bound too small for the probe primes")
    n = len(cs)
    ident = [[Fraction(1 if r == c else 0) for c in range(n)] for r in range(n)]
    spaces = [(ident, {})]
    for q in probes:
        T = [[Fraction(bs.r(i, j, q), cs.unit_orders[i]) for j in range(n)] for i in range(n)]
        new_spaces = []
        for basis, eigs in spaces:
            k = len(basis)
            # restriction R: t_q(basis_t) = sum_u R[t][u] basis_u
            R = []
            for b in basis:
                img = [sum(T[i][j] * b[j] for j in range(n)) for i in range(n)]
                R.append(solve_in_span(basis, img))
            lams = list(range(-(2 * isqrt(q) + 1), 2 * isqrt(q) + 2)) + [q + 1, -(q + 1)]
            covered = 0
            prod = ident_k = [[Fraction(1 if r == c else 0) for c in range(k)] for r in range(k)]
            for lam in lams:
                Mt = [[R[t][u] - (lam if t == u else 0) for u in range(k)] for t in range(k)]
                # left kernel: rows s with s . Mt = 0
                ker = kernel_basis([[Mt[t][u] for t in range(k)] for u in range(k)])
                if not ker:
                    continue
                sub = [[sum(s[t] * basis[t][c] for t in range(k)) for c in range(n)] for s in ker]
                new_spaces.append((sub, {**eigs, q: lam}))
                covered += len(ker)
                prod = [[sum(prod[r][t] * Mt[t][c] for t in range(k)) for c in range(k)]
                        for r in range(k)]
            if covered < k:
                rest_rows, _ = rref(prod)
                rest = [[sum(s[t] * basis[t][c] for t in range(k)) for c in range(n)]
                        for s in rest_rows]
                if len(rest) != k - covered:
                    raise ArithmeticError("eigenspace bookkeeping mismatch")
                new_spaces.append((rest, {**eigs, q: None}))
        spaces = new_spaces
    out = []
    for basis, eigs in spaces:
        rational = all(l is not None for l in eigs.values())
        vecs = [ModuleVector(cs, primitive_rational_row(b)) for b in basis]
        out.append(Eigencomponent(cs, vecs,
                                  {q: l for q, l in eigs.items() if l is not None} if rational
                                  else {}, rational=rational))
    out.sort(key=lambda c: (not c.rational, not c.is_eisenstein(),
                            [c.eigenvalues.get(q) for q in probes] if c.rational else []))
    return out


# ---------------------------------------------------------------------------
# the summation and twisting maps


def psi(v: ModuleVector, tilde_cs: ClassSet, multisets) -> ModuleVector:
    """Push a vector over the parent classes down to the tilde classes by
    summing subideal classes with multiplicity."""
    out = [Fraction(0)] * len(tilde_cs)
    for i, c in enumerate(v.coords):
        if c:
            for t, mult in multisets[i].items():
                out[t] += c * mult
    return ModuleVector(tilde_cs, out)


def phi(v: ModuleVector, chis: list[int]) -> ModuleVector:
    """Diagonal sign involution multiplying each coordinate by its chi sign."""
    return ModuleVector(v.class_set, [c * s for c, s in zip(v.coords, chis)])


def lambda_from_counts(row_counts: dict, v: ModuleVector, i: int, m, u_i: int):
    """Eigenvalue (t_m v)_i / v_i from single-row count arrays."""
    num = Fraction(0)
    for j, arr in row_counts.items():
        if v.coords[j]:
            num += Fraction(int(arr[m])) * v.coords[j]
    lam = num / (u_i * v.coords[i])
    if lam.denominator != 1:
        raise ArithmeticError(f"non-integral Hecke eigenvalue at m={m}")
    return int(lam)
