"""Exact arithmetic in definite rational quaternion algebras.

An algebra H(a, b) with a, b negative integers has basis {1, i, j, k},
i^2 = a, j^2 = b, k = ij = -ji.  Elements carry exact rational
coordinates; lattices are full-rank rank-4 Z-modules stored in a
canonical Hermite normal form (integer matrix over a single positive
denominator), so lattice equality is plain field equality.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm

from .numtheory import is_prime, is_square, isqrt, legendre, sqrt_mod, xgcd


@dataclass(frozen=True)
class QAlgebra:
    """Definite quaternion algebra H(a, b) with a < 0, b < 0."""

    a: int
    b: int

    def __post_init__(self):
        if self.a >= 0 or self.b >= 0:
            raise ValueError("need a < 0 and b < 0 for a definite algebra")

    def elem(self, c0, c1=0, c2=0, c3=0) -> "QuatElement":
        return QuatElement(self, (Fraction(c0), Fraction(c1), Fraction(c2), Fraction(c3)))

    @property
    def one(self) -> "QuatElement":
        return self.elem(1)

    @property
    def i(self) -> "QuatElement":
        return self.elem(0, 1)

    @property
    def j(self) -> "QuatElement":
        return self.elem(0, 0, 1)

    @property
    def k(self) -> "QuatElement":
        return self.elem(0, 0, 0, 1)

    def __repr__(self):
        return f"QAlgebra({self.a}, {self.b})"


class QuatElement:
    """Quaternion with exact rational coordinates in the {1,i,j,k} basis."""

    __slots__ = ("alg", "c")

    def __init__(self, alg: QAlgebra, coords):
        self.alg = alg
        self.c = tuple(Fraction(x) for x in coords)

    def _check(self, other: "QuatElement"):
        if self.alg != other.alg:
            raise ValueError("elements of distinct algebras")

    def __add__(self, other):
        self._check(other)
        return QuatElement(self.alg, tuple(x + y for x, y in zip(self.c, other.c)))

    def __sub__(self, other):
        self._check(other)
        return QuatElement(self.alg, tuple(x - y for x, y in zip(self.c, other.c)))

    def __neg__(self):
        return QuatElement(self.alg, tuple(-x for x in self.c))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuatElement(self.alg, tuple(x * other for x in self.c))
        self._check(other)
        a, b = self.alg.a, self.alg.b
        x0, x1, x2, x3 = self.c
        y0, y1, y2, y3 = other.c
        return QuatElement(self.alg, (
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuatElement(self.alg, tuple(other * x for x in self.c))
        return NotImplemented

    def __truediv__(self, s):
        if isinstance(s, (int, Fraction)):
            return QuatElement(self.alg, tuple(x / s for x in self.c))
        return NotImplemented

    def conj(self) -> "QuatElement":
        x0, x1, x2, x3 = self.c
        return QuatElement(self.alg, (x0, -x1, -x2, -x3))

    def norm(self) -> Fraction:
        a, b = self.alg.a, self.alg.b
        x0, x1, x2, x3 = self.c
        return x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3

    def trace(self) -> Fraction:
        return 2 * self.c[0]

    def normx(self) -> Fraction:
        """The discriminant form (x - conj x)^2; <= 0 in a definite algebra."""
        a, b = self.alg.a, self.alg.b
        _, x1, x2, x3 = self.c
        return 4 * (a * x1 * x1 + b * x2 * x2 - a * b * x3 * x3)

    def inverse(self) -> "QuatElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero quaternion")
        return self.conj() / n

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.c)

    def __eq__(self, other):
        return isinstance(other, QuatElement) and self.alg == other.alg and self.c == other.c

    def __hash__(self):
        return hash((self.alg, self.c))

    def __repr__(self):
        return f"Quat{self.c}"


def norm_pairing(x: QuatElement, y: QuatElement) -> Fraction:
    """Bilinear form Tr(x * conj(y)) attached to the reduced norm."""
    a, b = x.alg.a, x.alg.b
    x0, x1, x2, x3 = x.c
    y0, y1, y2, y3 = y.c
    return 2 * (x0 * y0 - a * x1 * y1 - b * x2 * y2 + a * b * x3 * y3)


def _hnf(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Row HNF of an integer matrix of full column rank.

    Result is upper triangular with positive pivots and entries above
    each pivot reduced into [0, pivot).
    """
    rows = [r[:] for r in rows if any(r)]
    h: list[list[int]] = []
    for col in range(ncols):
        pivot = None
        rest: list[list[int]] = []
        for r in rows:
            if r[col] == 0:
                rest.append(r)
                continue
            if pivot is None:
                pivot = r
                continue
            g, x, y = xgcd(pivot[col], r[col])
            pc, rc = pivot[col] // g, r[col] // g
            pivot, r = (
                [x * pivot[t] + y * r[t] for t in range(ncols)],
                [pc * r[t] - rc * pivot[t] for t in range(ncols)],
            )
            if any(r):
                rest.append(r)
        if pivot is None:
            raise ValueError("rank-deficient generator set")
        if pivot[col] < 0:
            pivot = [-v for v in pivot]
        h.append(pivot)
        rows = rest
    for i in range(ncols):
        for j in range(i + 1, ncols):
            q = h[i][j] // h[j][j]
            if q:
                h[i] = [h[i][t] - q * h[j][t] for t in range(ncols)]
    return h


def _adjugate4(m):
    """Adjugate of a 4x4 integer matrix (cofactor expansion)."""

    def det3(r):
        (a, b, c), (d, e, f), (g, h, i) = r
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    adj = [[0] * 4 for _ in range(4)]
    for r in range(4):
        for c in range(4):
            sub = [[m[i][j] for j in range(4) if j != c] for i in range(4) if i != r]
            adj[c][r] = (-1) ** (r + c) * det3(sub)
    return adj


class QuatLattice:
    """Full-rank lattice in H(a, b), canonically represented.

    Stored as an integer 4x4 HNF matrix `mat` over a positive denominator
    `den`, rows being basis vectors in {1,i,j,k} coordinates; the pair is
    normalized so gcd(den, content(mat)) = 1, making it unique per lattice.
    """

    __slots__ = ("alg", "den", "mat", "_hash")

    def __init__(self, alg: QAlgebra, den: int, mat):
        g = den
        for row in mat:
            for v in row:
                g = gcd(g, v)
        self.alg = alg
        self.den = den // g
        self.mat = tuple(tuple(v // g for v in row) for row in mat)
        self._hash = hash((alg, self.den, self.mat))

    @classmethod
    def from_rows(cls, alg: QAlgebra, rows) -> "QuatLattice":
        """Lattice generated by rational coordinate rows (>= 4 of them)."""
        den = 1
        frac_rows = [[Fraction(v) for v in r] for r in rows]
        for r in frac_rows:
            for v in r:
                den = lcm(den, v.denominator)
        int_rows = [[int(v * den) for v in r] for r in frac_rows]
        return cls(alg, den, _hnf(int_rows, 4))

    @classmethod
    def from_elements(cls, elems) -> "QuatLattice":
        elems = list(elems)
        return cls.from_rows(elems[0].alg, [e.c for e in elems])

    def basis(self) -> list[QuatElement]:
        return [QuatElement(self.alg, tuple(Fraction(v, self.den) for v in row))
                for row in self.mat]

    def det(self) -> Fraction:
        d = 1
        for t in range(4):
            d *= self.mat[t][t]
        return Fraction(d, self.den ** 4)

    def coords_of(self, x: QuatElement):
        """Integer coordinates of x in this basis, or None if x not in the lattice."""
        target = [v * self.den for v in x.c]
        y = [Fraction(0)] * 4
        for col in range(4):
            s = sum(y[t] * self.mat[t][col] for t in range(col))
            val = (target[col] - s) / self.mat[col][col]
            if val.denominator != 1:
                return None
            y[col] = val
        return [int(v) for v in y]

    def __contains__(self, x: QuatElement) -> bool:
        return self.coords_of(x) is not None

    def contains_lattice(self, other: "QuatLattice") -> bool:
        return all(e in self for e in other.basis())

    def add(self, other: "QuatLattice") -> "QuatLattice":
        return QuatLattice.from_rows(self.alg, [r for L in (self, other) for r in
                                                [[Fraction(v, L.den) for v in row] for row in L.mat]])

    def mul_lattice(self, other: "QuatLattice") -> "QuatLattice":
        prods = [x * y for x in self.basis() for y in other.basis()]
        return QuatLattice.from_elements(prods)

    def mul_left(self, x: QuatElement) -> "QuatLattice":
        return QuatLattice.from_elements([x * e for e in self.basis()])

    def mul_right(self, x: QuatElement) -> "QuatLattice":
        return QuatLattice.from_elements([e * x for e in self.basis()])

    def scale(self, s) -> "QuatLattice":
        s = Fraction(s)
        return QuatLattice.from_elements([e * s for e in self.basis()])

    def conj(self) -> "QuatLattice":
        return QuatLattice.from_elements([e.conj() for e in self.basis()])

    def dual_rows(self) -> "QuatLattice":
        """Dual lattice w.r.t. the standard dot product on coordinates."""
        adj = _adjugate4([list(r) for r in self.mat])
        d = self.mat[0][0] * self.mat[1][1] * self.mat[2][2] * self.mat[3][3]
        # rows of den * (mat^{-1})^T = den * adj^T / d
        rows = [[Fraction(self.den * adj[c][r], d) for c in range(4)] for r in range(4)]
        return QuatLattice.from_rows(self.alg, rows)

    def intersect(self, other: "QuatLattice") -> "QuatLattice":
        return self.dual_rows().add(other.dual_rows()).dual_rows()

    def index_in(self, other: "QuatLattice") -> Fraction:
        """Generalized index [other : self] = det(self)/det(other) > 0."""
        return self.det() / other.det()

    def norm_gram(self):
        """Gram matrix Tr(b_i conj(b_j)) of the reduced norm on this basis."""
        bas = self.basis()
        return [[norm_pairing(x, y) for y in bas] for x in bas]

    def lattice_norm(self) -> Fraction:
        """gcd of the reduced norms of lattice elements, as a positive rational."""
        g = self.norm_gram()
        vals = [Fraction(g[t][t], 2) for t in range(4)]
        vals += [g[r][c] for r in range(4) for c in range(r + 1, 4)]
        num = 0
        den = 1
        for v in vals:
            num = gcd(num, v.numerator)
            den = lcm(den, v.denominator)
        return Fraction(num, den)

    def __eq__(self, other):
        return (isinstance(other, QuatLattice) and self.alg == other.alg
                and self.den == other.den and self.mat == other.mat)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"QuatLattice(den={self.den}, mat={self.mat})"


def is_order(L: QuatLattice) -> bool:
    """True iff 1 lies in L and L is closed under multiplication."""
    if L.alg.one not in L:
        return False
    bas = L.basis()
    return all((x * y) in L for x in bas for y in bas)


class Order:
    """An order in a definite quaternion algebra (unital, multiplicatively closed)."""

    __slots__ = ("alg", "lattice", "_disc", "_omega", "_ternary_raw")

    def __init__(self, lattice: QuatLattice, check: bool = True):
        if check and not is_order(lattice):
            raise ValueError("lattice is not an order")
        self.alg = lattice.alg
        self.lattice = lattice
        self._disc = None
        self._omega = None
        self._ternary_raw = None

    @property
    def disc(self) -> int:
        """Positive square root of the determinant of Tr(e_i conj(e_j))."""
        if self._disc is None:
            d = 4 * abs(self.alg.a * self.alg.b) * self.lattice.det()
            if d.denominator != 1 or d <= 0:
                raise ArithmeticError(f"order determinant is not a square: disc^2 would be {d**2}")
            self._disc = int(d)
        return self._disc

    def ternary_coefficients(self):
        """Integer coefficients (a1,a2,a3,a23,a13,a12) of -normx on a basis of O/Z."""
        if self._ternary_raw is None:
            rows3 = [[int(v) for v in row[1:]] for row in self.lattice.mat]
            h = _hnf(rows3, 3)
            den = self.lattice.den
            fs = [QuatElement(self.alg, (Fraction(0), Fraction(r[0], den),
                                         Fraction(r[1], den), Fraction(r[2], den)))
                  for r in h]

            def q0(v: QuatElement):
                return -v.normx()

            a1, a2, a3 = (q0(f) for f in fs)
            a23 = q0(fs[1] + fs[2]) - a2 - a3
            a13 = q0(fs[0] + fs[2]) - a1 - a3
            a12 = q0(fs[0] + fs[1]) - a1 - a2
            coeffs = (a1, a2, a3, a23, a13, a12)
            if any(c.denominator != 1 for c in coeffs):
                raise ArithmeticError("non-integral ternary coefficients on an order")
            self._ternary_raw = tuple(int(c) for c in coeffs)
        return self._ternary_raw

    @property
    def omega_x(self) -> int:
        """gcd of normx over the order, via the descended ternary form."""
        if self._omega is None:
            g = 0
            for c in self.ternary_coefficients():
                g = gcd(g, c)
            self._omega = g
        return self._omega

    def __eq__(self, other):
        return isinstance(other, Order) and self.lattice == other.lattice

    def __hash__(self):
        return hash(self.lattice)

    def __repr__(self):
        return f"Order({self.lattice!r})"


def _try_order(alg: QAlgebra, rows) -> Order | None:
    try:
        L = QuatLattice.from_rows(alg, rows)
    except ValueError:
        return None
    if not is_order(L):
        return None
    return Order(L, check=False)


def maximalize(O: Order, target_disc: int) -> Order:
    """Grow an order by adjoining x/l until disc reaches target_disc.

    Tries all cosets x of lO in O for each prime l dividing disc/target;
    certified by the final discriminant.
    """
    from .numtheory import factorize

    while O.disc > target_disc:
        f = O.disc // target_disc
        progress = False
        for ell in sorted(factorize(f)):
            bas = O.lattice.basis()
            found = None
            for c0 in range(ell):
                for c1 in range(ell):
                    for c2 in range(ell):
                        for c3 in range(ell):
                            if c0 == c1 == c2 == c3 == 0:
                                continue
                            x = bas[0] * c0 + bas[1] * c1 + bas[2] * c2 + bas[3] * c3
                            y = x / ell
                            if y in O.lattice:
                                continue
                            cand = O.lattice.add(QuatLattice.from_elements([y]))
                            if is_order(cand):
                                found = Order(cand, check=False)
                                break
                        if found:
                            break
                    if found:
                        break
                if found:
                    break
            if found:
                O = found
                progress = True
                break
        if not progress:
            raise ArithmeticError(f"maximal order search stalled at disc={O.disc}")
    if O.disc != target_disc:
        raise ArithmeticError(f"overshot target discriminant: disc={O.disc}")
    return O


@lru_cache(maxsize=None)
def maximal_order(p: int) -> tuple[QAlgebra, Order]:
    """Algebra ramified exactly at {p, infinity} with a maximal order, disc = p."""
    if not is_prime(p) or p == 2:
        raise ValueError(f"need an odd prime, got {p}")
    h = Fraction(1, 2)
    if p % 4 == 3:
        alg = QAlgebra(-1, -p)
        O = _try_order(alg, [(1, 0, 0, 0), (0, 1, 0, 0), (h, 0, h, 0), (0, h, 0, h)])
    elif p % 8 == 5:
        alg = QAlgebra(-2, -p)
        O = _try_order(alg, [(1, 0, 0, 0), (0, 1, 0, 0), (h, h, h, 0),
                             (Fraction(1, 2), Fraction(1, 4), 0, Fraction(1, 4))])
        if O is None or O.disc != p:
            O = maximalize(Order(QuatLattice.from_rows(
                alg, [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]), check=False), p)
    else:
        q = 3
        while not (q % 4 == 3 and is_prime(q) and legendre(q, p) == -1):
            q += 2
        alg = QAlgebra(-p, -q)
        c2 = sqrt_mod(-p, q)
        O = None
        if c2 is not None and c2 % 2 == 1:
            c2 = q - c2
        if c2 is not None:
            c = c2 // 2
            O = _try_order(alg, [(1, 0, 0, 0), (0, 1, 0, 0), (h, 0, h, 0),
                                 (0, Fraction(1, 2), Fraction(c, q), Fraction(1, 2 * q))])
        if O is None or O.disc != p:
            seed = Order(QuatLattice.from_rows(
                alg, [(1, 0, 0, 0), (0, 1, 0, 0), (h, 0, h, 0), (0, 0, 0, 1)]), check=False)
            if not is_order(seed.lattice):
                seed = Order(QuatLattice.from_rows(
                    alg, [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]), check=False)
            O = maximalize(seed, p)
    if O is None or O.disc != p:
        got = "none" if O is None else O.disc
        raise ArithmeticError(f"maximal order recipe failed for p={p} (last disc {got})")
    return alg, O
