from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import sympy as sp
from sympy import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from pyslocc.utils.log import get_logger

mylogger = get_logger(__name__)


# ==============================
#  ERRORS
# ==============================
class SloccError(Exception):
    """pyslocc全体の基底例外"""

class SingularMatrix(SloccError):
    """逆行列が存在しない"""

class DimensionMismatch(SloccError):
    """行列・状態の次元が合わない"""

class NotInField(SloccError):
    """固有値がガウス有理数体に入らない"""

    def __init__(self, residual: Sequence["Scalar"]):
        self.residual = list(residual)
        terms = ", ".join(str(c) for c in self.residual)
        super().__init__(
            f"characteristic polynomial keeps an irreducible factor over Q(i) "
            f"(coefficients low->high: [{terms}])")


# ==============================
#  SCALAR
# ==============================
ScalarLike = Union["Scalar", int, Fraction]


class Scalar:
    """
    Gaussian rational re + im*i with exact Fraction parts.
    """
    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction, str] = 0, im: Union[int, Fraction, str] = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    def __reduce__(self):
        return (Scalar, (self.re, self.im))

    @classmethod
    def coerce(cls, value: ScalarLike) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, bool):
            raise TypeError("bool is not a scalar")
        if isinstance(value, (int, Rational)):
            return cls(Fraction(value))
        raise TypeError(f"cannot use {type(value).__name__} as an exact scalar")

    # ---- predicates
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def key(self) -> tuple[Fraction, Fraction]:
        """total order used to sort eigenvalues: lexicographic on (re, im)"""
        return (self.re, self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # ---- arithmetic
    def __add__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return Scalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return Scalar(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        if self.im == 0 and o.im == 0:
            return Scalar(self.re * o.re)
        return Scalar(self.re * o.re - self.im * o.im,
                      self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by an exact zero scalar")
        if o.im == 0:
            return Scalar(self.re / o.re, self.im / o.re)
        n = o.norm()
        return Scalar((self.re * o.re + self.im * o.im) / n,
                      (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (ONE / self) ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # ---- comparison
    def __eq__(self, other):
        try:
            o = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"Scalar({str(self)!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


ZERO = Scalar(0)
ONE = Scalar(1)


def sort_key(s: Scalar) -> tuple[Fraction, Fraction]:
    return s.key()


# ==============================
#  MATRIX
# ==============================
class Matrix:
    """
    Immutable dense matrix of Scalars, stored as a read-only numpy object array.
    """
    __slots__ = ("_a",)

    def __init__(self, rows: Iterable[Iterable[ScalarLike]], cols: Optional[int] = None):
        data = [[Scalar.coerce(v) for v in row] for row in rows]
        n_rows = len(data)
        n_cols = len(data[0]) if n_rows else (cols or 0)
        if any(len(row) != n_cols for row in data):
            raise DimensionMismatch("ragged rows")
        a = np.empty((n_rows, n_cols), dtype=object)
        for i, row in enumerate(data):
            for j, v in enumerate(row):
                a[i, j] = v
        a.flags.writeable = False
        object.__setattr__(self, "_a", a)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    def __reduce__(self):
        return (Matrix, (self.tolist(), self.cols))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Matrix":
        a = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            a[idx] = Scalar.coerce(v)
        a.flags.writeable = False
        m = cls.__new__(cls)
        object.__setattr__(m, "_a", a)
        return m

    @classmethod
    def zeros(cls, rows: int, cols: Optional[int] = None) -> "Matrix":
        cols = rows if cols is None else cols
        return cls([[ZERO] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def diag(cls, values: Sequence[ScalarLike]) -> "Matrix":
        n = len(values)
        return cls([[Scalar.coerce(values[i]) if i == j else ZERO for j in range(n)]
                    for i in range(n)], cols=n)

    @classmethod
    def jordan_block(cls, lam: ScalarLike, n: int) -> "Matrix":
        lam = Scalar.coerce(lam)
        return cls([[lam if i == j else (ONE if j == i + 1 else ZERO) for j in range(n)]
                    for i in range(n)], cols=n)

    @classmethod
    def block_diag(cls, blocks: Sequence["Matrix"]) -> "Matrix":
        n = sum(b.rows for b in blocks)
        m = sum(b.cols for b in blocks)
        a = np.full((n, m), ZERO, dtype=object)
        r = c = 0
        for b in blocks:
            a[r:r + b.rows, c:c + b.cols] = b._a
            r += b.rows
            c += b.cols
        return cls.from_array(a)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Scalar]], rows: int) -> "Matrix":
        return cls([[columns[j][i] for j in range(len(columns))] for i in range(rows)],
                   cols=len(columns))

    # ---- shape / access
    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self._a.flat)

    @property
    def entries(self) -> tuple[Scalar, ...]:
        """row-major entries"""
        return tuple(self._a.flat)

    def __getitem__(self, idx: tuple[int, int]) -> Scalar:
        return self._a[idx]

    def tolist(self) -> list[list[Scalar]]:
        return [list(row) for row in self._a]

    def to_array(self) -> np.ndarray:
        return self._a.copy()

    def column(self, j: int) -> list[Scalar]:
        return list(self._a[:, j])

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix.from_array(self._a[np.ix_(list(rows), list(cols))]) if rows and cols \
            else Matrix.zeros(len(rows), len(cols))

    @property
    def T(self) -> "Matrix":
        return Matrix.from_array(self._a.T)

    # ---- arithmetic
    def _check_same(self, other: "Matrix"):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix.from_array(self._a + other._a)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix.from_array(self._a - other._a)

    def __neg__(self) -> "Matrix":
        return Matrix.from_array(-self._a)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        if self.cols == 0:
            return Matrix.zeros(self.rows, other.cols)
        return Matrix.from_array(np.matmul(self._a, other._a))

    def scale(self, s: ScalarLike) -> "Matrix":
        s = Scalar.coerce(s)
        return Matrix.from_array(self._a * s) if self.rows and self.cols else self

    def apply(self, v: Sequence[Scalar]) -> list[Scalar]:
        """matrix-vector product"""
        return [sum((self._a[i, j] * v[j] for j in range(self.cols)), ZERO)
                for i in range(self.rows)]

    def commutator(self, other: "Matrix") -> "Matrix":
        return self @ other - other @ self

    # ---- comparison
    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for a, b in zip(self._a.flat, other._a.flat))

    def __hash__(self):
        return hash((self.shape, self.entries))

    def __repr__(self):
        body = "; ".join(", ".join(str(v) for v in row) for row in self._a)
        return f"Matrix[{body}]"


# ==============================
#  SYMPY BRIDGE
# ==============================
def as_gaussian(s: ScalarLike):
    """Scalar -> element of sympy's QQ_I"""
    s = Scalar.coerce(s)
    return QQ_I(QQ(s.re.numerator, s.re.denominator), QQ(s.im.numerator, s.im.denominator))


def from_gaussian(e) -> Scalar:
    """element of QQ_I (or QQ) -> Scalar"""
    x, y = (e.x, e.y) if hasattr(e, "y") else (e, 0)
    return Scalar(Fraction(int(QQ.numer(QQ.convert(x))), int(QQ.denom(QQ.convert(x)))),
                  Fraction(int(QQ.numer(QQ.convert(y))), int(QQ.denom(QQ.convert(y)))))


def to_expr(s: ScalarLike) -> sp.Expr:
    s = Scalar.coerce(s)
    return sp.Rational(s.re.numerator, s.re.denominator) + sp.I * sp.Rational(s.im.numerator, s.im.denominator)


def from_expr(e: sp.Expr) -> Scalar:
    """
    Raises
    ------
    TypeError
        e is not an exact Gaussian rational
    """
    re, im = sp.expand(e).as_real_imag()
    if not (re.is_Rational and im.is_Rational):
        raise TypeError(f"{e} is not a Gaussian rational")
    return Scalar(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))


def to_domain_matrix(m: Matrix) -> DomainMatrix:
    return DomainMatrix([[as_gaussian(v) for v in row] for row in m.tolist()], m.shape, QQ_I)


def from_domain_matrix(d: DomainMatrix) -> Matrix:
    return Matrix([[from_gaussian(v) for v in row] for row in d.to_list()], cols=d.shape[1])


# ==============================
#  ELIMINATION
# ==============================
def _rref(m: Matrix) -> tuple[list[list[Scalar]], list[int]]:
    """reduced row echelon rows and pivot columns"""
    if m.rows == 0 or m.cols == 0:
        return m.tolist(), []
    reduced, pivots = to_domain_matrix(m).rref()
    return from_domain_matrix(reduced).tolist(), list(pivots)


def row_reduce_with_transform(m: Matrix) -> tuple[Matrix, Matrix, list[int]]:
    """
    Returns (p, r, pivots) with p invertible and p @ m == r in reduced row echelon form.
    """
    n = m.rows
    if n == 0 or m.cols == 0:
        return Matrix.identity(n), m, []
    aug = to_domain_matrix(m).hstack(to_domain_matrix(Matrix.identity(n)))
    reduced, pivots = aug.rref()
    rows = from_domain_matrix(reduced).tolist()
    r = Matrix([row[:m.cols] for row in rows], cols=m.cols)
    p = Matrix([row[m.cols:] for row in rows], cols=n)
    return p, r, [c for c in pivots if c < m.cols]


def rank(m: Matrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return to_domain_matrix(m).rank()


def nullspace(m: Matrix) -> list[list[Scalar]]:
    """
    Basis of {v : m v = 0}. One vector per free column, in ascending column
    order, with a 1 at its free column.
    """
    rows, pivots = _rref(m)
    basis = []
    for free in (c for c in range(m.cols) if c not in pivots):
        v = [ZERO] * m.cols
        v[free] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][free]
        basis.append(v)
    return basis


def solve_affine(a: Matrix, b: Sequence[Scalar]) -> Optional[tuple[list[Scalar], list[list[Scalar]]]]:
    """
    Solve a x = b. Returns (particular, nullspace basis) or None when infeasible.
    The particular solution has zeros at every free coordinate.
    """
    if len(b) != a.rows:
        raise DimensionMismatch("right-hand side length")
    aug = Matrix([row + [Scalar.coerce(bi)] for row, bi in zip(a.tolist(), b)], cols=a.cols + 1)
    rows, pivots = _rref(aug)
    if a.cols in pivots:
        return None
    x = [ZERO] * a.cols
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][a.cols]
    return x, nullspace(a)


def inverse(m: Matrix) -> Matrix:
    if not m.is_square():
        raise DimensionMismatch(f"cannot invert a {m.rows}x{m.cols} matrix")
    if m.rows == 0:
        return m
    try:
        return from_domain_matrix(to_domain_matrix(m).inv())
    except DMNonInvertibleMatrixError:
        raise SingularMatrix(f"matrix of rank {rank(m)} < {m.rows} is not invertible") from None


class Span:
    """Incrementally grown subspace; keeps the independent vectors it was given."""

    def __init__(self, dim: int, vectors: Iterable[Sequence[Scalar]] = ()):
        self.dim = dim
        self._rows: list[list[Scalar]] = []
        for v in vectors:
            self.add(v)

    def __len__(self) -> int:
        return len(self._rows)

    def contains(self, v: Sequence[Scalar]) -> bool:
        if all(Scalar.coerce(x).is_zero() for x in v):
            return True
        if not self._rows:
            return False
        return rank(Matrix(self._rows + [list(v)], cols=self.dim)) == len(self._rows)

    def add(self, v: Sequence[Scalar]) -> bool:
        """Adds v; returns False when v already lies in the span."""
        if self.contains(v):
            return False
        self._rows.append([Scalar.coerce(x) for x in v])
        return True

    def basis(self) -> list[list[Scalar]]:
        return [list(r) for r in self._rows]


# ==============================
#  POLYNOMIALS (low -> high coefficient lists)
# ==============================
def poly_eval(coeffs: Sequence[Scalar], x: Scalar) -> Scalar:
    acc = ZERO
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_deflate(coeffs: Sequence[Scalar], root: Scalar) -> list[Scalar]:
    """Synthetic division by (x - root); the remainder is dropped."""
    n = len(coeffs) - 1
    out = [ZERO] * n
    acc = ZERO
    for k in range(n, 0, -1):
        acc = acc * root + coeffs[k]
        out[k - 1] = acc
    return out


def char_poly(m: Matrix) -> list[Scalar]:
    """
    Monic characteristic polynomial det(xI - m).
    Coefficients are returned low -> high, so the last entry is 1.
    """
    if not m.is_square():
        raise DimensionMismatch("characteristic polynomial of a non-square matrix")
    if m.rows == 0:
        return [ONE]
    return [from_gaussian(c) for c in reversed(to_domain_matrix(m).charpoly())]


_X = sp.Symbol("x")


def _linear_roots(poly: sp.Poly) -> tuple[list[Scalar], list[sp.Poly]]:
    """roots of the linear factors (with multiplicity) and the remaining irreducible factors"""
    roots, rest = [], []
    for factor, mult in poly.factor_list()[1]:
        if factor.degree() == 1:
            c1, c0 = (from_expr(c) for c in factor.all_coeffs())
            roots.extend([-c0 / c1] * mult)
        else:
            rest.extend([factor] * mult)
    return roots, rest


def _field_roots(p: list[Scalar]) -> list[Scalar]:
    """
    Q(i)-roots of p (low -> high), with multiplicity. Factors over Q first;
    only the factors left irreducible there are split again over Q(i).
    """
    if all(c.is_real() for c in p):
        poly = sp.Poly.from_list([QQ(c.re.numerator, c.re.denominator) for c in reversed(p)], _X, domain=QQ)
        roots, rest = _linear_roots(poly)
        for factor in rest:
            more, _ = _linear_roots(sp.Poly(factor.as_expr(), _X, domain=QQ_I))
            roots.extend(more)
        return roots
    poly = sp.Poly.from_list([as_gaussian(c) for c in reversed(p)], _X, domain=QQ_I)
    return _linear_roots(poly)[0]


def eigenvalues_in_field(m: Matrix, hints: Optional[Sequence[ScalarLike]] = None) -> list[Scalar]:
    """
    Full multiset of eigenvalues of m when they all lie in Q(i).

    Parameters
    ----------
    m: Matrix
        square matrix
    hints: sequence or None
        candidate eigenvalues, checked exactly before the polynomial is factored

    Raises
    ------
    NotInField
        some factor of the characteristic polynomial has no root in Q(i)
    """
    if not m.is_square():
        raise DimensionMismatch("eigenvalues of a non-square matrix")
    p = char_poly(m)
    roots: list[Scalar] = []

    for h in hints or ():
        hs = Scalar.coerce(h)
        while len(p) > 1 and poly_eval(p, hs).is_zero():
            p = poly_deflate(p, hs)
            roots.append(hs)

    if len(p) > 1:
        for r in _field_roots(p):
            p = poly_deflate(p, r)
            roots.append(r)

    if len(p) > 1:
        mylogger.debug(f"factorisation left a factor of degree {len(p) - 1}")
        raise NotInField(p)
    return sorted(roots, key=sort_key)


# ==============================
#  JORDAN STRUCTURE
# ==============================
@dataclass(frozen=True)
class JordanSpec:
    """
    Ordered Jordan blocks (lambda, size). Equal lambdas are adjacent and
    sizes are non-increasing inside each run.
    """
    blocks: tuple[tuple[Scalar, int], ...]

    def __post_init__(self):
        seen = []
        for i, (lam, size) in enumerate(self.blocks):
            if size < 1:
                raise ValueError("Jordan block sizes must be >= 1")
            if i and self.blocks[i - 1][0] == lam:
                if self.blocks[i - 1][1] < size:
                    raise ValueError("sizes must be non-increasing inside a run")
            elif lam in seen:
                raise ValueError("blocks with equal lambda must be adjacent")
            seen.append(lam)

    @classmethod
    def normalized(cls, blocks: Iterable[tuple[ScalarLike, int]]) -> "JordanSpec":
        """sort runs by the Scalar order and sizes decreasing inside each run"""
        items = [(Scalar.coerce(lam), int(n)) for lam, n in blocks]
        items.sort(key=lambda b: (b[0].key(), -b[1]))
        return cls(tuple(items))

    @property
    def size(self) -> int:
        return sum(n for _, n in self.blocks)

    def runs(self) -> list[tuple[Scalar, tuple[int, ...]]]:
        out: list[tuple[Scalar, list[int]]] = []
        for lam, n in self.blocks:
            if out and out[-1][0] == lam:
                out[-1][1].append(n)
            else:
                out.append((lam, [n]))
        return [(lam, tuple(sizes)) for lam, sizes in out]

    def size_multiset(self) -> tuple[int, ...]:
        return tuple(sorted((n for _, n in self.blocks), reverse=True))

    def realize(self) -> Matrix:
        return Matrix.block_diag([Matrix.jordan_block(lam, n) for lam, n in self.blocks])


def _nilpotent_chains(nil: Matrix, multiplicity: int) -> list[list[list[Scalar]]]:
    """
    Jordan chains [N^(k-1) v, ..., N v, v] of the nilpotent part on one
    generalized eigenspace, longest first. Chain tops are picked from the
    nullspace bases of N^k in ascending free-column order.
    """
    n = nil.rows
    kernels = [[]]
    power = Matrix.identity(n)
    while len(kernels[-1]) < multiplicity:
        power = power @ nil
        kernels.append(nullspace(power))
        if len(kernels) > n + 1:
            raise SloccError("generalized eigenspace did not stabilize")
    top = len(kernels) - 1

    chains: list[list[list[Scalar]]] = []
    covered: list[list[Scalar]] = []
    for k in range(top, 0, -1):
        span = Span(n, kernels[k - 1])
        for v in covered:
            span.add(v)
        new_tops = [v for v in kernels[k] if span.add(v)]
        for v in new_tops:
            chain = [v]
            for _ in range(k - 1):
                chain.insert(0, nil.apply(chain[0]))
            chains.append(chain)
        covered = [nil.apply(v) for v in covered + new_tops]
    return chains


def jordan_decompose(m: Matrix, hints: Optional[Sequence[ScalarLike]] = None) -> tuple[Matrix, JordanSpec]:
    """
    Exact Jordan decomposition: inverse(s) @ m @ s == spec.realize().

    Eigenvalue runs follow the Scalar order, blocks inside a run are
    longest first. Already-normalized Jordan input gives s = identity.
    """
    eigs = eigenvalues_in_field(m, hints)
    n = m.rows
    columns: list[list[Scalar]] = []
    blocks: list[tuple[Scalar, int]] = []
    distinct = sorted(set(eigs), key=sort_key)
    for lam in distinct:
        mult = sum(1 for e in eigs if e == lam)
        nil = m - Matrix.identity(n).scale(lam)
        for chain in _nilpotent_chains(nil, mult):
            columns.extend(chain)
            blocks.append((lam, len(chain)))
    s = Matrix.from_columns(columns, n) if n else Matrix.zeros(0)
    spec = JordanSpec(tuple(blocks))
    mylogger.debug(f"jordan_decompose: {[(str(l), k) for l, k in blocks]}")
    return s, spec


def commutant_basis(spec: JordanSpec) -> list[Matrix]:
    """
    Basis of {M : [M, J] = 0} for J = spec.realize(). Every ordered pair of
    blocks sharing an eigenvalue contributes min(n_i, n_j) matrices, each a
    single band of the rectangular upper-triangular Toeplitz pattern.
    """
    sizes = [n for _, n in spec.blocks]
    offsets = [sum(sizes[:i]) for i in range(len(sizes))]
    total = spec.size
    basis = []
    for i, (lam_i, ni) in enumerate(spec.blocks):
        for j, (lam_j, nj) in enumerate(spec.blocks):
            if lam_i != lam_j:
                continue
            first = max(0, nj - ni)
            for k in range(first, nj):
                a = np.full((total, total), ZERO, dtype=object)
                for r in range(ni):
                    c = r + k
                    if c < nj:
                        a[offsets[i] + r, offsets[j] + c] = ONE
                basis.append(Matrix.from_array(a))
    return basis
