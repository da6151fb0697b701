"""
Truncated polynomial algebra in the nilpotent variable x = J_n(0).

Every polynomial carries its order n and all arithmetic is done modulo x^n.
Blocks sharing an eigenvalue are handled as grids of such polynomials
(see PolyGrid).
"""
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from sympy import QQ_I
from sympy.polys.ring_series import (rs_mul, rs_series_inversion,
                                     rs_series_reversion, rs_subs)
from sympy.polys.rings import ring

from pyslocc.models.exactmat import (ZERO, Matrix, Scalar, ScalarLike,
                                     SloccError, as_gaussian, from_gaussian)


# ==============================
#  SERIES RINGS
# ==============================
_SERIES, _x = ring("x", QQ_I)
_REVERSION, _u, _v = ring("u, v", QQ_I)


def _to_series(f: "TruncPoly", r=_SERIES, at: int = 0):
    """coefficients of f on the generator with index `at` of r"""
    terms = {}
    for k, c in enumerate(f.coeffs):
        if not c.is_zero():
            monom = [0] * r.ngens
            monom[at] = k
            terms[tuple(monom)] = as_gaussian(c)
    return r(terms)


def _from_series(p, order: int, at: int = 0) -> "TruncPoly":
    ngens = p.ring.ngens
    out = []
    for k in range(order):
        monom = [0] * ngens
        monom[at] = k
        c = p.get(tuple(monom))
        out.append(ZERO if c is None else from_gaussian(c))
    return TruncPoly(tuple(out))


class OrderMismatch(SloccError):
    """演算対象の打ち切り次数が一致しない"""

class NotInvertible(SloccError):
    """定数項が0で逆数が存在しない"""

class NotReversible(SloccError):
    """1次の係数が0で逆関数が存在しない"""

class NotToeplitz(SloccError):
    """上三角Toeplitz行列ではない"""

class PatternViolation(SloccError):
    """多項式グリッドが可換子のブロックパターンに従わない"""


@dataclass(frozen=True)
class TruncPoly:
    """
    a_0 + a_1 x + ... + a_{n-1} x^{n-1}  (mod x^n)
    """
    coeffs: tuple[Scalar, ...]

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise ValueError("order must be >= 1")
        object.__setattr__(self, "coeffs", tuple(Scalar.coerce(c) for c in self.coeffs))

    @classmethod
    def of(cls, order: int, coeffs: Iterable[ScalarLike] = ()) -> "TruncPoly":
        """pad with zeros up to order; higher terms must be zero"""
        cs = [Scalar.coerce(c) for c in coeffs]
        if any(not c.is_zero() for c in cs[order:]):
            raise OrderMismatch(f"{len(cs)} coefficients do not fit order {order}")
        cs = cs[:order] + [ZERO] * max(0, order - len(cs))
        return cls(tuple(cs))

    @classmethod
    def constant(cls, c: ScalarLike, order: int) -> "TruncPoly":
        return cls.of(order, [c])

    @classmethod
    def variable(cls, order: int, shift: ScalarLike = 0) -> "TruncPoly":
        """shift + x"""
        return cls.of(order, [shift, 1] if order > 1 else [shift])

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k: int) -> Scalar:
        return self.coeffs[k] if k < self.order else ZERO

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def valuation(self) -> int:
        """lowest degree with a nonzero coefficient (order when zero)"""
        return next((k for k, c in enumerate(self.coeffs) if not c.is_zero()), self.order)

    def _check(self, other: "TruncPoly"):
        if self.order != other.order:
            raise OrderMismatch(f"orders {self.order} and {other.order} differ")

    def __add__(self, other: "TruncPoly") -> "TruncPoly":
        self._check(other)
        return TruncPoly(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "TruncPoly") -> "TruncPoly":
        self._check(other)
        return TruncPoly(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "TruncPoly":
        return TruncPoly(tuple(-a for a in self.coeffs))

    def __mul__(self, other: "TruncPoly") -> "TruncPoly":
        return mul(self, other)

    def scale(self, s: ScalarLike) -> "TruncPoly":
        s = Scalar.coerce(s)
        return TruncPoly(tuple(a * s for a in self.coeffs))

    def truncate(self, n: int) -> "TruncPoly":
        """zero every term of degree >= n, keeping the order"""
        return TruncPoly(tuple(c if k < n else ZERO for k, c in enumerate(self.coeffs)))

    def resize(self, order: int) -> "TruncPoly":
        """change the order; dropped terms must be zero"""
        return TruncPoly.of(order, self.coeffs)

    def __str__(self):
        terms = [f"({c})x^{k}" if k else f"({c})" for k, c in enumerate(self.coeffs) if not c.is_zero()]
        return " + ".join(terms) if terms else "0"


def mul(f: TruncPoly, g: TruncPoly) -> TruncPoly:
    """Cauchy product modulo x^n."""
    f._check(g)
    return _from_series(rs_mul(_to_series(f), _to_series(g), _x, f.order), f.order)


def reciprocal(f: TruncPoly) -> TruncPoly:
    """
    1/f modulo x^n.

    Raises
    ------
    NotInvertible
        f(0) == 0
    """
    if f.coeffs[0].is_zero():
        raise NotInvertible("constant term is zero")
    return _from_series(rs_series_inversion(_to_series(f), _x, f.order), f.order)


def compose(f: TruncPoly, g: TruncPoly) -> TruncPoly:
    """f(g(x)) modulo x^n; g may have a constant term."""
    f._check(g)
    return _from_series(rs_subs(_to_series(f), {_x: _to_series(g)}, _x, f.order), f.order)


def shifted_reversion(f: TruncPoly) -> TruncPoly:
    """
    g(u) = b_1 u + b_2 u^2 + ... with g(f(x) - f(0)) = x modulo x^n.

    g evaluated at J_n(f(0)) - f(0) = J_n(0) realizes the inverse
    function of f around f(0).

    Raises
    ------
    NotReversible
        the linear coefficient of f is zero
    """
    n = f.order
    if n == 1:
        return TruncPoly.of(1)
    if f.coeffs[1].is_zero():
        raise NotReversible("linear coefficient is zero")
    h = f - TruncPoly.constant(f.coeffs[0], n)
    g = rs_series_reversion(_to_series(h, _REVERSION, 0), _u, n, _v)
    return _from_series(g, n, at=1)


def compose_shifted(g: TruncPoly, f: TruncPoly) -> TruncPoly:
    """g(f(x) - f(0))"""
    return compose(g, f - TruncPoly.constant(f.coeffs[0], f.order))


def poly_to_toeplitz(f: TruncPoly) -> Matrix:
    n = f.order
    return Matrix([[f.coeffs[j - i] if j >= i else ZERO for j in range(n)] for i in range(n)], cols=n)


def toeplitz_to_poly(m: Matrix) -> TruncPoly:
    """
    Raises
    ------
    NotToeplitz
        m is not square upper-triangular Toeplitz
    """
    if not m.is_square() or m.rows == 0:
        raise NotToeplitz(f"shape {m.shape} is not a nonempty square")
    n = m.rows
    for i in range(n):
        for j in range(n):
            expected = m[0, j - i] if j >= i else ZERO
            if m[i, j] != expected:
                raise NotToeplitz(f"entry ({i},{j}) breaks the upper-triangular Toeplitz pattern")
    return TruncPoly(tuple(m[0, j] for j in range(n)))


def eval_at_jordan(f: TruncPoly, lam: ScalarLike = 0) -> Matrix:
    """f(J_n(lam)) as an explicit n x n matrix (Toeplitz of f(lam + x))."""
    return poly_to_toeplitz(compose(f, TruncPoly.variable(f.order, lam)))


# ==============================
#  POLYNOMIAL GRIDS
# ==============================
def _corner(f: TruncPoly, rows: int, cols: int) -> np.ndarray:
    a = np.full((rows, cols), ZERO, dtype=object)
    for r in range(rows):
        for c in range(r, cols):
            a[r, c] = f[c - r]
    return a


@dataclass(frozen=True)
class PolyGrid:
    """
    Polynomial matrix describing an element of the commutant of
    J_{n_1}(0) + ... + J_{n_k}(0). Entry (i, j) stands for the top-left
    n_i x n_j corner of its Toeplitz matrix; it vanishes in degrees >= n_j
    and, when n_i < n_j, in degrees < n_j - n_i.
    """
    sizes: tuple[int, ...]
    entries: tuple[tuple[TruncPoly, ...], ...]

    def __post_init__(self):
        k = len(self.sizes)
        if k == 0 or len(self.entries) != k or any(len(row) != k for row in self.entries):
            raise PatternViolation(f"grid must be {k}x{k}")
        order = max(self.sizes)
        for i, ni in enumerate(self.sizes):
            for j, nj in enumerate(self.sizes):
                f = self.entries[i][j]
                if f.order != order:
                    raise OrderMismatch(f"entry ({i},{j}) has order {f.order}, expected {order}")
                low = max(0, nj - ni)
                if f.valuation() < low or any(not f[d].is_zero() for d in range(nj, order)):
                    raise PatternViolation(
                        f"entry ({i},{j}) must live in degrees {low}..{nj - 1} for sizes ({ni},{nj})")

    @classmethod
    def single(cls, f: TruncPoly) -> "PolyGrid":
        return cls((f.order,), ((f,),))

    @classmethod
    def build(cls, sizes: Sequence[int], fn: Callable[[int, int], TruncPoly]) -> "PolyGrid":
        k = range(len(sizes))
        return cls(tuple(sizes), tuple(tuple(fn(i, j) for j in k) for i in k))

    @classmethod
    def diagonal(cls, sizes: Sequence[int], f: TruncPoly) -> "PolyGrid":
        """f(x) on the whole run"""
        zero = TruncPoly.of(f.order)
        return cls.build(sizes, lambda i, j: f.truncate(sizes[j]) if i == j else zero)

    @classmethod
    def direct_sum(cls, grids: Sequence["PolyGrid"]) -> "PolyGrid":
        sizes = tuple(n for g in grids for n in g.sizes)
        order = max(sizes)
        owner = [(gi, i) for gi, g in enumerate(grids) for i in range(len(g.sizes))]
        zero = TruncPoly.of(order)

        def entry(a, b):
            (ga, ia), (gb, ib) = owner[a], owner[b]
            return grids[ga].entries[ia][ib].resize(order) if ga == gb else zero
        return cls.build(sizes, entry)

    @property
    def order(self) -> int:
        return max(self.sizes)

    @property
    def dim(self) -> int:
        return sum(self.sizes)

    def is_single(self) -> bool:
        return len(self.sizes) == 1

    def entry(self, i: int, j: int) -> TruncPoly:
        return self.entries[i][j]

    def block(self, i: int, j: int) -> Matrix:
        return Matrix.from_array(_corner(self.entries[i][j], self.sizes[i], self.sizes[j]))

    def assemble(self) -> Matrix:
        offsets = np.cumsum((0,) + self.sizes)
        a = np.full((self.dim, self.dim), ZERO, dtype=object)
        for i, ni in enumerate(self.sizes):
            for j, nj in enumerate(self.sizes):
                a[offsets[i]:offsets[i] + ni, offsets[j]:offsets[j] + nj] = \
                    _corner(self.entries[i][j], ni, nj)
        return Matrix.from_array(a)

    def map_entries(self, fn: Callable[[TruncPoly], TruncPoly]) -> "PolyGrid":
        """apply fn entrywise, then truncate entry (i, j) at n_j"""
        return PolyGrid.build(self.sizes, lambda i, j: fn(self.entries[i][j]).truncate(self.sizes[j]))

    def scale(self, s: ScalarLike) -> "PolyGrid":
        return self.map_entries(lambda f: f.scale(s))

    def mul_scalar_poly(self, f: TruncPoly) -> "PolyGrid":
        return self.map_entries(lambda e: mul(e, f))

    def compose(self, h: TruncPoly) -> "PolyGrid":
        """substitute x -> h(x) in every entry; h(0) must be zero"""
        if not h.coeffs[0].is_zero():
            raise PatternViolation("substitution must fix the origin")
        return self.map_entries(lambda e: compose(e, h))

    def permuted(self, perm: Sequence[int]) -> "PolyGrid":
        return PolyGrid.build([self.sizes[p] for p in perm],
                              lambda i, j: self.entries[perm[i]][perm[j]])

    def __str__(self):
        rows = ["[" + ", ".join(str(f) for f in row) + "]" for row in self.entries]
        return f"sizes={self.sizes} " + " ".join(rows)


def poly_matrix_to_commutant(entries: Sequence[Sequence[TruncPoly]], sizes: Sequence[int]) -> Matrix:
    """
    Assemble the explicit commutant element of J_{n_1}(0) + ... + J_{n_k}(0)
    from a k x k grid of polynomials.

    Raises
    ------
    PatternViolation
        an entry carries terms outside the band its block allows
    """
    grid = PolyGrid(tuple(sizes), tuple(tuple(row) for row in entries))
    return grid.assemble()
