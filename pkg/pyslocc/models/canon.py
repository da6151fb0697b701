"""
Canonicalization of L x N x N states under invertible local operators.

A state is an L-tuple of N x N matrices. Full-rank states reduce to
(E, J, A) with J in Jordan form and A in the commutant of J; states whose
combinations never reach rank N are split into a full-rank part and a
singular part instead.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional, Sequence

import numpy as np

import pyslocc.config as cfg
from pyslocc.models.exactmat import (ONE, ZERO, DimensionMismatch, JordanSpec,
                                     Matrix, Scalar, ScalarLike, SloccError,
                                     NotInField, Span, commutant_basis,
                                     eigenvalues_in_field, inverse,
                                     jordan_decompose, nullspace, rank,
                                     row_reduce_with_transform, solve_affine,
                                     sort_key)
from pyslocc.models.nilpoly import PatternViolation, PolyGrid, TruncPoly
from pyslocc.utils.log import get_logger

mylogger = get_logger(__name__)


class NotFullRank(SloccError):
    """最大ランクがNに届かない"""

class NotCommuting(SloccError):
    """簡約後の2つの行列が可換でない"""

class NoSplitFound(SloccError):
    """非フルランク状態の分解が見つからない"""

class TupleTooWide(SloccError):
    """簡約後のスロットが3次元以上の空間を張る"""


# ==============================
#  STATES AND OPERATORS
# ==============================
@dataclass(frozen=True)
class TensorState:
    gammas: tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(self.gammas))
        if not self.gammas:
            raise DimensionMismatch("a state needs at least one slot")
        n = self.gammas[0].rows
        for g in self.gammas:
            if g.shape != (n, n):
                raise DimensionMismatch(f"slot of shape {g.shape} in a state with N={n}")
        if all(g.is_zero() for g in self.gammas):
            raise SloccError("every slot of the state is zero")

    @property
    def L(self) -> int:
        return len(self.gammas)

    @property
    def N(self) -> int:
        return self.gammas[0].rows


@dataclass(frozen=True)
class ILOTriple:
    t: Matrix
    p: Matrix
    q: Matrix

    def __post_init__(self):
        for name in ("t", "p", "q"):
            m = getattr(self, name)
            if not m.is_square() or rank(m) != m.rows:
                raise DimensionMismatch(f"operator {name} of shape {m.shape} is not invertible")

    @classmethod
    def identity(cls, L: int, N: int) -> "ILOTriple":
        return cls(Matrix.identity(L), Matrix.identity(N), Matrix.identity(N))

    def then(self, other: "ILOTriple") -> "ILOTriple":
        """the triple acting as self followed by other"""
        return ILOTriple(other.t @ self.t, other.p @ self.p, self.q @ other.q)


def combine(psi: TensorState, t: Sequence[ScalarLike]) -> Matrix:
    acc = Matrix.zeros(psi.N)
    for tj, g in zip(t, psi.gammas):
        tj = Scalar.coerce(tj)
        if not tj.is_zero():
            acc = acc + g.scale(tj)
    return acc


def apply_ilo(psi: TensorState, ops: ILOTriple) -> TensorState:
    """Gamma'_i = sum_j T_ij P Gamma_j Q"""
    if ops.t.rows != psi.L or ops.p.rows != psi.N or ops.q.rows != psi.N:
        raise DimensionMismatch(
            f"operators {ops.t.shape}/{ops.p.shape}/{ops.q.shape} do not fit L={psi.L}, N={psi.N}")
    local = [ops.p @ g @ ops.q for g in psi.gammas]
    out = []
    for i in range(psi.L):
        acc = Matrix.zeros(psi.N)
        for j in range(psi.L):
            if not ops.t[i, j].is_zero():
                acc = acc + local[j].scale(ops.t[i, j])
        out.append(acc)
    return TensorState(tuple(out))


# ==============================
#  MAXIMUM RANK / REDUCTION
# ==============================
@dataclass(frozen=True)
class RankSearch:
    t: tuple[Scalar, ...]
    rank: int
    certified: bool
    samples: int


def _sweep_key(t: tuple[int, ...]):
    return (sum(1 for v in t if v), sum(abs(v) for v in t), tuple((v == 0, -v) for v in t))


def max_rank_combination(psi: TensorState, seed: int = cfg.DEFAULT_SEED,
                         sweep: Sequence[int] = cfg.SWEEP_VALUES,
                         samples: int = cfg.RANDOM_SAMPLES,
                         magnitude: int = cfg.RANDOM_MAGNITUDE,
                         sweep_limit: int = cfg.SWEEP_LIMIT) -> RankSearch:
    """
    Coefficients t with rank(sum t_j Gamma_j) as large as the search finds.

    Small-integer tuples are swept first in a fixed order, then random
    tuples are drawn. The rank is certified maximal only when it equals N.
    """
    best_t: Optional[tuple[int, ...]] = None
    best_rank = -1
    tried = 0

    def attempt(t) -> bool:
        nonlocal best_t, best_rank, tried
        tried += 1
        r = rank(combine(psi, t))
        if r > best_rank:
            best_t, best_rank = tuple(t), r
        return best_rank == psi.N

    done = False
    if len(sweep) ** psi.L <= sweep_limit:
        grid = sorted((t for t in product(sweep, repeat=psi.L) if any(t)), key=_sweep_key)
        done = any(attempt(t) for t in grid)
    else:
        mylogger.debug(f"sweep over {len(sweep)}^{psi.L} tuples skipped")
    if not done:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            t = tuple(int(v) for v in rng.integers(-magnitude, magnitude + 1, size=psi.L))
            if any(t) and attempt(t):
                break

    certified = best_rank == psi.N
    if certified:
        mylogger.debug(f"max rank {best_rank} certified with t={best_t}")
    else:
        mylogger.info(f"best rank {best_rank} < N={psi.N} after {tried} samples")
    return RankSearch(tuple(Scalar(v) for v in best_t), best_rank, certified, tried)


def _row_transform(t: Sequence[Scalar]) -> Matrix:
    """T whose first row is t and whose other rows are unit rows skipping the pivot"""
    k = next(i for i, v in enumerate(t) if not v.is_zero())
    rows = [list(t)]
    for j in range(len(t)):
        if j != k:
            rows.append([ONE if c == j else ZERO for c in range(len(t))])
    return Matrix(rows)


def full_rank_reduce(psi: TensorState, seed: int = cfg.DEFAULT_SEED) -> TensorState:
    """
    Bring the first slot to the identity.

    Raises
    ------
    NotFullRank
        no combination of the slots reaches rank N
    """
    search = max_rank_combination(psi, seed=seed)
    if not search.certified:
        raise NotFullRank(f"maximum rank found is {search.rank} < {psi.N}")
    t = _row_transform(search.t)
    first = combine(psi, search.t)
    ident = Matrix.identity(psi.N)
    return apply_ilo(psi, ILOTriple(t, inverse(first), ident))


def _require_identity_head(psi: TensorState):
    if psi.gammas[0] != Matrix.identity(psi.N):
        raise NotFullRank("first slot is not reduced to the identity")


def eigen_shift(psi: TensorState, hints: Optional[Sequence[ScalarLike]] = None) -> TensorState:
    """Gamma_i -> Gamma_i - t E with t the smallest eigenvalue of Gamma_i (i >= 2)."""
    _require_identity_head(psi)
    ident = psi.gammas[0]
    out = [ident]
    for g in psi.gammas[1:]:
        smallest = eigenvalues_in_field(g, hints)[0]
        out.append(g - ident.scale(smallest))
    return TensorState(tuple(out))


def reduce_to_pair(psi: TensorState) -> TensorState:
    """
    Rewrite a reduced state (E, Gamma_2, ..., Gamma_L) as (E, B_1, B_2),
    where B_1, B_2 are the first slots spanning Gamma_2 ... Gamma_L
    (zero-padded when the span is smaller).

    Raises
    ------
    TupleTooWide
        the slots span three or more dimensions
    """
    _require_identity_head(psi)
    n = psi.N
    span = Span(n * n)
    chosen = [g for g in psi.gammas[1:] if span.add(list(g.entries))]
    if len(chosen) > 2:
        raise TupleTooWide(f"slots 2..{psi.L} span {len(chosen)} dimensions")
    while len(chosen) < 2:
        chosen.append(Matrix.zeros(n))
    return TensorState((psi.gammas[0], chosen[0], chosen[1]))


def _shifted_variants(m: Matrix, ident: Matrix, hints: Optional[Sequence[ScalarLike]]) -> list[Matrix]:
    """m itself, then m - t E for each distinct eigenvalue t"""
    try:
        eigs = eigenvalues_in_field(m, hints)
    except NotInField:
        return [m]
    return [m] + [m - ident.scale(t) for t in dict.fromkeys(eigs) if not t.is_zero()]


def rank_order(pair: TensorState, hints: Optional[Sequence[ScalarLike]] = None) -> TensorState:
    """
    Reorder and recombine the slots of (E, B1, B2) so that r(E) > r(B1) > r(B2).

    The slots may be swapped, and the lower one replaced by B2 + c B1 - t E
    with c from cfg.RECOMBINE_COEFFS and t an eigenvalue. These are
    invertible slot operations, so the orbit is unchanged. The pair is
    returned as given when no such choice orders the ranks.
    """
    _require_identity_head(pair)
    ident, b1, b2 = pair.gammas
    n = pair.N
    for upper, lower in ((b1, b2), (b2, b1)):
        r_upper = rank(upper)
        if r_upper >= n:
            continue
        for c in cfg.RECOMBINE_COEFFS:
            for candidate in _shifted_variants(lower + upper.scale(Scalar(c)), ident, hints):
                if rank(candidate) < r_upper:
                    return TensorState((ident, upper, candidate))
    mylogger.info("no slot recombination orders the ranks r(E) > r(J) > r(A)")
    return pair


def rank_normal_form(m: Matrix) -> tuple[Matrix, Matrix, int]:
    """(P, Q, r) with P m Q = diag(E_r, 0)"""
    p, reduced, pivots = row_reduce_with_transform(m)
    columns = []
    for c in pivots:
        columns.append([ONE if k == c else ZERO for k in range(m.cols)])
    for c in (c for c in range(m.cols) if c not in pivots):
        v = [ONE if k == c else ZERO for k in range(m.cols)]
        for r, pc in enumerate(pivots):
            v[pc] = v[pc] - reduced[r, c]
        columns.append(v)
    return p, Matrix.from_columns(columns, m.cols), len(pivots)


# ==============================
#  CANONICAL FORM
# ==============================
@dataclass(frozen=True)
class Run:
    """Blocks sharing one eigenvalue of J, with their A part as a polynomial grid."""
    lam: Scalar
    grid: PolyGrid

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.grid.sizes

    def coeffs(self) -> tuple[Scalar, ...]:
        """coefficients a_0 ... a_{n-1} of a single-block run"""
        if not self.grid.is_single():
            raise PatternViolation("run holds more than one block")
        return self.grid.entry(0, 0).coeffs


def _sorted_grid(grid: PolyGrid) -> PolyGrid:
    perm = sorted(range(len(grid.sizes)), key=lambda i: -grid.sizes[i])
    return grid if perm == list(range(len(perm))) else grid.permuted(perm)


@dataclass(frozen=True)
class CanonicalForm:
    """
    (E, J, A) with E implicit: J from the runs' eigenvalues and sizes,
    A block diagonal over runs.
    """
    runs: tuple[Run, ...]

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(self.runs))
        if not self.runs:
            raise DimensionMismatch("a canonical form needs at least one block")
        for prev, cur in zip(self.runs, self.runs[1:]):
            if not sort_key(prev.lam) < sort_key(cur.lam):
                raise PatternViolation("runs must have distinct eigenvalues in increasing order")
        for run in self.runs:
            if list(run.sizes) != sorted(run.sizes, reverse=True):
                raise PatternViolation("block sizes inside a run must be non-increasing")

    @classmethod
    def merged(cls, runs: Iterable[Run]) -> "CanonicalForm":
        """merge runs with equal eigenvalues and sort everything into normal order"""
        groups: dict[Scalar, list[PolyGrid]] = {}
        for run in runs:
            groups.setdefault(run.lam, []).append(run.grid)
        out = []
        for lam in sorted(groups, key=sort_key):
            grids = groups[lam]
            grid = grids[0] if len(grids) == 1 else PolyGrid.direct_sum(grids)
            out.append(Run(lam, _sorted_grid(grid)))
        return cls(tuple(out))

    @classmethod
    def from_blocks(cls, blocks: Iterable[tuple[ScalarLike, Sequence[ScalarLike]]]) -> "CanonicalForm":
        """blocks given as (lambda, (a_0, ..., a_{n-1}))"""
        return cls.merged(
            Run(Scalar.coerce(lam), PolyGrid.single(TruncPoly.of(len(cs), cs))) for lam, cs in blocks)

    @property
    def spec(self) -> JordanSpec:
        return JordanSpec(tuple((run.lam, n) for run in self.runs for n in run.sizes))

    @property
    def N(self) -> int:
        return sum(run.grid.dim for run in self.runs)

    def is_derogatory(self) -> bool:
        return any(not run.grid.is_single() for run in self.runs)

    def J(self) -> Matrix:
        return self.spec.realize()

    def A(self) -> Matrix:
        return Matrix.block_diag([run.grid.assemble() for run in self.runs])

    def to_state(self) -> TensorState:
        return TensorState((Matrix.identity(self.N), self.J(), self.A()))

    def __str__(self):
        parts = []
        for run in self.runs:
            if run.grid.is_single():
                parts.append(f"({run.lam}; {', '.join(str(c) for c in run.coeffs())})")
            else:
                parts.append(f"({run.lam}; {run.grid})")
        return " ".join(parts)


def _read_grid(a: Matrix, start: int, sizes: Sequence[int]) -> PolyGrid:
    offsets = [start + sum(sizes[:k]) for k in range(len(sizes))]
    order = max(sizes)

    def entry(i, j):
        return TruncPoly.of(order, [a[offsets[i], offsets[j] + d] for d in range(sizes[j])])
    grid = PolyGrid.build(sizes, entry)
    for i, ni in enumerate(sizes):
        for j, nj in enumerate(sizes):
            actual = a.submatrix(range(offsets[i], offsets[i] + ni), range(offsets[j], offsets[j] + nj))
            if actual != grid.block(i, j):
                raise PatternViolation(f"block ({i},{j}) is not a commutant band")
    return grid


def commuting_pair_canonical(a2: Matrix, a3: Matrix,
                             hints: Optional[Sequence[ScalarLike]] = None) -> tuple[CanonicalForm, Matrix]:
    """
    Simultaneous similarity of a commuting pair to (J, A).

    Returns
    -------
    cf: CanonicalForm
    s: Matrix
        witness with inverse(s) @ a2 @ s == J and inverse(s) @ a3 @ s == A
    """
    if a2.shape != a3.shape or not a2.is_square():
        raise DimensionMismatch(f"pair of shapes {a2.shape} and {a3.shape}")
    if not a2.commutator(a3).is_zero():
        raise NotCommuting("[A2, A3] != 0")
    s, spec = jordan_decompose(a2, hints)
    a = inverse(s) @ a3 @ s

    runs = []
    start = 0
    bounds = []
    for lam, sizes in spec.runs():
        runs.append(Run(lam, _read_grid(a, start, sizes)))
        bounds.append((start, start + sum(sizes)))
        start += sum(sizes)
    for (r0, r1) in bounds:
        for (c0, c1) in bounds:
            if (r0, r1) != (c0, c1) and not a.submatrix(range(r0, r1), range(c0, c1)).is_zero():
                raise PatternViolation("A couples blocks with different eigenvalues")
    return CanonicalForm(tuple(runs)), s


def canonicalize(psi: TensorState, hints: Optional[Sequence[ScalarLike]] = None,
                 shift: bool = False, seed: int = cfg.DEFAULT_SEED) -> tuple[CanonicalForm, Matrix]:
    """full-rank pipeline: reduce, optionally shift, compress to a pair, canonicalize"""
    reduced = full_rank_reduce(psi, seed=seed)
    if shift:
        reduced = eigen_shift(reduced, hints)
    pair = reduce_to_pair(reduced)
    if shift:
        pair = rank_order(pair, hints)
    return commuting_pair_canonical(pair.gammas[1], pair.gammas[2], hints)


@dataclass(frozen=True)
class RankProfile:
    e: int
    j: int
    a: int

    @property
    def ordered(self) -> bool:
        return self.e > self.j > self.a


def rank_profile(cf: CanonicalForm) -> RankProfile:
    return RankProfile(cf.N, rank(cf.J()), rank(cf.A()))


def joint_spectrum(cf: CanonicalForm) -> list[tuple[Scalar, Scalar]]:
    """
    Joint eigenvalue pairs (lambda, mu) of (J, A), one per dimension.
    """
    pairs = []
    for run in cf.runs:
        if run.grid.is_single():
            mu = run.grid.entry(0, 0)[0]
            pairs.extend((run.lam, mu) for _ in range(run.grid.dim))
        else:
            pairs.extend((run.lam, mu) for mu in eigenvalues_in_field(run.grid.assemble()))
    return sorted(pairs, key=lambda p: (sort_key(p[0]), sort_key(p[1])))


def _conjugate_in_commutant(a1: Matrix, a2: Matrix, sizes: Sequence[int],
                            rng: np.random.Generator, draws: int) -> bool:
    basis = commutant_basis(JordanSpec(tuple((ZERO, n) for n in sizes)))
    columns = [list((a1 @ b - b @ a2).entries) for b in basis]
    system = Matrix.from_columns(columns, a1.rows * a1.cols)
    solutions = nullspace(system)
    if not solutions:
        return False
    n = a1.rows
    for _ in range(draws):
        weights = [int(w) for w in rng.integers(-1000, 1001, size=len(solutions))]
        coeffs = [sum((w * sol[k] for w, sol in zip(weights, solutions)), ZERO) for k in range(len(basis))]
        s = Matrix.zeros(n)
        for c, b in zip(coeffs, basis):
            if not c.is_zero():
                s = s + b.scale(c)
        if rank(s) == n:
            return True
    return False


def same_class(cf1: CanonicalForm, cf2: CanonicalForm, seed: int = cfg.DEFAULT_SEED,
               draws: int = cfg.GENERIC_DRAWS) -> bool:
    """
    True when cf1 and cf2 differ at most by a similarity commuting with J.
    """
    if cf1.spec != cf2.spec:
        return False
    rng = np.random.default_rng(seed)
    for r1, r2 in zip(cf1.runs, cf2.runs):
        if r1.grid == r2.grid:
            continue
        if r1.grid.is_single():
            return False
        if not _conjugate_in_commutant(r1.grid.assemble(), r2.grid.assemble(), r1.sizes, rng, draws):
            return False
    return True


# ==============================
#  NON-FULL-RANK SPLIT
# ==============================
@dataclass(frozen=True)
class PartitionedForm:
    n: int
    m: int
    i: int
    gamma_part: tuple[Matrix, ...]
    beta_part: tuple[Matrix, ...]
    lambda_prime: Matrix
    ops: Optional[ILOTriple] = field(default=None, compare=False)

    def __post_init__(self):
        if self.m <= self.i:
            raise NoSplitFound(f"singular part of size {self.m} cannot carry rank deficiency {self.i}")

    def gamma_state(self) -> Optional[TensorState]:
        """(E_n, gamma_2, ...) or None when the full-rank part is empty"""
        if self.n == 0:
            return None
        return TensorState((Matrix.identity(self.n),) + self.gamma_part)


def _columns(vectors: Sequence[Sequence[Scalar]], dim: int) -> Matrix:
    return Matrix.from_columns(vectors, dim) if vectors else Matrix.zeros(dim, 0)


def _hstack(a: Matrix, b: Matrix) -> Matrix:
    return Matrix.from_array(np.hstack([a.to_array(), b.to_array()]))


def _span_basis(vectors: Iterable[Sequence[Scalar]], dim: int) -> list[list[Scalar]]:
    return Span(dim, vectors).basis()


def _preimage(g: Matrix, target: list[list[Scalar]]) -> list[list[Scalar]]:
    """{v : g v in span(target)}"""
    system = _hstack(g, -_columns(target, g.rows))
    return _span_basis((v[:g.cols] for v in nullspace(system)), g.cols)


def _intersect(a: list[list[Scalar]], b: list[list[Scalar]], dim: int) -> list[list[Scalar]]:
    if not a or not b:
        return []
    ma = _columns(a, dim)
    system = _hstack(ma, -_columns(b, dim))
    return _span_basis((ma.apply(v[:len(a)]) for v in nullspace(system)), dim)


def _complement(sub: list[list[Scalar]], dim: int,
                within: Optional[list[list[Scalar]]] = None) -> list[list[Scalar]]:
    """vectors of `within` (default: unit vectors) completing sub to a basis"""
    span = Span(dim, sub)
    pool = within if within is not None else \
        [[ONE if k == c else ZERO for k in range(dim)] for c in range(dim)]
    return [list(v) for v in pool if span.add(v)]


def _solve_linear_maps(equations, shapes: Sequence[tuple[int, int]]) -> Optional[list[Matrix]]:
    """
    Solve a system of linear matrix equations  sum_k A_k X_{idx_k} B_k = C.

    `equations` is a sequence of (terms, C) with terms = [(idx, A, B), ...].
    Returns one particular solution, or None when the system is infeasible.
    """
    sizes = [r * c for r, c in shapes]
    offsets = np.cumsum([0] + sizes)
    total = int(offsets[-1])
    if total == 0:
        return [Matrix.zeros(r, c) for r, c in shapes]
    blocks, rhs = [], []
    for terms, c in equations:
        block = np.full((c.rows * c.cols, total), ZERO, dtype=object)
        for idx, a, b in terms:
            if a.cols == 0 or b.rows == 0:
                continue
            o = np.multiply.outer(a.to_array(), b.to_array())
            o = o.transpose(0, 3, 1, 2).reshape(a.rows * b.cols, a.cols * b.rows)
            block[:, offsets[idx]:offsets[idx + 1]] = block[:, offsets[idx]:offsets[idx + 1]] + o
        blocks.append(block)
        rhs.extend(c.entries)
    if not blocks:
        return [Matrix.zeros(r, c) for r, c in shapes]
    solved = solve_affine(Matrix.from_array(np.vstack(blocks)), rhs)
    if solved is None:
        return None
    x, _ = solved
    return [Matrix.from_array(np.array(x[offsets[k]:offsets[k + 1]], dtype=object).reshape(shape))
            if sizes[k] else Matrix.zeros(*shape) for k, shape in enumerate(shapes)]


def _largest_invariant(lam: Matrix, others: Sequence[Matrix]) -> list[list[Scalar]]:
    """largest V with Gamma_j V contained in Lambda V for every j"""
    dim = lam.cols
    current = _span_basis(([ONE if k == c else ZERO for k in range(dim)] for c in range(dim)), dim)
    while True:
        image = _span_basis((lam.apply(v) for v in current), lam.rows)
        nxt = current
        for g in others:
            nxt = _intersect(nxt, _preimage(g, image), dim)
        if len(nxt) == len(current):
            return current
        current = nxt


def _right_singular(lam: Matrix, others: Sequence[Matrix], vstar: list[list[Scalar]]) -> list[list[Scalar]]:
    dim = lam.cols
    current: list[list[Scalar]] = []
    while True:
        reach = _span_basis((g.apply(v) for g in others for v in current), lam.rows)
        nxt = _intersect(vstar, _preimage(lam, reach), dim)
        if len(nxt) == len(current):
            return current
        current = nxt


def nonfull_rank_split(psi: TensorState, seed: int = cfg.DEFAULT_SEED) -> PartitionedForm:
    """
    Split a state whose maximum rank is N - i (i > 0) into a full-rank part
    (E_n, gamma_j) and a singular part (Lambda', beta_j) of size m = N - n,
    with n as large as the construction reaches.

    Raises
    ------
    NoSplitFound
        a linear solve of the construction is infeasible, or the singular
        part carries no slot data
    """
    dim, L = psi.N, psi.L
    search = max_rank_combination(psi, seed=seed)
    deficiency = dim - search.rank
    if deficiency == 0:
        raise NoSplitFound("the state has full rank")
    ident_n = Matrix.identity(dim)
    ops = ILOTriple(_row_transform(search.t), ident_n, ident_n)
    p1, q1, _ = rank_normal_form(combine(psi, search.t))
    ops = ops.then(ILOTriple(Matrix.identity(L), p1, q1))
    staged = apply_ilo(psi, ops)
    lam, others = staged.gammas[0], list(staged.gammas[1:])

    vstar = _largest_invariant(lam, others)
    rstar = _right_singular(lam, others, vstar)
    c = _complement(rstar, dim, within=vstar)
    d, rho = len(c), len(rstar)
    mylogger.debug(f"split: dim V*={len(vstar)}, dim R*={rho}, regular part {d}")

    cm, rm = _columns(c, dim), _columns(rstar, dim)
    lc, lr = lam @ cm, lam @ rm
    u = cm
    if d and rho:
        coords = []
        for g in others:
            sol = _solve_linear_maps([([(0, _hstack(lc, lr), Matrix.identity(d))], g @ cm)], [(d + rho, d)])
            if sol is None:
                raise NoSplitFound("slot image leaves Lambda V*")
            coords.append(sol[0])
        equations = []
        for g, mp in zip(others, coords):
            mj = mp.submatrix(range(d), range(d))
            pj = mp.submatrix(range(d, d + rho), range(d))
            equations.append(([(0, g @ rm, Matrix.identity(d)), (0, -lr, mj)], -(lr @ pj)))
        sol = _solve_linear_maps(equations, [(rho, d)])
        if sol is None:
            raise NoSplitFound("no correction makes the regular part invariant")
        u = cm + rm @ sol[0]

    n = d
    m = dim - n
    u_vecs = [u.column(k) for k in range(n)]
    lu = lam @ u if n else Matrix.zeros(dim, 0)
    lu_vecs = [lu.column(k) for k in range(n)]
    c_prime = _columns(_complement(u_vecs, dim), dim)
    d_prime = _columns(_complement(lu_vecs, dim), dim)

    if n:
        to_coords = inverse(_hstack(lu, d_prime))
        top, bottom = range(n), range(n, dim)
        cols = range(m)

        def split(w: Matrix):
            z = to_coords @ w
            return z.submatrix(top, cols), z.submatrix(bottom, cols)
        a0, b0 = split(lam @ c_prime)
        equations = [([(0, Matrix.identity(n), Matrix.identity(m)), (1, -Matrix.identity(n), b0)], -a0)]
        for g in others:
            mj = to_coords.submatrix(top, range(dim)) @ g @ u
            aj, bj = split(g @ c_prime)
            equations.append(([(0, mj, Matrix.identity(m)), (1, -Matrix.identity(n), bj)], -aj))
        sol = _solve_linear_maps(equations, [(n, m), (n, m)])
        if sol is None:
            raise NoSplitFound("no complement is invariant under every slot")
        alpha, beta = sol
        u_prime = c_prime + u @ alpha
        v_prime = d_prime + lu @ beta
    else:
        u_prime, v_prime = c_prime, d_prime

    p2 = inverse(_hstack(lu, v_prime))
    q2 = _hstack(u, u_prime)
    ops = ops.then(ILOTriple(Matrix.identity(L), p2, q2))
    staged = apply_ilo(psi, ops)

    head, tail = range(n), range(n, dim)
    for g in staged.gammas:
        if not (g.submatrix(head, tail).is_zero() and g.submatrix(tail, head).is_zero()):
            raise NoSplitFound("slots are not block diagonal after the split")
    p3, q3, r = rank_normal_form(staged.gammas[0].submatrix(tail, tail))
    ops = ops.then(ILOTriple(Matrix.identity(L),
                             Matrix.block_diag([Matrix.identity(n), p3]),
                             Matrix.block_diag([Matrix.identity(n), q3])))
    staged = apply_ilo(psi, ops)

    betas = tuple(g.submatrix(tail, tail) for g in staged.gammas[1:])
    if all(b.is_zero() for b in betas):
        raise NoSplitFound("singular part has no slot data")
    pf = PartitionedForm(
        n=n, m=m, i=deficiency,
        gamma_part=tuple(g.submatrix(head, head) for g in staged.gammas[1:]),
        beta_part=betas,
        lambda_prime=staged.gammas[0].submatrix(tail, tail),
        ops=ops)
    mylogger.info(f"split into n={n}, m={m}, i={deficiency}")
    return pf


def beta_canonical_check(pf: PartitionedForm, seed: int = cfg.DEFAULT_SEED) -> bool:
    """max rank of Lambda' + sum alpha_j beta_j equals m - i"""
    if all(b.is_zero() for b in pf.beta_part):
        return False
    search = max_rank_combination(TensorState((pf.lambda_prime,) + pf.beta_part), seed=seed)
    return search.rank == pf.m - pf.i
