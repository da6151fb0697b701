"""
Parametric symmetries of canonical forms.

An upper-triangular T acting on the slots of (E, J, A) factors as
T = T_EJ(z1) T_EA(z2) T_JA(z3) diag(1, d2, d3). Each factor moves the
canonical parameters by an explicit map; composing them and searching for
parameters that connect two forms decides orbit equivalence.
"""
from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Optional, Sequence

import sympy
from sympy import QQ, QQ_I
from sympy.polys.ring_series import rs_mul, rs_series_inversion, rs_subs
from sympy.polys.rings import ring

import pyslocc.config as cfg
from pyslocc.models.canon import (CanonicalForm, Run, commuting_pair_canonical,
                                  joint_spectrum, same_class)
from pyslocc.models.exactmat import (ONE, ZERO, Matrix, NotInField, Scalar,
                                     ScalarLike, SingularMatrix, SloccError,
                                     from_expr, inverse, sort_key,
                                     to_expr)
from pyslocc.models.nilpoly import (NotReversible, PolyGrid, TruncPoly, mul,
                                    reciprocal, shifted_reversion)
from pyslocc.utils.log import get_logger

mylogger = get_logger(__name__)


class DegenerateParameter(SloccError):
    """パラメータが分母を0にする孤立値に当たった"""


class ZeroScale(SloccError):
    """スケール因子d2, d3が0"""


@dataclass(frozen=True)
class SymmetryParams:
    z1: Scalar = ZERO
    z2: Scalar = ZERO
    z3: Scalar = ZERO
    d2: Scalar = ONE
    d3: Scalar = ONE

    def __post_init__(self):
        for name in ("z1", "z2", "z3", "d2", "d3"):
            object.__setattr__(self, name, Scalar.coerce(getattr(self, name)))
        if self.d2.is_zero() or self.d3.is_zero():
            raise ZeroScale("d2 and d3 must be nonzero")

    def is_identity(self) -> bool:
        return self == SymmetryParams()

    def as_dict(self) -> dict[str, Scalar]:
        return {"z1": self.z1, "z2": self.z2, "z3": self.z3, "d2": self.d2, "d3": self.d3}


CANONICAL_ORDER = ("rescale", "JA", "EA", "EJ")


# ==============================
#  MATRIX FORM
# ==============================
def params_to_matrix(sp: SymmetryParams) -> Matrix:
    """T = T_EJ(z1) T_EA(z2) T_JA(z3) diag(1, d2, d3)"""
    u = Matrix([[1, sp.z1, sp.z2 + sp.z1 * sp.z3],
                [0, 1, sp.z3],
                [0, 0, 1]])
    return u @ Matrix.diag([ONE, sp.d2, sp.d3])


def matrix_to_params(t: Matrix) -> SymmetryParams:
    """
    Parameters of an upper-triangular 3 x 3 T with nonzero diagonal,
    up to the overall scale (t11 is normalized to 1).
    """
    if t.shape != (3, 3) or any(not t[i, j].is_zero() for i, j in ((1, 0), (2, 0), (2, 1))):
        raise DegenerateParameter("T must be upper triangular 3x3")
    if any(t[k, k].is_zero() for k in range(3)):
        raise DegenerateParameter("T has a zero diagonal entry")
    t = t.scale(ONE / t[0, 0])
    d2, d3 = t[1, 1], t[2, 2]
    z1 = t[0, 1] / d2
    z3 = t[1, 2] / d3
    z2 = t[0, 2] / d3 - z1 * z3
    return SymmetryParams(z1, z2, z3, d2, d3)


def inverse_params(sp: SymmetryParams) -> SymmetryParams:
    return matrix_to_params(inverse(params_to_matrix(sp)))


def mobius_2nn(lam: ScalarLike, t11: ScalarLike, t12: ScalarLike, t22: ScalarLike) -> Scalar:
    """lambda' = t22 lambda / (t11 + t12 lambda) for 2 x N x N states"""
    lam, t11, t12, t22 = (Scalar.coerce(v) for v in (lam, t11, t12, t22))
    den = t11 + t12 * lam
    if (t11 * t22).is_zero() or den.is_zero():
        raise DegenerateParameter(f"t11 + t12*lambda = {den}, t11*t22 = {t11 * t22}")
    return t22 * lam / den


# ==============================
#  ELEMENTARY MAPS
# ==============================
def _map_runs(cf: CanonicalForm, fn) -> CanonicalForm:
    out = []
    for run in cf.runs:
        out.extend(fn(run))
    return CanonicalForm.merged(out)


def _reversion(f: TruncPoly, what: str) -> TruncPoly:
    try:
        return shifted_reversion(f)
    except NotReversible as e:
        raise DegenerateParameter(f"{what}: {e}") from e


def _renormalize(lam_poly: TruncPoly, grid: PolyGrid, what: str) -> Run:
    """
    Given the new second slot as a scalar polynomial and the new third slot
    as a grid (both in the old nilpotent variable), re-express the grid in
    the Jordan variable of the new second slot.
    """
    h = _reversion(lam_poly, what)
    return Run(lam_poly[0], grid.compose(h))


def _recanonicalize(j: Matrix, a: Matrix, hints: Sequence[Scalar]) -> list[Run]:
    cf, _ = commuting_pair_canonical(j, a, hints)
    return list(cf.runs)


def _run_matrices(run: Run) -> tuple[Matrix, Matrix]:
    n = run.grid.dim
    x = Matrix.block_diag([Matrix.jordan_block(ZERO, k) for k in run.sizes])
    return Matrix.identity(n).scale(run.lam) + x, run.grid.assemble()


def _diagonal_constants(run: Run) -> list[Scalar]:
    """constant terms on the grid diagonal, the likely eigenvalues of A on the run"""
    return [run.grid.entry(k, k)[0] for k in range(len(run.sizes))]


def apply_T_EJ(cf: CanonicalForm, z1: ScalarLike) -> CanonicalForm:
    """
    (E, J, A) -> (E + z1 J, J, A), renormalized.

    Raises
    ------
    DegenerateParameter
        1 + z1 lambda = 0 on some block
    """
    z1 = Scalar.coerce(z1)
    if z1.is_zero():
        return cf

    def step(run: Run) -> list[Run]:
        c = ONE + z1 * run.lam
        if c.is_zero():
            raise DegenerateParameter(f"1 + z1*lambda vanishes at lambda={run.lam}")
        n = run.grid.order
        zeta = reciprocal(TruncPoly.constant(c, n) + TruncPoly.variable(n).scale(z1))
        f_j = mul(zeta, TruncPoly.variable(n, run.lam))
        return [_renormalize(f_j, run.grid.mul_scalar_poly(zeta), "EJ")]
    return _map_runs(cf, step)


def apply_T_EA(cf: CanonicalForm, z2: ScalarLike) -> CanonicalForm:
    """
    (E, J, A) -> (E + z2 A, J, A), renormalized.

    Raises
    ------
    DegenerateParameter
        1 + z2 a_0 = 0, or 1 + z2 (a_0 - a_1 lambda) = 0 on a block of size >= 2
    """
    z2 = Scalar.coerce(z2)
    if z2.is_zero():
        return cf

    def step(run: Run) -> list[Run]:
        if run.grid.is_single():
            f_a = run.grid.entry(0, 0)
            n = f_a.order
            g = TruncPoly.constant(1, n) + f_a.scale(z2)
            if g[0].is_zero():
                raise DegenerateParameter(f"1 + z2*a0 vanishes at lambda={run.lam}")
            zeta = reciprocal(g)
            f_j = mul(zeta, TruncPoly.variable(n, run.lam))
            return [_renormalize(f_j, run.grid.mul_scalar_poly(zeta), "EA")]
        j, a = _run_matrices(run)
        e = Matrix.identity(a.rows) + a.scale(z2)
        try:
            p = inverse(e)
        except SingularMatrix as err:
            raise DegenerateParameter(f"E + z2*A is singular on the run at lambda={run.lam}") from err
        hints = [run.lam / (ONE + z2 * mu) for mu in _diagonal_constants(run)
                 if not (ONE + z2 * mu).is_zero()]
        return _recanonicalize(p @ j, p @ a, hints)
    return _map_runs(cf, step)


def apply_T_JA(cf: CanonicalForm, z3: ScalarLike) -> CanonicalForm:
    """
    (E, J, A) -> (E, J + z3 A, A), renormalized.

    Raises
    ------
    DegenerateParameter
        1 + z3 a_1 = 0 on a block of size >= 2
    """
    z3 = Scalar.coerce(z3)
    if z3.is_zero():
        return cf

    def step(run: Run) -> list[Run]:
        if run.grid.is_single():
            f_a = run.grid.entry(0, 0)
            f_j = TruncPoly.variable(f_a.order, run.lam) + f_a.scale(z3)
            return [_renormalize(f_j, run.grid, "JA")]
        j, a = _run_matrices(run)
        hints = [run.lam + z3 * mu for mu in _diagonal_constants(run)]
        return _recanonicalize(j + a.scale(z3), a, hints)
    return _map_runs(cf, step)


def apply_rescale(cf: CanonicalForm, d2: ScalarLike, d3: ScalarLike) -> CanonicalForm:
    """
    (E, J, A) -> (E, d2 J, d3 A): lambda' = d2 lambda, a'_k = d3 a_k d2^-k.

    Raises
    ------
    ZeroScale
    """
    d2, d3 = Scalar.coerce(d2), Scalar.coerce(d3)
    if d2.is_zero() or d3.is_zero():
        raise ZeroScale("d2 and d3 must be nonzero")
    if d2 == ONE and d3 == ONE:
        return cf

    def step(run: Run) -> list[Run]:
        n = run.grid.order
        shrink = TruncPoly.variable(n).scale(ONE / d2)
        return [Run(d2 * run.lam, run.grid.compose(shrink).scale(d3))]
    return _map_runs(cf, step)


def apply_all(cf: CanonicalForm, sp: SymmetryParams,
              order: Sequence[str] = CANONICAL_ORDER) -> CanonicalForm:
    """
    Apply the elementary maps in `order`. The default order realizes
    T = params_to_matrix(sp) acting on (E, J, A).
    """
    stages = {
        "rescale": lambda c: apply_rescale(c, sp.d2, sp.d3),
        "JA": lambda c: apply_T_JA(c, sp.z3),
        "EA": lambda c: apply_T_EA(c, sp.z2),
        "EJ": lambda c: apply_T_EJ(c, sp.z1),
    }
    for tag in order:
        if tag not in stages:
            raise ValueError(f"unknown stage {tag!r}")
        cf = stages[tag](cf)
    return cf


# ==============================
#  ORBIT EQUIVALENCE
# ==============================
EQUIVALENT = "equivalent"
INEQUIVALENT = "inequivalent"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class OrbitDecision:
    verdict: str
    witness: Optional[SymmetryParams] = None
    matching: Optional[tuple[int, ...]] = None
    detail: str = ""
    tried: int = field(default=0, compare=False)


@dataclass
class _SearchState:
    complete: bool = True
    tried: int = 0
    notes: list[str] = field(default_factory=list)

    def give_up(self, note: str):
        self.complete = False
        if note not in self.notes:
            self.notes.append(note)


def _joint_items(cf: CanonicalForm):
    """distinct joint pairs (lambda, mu) with multiplicity and the polynomial of single blocks of size >= 2"""
    counts = Counter(joint_spectrum(cf))
    polys = {}
    for run in cf.runs:
        if run.grid.is_single() and run.grid.order >= 2:
            f = run.grid.entry(0, 0)
            polys[(run.lam, f[0])] = f
    items = sorted(counts, key=lambda p: (sort_key(p[0]), sort_key(p[1])))
    return [(lam, mu, counts[(lam, mu)], polys.get((lam, mu))) for lam, mu in items]


def _matchings(src, dst, limit: int, state: _SearchState):
    """bijections src -> dst preserving multiplicities, in lexicographic order"""
    groups: dict[int, list[int]] = {}
    for k, item in enumerate(src):
        groups.setdefault(item[2], []).append(k)
    targets: dict[int, list[int]] = {}
    for k, item in enumerate(dst):
        targets.setdefault(item[2], []).append(k)
    if sorted((m, len(v)) for m, v in groups.items()) != sorted((m, len(v)) for m, v in targets.items()):
        return
    keys = sorted(groups)
    count = 0
    for choice in product(*(permutations(targets[m]) for m in keys)):
        if count >= limit:
            state.give_up(f"matching limit {limit} reached")
            return
        count += 1
        matching = [0] * len(src)
        for m, perm in zip(keys, choice):
            for s_idx, d_idx in zip(groups[m], perm):
                matching[s_idx] = d_idx
        yield tuple(matching)


def _candidate(t: Sequence[Scalar]) -> Optional[SymmetryParams]:
    """parameters of T = [[t11, t12, t13], [0, t22, t23], [0, 0, t33]], None when T is singular"""
    t11, t12, t13, t22, t23, t33 = t
    if t11.is_zero() or t22.is_zero() or t33.is_zero():
        return None
    return matrix_to_params(Matrix([[t11, t12, t13], [0, t22, t23], [0, 0, t33]]))


def _try_params(cf1: CanonicalForm, cf2: CanonicalForm, sp: SymmetryParams,
                state: _SearchState, seed: int) -> Optional[bool]:
    """True on a verified witness, False on rejection, None when a stage degenerates"""
    state.tried += 1
    try:
        image = apply_all(cf1, sp)
    except (DegenerateParameter, NotInField) as e:
        mylogger.debug(f"witness candidate {sp.as_dict()} degenerates: {e}")
        state.give_up("a candidate hit a degenerate stage")
        return None
    return same_class(image, cf2, seed=seed)


# ==============================
#  STAGE EQUATIONS
# ==============================
UNKNOWNS = sympy.symbols("u1:6")


def _t_entries(anchor) -> list[sympy.Expr]:
    """
    (t11, t12, t13, t22, t23, t33) in the five unknowns.

    With an anchor block (lambda, mu, a) the unknowns are e1, t13, j1, t23,
    t33, where E' = t11 E + t12 J + t13 A is normalized to e(x) = 1 + e1 x + ...
    on the anchor and j1 is the linear coefficient of J' there. Every
    coefficient equation of the anchor is then linear in its newest
    unknown. Without an anchor t11 = 1 and the unknowns are the other entries.
    """
    if anchor is None:
        return [sympy.Integer(1), *UNKNOWNS]
    lam, mu, _, f = anchor
    e1, t13, j1, t23, t33 = UNKNOWNS
    a1 = to_expr(f[1])
    t12 = e1 - t13 * a1
    t22 = j1 - t23 * a1
    t11 = 1 - t12 * to_expr(lam) - t13 * to_expr(mu)
    return [t11, t12, t13, t22, t23, t33]


def _block_equations(f: TruncPoly, g: TruncPoly, lam: Scalar, lam2: Scalar,
                     t: Sequence[sympy.Expr]) -> list[sympy.Expr]:
    """
    Coefficient equations of a single block matched to a single block.

    On J = lambda + x, A = a(x) the candidate T gives e = t11 + t12 J + t13 A,
    j = t22 J + t23 A and t33 A. The image is canonical in y = j/e - lambda'
    and must equal the target b(y), so t33 a/e - b(j/e - lambda') vanishes
    modulo x^n. Returns the numerators of its coefficients.
    """
    scalars = (lam, lam2) + f.coeffs + g.coeffs
    gaussian = not all(s.is_real() for s in scalars) or any(v.has(sympy.I) for v in t)
    k = (QQ_I if gaussian else QQ).frac_field(*UNKNOWNS)
    t11, t12, t13, t22, t23, t33 = (k.from_sympy(v) for v in t)
    n = f.order
    r, x = ring("x", k)

    def series(poly: TruncPoly):
        return r({(d,): k.from_sympy(to_expr(c)) for d, c in enumerate(poly.coeffs) if not c.is_zero()})
    a, b = series(f), series(g)
    shift = x + k.from_sympy(to_expr(lam))
    inv = rs_series_inversion(shift * t12 + a * t13 + t11, x, n)
    y = rs_mul(shift * t22 + a * t23, inv, x, n) - k.from_sympy(to_expr(lam2))
    residue = rs_mul(a * t33, inv, x, n) - rs_subs(b, {x: y}, x, n)
    out = []
    for d in range(n):
        c = residue.get((d,))
        if c:
            out.append(c.numer.as_expr())
    return out


def _witness_equations(src, dst, matching, t: Sequence[sympy.Expr]) -> list[sympy.Expr]:
    """every matched joint pair maps to its partner; matched single blocks agree coefficientwise"""
    t11, t12, t13, t22, t23, t33 = t
    equations = []
    for s_idx, d_idx in enumerate(matching):
        lam, mu, _, f = src[s_idx]
        lam2, mu2, _, g = dst[d_idx]
        e0 = t11 + t12 * to_expr(lam) + t13 * to_expr(mu)
        equations.append(to_expr(lam2) * e0 - t22 * to_expr(lam) - t23 * to_expr(mu))
        equations.append(to_expr(mu2) * e0 - t33 * to_expr(mu))
        if f is not None and g is not None:
            equations.extend(_block_equations(f, g, lam, lam2, t))
    return equations


@dataclass
class _Branch:
    solution: dict
    pending: list
    complete: bool = True


def _normalize(e: sympy.Expr) -> sympy.Expr:
    return sympy.expand(sympy.numer(sympy.together(e)))


def _pick(pending: list, unknowns: Sequence[sympy.Symbol]):
    """lowest-degree equation and an unknown it is linear in, else the unknown of least degree"""
    def total(e):
        return sympy.Poly(e, *[u for u in unknowns if e.has(u)]).total_degree()
    ordered = sorted(pending, key=total)
    for e in ordered:
        for u in unknowns:
            if e.has(u) and sympy.degree(e, u) == 1:
                return e, u, True
    e = ordered[0]
    u = min((u for u in unknowns if e.has(u)), key=lambda v: sympy.degree(e, v))
    return e, u, len(e.free_symbols) == 1


def _solve_stages(equations: list, limit: int) -> tuple[list[dict], bool]:
    """
    Solve the equations one unknown at a time.

    Returns the solved branches (values may still depend on unknowns left
    free) and whether the elimination was exhaustive, so that an empty
    result proves there is no solution.
    """
    branches = [_Branch({}, [_normalize(e) for e in equations])]
    done: list[dict] = []
    exhaustive = True
    while branches:
        branch = branches.pop(0)
        pending = [e for e in branch.pending if e != 0]
        if any(not e.free_symbols for e in pending):
            exhaustive = exhaustive and branch.complete
            continue
        if not pending:
            done.append(branch.solution)
            continue
        e, u, exact = _pick(pending, UNKNOWNS)
        coefficient_fixed = exact and (sympy.degree(e, u) > 1 or not sympy.diff(e, u).free_symbols)
        for root in sympy.solve(e, u):
            if len(done) + len(branches) >= limit:
                return done, False
            solution = {k: v.subs(u, root) for k, v in branch.solution.items()}
            solution[u] = root
            rest = [_normalize(p.subs(u, root)) for p in pending if p is not e]
            branches.append(_Branch(solution, rest, branch.complete and coefficient_fixed))
    return done, exhaustive


def _witness_points(t: Sequence[sympy.Expr], solutions: list[dict], values: Sequence[Scalar],
                    limit: int, state: _SearchState):
    """exact T entries of every solution, free unknowns taking grid values"""
    count = 0
    for solution in solutions:
        rest = [u for u in UNKNOWNS if u not in solution and any(v.has(u) for v in t)]
        for choice in product(values, repeat=len(rest)):
            if count >= limit:
                return
            count += 1
            fixed = {u: to_expr(v) for u, v in zip(rest, choice)}
            point = {u: sympy.sympify(solution.get(u, u)).subs(fixed) for u in UNKNOWNS}
            try:
                yield [from_expr(sympy.sympify(v).subs(point)) for v in t]
            except (TypeError, ZeroDivisionError):
                state.give_up("a stage solution leaves the field")


def _anchor(src):
    """first joint pair carried by a single block of size >= 2"""
    return next((item for item in src if item[3] is not None), None)


def _search(cf1: CanonicalForm, cf2: CanonicalForm, seed: int,
            grid_values: Sequence[str], grid_limit: int,
            perm_limit: int) -> tuple[Optional[tuple[SymmetryParams, tuple[int, ...]]], _SearchState]:
    state = _SearchState()
    try:
        src, dst = _joint_items(cf1), _joint_items(cf2)
    except NotInField as e:
        state.give_up(f"joint spectrum outside the field: {e}")
        return None, state
    values = [Scalar(v) for v in grid_values]
    for matching in _matchings(src, dst, perm_limit, state):
        t = _t_entries(_anchor(src))
        solutions, exhaustive = _solve_stages(_witness_equations(src, dst, matching, t), grid_limit)
        if not solutions:
            if not exhaustive:
                state.give_up("stage equations left undecided")
            continue
        for x in _witness_points(t, solutions, values, grid_limit, state):
            sp = _candidate(x)
            if sp is not None and _try_params(cf1, cf2, sp, state, seed):
                return (sp, matching), state
        state.give_up("no stage solution verified")
    return None, state


def orbit_equivalent(cf1: CanonicalForm, cf2: CanonicalForm, seed: int = cfg.DEFAULT_SEED,
                     grid_values: Sequence[str] = cfg.WITNESS_GRID,
                     grid_limit: int = cfg.WITNESS_GRID_LIMIT,
                     perm_limit: int = cfg.PERMUTATION_LIMIT) -> OrbitDecision:
    """
    Decide whether cf2 lies in the orbit of cf1 under the maps generated by
    the three superpositions, rescaling and block permutations.

    Returns
    -------
    OrbitDecision
        verdict is "equivalent" (with witness and matching), "inequivalent"
        or "undecided"
    """
    if cf1.N != cf2.N or cf1.spec.size_multiset() != cf2.spec.size_multiset():
        return OrbitDecision(INEQUIVALENT, detail="Jordan block sizes differ")
    if same_class(cf1, cf2, seed=seed):
        return OrbitDecision(EQUIVALENT, SymmetryParams(), None, "forms agree")

    found, forward = _search(cf1, cf2, seed, grid_values, grid_limit, perm_limit)
    if found is not None:
        sp, matching = found
        mylogger.info(f"witness found after {forward.tried} candidates: {sp.as_dict()}")
        return OrbitDecision(EQUIVALENT, sp, matching, "forward witness", forward.tried)

    found, backward = _search(cf2, cf1, seed, grid_values, grid_limit, perm_limit)
    tried = forward.tried + backward.tried
    if found is not None:
        sp, matching = found
        inverse_matching = tuple(sorted(range(len(matching)), key=lambda k: matching[k]))
        mylogger.info(f"reverse witness found after {tried} candidates")
        return OrbitDecision(EQUIVALENT, inverse_params(sp), inverse_matching, "inverse of a reverse witness", tried)

    if forward.complete and backward.complete:
        return OrbitDecision(INEQUIVALENT, detail="no matching admits a witness", tried=tried)
    notes = "; ".join(forward.notes + [n for n in backward.notes if n not in forward.notes])
    return OrbitDecision(UNDECIDED, detail=notes, tried=tried)
