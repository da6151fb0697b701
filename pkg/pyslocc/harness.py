"""
Random generators, the matrix-level oracle and the self-test suites.

Every trial gets its own seed derived from the run seed and the trial index,
so a report is reproducible whatever order the trials finish in.
"""
import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Optional, Sequence, TextIO

import numpy as np

import pyslocc.config as cfg
from pyslocc.models.canon import (CanonicalForm, ILOTriple, Run, TensorState,
                                  apply_ilo, beta_canonical_check, canonicalize,
                                  commuting_pair_canonical, nonfull_rank_split)
from pyslocc.models.exactmat import (ONE, ZERO, JordanSpec, Matrix, NotInField,
                                     Scalar, SingularMatrix, SloccError,
                                     commutant_basis, inverse, rank)
from pyslocc.models.nilpoly import (PolyGrid, TruncPoly, compose_shifted, mul,
                                    reciprocal, shifted_reversion)
from pyslocc.models.symmetry import (EQUIVALENT, INEQUIVALENT,
                                     DegenerateParameter, SymmetryParams,
                                     ZeroScale, apply_all, apply_T_EA,
                                     apply_T_EJ, apply_T_JA, mobius_2nn,
                                     orbit_equivalent, params_to_matrix)
from pyslocc.utils.log import get_logger
from pyslocc.utils.scoring import (check_form_equal, check_scalar_equal,
                                   check_scalars_equal, check_verdict)

mylogger = get_logger(__name__)

PASS = "pass"
FAIL = "fail"
UNDECIDED = "undecided"


class BadProfile(SloccError):
    """ブロックプロファイルがNと整合しない"""


# ==============================
#  GENERATORS
# ==============================
@dataclass(frozen=True)
class GenConfig:
    """
    block_profile: (lambda or None, size) pairs; None draws a random eigenvalue
    """
    seed: int
    N: int
    block_profile: tuple[tuple[Optional[Scalar], int], ...]
    L: int = 3
    coefficient_bound: int = cfg.COEFFICIENT_BOUND


def derive_seed(seed: int, index: int) -> int:
    return seed * 1_000_003 + index


def rand_rational(rng: np.random.Generator, bound: int, nonzero: bool = False) -> Scalar:
    while True:
        num = int(rng.integers(-bound, bound + 1))
        den = int(rng.integers(1, bound + 1))
        if num or not nonzero:
            return Scalar(Fraction(num, den))


def rand_matrix(rng: np.random.Generator, rows: int, cols: int, bound: int) -> Matrix:
    return Matrix([[int(v) for v in row] for row in rng.integers(-bound, bound + 1, size=(rows, cols))],
                  cols=cols)


def rand_invertible(rng: np.random.Generator, n: int, bound: int) -> Matrix:
    while True:
        m = rand_matrix(rng, n, n, bound)
        if rank(m) == n:
            return m


def random_profile(rng: np.random.Generator, max_n: int = 6, max_block: int = 4,
                   lam_pool: int = 3, distinct: bool = False) -> tuple[tuple[Optional[Scalar], int], ...]:
    """
    Random block sizes; eigenvalues come from a small pool so repeated
    eigenvalues (derogatory runs) show up regularly. With distinct=True
    every block gets its own eigenvalue.
    """
    n = int(rng.integers(1, max_n + 1))
    size = n if distinct else lam_pool
    pool = [Scalar(int(v)) for v in rng.choice(np.arange(-4, 5), size=size, replace=False)]
    blocks = []
    left = n
    while left:
        size = int(rng.integers(1, min(max_block, left) + 1))
        lam = pool[len(blocks)] if distinct else pool[int(rng.integers(0, lam_pool))]
        blocks.append((lam, size))
        left -= size
    return tuple(blocks)


def _random_band(rng: np.random.Generator, order: int, low: int, high: int, bound: int) -> TruncPoly:
    return TruncPoly.of(order, [rand_rational(rng, bound) if low <= d < high else ZERO for d in range(order)])


def gen_canonical(gc: GenConfig) -> CanonicalForm:
    """
    Raises
    ------
    BadProfile
        sizes do not sum to N, or a size is < 1
    """
    if not gc.block_profile or any(n < 1 for _, n in gc.block_profile):
        raise BadProfile(f"profile {gc.block_profile} has an empty or non-positive block")
    if sum(n for _, n in gc.block_profile) != gc.N:
        raise BadProfile(f"profile sizes sum to {sum(n for _, n in gc.block_profile)}, not N={gc.N}")
    rng = np.random.default_rng(gc.seed)
    bound = gc.coefficient_bound
    groups: dict[Scalar, list[int]] = {}
    for lam, n in gc.block_profile:
        lam = rand_rational(rng, bound) if lam is None else Scalar.coerce(lam)
        groups.setdefault(lam, []).append(n)

    runs = []
    for lam, sizes in groups.items():
        sizes = sorted(sizes, reverse=True)
        order = max(sizes)
        # constant terms below the diagonal vanish, so the eigenvalues of A stay rational
        grid = PolyGrid.build(sizes, lambda i, j: _random_band(
            rng, order, max(int(i > j), sizes[j] - sizes[i]), sizes[j], bound))
        runs.append(Run(lam, grid))
    return CanonicalForm.merged(runs)


def random_params(rng: np.random.Generator, bound: int) -> SymmetryParams:
    return SymmetryParams(rand_rational(rng, bound), rand_rational(rng, bound), rand_rational(rng, bound),
                          rand_rational(rng, bound, nonzero=True), rand_rational(rng, bound, nonzero=True))


def gen_ilo(gc: GenConfig, family: str = "general") -> ILOTriple:
    """
    family
        "general": random invertible T, P, Q
        "upper_unitriangular_T": T = U D with U unit upper triangular, D diagonal
    """
    rng = np.random.default_rng(gc.seed)
    bound = gc.coefficient_bound
    if family == "general":
        t = rand_invertible(rng, gc.L, bound)
    elif family == "upper_unitriangular_T":
        if gc.L == 3:
            t = params_to_matrix(random_params(rng, bound))
        else:
            u = Matrix([[ONE if i == j else (rand_rational(rng, bound) if j > i else ZERO)
                         for j in range(gc.L)] for i in range(gc.L)])
            t = u @ Matrix.diag([ONE] + [rand_rational(rng, bound, nonzero=True) for _ in range(gc.L - 1)])
    else:
        raise ValueError(f"unknown ILO family {family!r}")
    return ILOTriple(t, rand_invertible(rng, gc.N, bound), rand_invertible(rng, gc.N, bound))


def predicted_hints(cf: CanonicalForm, t: Matrix) -> list[Scalar]:
    """eigenvalues of the reduced second slot after T acts on (E, J, A)"""
    hints = []
    for run in cf.runs:
        for mu in (run.grid.entry(k, k)[0] for k in range(len(run.sizes))):
            v = (ONE, run.lam, mu)
            den = sum((t[0, k] * v[k] for k in range(3)), ZERO)
            if not den.is_zero():
                hints.append(sum((t[1, k] * v[k] for k in range(3)), ZERO) / den)
    return hints


def oracle_recanonicalize(cf: CanonicalForm, ops: ILOTriple,
                          hints: Optional[Sequence[Scalar]] = None) -> CanonicalForm:
    """
    Assemble (E, J, A), apply ops as matrices, bring the first slot back to
    E and canonicalize the remaining commuting pair.

    Raises
    ------
    DegenerateParameter
        the first slot of the image is singular
    """
    image = apply_ilo(cf.to_state(), ops)
    try:
        p = inverse(image.gammas[0])
    except SingularMatrix as e:
        raise DegenerateParameter("first slot of the image is singular") from e
    result, _ = commuting_pair_canonical(p @ image.gammas[1], p @ image.gammas[2], hints)
    return result


def describe(cf: CanonicalForm) -> str:
    return ",".join(f"{lam}:{n}" for lam, n in cf.spec.blocks)


# ==============================
#  SUITES
# ==============================
def _suite_z3(rng, bound, index):
    while True:
        z3 = rand_rational(rng, bound)
        if not (ONE + 2 * z3).is_zero():
            break
    cf = CanonicalForm.from_blocks([(1, [0, 2, 3])])
    out = apply_T_JA(cf, z3)
    c = ONE + 2 * z3
    check_scalar_equal(ONE, out.runs[0].lam, "lambda'")
    check_scalars_equal([ZERO, 2 / c, 3 / c ** 3], out.runs[0].coeffs(), "a'")
    return "1:3", f"z3={z3}"


def _suite_closed_forms(rng, bound, index):
    lam, a0, a1, a2, z = (rand_rational(rng, bound) for _ in range(5))
    cf = CanonicalForm.from_blocks([(lam, [a0, a1, a2])])

    c = ONE + z * lam
    if c.is_zero():
        raise DegenerateParameter("1 + z lambda = 0")
    out = apply_T_EJ(cf, z)
    check_scalar_equal(lam / c, out.runs[0].lam, "EJ lambda'")
    check_scalars_equal([a0 / c, a1 - a0 * z + a1 * z * lam, a2 * c ** 3], out.runs[0].coeffs(), "EJ a'")

    e0 = ONE + z * a0
    e1 = ONE + z * (a0 - a1 * lam)
    if e0.is_zero() or e1.is_zero():
        raise DegenerateParameter("EA denominator vanishes")
    out = apply_T_EA(cf, z)
    check_scalar_equal(lam / e0, out.runs[0].lam, "EA lambda'")
    check_scalars_equal([a0 / e0, a1 / e1, a2 * e0 ** 3 / e1 ** 3], out.runs[0].coeffs(), "EA a'")
    return f"{lam}:3", f"z={z}"


def _suite_2nn(rng, bound, index):
    profile = random_profile(rng, max_n=6, max_block=4)
    n = sum(k for _, k in profile)
    cf = gen_canonical(GenConfig(int(rng.integers(0, 2**31)), n, profile, L=2, coefficient_bound=bound))
    t11, t22 = rand_rational(rng, bound, nonzero=True), rand_rational(rng, bound, nonzero=True)
    t12 = rand_rational(rng, bound)
    expected = JordanSpec.normalized((mobius_2nn(lam, t11, t12, t22), k) for lam, k in cf.spec.blocks)
    psi = TensorState((Matrix.identity(n), cf.J()))
    t = Matrix([[t11, t12], [0, t22]])
    image = apply_ilo(psi, ILOTriple(t, Matrix.identity(n), Matrix.identity(n)))
    out, _ = canonicalize(image, hints=[lam for lam, _ in expected.blocks])
    assert out.spec == expected, "\n".join([
        "Jordan構造がMöbius変換と一致しません.",
        f"計算結果: {describe(out)}",
        f"正答: {[(str(l), k) for l, k in expected.blocks]}",
    ])
    return describe(cf), f"T=[[{t11},{t12}],[0,{t22}]]"


def _suite_oracle(rng, bound, index):
    profile = random_profile(rng)
    n = sum(k for _, k in profile)
    cf = gen_canonical(GenConfig(int(rng.integers(0, 2**31)), n, profile, coefficient_bound=bound))
    sp = random_params(rng, max(2, bound // 3))
    expected = apply_all(cf, sp)
    t = params_to_matrix(sp)
    ident = Matrix.identity(n)
    oracle = oracle_recanonicalize(cf, ILOTriple(t, ident, ident), predicted_hints(cf, t))
    check_form_equal(oracle, expected, "apply_all")
    return describe(cf), str(sp.as_dict())


def _suite_orbit(rng, bound, index):
    # derogatory runs are compared up to similarity only, so every block keeps its own eigenvalue
    profile = random_profile(rng, max_n=5, max_block=3, distinct=True)
    n = sum(k for _, k in profile)
    cf = gen_canonical(GenConfig(int(rng.integers(0, 2**31)), n, profile, coefficient_bound=bound))
    sp = random_params(rng, max(2, bound // 3))
    image = apply_all(cf, sp)
    decision = orbit_equivalent(cf, image)
    check_verdict(EQUIVALENT, decision.verdict, "orbit_equivalent(cf, image)")
    check_form_equal(image, apply_all(cf, decision.witness), "witness image")

    sizes = sorted(k for _, k in profile)
    other_sizes = [1] * n if sizes[-1] > 1 else [n]
    if other_sizes != sizes:
        other = gen_canonical(GenConfig(int(rng.integers(0, 2**31)), n, tuple((None, k) for k in other_sizes),
                                        coefficient_bound=bound))
        check_verdict(INEQUIVALENT, orbit_equivalent(cf, other).verdict, "orbit_equivalent(cf, other)")
    return describe(cf), str(sp.as_dict())


def _all_small_specs(max_blocks: int = 3, max_size: int = 4) -> list[JordanSpec]:
    specs = []
    seen = set()
    for k in range(1, max_blocks + 1):
        for sizes in product(range(1, max_size + 1), repeat=k):
            for labels in product(range(k), repeat=k):
                spec = JordanSpec.normalized(zip(labels, sizes))
                if spec not in seen:
                    seen.add(spec)
                    specs.append(spec)
    return specs


SMALL_SPECS = _all_small_specs()


def _suite_commutant(rng, bound, index):
    spec = SMALL_SPECS[index % len(SMALL_SPECS)]
    j = spec.realize()
    basis = commutant_basis(spec)
    expected = sum(min(ni, nj) for li, ni in spec.blocks for lj, nj in spec.blocks if li == lj)
    assert len(basis) == expected, f"基底の数が異なります. 計算結果: {len(basis)}, 正答: {expected}"
    for b in basis:
        assert b.commutator(j).is_zero(), "Jと可換でない基底があります."
    n = spec.size
    flat = Matrix([list(b.entries) for b in basis])
    assert rank(flat) == len(basis), "基底が一次独立ではありません."
    # vec([M, J]) = (I kron J^T - J kron I) vec(M) for row-major vec
    ident = np.full((n, n), ZERO, dtype=object)
    for k in range(n):
        ident[k, k] = ONE
    op = Matrix.from_array(np.kron(ident, j.T.to_array()) - np.kron(j.to_array(), ident))
    nullity = n * n - rank(op)
    assert nullity == len(basis), f"可換子の次元が異なります. Kronecker: {nullity}, 基底: {len(basis)}"
    return ",".join(f"{lam}:{k}" for lam, k in spec.blocks), f"dim={len(basis)}"


def _suite_nilpoly(rng, bound, index):
    order = int(rng.integers(2, 7))
    f = TruncPoly.of(order, [rand_rational(rng, bound) for _ in range(order)])
    if f[0].is_zero() or f[1].is_zero():
        raise DegenerateParameter("constant or linear coefficient is zero")
    check_scalars_equal(TruncPoly.constant(1, order).coeffs, mul(f, reciprocal(f)).coeffs, "f * 1/f")
    g = shifted_reversion(f)
    check_scalars_equal(TruncPoly.variable(order).coeffs, compose_shifted(g, f).coeffs, "g(f - f(0))")

    lam, z1 = rand_rational(rng, bound), rand_rational(rng, bound)
    c = ONE + z1 * lam
    if c.is_zero():
        raise DegenerateParameter("1 + z1 lambda = 0")
    series = TruncPoly.of(3, [lam / c, ONE / c ** 2, -z1 / c ** 3])
    check_scalars_equal([ZERO, c ** 2, z1 * c ** 3], shifted_reversion(series).coeffs, "reverted series")
    return f"order={order}", str(f)


def _suite_split(rng, bound, index):
    a = rand_rational(rng, bound, nonzero=True)
    split_state = TensorState((Matrix.diag([1, 1, 0]), Matrix([[a, 0, 0], [0, 0, 1], [0, 0, 0]])))
    conj = ILOTriple(Matrix.identity(2), rand_invertible(rng, 3, bound), rand_invertible(rng, 3, bound))
    for psi in (split_state, apply_ilo(split_state, conj)):
        pf = nonfull_rank_split(psi)
        assert (pf.n, pf.m, pf.i) == (1, 2, 1), f"分割が異なります. 計算結果: n={pf.n}, m={pf.m}, i={pf.i}"
        assert beta_canonical_check(pf), "beta部分の条件が成り立ちません."
        check_scalar_equal(a, pf.gamma_part[0][0, 0], "gamma part")
    return "3x3 split", "n=1,m=2,i=1"


def _suite_pq(rng, bound, index):
    profile = random_profile(rng)
    n = sum(k for _, k in profile)
    cf = gen_canonical(GenConfig(int(rng.integers(0, 2**31)), n, profile, coefficient_bound=bound))
    ops = ILOTriple(Matrix.identity(3), rand_invertible(rng, n, bound), rand_invertible(rng, n, bound))
    out = oracle_recanonicalize(cf, ops, [lam for lam, _ in cf.spec.blocks])
    check_form_equal(cf, out, "P, Q image")
    return describe(cf), "T=I"


@dataclass(frozen=True)
class Suite:
    name: str
    fn: Callable
    trials: int
    about: str


SUITES: dict[str, Suite] = {s.name: s for s in (
    Suite("z3", _suite_z3, 20, "JA map on the (1,0,2,3) block against its closed form"),
    Suite("closed-forms", _suite_closed_forms, 50, "EJ and EA maps against their closed forms"),
    Suite("2nn", _suite_2nn, 100, "2xNxN states follow the Mobius law"),
    Suite("oracle", _suite_oracle, 300, "apply_all against explicit matrix transformation"),
    Suite("orbit", _suite_orbit, 100, "orbit decisions on symmetry images"),
    Suite("commutant", _suite_commutant, len(SMALL_SPECS), "commutant bases of small Jordan forms"),
    Suite("nilpoly", _suite_nilpoly, 200, "reciprocal and reversion identities"),
    Suite("split", _suite_split, 10, "non-full-rank split and the beta rank condition"),
    Suite("pq", _suite_pq, 100, "P, Q alone keep the canonical form"),
)}


@dataclass
class TrialRecord:
    suite: str
    seed: int
    index: int
    profile: str = ""
    verdict: str = PASS
    detail: str = ""
    redraws: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def run_trial(suite: str, seed: int, index: int, bound: int = cfg.COEFFICIENT_BOUND,
              max_redraws: int = cfg.MAX_REDRAWS) -> dict:
    """Run one trial; module level so it can be shipped to a process pool."""
    derived = derive_seed(seed, index)
    rng = np.random.default_rng(derived)
    record = TrialRecord(suite, derived, index)
    while True:
        try:
            record.profile, record.detail = SUITES[suite].fn(rng, bound, index)
            record.verdict = PASS
            break
        except (DegenerateParameter, ZeroScale) as e:
            record.redraws += 1
            mylogger.info(f"{suite}#{index}: degenerate draw redrawn ({e})")
            if record.redraws > max_redraws:
                record.verdict, record.detail = UNDECIDED, f"gave up after {max_redraws} redraws"
                break
        except AssertionError as e:
            record.verdict, record.detail = FAIL, str(e)
            break
        except (NotInField, SloccError) as e:
            record.verdict, record.detail = FAIL, f"{type(e).__name__}: {e}"
            break
    if record.verdict != PASS:
        mylogger.warning(f"{suite}#{index} {record.verdict}: {record.detail}")
    return record.as_dict()


def run_suite(name: str, seed: int = cfg.DEFAULT_SEED, trials: Optional[int] = None) -> list[dict]:
    count = SUITES[name].trials if trials is None else trials
    return [run_trial(name, seed, k) for k in range(count)]


def write_jsonl(records: Iterable[dict], stream: TextIO):
    """one JSON object per trial, keys in a fixed order"""
    keys = ("suite", "seed", "index", "profile", "verdict", "detail", "redraws")
    for rec in records:
        stream.write(json.dumps({k: rec[k] for k in keys}, ensure_ascii=False))
        stream.write("\n")
