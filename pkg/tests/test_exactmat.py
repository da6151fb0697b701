import pickle
import unittest
from fractions import Fraction
from itertools import combinations

from hypothesis import given, settings
from hypothesis import strategies as st

from pyslocc.models.exactmat import (ONE, ZERO, DimensionMismatch, JordanSpec,
                                     Matrix, NotInField, Scalar,
                                     SingularMatrix, Span, char_poly,
                                     commutant_basis, eigenvalues_in_field,
                                     inverse, jordan_decompose, nullspace,
                                     poly_eval, rank,
                                     row_reduce_with_transform, solve_affine)

small = st.integers(min_value=-6, max_value=6)
entry = st.one_of(small, st.builds(Scalar, small, st.sampled_from([0, 0, 1, -1])))


def square(max_n: int = 4):
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(st.lists(entry, min_size=n, max_size=n), min_size=n, max_size=n))


def det(rows) -> Scalar:
    """cofactor expansion along the first row"""
    if not rows:
        return ONE
    acc = ZERO
    for j, v in enumerate(rows[0]):
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        term = Scalar.coerce(v) * det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def rank_by_minors(rows) -> int:
    n_rows, n_cols = len(rows), len(rows[0])
    for k in range(min(n_rows, n_cols), 0, -1):
        for r in combinations(range(n_rows), k):
            for c in combinations(range(n_cols), k):
                if not det([[rows[i][j] for j in c] for i in r]).is_zero():
                    return k
    return 0


class MyTestCase(unittest.TestCase):
    pass


class TestScalar(MyTestCase):
    """
    Scalarのテスト
    """
    def test_arithmetic(self):
        """gaussian rational arithmetic"""
        a = Scalar(Fraction(1, 2), 3)
        b = Scalar(2, -1)
        self.assertEqual(a + b, Scalar(Fraction(5, 2), 2))
        self.assertEqual(a * b, Scalar(4, Fraction(11, 2)))
        self.assertEqual((a / b) * b, a)
        self.assertEqual(Scalar(0, 1) ** 2, Scalar(-1))

    def test_str(self):
        self.assertEqual(str(Scalar(Fraction(1, 2), 3)), "1/2+3i")
        self.assertEqual(str(Scalar(0, -1)), "-1i")
        self.assertEqual(str(Scalar(-4)), "-4")

    def test_hash_matches_int(self):
        """real scalars hash like their value"""
        self.assertEqual(hash(Scalar(3)), hash(3))
        self.assertEqual(len({Scalar(1), Scalar(Fraction(2, 2))}), 1)

    def test_immutable(self):
        with self.assertRaises(AttributeError):
            Scalar(1).re = Fraction(2)

    def test_division_by_zero(self):
        with self.assertRaises(ZeroDivisionError):
            ONE / ZERO

    def test_pickle(self):
        s = Scalar(Fraction(-3, 7), 2)
        self.assertEqual(pickle.loads(pickle.dumps(s)), s)

    def test_coerce_rejects_float(self):
        with self.assertRaises(TypeError):
            Scalar.coerce(0.5)


class TestMatrix(MyTestCase):
    """
    Matrixの基本操作のテスト
    """
    def test_matmul_and_identity(self):
        m = Matrix([[1, 2], [3, 4]])
        self.assertEqual(m @ Matrix.identity(2), m)
        self.assertEqual(m @ m, Matrix([[7, 10], [15, 22]]))

    def test_empty_inner_dimension(self):
        """(2x0)(0x3) is the 2x3 zero matrix"""
        self.assertEqual(Matrix.zeros(2, 0) @ Matrix.zeros(0, 3), Matrix.zeros(2, 3))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            Matrix([[1, 2]]) + Matrix([[1], [2]])
        with self.assertRaises(DimensionMismatch):
            Matrix([[1, 2], [3]])

    def test_block_diag_and_jordan(self):
        j = Matrix.block_diag([Matrix.jordan_block(2, 2), Matrix.jordan_block(5, 1)])
        self.assertEqual(j, Matrix([[2, 1, 0], [0, 2, 0], [0, 0, 5]]))

    def test_immutable(self):
        m = Matrix.identity(2)
        with self.assertRaises(AttributeError):
            m.extra = 1
        arr = m.to_array()
        arr[0, 0] = ZERO
        self.assertEqual(m, Matrix.identity(2))

    def test_pickle(self):
        m = Matrix([[1, Scalar(0, 1)], [Fraction(1, 3), 0]])
        self.assertEqual(pickle.loads(pickle.dumps(m)), m)


class TestElimination(MyTestCase):
    """
    rank, nullspace, solve_affine, inverseのテスト
    """
    def test_rank(self):
        self.assertEqual(rank(Matrix([[1, 2], [2, 4]])), 1)
        self.assertEqual(rank(Matrix.zeros(3)), 0)
        self.assertEqual(rank(Matrix([[0, 1], [1, 0]])), 2)

    def test_nullspace_free_column_order(self):
        vs = nullspace(Matrix([[1, 2, 3]]))
        self.assertEqual(vs, [[Scalar(-2), ONE, ZERO], [Scalar(-3), ZERO, ONE]])

    def test_solve_affine(self):
        x, free = solve_affine(Matrix([[1, 1], [1, -1]]), [Scalar(3), Scalar(1)])
        self.assertEqual(x, [Scalar(2), Scalar(1)])
        self.assertEqual(free, [])

    def test_solve_affine_infeasible(self):
        self.assertIsNone(solve_affine(Matrix([[1, 1], [2, 2]]), [Scalar(1), Scalar(3)]))

    def test_inverse_singular(self):
        with self.assertRaises(SingularMatrix):
            inverse(Matrix([[1, 2], [2, 4]]))

    def test_row_reduce_with_transform(self):
        m = Matrix([[0, 2, 4], [1, 1, 1]])
        p, r, pivots = row_reduce_with_transform(m)
        self.assertEqual(p @ m, r)
        self.assertEqual(pivots, [0, 1])

    def test_span(self):
        span = Span(3)
        self.assertTrue(span.add([ONE, ZERO, ONE]))
        self.assertFalse(span.add([Scalar(2), ZERO, Scalar(2)]))
        self.assertTrue(span.contains([Scalar(-1), ZERO, Scalar(-1)]))
        self.assertEqual(len(span), 1)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3))
    def test_inverse_property(self, rows):
        m = Matrix(rows)
        if rank(m) < 3:
            with self.assertRaises(SingularMatrix):
                inverse(m)
        else:
            self.assertEqual(m @ inverse(m), Matrix.identity(3))


class TestAgainstCofactors(MyTestCase):
    """
    rank, inverse, char_polyを余因子展開・小行列式と比較するテスト
    """
    @settings(max_examples=60, deadline=None)
    @given(st.tuples(st.integers(1, 4), st.integers(1, 4)).flatmap(
        lambda rc: st.lists(st.lists(entry, min_size=rc[1], max_size=rc[1]), min_size=rc[0], max_size=rc[0])))
    def test_rank(self, rows):
        self.assertEqual(rank(Matrix(rows)), rank_by_minors(rows), "階数が小行列式と一致しない")

    @settings(max_examples=60, deadline=None)
    @given(square())
    def test_inverse_is_adjugate(self, rows):
        n = len(rows)
        d = det(rows)
        if d.is_zero():
            with self.assertRaises(SingularMatrix):
                inverse(Matrix(rows))
            return
        inv = inverse(Matrix(rows))
        for i in range(n):
            for j in range(n):
                minor = [row[:i] + row[i + 1:] for k, row in enumerate(rows) if k != j]
                cofactor = det(minor) if (i + j) % 2 == 0 else -det(minor)
                self.assertEqual(inv[i, j], cofactor / d, f"逆行列の({i}, {j})成分が余因子と一致しない")

    @settings(max_examples=60, deadline=None)
    @given(square())
    def test_char_poly_is_determinant(self, rows):
        n = len(rows)
        p = char_poly(Matrix(rows))
        self.assertEqual(len(p), n + 1)
        self.assertEqual(p[-1], ONE)
        for x in range(n + 1):
            shifted = [[(Scalar(x) if i == j else ZERO) - Scalar.coerce(v) for j, v in enumerate(row)]
                       for i, row in enumerate(rows)]
            self.assertEqual(poly_eval(p, Scalar(x)), det(shifted), f"x={x}で特性多項式が行列式と一致しない")


class TestSpectrum(MyTestCase):
    """
    char_poly, eigenvalues_in_fieldのテスト
    """
    def test_char_poly(self):
        """x^2 - 5x + 6 low -> high"""
        self.assertEqual(char_poly(Matrix([[2, 0], [0, 3]])), [Scalar(6), Scalar(-5), ONE])

    def test_rational_eigenvalues(self):
        m = Matrix([[Fraction(1, 2), 1], [0, Fraction(-3, 4)]])
        self.assertEqual(eigenvalues_in_field(m), [Scalar(Fraction(-3, 4)), Scalar(Fraction(1, 2))])

    def test_gaussian_eigenvalues(self):
        """rotation by 90 degrees has eigenvalues +-i"""
        self.assertEqual(eigenvalues_in_field(Matrix([[0, -1], [1, 0]])), [Scalar(0, -1), Scalar(0, 1)])

    def test_not_in_field(self):
        with self.assertRaises(NotInField) as e:
            eigenvalues_in_field(Matrix([[0, 2], [1, 0]]))
        self.assertEqual(len(e.exception.residual), 3)

    def test_hints(self):
        m = Matrix([[Fraction(7, 3), 0], [0, Fraction(7, 3)]])
        self.assertEqual(eigenvalues_in_field(m, hints=[Fraction(7, 3)]), [Scalar(Fraction(7, 3))] * 2)

    def test_large_eigenvalues(self):
        """primes near 1000 on a conjugated diagonal"""
        s = Matrix([[1, 1, 0], [0, 1, 1], [0, 0, 1]])
        m = s @ Matrix.diag([1009, 1013, 1019]) @ inverse(s)
        self.assertEqual(eigenvalues_in_field(m), [Scalar(1009), Scalar(1013), Scalar(1019)])

    def test_large_denominators(self):
        s = Matrix([[2, 1], [1, 1]])
        m = s @ Matrix.diag([Fraction(1, 1009), Fraction(-7, 1013)]) @ inverse(s)
        self.assertEqual(eigenvalues_in_field(m), [Scalar(Fraction(-7, 1013)), Scalar(Fraction(1, 1009))])
        self.assertEqual(eigenvalues_in_field(Matrix([[0, -1009], [1009, 0]])), [Scalar(0, -1009), Scalar(0, 1009)])

    def test_irreducible_factor_next_to_large_root(self):
        m = Matrix.block_diag([Matrix([[0, 2], [1, 0]]), Matrix([[1009]])])
        with self.assertRaises(NotInField) as e:
            eigenvalues_in_field(m)
        self.assertEqual(e.exception.residual, [Scalar(-2), ZERO, ONE])


class TestJordan(MyTestCase):
    """
    jordan_decompose, commutant_basisのテスト
    """
    def test_defective_pair(self):
        """[[5,4],[-4,-3]] is J_2(1)"""
        m = Matrix([[5, 4], [-4, -3]])
        s, spec = jordan_decompose(m)
        self.assertEqual(spec, JordanSpec(((ONE, 2),)))
        self.assertEqual(s, Matrix([[4, 1], [-4, 0]]))
        self.assertEqual(inverse(s) @ m @ s, spec.realize())

    def test_identity_on_normal_input(self):
        spec = JordanSpec.normalized([(2, 1), (1, 1), (1, 2)])
        s, got = jordan_decompose(spec.realize())
        self.assertEqual(got, spec)
        self.assertEqual(s, Matrix.identity(4))

    def test_conjugated_derogatory(self):
        spec = JordanSpec.normalized([(0, 2), (0, 1), (3, 1)])
        p = Matrix([[1, 1, 0, 0], [0, 1, 2, 0], [1, 0, 1, 1], [0, 0, 1, 1]])
        m = inverse(p) @ spec.realize() @ p
        s, got = jordan_decompose(m)
        self.assertEqual(got, spec)
        self.assertEqual(inverse(s) @ m @ s, spec.realize())

    def test_spec_invariants(self):
        with self.assertRaises(ValueError):
            JordanSpec(((ONE, 1), (ONE, 2)))
        with self.assertRaises(ValueError):
            JordanSpec(((ONE, 1), (ZERO, 1), (ONE, 1)))

    def test_commutant_dimension(self):
        """sum of min(n_i, n_j) over blocks sharing an eigenvalue"""
        spec = JordanSpec.normalized([(0, 3), (0, 1), (1, 2)])
        basis = commutant_basis(spec)
        self.assertEqual(len(basis), 3 + 1 + 1 + 1 + 2)
        j = spec.realize()
        for b in basis:
            self.assertTrue(b.commutator(j).is_zero())


if __name__ == "__main__":
    unittest.main()
