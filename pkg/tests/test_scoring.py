import unittest
from fractions import Fraction

from pyslocc.models.canon import CanonicalForm, Run
from pyslocc.models.exactmat import Matrix, Scalar
from pyslocc.models.nilpoly import PolyGrid, TruncPoly
from pyslocc.utils import scoring


class MyTestCase(unittest.TestCase):
    pass


class TestCheckScalarEqual(MyTestCase):
    """
    scoring.check_scalar_equal関数のテスト
    """
    def test_equals(self):
        """int, Fraction and Scalar compare by value"""
        self.assertTrue(scoring.check_scalar_equal(Fraction(4, 2), 2))
        self.assertTrue(scoring.check_scalar_equal(Scalar(1, 1), Scalar(Fraction(2, 2), 1)))

    def test_not_equals(self):
        with self.assertRaises(AssertionError):
            scoring.check_scalar_equal(Fraction(1, 3), Fraction(333, 1000))
        with self.assertRaises(AssertionError):
            scoring.check_scalar_equal(1, Scalar(1, 1))

    def test_message(self):
        with self.assertRaises(AssertionError) as e:
            scoring.check_scalar_equal(1, 2, "lambda'")
        self.assertIn("lambda'", str(e.exception))
        self.assertIn("正答: 1", str(e.exception))


class TestCheckScalarsEqual(MyTestCase):
    """
    scoring.check_scalars_equal関数のテスト
    """
    def test_equals(self):
        self.assertTrue(scoring.check_scalars_equal([0, Fraction(2, 3)], (Scalar(0), Scalar(Fraction(2, 3)))))

    def test_length(self):
        with self.assertRaises(AssertionError):
            scoring.check_scalars_equal([1, 2], [1])

    def test_index_in_message(self):
        with self.assertRaises(AssertionError) as e:
            scoring.check_scalars_equal([1, 2, 3], [1, 2, 4], "a'")
        self.assertIn("a'[2]", str(e.exception))


class TestCheckMatrixEqual(MyTestCase):
    """
    scoring.check_matrix_equal関数のテスト
    """
    def test_equals(self):
        self.assertTrue(scoring.check_matrix_equal(Matrix.identity(2), Matrix([[1, 0], [0, 1]])))

    def test_not_equals(self):
        with self.assertRaises(AssertionError):
            scoring.check_matrix_equal(Matrix.identity(2), Matrix.zeros(2))
        with self.assertRaises(AssertionError):
            scoring.check_matrix_equal(Matrix.identity(2), Matrix.identity(3))

    def test_not_a_matrix(self):
        for target in ([[1, 0], [0, 1]], None, "I"):
            with self.assertRaises(AssertionError):
                scoring.check_matrix_equal(Matrix.identity(2), target)


class TestCheckFormEqual(MyTestCase):
    """
    scoring.check_form_equal関数のテスト
    """
    def derogatory(self, corner) -> CanonicalForm:
        grid = PolyGrid((1, 1), ((TruncPoly.of(1, [1]), TruncPoly.of(1, [corner])),
                                 (TruncPoly.of(1, [0]), TruncPoly.of(1, [2]))))
        return CanonicalForm((Run(Scalar(0), grid),))

    def test_equals(self):
        cf = CanonicalForm.from_blocks([(1, [2, 3])])
        self.assertTrue(scoring.check_form_equal(cf, CanonicalForm.from_blocks([(1, [2, 3])])))

    def test_up_to_centralizer(self):
        """forms conjugate by the centralizer of J"""
        self.assertTrue(scoring.check_form_equal(self.derogatory(0), self.derogatory(1)))
        with self.assertRaises(AssertionError):
            scoring.check_form_equal(self.derogatory(0), self.derogatory(1), up_to_centralizer=False)

    def test_not_equals(self):
        with self.assertRaises(AssertionError):
            scoring.check_form_equal(CanonicalForm.from_blocks([(1, [2, 3])]),
                                     CanonicalForm.from_blocks([(1, [2, 4])]), "cf")


class TestCheckVerdict(MyTestCase):
    """
    scoring.check_verdict関数のテスト
    """
    def test_verdict(self):
        self.assertTrue(scoring.check_verdict("equivalent", "equivalent"))
        with self.assertRaises(AssertionError):
            scoring.check_verdict("equivalent", "undecided", "orbit")


if __name__ == "__main__":
    unittest.main()
