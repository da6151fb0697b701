import unittest
from fractions import Fraction
from unittest import mock

from pyslocc.harness import oracle_recanonicalize
from pyslocc.models.canon import (CanonicalForm, ILOTriple,
                                  commuting_pair_canonical, same_class)
from pyslocc.models.exactmat import ONE, Matrix, Scalar
from pyslocc.models.symmetry import (EQUIVALENT, INEQUIVALENT,
                                     DegenerateParameter, SymmetryParams,
                                     ZeroScale, apply_all, apply_rescale,
                                     apply_T_EA, apply_T_EJ, apply_T_JA,
                                     inverse_params, matrix_to_params,
                                     mobius_2nn, orbit_equivalent,
                                     params_to_matrix)


def block(lam, *coeffs) -> CanonicalForm:
    return CanonicalForm.from_blocks([(Fraction(lam), [Fraction(c) for c in coeffs])])


class MyTestCase(unittest.TestCase):
    pass


class TestElementaryMaps(MyTestCase):
    """
    apply_T_EJ, apply_T_EA, apply_T_JA, apply_rescaleのテスト
    """
    def test_ja_golden(self):
        """(1, 0, 2, 3) with z3 = 1"""
        self.assertEqual(apply_T_JA(block(1, 0, 2, 3), 1), block(1, 0, Fraction(2, 3), Fraction(1, 9)))

    def test_ja_closed_form(self):
        z3 = Scalar(Fraction(-2, 5))
        c = ONE + 2 * z3
        self.assertEqual(apply_T_JA(block(1, 0, 2, 3), z3).runs[0].coeffs(),
                         (Scalar(0), 2 / c, 3 / c ** 3))

    def test_ea_golden(self):
        """(1, 1, 0, 1) with z2 = 1"""
        self.assertEqual(apply_T_EA(block(1, 1, 0, 1), 1), block(Fraction(1, 2), Fraction(1, 2), 0, 1))

    def test_ej_golden(self):
        """(1, 1, 1, 1) with z1 = 1"""
        self.assertEqual(apply_T_EJ(block(1, 1, 1, 1), 1), block(Fraction(1, 2), Fraction(1, 2), 1, 8))

    def test_rescale_golden(self):
        self.assertEqual(apply_rescale(block(1, 1, 1, 1), 2, 3),
                         block(2, 3, Fraction(3, 2), Fraction(3, 4)))

    def test_order_one_blocks(self):
        """1x1 blocks follow the projective action on (1 : lambda : mu)"""
        cf = block(2, 3)
        self.assertEqual(apply_T_EJ(cf, 1), block(Fraction(2, 3), 1))
        self.assertEqual(apply_T_EA(cf, 1), block(Fraction(1, 2), Fraction(3, 4)))
        self.assertEqual(apply_T_JA(cf, 1), block(5, 3))

    def test_zero_parameters_are_identity(self):
        cf = CanonicalForm.from_blocks([(1, [0, 2, 3]), (-2, [1])])
        for fn in (apply_T_EJ, apply_T_EA, apply_T_JA):
            self.assertEqual(fn(cf, 0), cf)
        self.assertEqual(apply_all(cf, SymmetryParams()), cf)

    def test_degenerate(self):
        with self.assertRaises(DegenerateParameter):
            apply_T_EJ(block(1, 0, 1), -1)
        with self.assertRaises(DegenerateParameter):
            apply_T_JA(block(1, 0, 2, 3), Fraction(-1, 2))
        with self.assertRaises(DegenerateParameter):
            apply_T_EA(block(1, 2, 0), Fraction(-1, 2))

    def test_zero_scale(self):
        with self.assertRaises(ZeroScale):
            SymmetryParams(d2=0)
        with self.assertRaises(ZeroScale):
            apply_rescale(block(1, 1), 1, 0)

    def test_merging_runs(self):
        """two blocks sent to one eigenvalue merge into one run"""
        cf = CanonicalForm.from_blocks([(0, [1]), (1, [0])])
        out = apply_T_JA(cf, 1)
        self.assertEqual(len(out.runs), 1)
        self.assertEqual(out.runs[0].sizes, (1, 1))

    def test_derogatory_run(self):
        cf = CanonicalForm.from_blocks([(0, [1, 1]), (0, [2])])
        self.assertTrue(cf.is_derogatory())
        for sp in (SymmetryParams(z1=1), SymmetryParams(z2=1), SymmetryParams(z3=1), SymmetryParams(d2=2, d3=3)):
            t = params_to_matrix(sp)
            ident = Matrix.identity(cf.N)
            self.assertTrue(same_class(oracle_recanonicalize(cf, ILOTriple(t, ident, ident)), apply_all(cf, sp)))

    def test_derogatory_hints(self):
        """re-canonicalization of a derogatory run gets the predicted eigenvalues of the new J"""
        cf = CanonicalForm.from_blocks([(3, [1, 1]), (3, [2])])
        with mock.patch("pyslocc.models.symmetry.commuting_pair_canonical",
                        wraps=commuting_pair_canonical) as spy:
            apply_T_JA(cf, 1)
            self.assertEqual(spy.call_args.args[2], [Scalar(4), Scalar(5)])
            apply_T_EA(cf, 1)
            self.assertEqual(spy.call_args.args[2], [Scalar(Fraction(3, 2)), ONE], "固有値の予測値が渡されていない")


class TestMatrixForm(MyTestCase):
    """
    params_to_matrix, matrix_to_params, inverse_paramsのテスト
    """
    sp = SymmetryParams(Fraction(1, 2), Fraction(-1, 3), 2, 3, Fraction(-1, 5))

    def test_round_trip(self):
        self.assertEqual(matrix_to_params(params_to_matrix(self.sp)), self.sp)

    def test_scale_invariance(self):
        self.assertEqual(matrix_to_params(params_to_matrix(self.sp).scale(7)), self.sp)

    def test_inverse(self):
        t = params_to_matrix(self.sp) @ params_to_matrix(inverse_params(self.sp))
        self.assertEqual(t, Matrix.identity(3))

    def test_not_upper_triangular(self):
        with self.assertRaises(DegenerateParameter):
            matrix_to_params(Matrix([[1, 0, 0], [1, 1, 0], [0, 0, 1]]))

    def test_mobius(self):
        self.assertEqual(mobius_2nn(1, 1, 1, 2), ONE)
        self.assertEqual(mobius_2nn(2, 1, 1, 1), Scalar(Fraction(2, 3)))
        with self.assertRaises(DegenerateParameter):
            mobius_2nn(-1, 1, 1, 2)


class TestApplyAll(MyTestCase):
    """
    apply_allを行列での変換と比較する
    """
    def test_against_matrix_action(self):
        cf = CanonicalForm.from_blocks([(1, [1, 2, 0]), (0, [2, 1])])
        sp = SymmetryParams(Fraction(1, 3), Fraction(1, 3), -1, 2, 3)
        t = params_to_matrix(sp)
        ident = Matrix.identity(cf.N)
        self.assertEqual(oracle_recanonicalize(cf, ILOTriple(t, ident, ident)), apply_all(cf, sp))

    def test_unknown_stage(self):
        with self.assertRaises(ValueError):
            apply_all(block(1, 1), SymmetryParams(), order=("rescale", "XY"))


class TestOrbitEquivalent(MyTestCase):
    """
    orbit_equivalentのテスト
    """
    def test_worked_example(self):
        a, b = block(1, 0, 2, 3), block(1, 0, Fraction(2, 3), Fraction(1, 9))
        decision = orbit_equivalent(a, b)
        self.assertEqual(decision.verdict, EQUIVALENT)
        self.assertTrue(same_class(apply_all(a, decision.witness), b))

    def test_symmetric(self):
        a, b = block(1, 0, 2, 3), block(1, 0, Fraction(2, 3), Fraction(1, 9))
        decision = orbit_equivalent(b, a)
        self.assertEqual(decision.verdict, EQUIVALENT)
        self.assertTrue(same_class(apply_all(b, decision.witness), a))

    def test_identical(self):
        a = block(1, 0, 2, 3)
        decision = orbit_equivalent(a, a)
        self.assertEqual(decision.verdict, EQUIVALENT)
        self.assertTrue(decision.witness.is_identity())

    def test_block_sizes_differ(self):
        a = block(1, 0, 2, 3)
        b = CanonicalForm.from_blocks([(1, [0, 1]), (0, [1])])
        self.assertEqual(orbit_equivalent(a, b).verdict, INEQUIVALENT)

    def test_mu_cannot_leave_zero(self):
        """mu = 0 stays 0 under every upper-triangular T"""
        self.assertEqual(orbit_equivalent(block(0, 0), block(0, 1)).verdict, INEQUIVALENT)

    def test_generic_image(self):
        cf = CanonicalForm.from_blocks([(1, [1, 2]), (-1, [3, 1]), (2, [0, 1])])
        sp = SymmetryParams(1, Fraction(1, 2), 2, -1, 3)
        image = apply_all(cf, sp)
        decision = orbit_equivalent(cf, image)
        self.assertEqual(decision.verdict, EQUIVALENT)
        self.assertTrue(same_class(apply_all(cf, decision.witness), image))

    def test_all_parameters_nonzero(self):
        """every parameter moves the form; the witness is solved coefficient by coefficient"""
        cf = block(1, 1, 2, 3)
        sp = SymmetryParams(Fraction(2, 7), Fraction(-3, 5), Fraction(4, 3), Fraction(5, 2), Fraction(-2, 9))
        image = apply_all(cf, sp)
        decision = orbit_equivalent(cf, image)
        self.assertEqual(decision.verdict, EQUIVALENT, decision.detail)
        self.assertTrue(same_class(apply_all(cf, decision.witness), image), "証拠パラメータが像を再現しない")

    def test_verdict_is_symmetric(self):
        cf = CanonicalForm.from_blocks([(2, [1, Fraction(1, 2)]), (-1, [3, 1])])
        pairs = [
            (cf, apply_all(cf, SymmetryParams(Fraction(1, 3), -1, Fraction(1, 2), 2, 5))),
            (block(1, 0, 2, 3), block(1, 0, Fraction(2, 3), Fraction(1, 9))),
            (block(1, 0, 2, 3), CanonicalForm.from_blocks([(1, [0, 1]), (0, [1])])),
            (block(0, 0), block(0, 1)),
        ]
        for a, b in pairs:
            with self.subTest(a=a, b=b):
                self.assertEqual(orbit_equivalent(a, b).verdict, orbit_equivalent(b, a).verdict,
                                 "判定が引数の順序に依存する")


if __name__ == "__main__":
    unittest.main()
