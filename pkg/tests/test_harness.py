"""PYTEST_DONT_REWRITE"""
import io
import json
import unittest

import numpy as np

from pyslocc.harness import (FAIL, PASS, SUITES, BadProfile, GenConfig,
                             derive_seed, gen_canonical, gen_ilo,
                             predicted_hints, random_profile, run_suite,
                             run_trial, write_jsonl)
from pyslocc.models.exactmat import Matrix, Scalar, eigenvalues_in_field


class MyTestCase(unittest.TestCase):
    pass


class TestGenerators(MyTestCase):
    """
    gen_canonical, gen_ilo, predicted_hintsのテスト
    """
    def test_bad_profile(self):
        with self.assertRaises(BadProfile):
            gen_canonical(GenConfig(0, 4, ((1, 2), (0, 1))))
        with self.assertRaises(BadProfile):
            gen_canonical(GenConfig(0, 2, ((1, 2), (0, 0))))
        with self.assertRaises(BadProfile):
            gen_canonical(GenConfig(0, 0, ()))

    def test_profile_is_respected(self):
        cf = gen_canonical(GenConfig(3, 5, ((1, 2), (-1, 3))))
        self.assertEqual(cf.N, 5)
        self.assertEqual(cf.spec.size_multiset(), gen_canonical(GenConfig(4, 5, ((2, 3), (0, 2)))).spec.size_multiset())
        self.assertEqual([run.lam for run in cf.runs], [Scalar(-1), Scalar(1)])

    def test_reproducible(self):
        gc = GenConfig(11, 6, ((None, 2), (None, 2), (0, 2)))
        self.assertEqual(gen_canonical(gc), gen_canonical(gc))

    def test_derogatory_profile(self):
        """repeated eigenvalues give one run whose A has rational eigenvalues"""
        for seed in range(5):
            cf = gen_canonical(GenConfig(seed, 6, ((0, 3), (0, 2), (0, 1))))
            self.assertTrue(cf.is_derogatory())
            self.assertEqual(len(eigenvalues_in_field(cf.A())), 6)

    def test_gen_ilo_families(self):
        gc = GenConfig(5, 3, ((0, 3),))
        ops = gen_ilo(gc, "upper_unitriangular_T")
        self.assertTrue(all(ops.t[i, j].is_zero() for i in range(3) for j in range(i)))
        self.assertEqual(gen_ilo(gc).p.shape, (3, 3))
        with self.assertRaises(ValueError):
            gen_ilo(gc, "lower")

    def test_predicted_hints_identity(self):
        cf = gen_canonical(GenConfig(2, 3, ((1, 2), (2, 1))))
        self.assertEqual(sorted(predicted_hints(cf, Matrix.identity(3)), key=lambda s: s.re),
                         [Scalar(1), Scalar(2)])

    def test_random_profile_distinct(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            profile = random_profile(rng, max_n=5, max_block=3, distinct=True)
            lams = [lam for lam, _ in profile]
            self.assertEqual(len(set(lams)), len(lams), "固有値が重複している")
            self.assertTrue(all(1 <= k <= 3 for _, k in profile))
            self.assertLessEqual(sum(k for _, k in profile), 5)


class TestTrials(MyTestCase):
    """
    run_trial, run_suite, write_jsonlのテスト
    """
    def test_derive_seed(self):
        self.assertNotEqual(derive_seed(1, 0), derive_seed(0, 1))
        self.assertEqual(derive_seed(2, 5), derive_seed(2, 5))

    def test_trial_is_reproducible(self):
        self.assertEqual(run_trial("nilpoly", 7, 3), run_trial("nilpoly", 7, 3))

    def test_suites_pass(self):
        for name, trials in (("z3", 5), ("closed-forms", 5), ("nilpoly", 5), ("split", 2),
                             ("commutant", 12), ("2nn", 5), ("pq", 3), ("oracle", 20), ("orbit", 6)):
            with self.subTest(suite=name):
                records = run_suite(name, seed=1, trials=trials)
                self.assertEqual(len(records), trials)
                self.assertEqual([r["verdict"] for r in records], [PASS] * trials,
                                 [r["detail"] for r in records if r["verdict"] != PASS])

    def test_every_suite_is_registered(self):
        self.assertEqual(set(SUITES), {"z3", "closed-forms", "2nn", "oracle", "orbit",
                                       "commutant", "nilpoly", "split", "pq"})

    def test_failure_is_recorded(self):
        original = SUITES["z3"]

        def broken(rng, bound, index):
            assert False, "壊れたスイート"
        SUITES["z3"] = original.__class__(original.name, broken, 1, original.about)
        try:
            record = run_trial("z3", 0, 0)
        finally:
            SUITES["z3"] = original
        self.assertEqual(record["verdict"], FAIL)
        self.assertEqual(record["detail"], "壊れたスイート")

    def test_write_jsonl(self):
        stream = io.StringIO()
        write_jsonl(run_suite("z3", seed=0, trials=2), stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual(len(lines), 2)
        first = json.loads(lines[0])
        self.assertEqual(list(first), ["suite", "seed", "index", "profile", "verdict", "detail", "redraws"])
        self.assertEqual(first["suite"], "z3")


if __name__ == "__main__":
    unittest.main()
