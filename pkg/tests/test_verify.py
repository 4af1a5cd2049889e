"""
Tests for the identity suite
"""
import unittest

from bygrad import verify
from bygrad.config import SuiteConfig
from bygrad.core import RngStream, Stream

SMALL = SuiteConfig(max_n=4, lemma_n=6, models=2, trials=200, samples=4000, seed=1)

class TestIdentities(unittest.TestCase):
    """
    Test the deterministic identities hold
    """

    def setUp(self):
        self.rng = RngStream(1, (Stream.VERIFY,))

    def test_exact_identities(self):
        """
        Test the enumeration and rational oracles agree with the closed forms
        """
        for check in (verify.check_lemma1, verify.check_infimum, verify.check_encoder,
                      verify.check_sparsification, verify.check_constants):
            result = check(SMALL, self.rng)
            self.assertTrue(result.passed, '{}: {}'.format(result.name, result.detail))
            self.assertLessEqual(result.max_error, 1e-10)

    def test_curves(self):
        """
        Test the shape of the error curves
        """
        self.assertTrue(verify.check_curves(SMALL, self.rng).passed)

    def test_reductions(self):
        """
        Test the identity compressor and the full load reduce exactly
        """
        self.assertTrue(verify.check_reductions(SMALL, self.rng).passed)

    def test_quantization(self):
        """
        Test the sampled quantizer stays within its band
        """
        self.assertTrue(verify.check_quantization(SMALL, self.rng).passed)

    def test_mutation(self):
        """
        Test a wrong closed form is caught
        """
        mutated = SuiteConfig(lemma_n=6, mutation='lemma1')
        result = verify.check_lemma1(mutated, self.rng)
        self.assertFalse(result.passed)
        self.assertGreater(result.max_error, 1e-6)

class TestDefaultSuite(unittest.TestCase):
    """
    Test the suite at its default size
    """

    def test_all_identities_pass(self):
        """
        Test every identity passes with the default settings of the verify preset
        """
        report = verify.run_suite(SuiteConfig())
        self.assertEqual(report.failures, [])
        self.assertTrue(report.passed)
        quantization = [result for result in report.results if result.name == 'quantization_unbiased'][0]
        self.assertIn('2 constant coordinates', quantization.detail)


class TestReport(unittest.TestCase):
    """
    Test VerifyReport
    """

    def test_failures(self):
        """
        Test passed and failures follow the results
        """
        report = verify.VerifyReport([verify.IdentityResult('a', True), verify.IdentityResult('b', False, 0.5)])
        self.assertFalse(report.passed)
        self.assertEqual(report.failures, ['b'])
        self.assertEqual(report.as_dict()['identities'][1]['max_error'], 0.5)
        self.assertTrue(verify.VerifyReport().passed)

if __name__ == '__main__':
    unittest.main()
