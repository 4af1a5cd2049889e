"""
Tests for the robust aggregation rules and the kappa estimator
"""
import unittest

import numpy as np

from bygrad.aggregators import CWTM, NNM, TGN, Mean, estimate_kappa, from_spec
from bygrad.aggregators.aggregator import count_of
from bygrad.aggregators.kappa import place_byzantine, robustness_ratio
from bygrad.aggregators.nnm import mix
from bygrad.core import RngStream, Stream
from bygrad.exceptions import InvalidArgument, Unsupported


class TestAggregators(unittest.TestCase):
    """
    Test Mean, CWTM, NNM and TGN
    """

    def setUp(self):
        self.messages = RngStream(0).generator().normal(size=(10, 4))
        self.rules = [Mean(), CWTM(0.1), TGN(0.2), NNM(CWTM(0.1), 2)]

    def test_consensus(self):
        """
        Test every rule returns v exactly when all messages equal v
        """
        v = np.array([0.1, -3.0, 2.5, 1e-7])
        for rule in self.rules:
            self.assertTrue(np.array_equal(rule.aggregate(np.tile(v, (7, 1))), v), rule)

    def test_order_invariance(self):
        """
        Test permuting the messages does not change the aggregate
        """
        shuffled = self.messages[RngStream(1).generator().permutation(10)]
        for rule in self.rules:
            np.testing.assert_allclose(rule.aggregate(self.messages), rule.aggregate(shuffled), rtol=1e-12,
                                       atol=1e-14)

    def test_mean(self):
        """
        Test vanilla averaging
        """
        np.testing.assert_allclose(Mean()(self.messages), self.messages.mean(axis=0))

    def test_cwtm(self):
        """
        Test the trimmed mean drops ceil(alpha n) values per side
        """
        messages = np.arange(1.0, 11.0)[:, None]
        self.assertEqual(CWTM(0.1).aggregate(messages)[0], 5.5)
        outlier = np.vstack([np.ones((9, 2)), [[1e9, -1e9]]])
        self.assertTrue(np.array_equal(CWTM(0.1).aggregate(outlier), np.ones(2)))
        self.assertEqual(CWTM(0.0).aggregate(messages)[0], 5.5)

    def test_cwtm_excessive_trim(self):
        """
        Test trimming that leaves no values is rejected
        """
        with self.assertRaises(InvalidArgument):
            CWTM(0.45).aggregate(np.array([[1.0], [2.0]]))
        with self.assertRaises(InvalidArgument):
            CWTM(0.5)

    def test_tgn(self):
        """
        Test the largest-norm messages are dropped
        """
        messages = np.array([[1.0, 0.0], [0.0, 1.0], [100.0, 0.0], [1.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(TGN(0.2).aggregate(messages), [0.5, 0.5])

    def test_mix(self):
        """
        Test NNM with f = 0 replaces every message by the overall mean
        """
        mixed = mix(self.messages, 0)
        for row in mixed:
            np.testing.assert_allclose(row, self.messages.mean(axis=0), rtol=1e-12, atol=1e-14)
        with self.assertRaises(InvalidArgument):
            mix(self.messages, 10)

    def test_mix_neighbours(self):
        """
        Test a far message is not among the neighbours of the clustered ones
        """
        messages = np.array([[0.0], [1.0], [2.0], [1000.0]])
        mixed = mix(messages, 1)
        np.testing.assert_allclose(mixed[:3, 0], [1.0, 1.0, 1.0])

    def test_validation(self):
        """
        Test malformed and non-finite messages are rejected
        """
        with self.assertRaises(InvalidArgument):
            Mean().aggregate(np.zeros(3))
        with self.assertRaises(InvalidArgument):
            Mean().aggregate(np.array([[1.0, np.nan]]))

    def test_count_of(self):
        """
        Test the rounding of fraction counts
        """
        self.assertEqual(count_of(0.1, 30), 3)
        self.assertEqual(count_of(0.1, 100), 10)
        self.assertEqual(count_of(0.1, 15), 2)


class TestFromSpec(unittest.TestCase):
    """
    Test aggregator config strings
    """

    def test_strings(self):
        """
        Test each config string builds its rule
        """
        self.assertIsInstance(from_spec('mean'), Mean)
        self.assertIsInstance(from_spec('va'), Mean)
        self.assertEqual(from_spec('cwtm').trim_fraction, 0.1)
        self.assertEqual(from_spec('cwtm:0.25').trim_fraction, 0.25)
        self.assertEqual(from_spec('tgn').threshold_fraction, 0.2)

    def test_nnm(self):
        """
        Test NNM takes f from the string or the Byzantine count
        """
        rule = from_spec('nnm+cwtm:0.1:f=20')
        self.assertIsInstance(rule, NNM)
        self.assertEqual(rule.f, 20)
        self.assertEqual(rule.inner.trim_fraction, 0.1)
        self.assertEqual(rule.spec, 'nnm+cwtm:0.1:f=20')
        self.assertEqual(from_spec('nnm+cwtm:0.1', byzantine=7).f, 7)
        with self.assertRaises(InvalidArgument):
            from_spec('nnm+cwtm:0.1')

    def test_typed(self):
        """
        Test a dotted type mapping
        """
        rule = from_spec({'type': 'bygrad.aggregators.CWTM', 'trim_fraction': 0.2}, declared_kappa=3.0)
        self.assertEqual(rule.trim_fraction, 0.2)
        self.assertEqual(rule.declared_kappa, 3.0)

    def test_unknown(self):
        """
        Test unknown rules and bad arguments
        """
        with self.assertRaises(Unsupported):
            from_spec('krum')
        with self.assertRaises(InvalidArgument):
            from_spec('cwtm:abc')


class TestKappa(unittest.TestCase):
    """
    Test the empirical robustness coefficient
    """

    def test_ratio(self):
        """
        Test the degenerate ratios
        """
        honest = np.ones((3, 2))
        self.assertEqual(robustness_ratio(Mean(), honest, np.ones((1, 2))), 0.0)
        self.assertEqual(robustness_ratio(Mean(), honest, np.zeros((1, 2))), float('inf'))

    def test_mean_unbounded(self):
        """
        Test averaging is flagged unbounded under escalating norms
        """
        estimate = estimate_kappa(Mean(), 20, 15, 5, 50, RngStream(0, (Stream.KAPPA,)), 'norm_escalating')
        self.assertTrue(estimate.unbounded)

    def test_cwtm_bounded(self):
        """
        Test a trimmed mean trimming N - H per side stays bounded
        """
        estimate = estimate_kappa(CWTM(0.25), 20, 15, 5, 250, RngStream(1, (Stream.KAPPA,)))
        self.assertFalse(estimate.unbounded)
        self.assertGreater(estimate.kappa_hat, 0.0)
        self.assertEqual(set(estimate.per_policy), {'mimic', 'signflip', 'shifted', 'norm_escalating', 'inlier'})
        self.assertLessEqual(max(estimate.per_policy.values()), estimate.kappa_hat)

    def test_cwtm_estimate_stable(self):
        """
        Test two independent estimates for a 10% trimmed mean with 10 of 100 Byzantine agree within 20%
        """
        root = RngStream(5, (Stream.KAPPA,))
        first = estimate_kappa(CWTM(0.1), 100, 90, 10, 10000, root.child(0))
        second = estimate_kappa(CWTM(0.1), 100, 90, 10, 10000, root.child(1))
        for estimate in (first, second):
            self.assertFalse(estimate.unbounded)
            self.assertTrue(np.isfinite(estimate.kappa_hat))
            self.assertGreater(estimate.kappa_hat, 0.0)
        self.assertLessEqual(abs(first.kappa_hat - second.kappa_hat), 0.2 * max(first.kappa_hat, second.kappa_hat))

    def test_reproducible(self):
        """
        Test the estimate is a function of the stream
        """
        first = estimate_kappa(TGN(0.25), 12, 9, 3, 40, RngStream(2))
        second = estimate_kappa(TGN(0.25), 12, 9, 3, 40, RngStream(2))
        self.assertEqual(first.kappa_hat, second.kappa_hat)

    def test_placement(self):
        """
        Test placements have one row per Byzantine device
        """
        honest = RngStream(0).generator().normal(size=(6, 3))
        for policy in ('mimic', 'signflip', 'shifted', 'norm_escalating', 'inlier'):
            self.assertEqual(place_byzantine(policy, honest, 2, 0, 10, RngStream(1).generator()).shape, (2, 3))
        with self.assertRaises(Unsupported):
            place_byzantine('nope', honest, 2, 0, 10, RngStream(1).generator())

    def test_honest_majority(self):
        """
        Test H <= N/2 is rejected
        """
        with self.assertRaises(InvalidArgument):
            estimate_kappa(Mean(), 10, 5, 2, 10, RngStream(0))


if __name__ == '__main__':
    unittest.main()
