"""
Tests for the unbiased compressors
"""
import itertools
import unittest

import numpy as np

from bygrad.compressors import Identity, RandomSparsification, StochasticQuantization, delta_of, from_spec
from bygrad.core import RngStream, Stream
from bygrad.exceptions import BudgetExceeded, InvalidArgument, Unsupported


class TestIdentity(unittest.TestCase):
    """
    Test Identity
    """

    def test_copy(self):
        """
        Test the output equals the input but is a new array
        """
        g = np.array([1.0, -2.0, 3.0])
        out = Identity(3).compress(g, RngStream(0))
        self.assertTrue(np.array_equal(out, g))
        self.assertIsNot(out, g)
        self.assertEqual(delta_of(Identity(3)), 0.0)
        self.assertEqual(Identity(3).uplink_scalars, 3)

    def test_dimension(self):
        """
        Test vectors of the wrong dimension are rejected
        """
        with self.assertRaises(InvalidArgument):
            Identity(3).compress(np.zeros(2), RngStream(0))


class TestRandomSparsification(unittest.TestCase):
    """
    Test RandomSparsification
    """

    def test_exact_moments(self):
        """
        Test unbiasedness and E||C(g) - g||^2 = (Q/Q_hat - 1)||g||^2 over every mask
        """
        g = np.array([0.5, -1.5, 2.0, 3.0, -0.25, 1.0, 4.0, -2.0])
        for keep in (1, 3, 5, 8):
            compressor = RandomSparsification(8, keep)
            mean, error = compressor.exact_moments(g)
            np.testing.assert_allclose(mean, g, rtol=1e-12, atol=1e-12)
            self.assertAlmostEqual(error, compressor.delta * float(np.sum(g ** 2)), delta=1e-12 * np.sum(g ** 2))

    def test_compress(self):
        """
        Test Q_hat coordinates survive, scaled by Q/Q_hat
        """
        g = np.arange(1.0, 11.0)
        out = RandomSparsification(10, 4).compress(g, RngStream(5, (Stream.COMPRESS, 0, 0)))
        kept = np.flatnonzero(out)
        self.assertEqual(len(kept), 4)
        np.testing.assert_allclose(out[kept], g[kept] * 2.5)

    def test_reproducible(self):
        """
        Test the mask is a function of the stream
        """
        compressor = RandomSparsification(10, 3)
        g = np.arange(1.0, 11.0)
        stream = RngStream(2, (Stream.COMPRESS, 7, 1))
        self.assertTrue(np.array_equal(compressor.compress(g, stream), compressor.compress(g, stream)))

    def test_full_keep_is_identity(self):
        """
        Test Q_hat = Q returns the vector unchanged
        """
        compressor = RandomSparsification(4, 4)
        self.assertTrue(compressor.is_identity)
        self.assertEqual(compressor.delta, 0.0)
        g = np.array([1.0, 2.0, 3.0, 4.0])
        self.assertTrue(np.array_equal(compressor.compress(g, RngStream(0)), g))

    def test_cost_and_validation(self):
        """
        Test the uplink cost and the Q_hat range
        """
        self.assertEqual(RandomSparsification(100, 30).uplink_scalars, 60)
        for keep in (0, 11):
            with self.assertRaises(InvalidArgument):
                RandomSparsification(10, keep)
        with self.assertRaises(BudgetExceeded):
            RandomSparsification(40, 20).exact_moments(np.ones(40))


class TestStochasticQuantization(unittest.TestCase):
    """
    Test StochasticQuantization
    """

    def test_exact_moments(self):
        """
        Test unbiasedness and the error formula by enumerating every outcome
        """
        g = np.array([-1.0, 0.25, 2.0, 0.5])
        a, b = g.min(), g.max()
        upper = (g - a) / (b - a)
        mean = np.zeros(4)
        error = 0.0
        for outcome in itertools.product([False, True], repeat=4):
            outcome = np.array(outcome)
            probability = np.prod(np.where(outcome, upper, 1 - upper))
            value = np.where(outcome, b, a)
            mean += probability * value
            error += probability * float(np.sum((value - g) ** 2))
        np.testing.assert_allclose(mean, g, atol=1e-12)
        self.assertAlmostEqual(error, StochasticQuantization.expected_error(g), places=12)

    def test_levels(self):
        """
        Test every output entry is one of the two range endpoints
        """
        g = np.array([-1.0, 0.25, 2.0, 0.5])
        out = StochasticQuantization(4).compress(g, RngStream(1))
        self.assertTrue(np.all((out == -1.0) | (out == 2.0)))

    def test_constant_vector(self):
        """
        Test a constant vector passes through
        """
        g = np.full(5, 3.0)
        self.assertTrue(np.array_equal(StochasticQuantization(5).compress(g, RngStream(0)), g))

    def test_delta_bounds_points(self):
        """
        Test the estimated delta dominates the error ratio of fresh vectors
        """
        compressor = StochasticQuantization(6, points=500)
        generator = RngStream(3).generator()
        for _ in range(20):
            g = generator.normal(size=6)
            self.assertLessEqual(compressor.expected_error(g) / float(np.sum(g ** 2)), compressor.delta + 1e-12)
        self.assertEqual(compressor.uplink_scalars, 8)


class TestFromSpec(unittest.TestCase):
    """
    Test compressor config strings
    """

    def test_kinds(self):
        """
        Test each config string builds its compressor
        """
        self.assertIsInstance(from_spec('identity', 10), Identity)
        sparsify = from_spec('sparsify:3', 10)
        self.assertIsInstance(sparsify, RandomSparsification)
        self.assertEqual(sparsify.keep, 3)
        self.assertIsInstance(from_spec('stoch_quant', 10), StochasticQuantization)
        typed = from_spec({'type': 'bygrad.compressors.RandomSparsification', 'keep': 2}, 10)
        self.assertEqual(typed.keep, 2)

    def test_errors(self):
        """
        Test unknown kinds and malformed arguments
        """
        with self.assertRaises(Unsupported):
            from_spec('topk:3', 10)
        with self.assertRaises(InvalidArgument):
            from_spec('sparsify:x', 10)


if __name__ == '__main__':
    unittest.main()
