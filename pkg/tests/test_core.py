"""
Tests for seeded streams, permutations and vector helpers
"""
import unittest

import numpy as np

from bygrad.core import Permutation, RngStream, Stream, add, as_vector, dot, sample_permutation, sq_norm
from bygrad.exceptions import InvalidArgument


class TestRngStream(unittest.TestCase):
    """
    Test RngStream
    """

    def test_same_stream_same_draws(self):
        """
        Test identical (seed, stream) pairs reproduce their draws
        """
        first = RngStream(7, (Stream.TASKS, 3)).generator().random(5)
        second = RngStream(7, (Stream.TASKS, 3)).generator().random(5)
        self.assertTrue(np.array_equal(first, second))

    def test_child_is_order_independent(self):
        """
        Test deriving other streams first does not change a stream
        """
        root = RngStream(11)
        expected = root.child(Stream.COMPRESS, 4, 2).generator().normal(size=3)
        root.child(Stream.ATTACK, 9).generator().normal(size=100)
        self.assertTrue(np.array_equal(expected, root.child(Stream.COMPRESS, 4, 2).generator().normal(size=3)))

    def test_distinct_streams_differ(self):
        """
        Test sibling streams are not copies of each other
        """
        root = RngStream(0)
        self.assertFalse(np.array_equal(root.child(1).generator().random(4), root.child(2).generator().random(4)))
        self.assertFalse(np.array_equal(RngStream(0).generator().random(4), RngStream(1).generator().random(4)))

    def test_seed_range(self):
        """
        Test seeds outside the unsigned 64-bit range are rejected
        """
        with self.assertRaises(InvalidArgument):
            RngStream(-1)
        with self.assertRaises(InvalidArgument):
            RngStream(2 ** 64)
        RngStream(2 ** 64 - 1).generator()


class TestPermutation(unittest.TestCase):
    """
    Test Permutation and sample_permutation
    """

    def test_sample_is_bijection(self):
        """
        Test a sampled permutation covers every index once
        """
        perm = sample_permutation(RngStream(3, (Stream.DATA_PERM,)), 10)
        self.assertEqual(sorted(perm.map.tolist()), list(range(10)))
        self.assertEqual(perm.one_based(), [int(value) + 1 for value in perm.map])

    def test_rejects_non_permutation(self):
        """
        Test repeated entries are rejected
        """
        with self.assertRaises(InvalidArgument):
            Permutation(np.array([0, 0, 2]))

    def test_empty(self):
        """
        Test permuting zero elements is an error
        """
        with self.assertRaises(InvalidArgument):
            sample_permutation(RngStream(0), 0)


class TestVectors(unittest.TestCase):
    """
    Test vector helpers
    """

    def test_as_vector(self):
        """
        Test conversion and rejection of bad shapes and values
        """
        self.assertEqual(as_vector([1, 2, 3]).dtype, np.float64)
        with self.assertRaises(InvalidArgument):
            as_vector([[1.0, 2.0]])
        with self.assertRaises(InvalidArgument):
            as_vector([1.0, np.nan])
        self.assertTrue(np.isnan(as_vector([np.nan], finite=False)[0]))

    def test_dimension_mismatch(self):
        """
        Test operations on vectors of different length fail
        """
        with self.assertRaises(InvalidArgument):
            add(np.zeros(2), np.zeros(3))
        with self.assertRaises(InvalidArgument):
            dot(np.zeros(2), np.zeros(3))

    def test_sq_norm(self):
        """
        Test the squared norm
        """
        self.assertEqual(sq_norm(np.array([3.0, 4.0])), 25.0)


if __name__ == '__main__':
    unittest.main()
