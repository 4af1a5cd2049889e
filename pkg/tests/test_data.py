"""
Tests for the synthetic linear-regression data
"""
import os
import tempfile
import unittest

import numpy as np

from bygrad.core import RngStream
from bygrad.data import Dataset, default_dataset_stream, estimate_beta, estimate_L, generate_lr_dataset, spectral_L
from bygrad.exceptions import InvalidArgument


class TestDataset(unittest.TestCase):
    """
    Test Dataset and generate_lr_dataset
    """

    def setUp(self):
        self.dataset = generate_lr_dataset(default_dataset_stream(5), N=6, Q=4, sigma_H=0.3, samples_per_subset=2)
        self.model = np.linspace(-1.0, 1.0, 4)

    def test_shapes(self):
        """
        Test generated dimensions
        """
        self.assertEqual((self.dataset.N, self.dataset.samples_per_subset, self.dataset.Q), (6, 2, 4))
        self.assertEqual(len(self.dataset.subsets), 6)

    def test_deterministic(self):
        """
        Test the same stream generates the same data
        """
        again = generate_lr_dataset(default_dataset_stream(5), N=6, Q=4, sigma_H=0.3, samples_per_subset=2)
        self.assertTrue(np.array_equal(self.dataset.z, again.z))
        self.assertTrue(np.array_equal(self.dataset.y, again.y))

    def test_local_gradient(self):
        """
        Test the subset gradient against a direct sum over samples
        """
        for k in range(self.dataset.N):
            expected = sum((z @ self.model - y) * z for z, y in zip(self.dataset.z[k], self.dataset.y[k]))
            np.testing.assert_allclose(self.dataset.local_gradient(self.model, k), expected, rtol=1e-12)

    def test_full_and_mean_gradient(self):
        """
        Test grad F is the sum of subset gradients and mu its 1/N share
        """
        gradients = self.dataset.local_gradients(self.model)
        np.testing.assert_allclose(self.dataset.full_gradient(self.model), gradients.sum(axis=0))
        np.testing.assert_allclose(self.dataset.mean_gradient(self.model), gradients.mean(axis=0))

    def test_loss(self):
        """
        Test F(x) is half the residual sum of squares
        """
        residual = np.einsum('kmq,q->km', self.dataset.z, self.model) - self.dataset.y
        self.assertAlmostEqual(self.dataset.full_loss(self.model), 0.5 * float(np.sum(residual ** 2)),
                               delta=1e-9 * self.dataset.full_loss(self.model))

    def test_heterogeneity_of_identical_subsets(self):
        """
        Test identical subsets have zero heterogeneity
        """
        z = np.tile(self.dataset.z[:1], (3, 1, 1))
        y = np.tile(self.dataset.y[:1], (3, 1))
        self.assertEqual(Dataset(z, y).heterogeneity(self.model), 0.0)

    def test_validation(self):
        """
        Test invalid inputs
        """
        with self.assertRaises(InvalidArgument):
            generate_lr_dataset(RngStream(0), N=3, Q=2, sigma_H=-0.1)
        with self.assertRaises(InvalidArgument):
            self.dataset.local_gradient(self.model, 6)
        with self.assertRaises(InvalidArgument):
            self.dataset.full_loss(np.zeros(3))
        with self.assertRaises(InvalidArgument):
            Dataset(np.full((1, 1, 1), np.inf), np.zeros((1, 1)))

    def test_csv(self):
        """
        Test a dataset written to CSV reads back unchanged
        """
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'data.csv')
            self.dataset.to_csv(path)
            loaded = Dataset.from_csv(path)
        self.assertTrue(np.array_equal(loaded.z, self.dataset.z))
        self.assertTrue(np.array_equal(loaded.y, self.dataset.y))

    def test_smoothness(self):
        """
        Test the squared-norm bound dominates the exact smoothness constant
        """
        self.assertGreaterEqual(estimate_L(self.dataset) * (1 + 1e-12), spectral_L(self.dataset))

    def test_beta(self):
        """
        Test beta is the worst heterogeneity over the points
        """
        points = [np.zeros(4), self.model]
        expected = np.sqrt(max(self.dataset.heterogeneity(x) for x in points))
        self.assertAlmostEqual(estimate_beta(self.dataset, points), expected)
        with self.assertRaises(InvalidArgument):
            estimate_beta(self.dataset, [])


if __name__ == '__main__':
    unittest.main()
