"""
Synthetic heterogeneous linear-regression data

The training set is split into N subsets. Subset k holds ``m`` samples
(z, y) and contributes the loss

    f_k(x) = 1/2 * sum_samples (<x, z> - y)^2

so the training loss is F(x) = sum_k f_k(x) and mu = grad F(x) / N.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from bygrad.core import RngStream, Stream, as_vector
from bygrad.exceptions import InvalidArgument

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Subset:
    """
    One training subset

    :param z: features, shape (m, Q)
    :param y: labels, shape (m,)
    """
    z: np.ndarray
    y: np.ndarray


class Dataset:
    """
    N subsets sharing the feature dimension Q. Immutable after construction.

    Features are stored as one (N, m, Q) block so that gradients of any
    group of subsets are computed with the same elementwise reductions.

    :param z: features, shape (N, m, Q)
    :type z: np.ndarray
    :param y: labels, shape (N, m)
    :type y: np.ndarray
    :param sigma_H: heterogeneity level used to generate the data
    :type sigma_H: float
    """

    def __init__(self, z: np.ndarray, y: np.ndarray, sigma_H: float = 0.0) -> None:
        z = np.asarray(z, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)

        if z.ndim != 3 or y.shape != z.shape[:2]:
            raise InvalidArgument('expected z of shape (N, m, Q) and y of shape (N, m), got {} and {}'.format(
                z.shape, y.shape))
        if z.shape[0] < 1 or z.shape[1] < 1 or z.shape[2] < 1:
            raise InvalidArgument('dataset must be nonempty')
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(y))):
            raise InvalidArgument('dataset has non-finite entries')

        self.z = z
        self.y = y
        self.z.setflags(write=False)
        self.y.setflags(write=False)
        self.sigma_H = float(sigma_H)

    @property
    def N(self) -> int:
        return self.z.shape[0]

    @property
    def samples_per_subset(self) -> int:
        return self.z.shape[1]

    @property
    def Q(self) -> int:
        return self.z.shape[2]

    @property
    def subsets(self) -> List[Subset]:
        return [Subset(self.z[k], self.y[k]) for k in range(self.N)]

    def _check_model(self, model: np.ndarray) -> np.ndarray:
        model = np.asarray(model, dtype=np.float64)
        if model.shape != (self.Q,):
            raise InvalidArgument('model dimension {} does not match Q={}'.format(model.shape, self.Q))
        return model

    def residuals(self, model: np.ndarray, indices: Sequence[int] = None) -> np.ndarray:
        """
        <x, z> - y for every sample of the selected subsets, shape (len(indices), m)
        """
        model = self._check_model(model)
        z = self.z if indices is None else self.z[indices]
        y = self.y if indices is None else self.y[indices]
        return np.sum(z * model, axis=-1) - y

    def local_gradients(self, model: np.ndarray, indices: Sequence[int] = None) -> np.ndarray:
        """
        Gradients of the selected subset losses, one row per subset

        :param model: the model x
        :type model: np.ndarray
        :param indices: 0-based subset indices, defaults to all subsets in order
        :type indices: Sequence[int], optional
        :return: array of shape (len(indices), Q)
        :rtype: np.ndarray
        """
        if indices is not None:
            indices = np.asarray(indices, dtype=np.int64)
            if indices.size and (indices.min() < 0 or indices.max() >= self.N):
                raise InvalidArgument('subset index out of range [0, {})'.format(self.N))
        residual = self.residuals(model, indices)
        z = self.z if indices is None else self.z[indices]
        return np.sum(residual[:, :, None] * z, axis=1)

    def local_gradient(self, model: np.ndarray, k: int) -> np.ndarray:
        """
        grad f_k(x) = sum_samples (<x, z> - y) z for the 0-based subset k
        """
        if not 0 <= k < self.N:
            raise InvalidArgument('subset index {} out of range [0, {})'.format(k, self.N))
        return self.local_gradients(model, [k])[0]

    def local_losses(self, model: np.ndarray) -> np.ndarray:
        return 0.5 * np.sum(self.residuals(model) ** 2, axis=1)

    def full_loss(self, model: np.ndarray) -> float:
        """
        F(x) = sum_k f_k(x)
        """
        return float(np.sum(self.local_losses(model)))

    def full_gradient(self, model: np.ndarray) -> np.ndarray:
        """
        grad F(x) = sum_k grad f_k(x), summed in subset order
        """
        return self.local_gradients(model).sum(axis=0)

    def mean_gradient(self, model: np.ndarray) -> np.ndarray:
        """
        mu = grad F(x) / N
        """
        return self.full_gradient(model) / self.N

    def heterogeneity(self, model: np.ndarray) -> float:
        """
        Empirical beta^2 at x: (1/N) sum_k ||grad f_k(x) - mu||^2
        """
        gradients = self.local_gradients(model)
        mu = gradients.sum(axis=0) / self.N
        return float(np.sum((gradients - mu) ** 2) / self.N)

    def to_csv(self, path: str) -> None:
        """
        Export as rows ``k,sample,y,z0..z{Q-1}`` with 1-based subset index k
        """
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(['k', 'sample', 'y'] + ['z{}'.format(q) for q in range(self.Q)])
            for k in range(self.N):
                for s in range(self.samples_per_subset):
                    writer.writerow([k + 1, s, repr(float(self.y[k, s]))] +
                                    [repr(float(value)) for value in self.z[k, s]])

    @staticmethod
    def from_csv(path: str, sigma_H: float = 0.0) -> Dataset:
        """
        Load a dataset written by :meth:`to_csv`
        """
        with open(path, newline='') as handle:
            reader = csv.reader(handle)
            header = next(reader)
            if header[:3] != ['k', 'sample', 'y']:
                raise InvalidArgument('{}: unexpected header {}'.format(path, header[:3]))
            rows = [[float(value) for value in row] for row in reader if row]

        table = np.array(rows)
        n = int(table[:, 0].max())
        m = int(table[:, 1].max()) + 1
        q = table.shape[1] - 3
        z = np.zeros((n, m, q))
        y = np.zeros((n, m))
        for row in table:
            k, s = int(row[0]) - 1, int(row[1])
            y[k, s] = row[2]
            z[k, s] = row[3:]
        return Dataset(z, y, sigma_H=sigma_H)


def generate_lr_dataset(
        rng: RngStream,
        N: int,
        Q: int,
        sigma_H: float,
        samples_per_subset: int = 1,
        feature_variance: float = 100.0,
        label_noise: float = 1.0) -> Dataset:
    """
    Generate the heterogeneous linear-regression dataset.

    Features are i.i.d. N(0, feature_variance). Subset k (1-based) draws a hidden model
    with i.i.d. N(0, 1 + k * sigma_H) entries and labels
    y ~ N(<z, hidden_k>, label_noise^2). sigma_H = 0 gives IID subsets.

    :param rng: stream for all draws
    :type rng: RngStream
    :param N: number of subsets
    :type N: int
    :param Q: feature dimension
    :type Q: int
    :param sigma_H: heterogeneity level (>= 0)
    :type sigma_H: float
    :param samples_per_subset: samples in each subset, defaults to 1
    :type samples_per_subset: int, optional
    :param feature_variance: variance of every feature, defaults to 100
    :type feature_variance: float, optional
    :param label_noise: standard deviation of the label noise, defaults to 1
    :type label_noise: float, optional
    :raises InvalidArgument: on negative sigma_H or empty sizes
    :rtype: Dataset
    """
    if N < 1 or Q < 1 or samples_per_subset < 1:
        raise InvalidArgument('N, Q and samples_per_subset must be >= 1')
    if sigma_H < 0:
        raise InvalidArgument('sigma_H must be >= 0, got {}'.format(sigma_H))

    generator = rng.generator()
    z = generator.normal(0.0, np.sqrt(feature_variance), size=(N, samples_per_subset, Q))

    variances = 1.0 + np.arange(1, N + 1) * sigma_H
    hidden = generator.normal(0.0, 1.0, size=(N, Q)) * np.sqrt(variances)[:, None]

    means = np.sum(z * hidden[:, None, :], axis=-1)
    y = means + generator.normal(0.0, label_noise, size=(N, samples_per_subset))

    logger.debug('[DATA] generated N=%d Q=%d m=%d sigma_H=%g', N, Q, samples_per_subset, sigma_H)
    return Dataset(z, y, sigma_H=sigma_H)


def default_dataset_stream(seed: int) -> RngStream:
    return RngStream(seed, (Stream.DATASET,))


def estimate_L(dataset: Dataset) -> float:
    """
    Smoothness constant of F used by the bounds: sum of squared feature norms
    """
    return float(np.sum(dataset.z ** 2))


def spectral_L(dataset: Dataset) -> float:
    """
    Exact smoothness constant, the largest eigenvalue of Z^T Z
    """
    features = dataset.z.reshape(-1, dataset.Q)
    return float(np.linalg.eigvalsh(features.T @ features)[-1])


def estimate_beta(dataset: Dataset, points: Sequence[np.ndarray]) -> float:
    """
    beta as the sup over sampled iterates of the empirical heterogeneity
    """
    if not points:
        raise InvalidArgument('need at least one point')
    return float(np.sqrt(max(dataset.heterogeneity(as_vector(x)) for x in points)))
