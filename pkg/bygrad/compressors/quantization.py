"""
Stochastic quantization with a per-vector range [a, b] = [min(g), max(g)]:
each entry becomes a with probability (b - g_q)/(b - a), otherwise b.
"""
from __future__ import annotations

import numpy as np

from bygrad.compressors.compressor import Compressor
from bygrad.core import RngStream, Stream


class StochasticQuantization(Compressor):
    """
    :param dim: dimension Q
    :type dim: int
    :param points: number of random vectors used to estimate delta
    :type points: int, optional
    :param point_seed: seed of the point set
    :type point_seed: int, optional
    """

    kind = 'stochastic_quantization'

    def __init__(self, dim: int, points: int = 2000, point_seed: int = 0) -> None:
        super().__init__(dim)
        self.points = int(points)
        self.point_seed = int(point_seed)
        self._delta = None

    @staticmethod
    def expected_error(g: np.ndarray) -> float:
        """
        E||C(g) - g||^2 = sum_q (b - g_q)(g_q - a), exact for the range policy
        """
        a, b = np.min(g), np.max(g)
        return float(np.sum((b - g) * (g - a)))

    @property
    def delta(self) -> float:
        """
        Empirical upper estimate: the largest ratio E||C(g) - g||^2 / ||g||^2
        over a seeded point set. The worst case depends on g; centred vectors
        with one entry at each extreme are included since they come closest to
        the sup.
        """
        if self._delta is None:
            generator = RngStream(self.point_seed, (Stream.SAMPLE,)).generator()
            points = list(generator.normal(size=(self.points, self.dim)))
            if self.dim > 2:
                spike = np.zeros(self.dim)
                spike[0], spike[1] = -1.0, 1.0
                points.append(spike)
            ratios = [self.expected_error(g) / float(np.sum(g ** 2)) for g in points if np.any(g)]
            self._delta = max(ratios) if ratios else 0.0
        return self._delta

    @property
    def uplink_scalars(self) -> int:
        # one symbol per coordinate plus the two range scalars
        return self.dim + 2

    def compress(self, g: np.ndarray, rng: RngStream) -> np.ndarray:
        g = self._check(g)
        a, b = np.min(g), np.max(g)
        if a == b:
            return g.copy()
        upper = rng.generator().random(self.dim) < (g - a) / (b - a)
        return np.where(upper, b, a)
