"""
Random sparsification: keep Q_hat coordinates chosen uniformly without
replacement and scale them by Q / Q_hat.
"""
from __future__ import annotations

import itertools
from typing import Tuple

import numpy as np
from scipy.special import comb

from bygrad.compressors.compressor import Compressor
from bygrad.core import RngStream
from bygrad.exceptions import BudgetExceeded, InvalidArgument

MAX_EXACT_MASKS = 20000


class RandomSparsification(Compressor):
    """
    :param dim: dimension Q
    :type dim: int
    :param keep: number of kept coordinates Q_hat, 1 <= Q_hat <= Q
    :type keep: int
    """

    kind = 'random_sparsification'

    def __init__(self, dim: int, keep: int) -> None:
        super().__init__(dim)
        if keep < 1 or keep > dim:
            raise InvalidArgument('need 1 <= Q_hat <= Q, got Q_hat={} Q={}'.format(keep, dim))
        self.keep = int(keep)

    @property
    def delta(self) -> float:
        # tight: every g attains E||C(g) - g||^2 = (Q/Q_hat - 1) ||g||^2
        return self.dim / self.keep - 1.0

    @property
    def uplink_scalars(self) -> int:
        # (index, value) pairs
        return 2 * self.keep

    @property
    def is_identity(self) -> bool:
        return self.keep == self.dim

    def compress_with(self, g: np.ndarray, kept: np.ndarray) -> np.ndarray:
        """
        Apply the sparsification with an explicit set of kept coordinates
        """
        g = self._check(g)
        if self.keep == self.dim:
            return g.copy()
        out = np.zeros_like(g)
        out[kept] = g[kept] * (self.dim / self.keep)
        return out

    def compress(self, g: np.ndarray, rng: RngStream) -> np.ndarray:
        if self.keep == self.dim:
            return self._check(g).copy()
        kept = rng.generator().choice(self.dim, size=self.keep, replace=False)
        return self.compress_with(g, kept)

    def exact_moments(self, g: np.ndarray) -> Tuple[np.ndarray, float]:
        """
        E[C(g)] and E||C(g) - g||^2 by enumerating every coordinate subset

        :raises BudgetExceeded: when C(Q, Q_hat) exceeds the enumeration budget
        """
        g = self._check(g)
        masks = comb(self.dim, self.keep, exact=True)
        if masks > MAX_EXACT_MASKS:
            raise BudgetExceeded('{} masks exceed the budget of {}'.format(masks, MAX_EXACT_MASKS))

        total = np.zeros_like(g)
        error = 0.0
        for kept in itertools.combinations(range(self.dim), self.keep):
            out = self.compress_with(g, np.array(kept))
            total += out
            error += float(np.sum((out - g) ** 2))
        return total / masks, error / masks

    def __repr__(self) -> str:
        return 'RandomSparsification(dim={}, keep={})'.format(self.dim, self.keep)
