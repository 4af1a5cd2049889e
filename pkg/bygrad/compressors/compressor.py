"""
Compressor base class and the identity compressor
"""
from __future__ import annotations

import numpy as np

from bygrad.core import RngStream, as_vector
from bygrad.exceptions import InvalidArgument


class Compressor:
    """
    An unbiased compression function C with E[C(g)] = g and
    E||C(g) - g||^2 <= delta ||g||^2.

    :param dim: dimension Q of the vectors it compresses
    :type dim: int
    """

    kind = 'abstract'

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise InvalidArgument('compressor dimension must be >= 1, got {}'.format(dim))
        self.dim = int(dim)

    @property
    def delta(self) -> float:
        raise NotImplementedError()

    @property
    def uplink_scalars(self) -> int:
        """
        Scalars a device transmits per compressed vector
        """
        return self.dim

    @property
    def is_identity(self) -> bool:
        return False

    def _check(self, g: np.ndarray) -> np.ndarray:
        g = as_vector(g)
        if g.shape != (self.dim,):
            raise InvalidArgument('expected dimension {}, got {}'.format(self.dim, g.shape))
        return g

    def compress(self, g: np.ndarray, rng: RngStream) -> np.ndarray:
        raise NotImplementedError()

    def __call__(self, g: np.ndarray, rng: RngStream) -> np.ndarray:
        return self.compress(g, rng)

    def __repr__(self) -> str:
        return '{}(dim={})'.format(type(self).__name__, self.dim)


class Identity(Compressor):
    """
    No compression (delta = 0)
    """

    kind = 'identity'

    @property
    def delta(self) -> float:
        return 0.0

    @property
    def is_identity(self) -> bool:
        return True

    def compress(self, g: np.ndarray, rng: RngStream) -> np.ndarray:
        return self._check(g).copy()
