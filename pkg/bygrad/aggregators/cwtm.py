"""
Coordinate-wise trimmed mean
"""
import numpy as np

from bygrad.aggregators.aggregator import Aggregator, count_of
from bygrad.exceptions import InvalidArgument


class CWTM(Aggregator):
    """
    Per coordinate, drop the ceil(alpha N) largest and ceil(alpha N) smallest
    values and average the rest.

    :param trim_fraction: per-side trim fraction alpha, 0 <= alpha < 1/2
    :type trim_fraction: float
    """

    kind = 'cwtm'

    def __init__(self, trim_fraction: float = 0.1, declared_kappa: float = None) -> None:
        super().__init__(declared_kappa)
        if not 0 <= trim_fraction < 0.5:
            raise InvalidArgument('trim fraction must be in [0, 0.5), got {}'.format(trim_fraction))
        self.trim_fraction = float(trim_fraction)

    def trimmed(self, n: int) -> int:
        return count_of(self.trim_fraction, n)

    def _aggregate(self, messages: np.ndarray) -> np.ndarray:
        n = messages.shape[0]
        trim = self.trimmed(n)
        if 2 * trim >= n:
            raise InvalidArgument('trimming {} per side leaves nothing of {} values'.format(trim, n))
        kept = np.sort(messages, axis=0)[trim:n - trim]
        return kept.sum(axis=0) / (n - 2 * trim)

    @property
    def spec(self) -> str:
        return 'cwtm:{:g}'.format(self.trim_fraction)
