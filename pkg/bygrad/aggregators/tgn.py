"""
Thresholding on gradient norm
"""
import numpy as np

from bygrad.aggregators.aggregator import Aggregator, count_of
from bygrad.exceptions import InvalidArgument


class TGN(Aggregator):
    """
    Drop the ceil(tau N) messages of largest norm and average the rest.

    :param threshold_fraction: fraction tau of messages dropped, 0 <= tau < 1
    :type threshold_fraction: float
    """

    kind = 'tgn'

    def __init__(self, threshold_fraction: float = 0.2, declared_kappa: float = None) -> None:
        super().__init__(declared_kappa)
        if not 0 <= threshold_fraction < 1:
            raise InvalidArgument('threshold fraction must be in [0, 1), got {}'.format(threshold_fraction))
        self.threshold_fraction = float(threshold_fraction)

    def _aggregate(self, messages: np.ndarray) -> np.ndarray:
        n = messages.shape[0]
        dropped = count_of(self.threshold_fraction, n)
        if dropped >= n:
            raise InvalidArgument('dropping {} of {} messages leaves nothing'.format(dropped, n))
        norms = np.sum(messages ** 2, axis=1)
        # among equal norms the lower index is kept
        kept = np.sort(np.argsort(norms, kind='stable')[:n - dropped])
        return messages[kept].sum(axis=0) / (n - dropped)

    @property
    def spec(self) -> str:
        return 'tgn:{:g}'.format(self.threshold_fraction)
