"""
Nearest-neighbor mixing pre-aggregation
"""
import numpy as np

from bygrad.aggregators.aggregator import Aggregator
from bygrad.exceptions import InvalidArgument


def mix(messages: np.ndarray, f: int) -> np.ndarray:
    """
    Replace every message by the mean of its N - f nearest messages
    (Euclidean, itself included; ties go to the lower index).

    :param messages: shape (N, Q)
    :type messages: np.ndarray
    :param f: Byzantine budget, 0 <= f < N
    :type f: int
    :rtype: np.ndarray
    """
    n = messages.shape[0]
    if not 0 <= f < n:
        raise InvalidArgument('NNM needs 0 <= f < N, got f={} N={}'.format(f, n))

    differences = messages[:, None, :] - messages[None, :, :]
    distances = np.sum(differences ** 2, axis=-1)
    neighbors = np.argsort(distances, axis=1, kind='stable')[:, :n - f]
    # neighbors summed in ascending index order
    neighbors = np.sort(neighbors, axis=1)
    return messages[neighbors].sum(axis=1) / (n - f)


class NNM(Aggregator):
    """
    NNM followed by an inner rule

    :param inner: rule applied to the mixed messages
    :type inner: Aggregator
    :param f: Byzantine budget used for the neighbor count N - f
    :type f: int
    """

    kind = 'nnm'

    def __init__(self, inner: Aggregator, f: int, declared_kappa: float = None) -> None:
        super().__init__(declared_kappa)
        if f < 0:
            raise InvalidArgument('f must be >= 0, got {}'.format(f))
        self.inner = inner
        self.f = int(f)

    def _aggregate(self, messages: np.ndarray) -> np.ndarray:
        return self.inner.aggregate(mix(messages, self.f))

    @property
    def spec(self) -> str:
        inner = self.inner.spec
        name, _, argument = inner.partition(':')
        return 'nnm+{}{}:f={}'.format(name, ':' + argument if argument else '', self.f)
