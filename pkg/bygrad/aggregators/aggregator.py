"""
Aggregator base class and vanilla averaging
"""
from __future__ import annotations

import math

import numpy as np

from bygrad.exceptions import InvalidArgument


def count_of(fraction: float, n: int) -> int:
    """
    ceil(fraction * n), insensitive to floating-point noise in the product
    """
    return int(math.ceil(round(fraction * n, 9)))


class Aggregator:
    """
    Server-side aggregation rule agg(.) over the N received messages.

    Messages are the rows of an (N, Q) array; the server does not know which
    rows are Byzantine. Every shipped rule is invariant to the row order and
    returns v exactly when all rows equal v.

    :param declared_kappa: robustness coefficient claimed for this rule,
        used by the theory bounds, defaults to None
    :type declared_kappa: float, optional
    """

    kind = 'abstract'

    def __init__(self, declared_kappa: float = None) -> None:
        self.declared_kappa = declared_kappa

    @staticmethod
    def validate(messages) -> np.ndarray:
        messages = np.asarray(messages, dtype=np.float64)
        if messages.ndim != 2 or messages.shape[0] < 1 or messages.shape[1] < 1:
            raise InvalidArgument('expected an (N, Q) message array, got shape {}'.format(messages.shape))
        if not np.all(np.isfinite(messages)):
            raise InvalidArgument('messages must have finite entries')
        return messages

    def aggregate(self, messages) -> np.ndarray:
        """
        :param messages: received vectors, shape (N, Q)
        :raises InvalidArgument: on malformed or non-finite input
        :return: the aggregate, shape (Q,)
        :rtype: np.ndarray
        """
        messages = self.validate(messages)
        if np.all(messages == messages[0]):
            return messages[0].copy()
        return self._aggregate(messages)

    def _aggregate(self, messages: np.ndarray) -> np.ndarray:
        raise NotImplementedError()

    def __call__(self, messages) -> np.ndarray:
        return self.aggregate(messages)

    @property
    def spec(self) -> str:
        return self.kind

    def __repr__(self) -> str:
        return '{}({!r})'.format(type(self).__name__, self.spec)


class Mean(Aggregator):
    """
    Vanilla averaging (VA)
    """

    kind = 'mean'

    def _aggregate(self, messages: np.ndarray) -> np.ndarray:
        return messages.sum(axis=0) / messages.shape[0]
