"""
Which devices are Byzantine at each iteration
"""
from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from bygrad.core import RngStream, Stream
from bygrad.exceptions import InvalidArgument


class ByzantineSchedule:
    """
    ``fixed`` keeps one Byzantine set for the whole run (the first ``count``
    devices unless ``members`` is given); ``resample`` draws a uniformly
    random set of ``count`` devices every iteration.

    :param N: number of devices
    :type N: int
    :param H: number of honest devices guaranteed by the model
    :type H: int
    :param mode: 'fixed' or 'resample'
    :type mode: str
    :param count: Byzantine devices per iteration, defaults to N - H
    :type count: int, optional
    :param members: 0-based Byzantine devices for the fixed mode
    :type members: Sequence[int], optional
    """

    def __init__(self, N: int, H: int, mode: str = 'fixed', count: int = None,
                 members: Sequence[int] = None) -> None:
        if mode not in ('fixed', 'resample'):
            raise InvalidArgument('schedule mode must be fixed or resample, got {!r}'.format(mode))
        if not 0 <= N - H < N:
            raise InvalidArgument('need 0 < H <= N, got N={} H={}'.format(N, H))

        if members is not None:
            if mode != 'fixed':
                raise InvalidArgument('explicit members need the fixed mode')
            listed = np.asarray(members, dtype=np.int64)
            members = np.unique(listed)
            if members.size != listed.size:
                raise InvalidArgument('Byzantine devices listed more than once: {}'.format(listed.tolist()))
            if members.size and (members.min() < 0 or members.max() >= N):
                raise InvalidArgument('Byzantine device out of range [1, {}]'.format(N))
            if count is not None and count != members.size:
                raise InvalidArgument('count {} disagrees with {} listed members'.format(count, members.size))
            count = int(members.size)

        count = N - H if count is None else int(count)
        if count < 0:
            raise InvalidArgument('Byzantine count must be >= 0, got {}'.format(count))

        self.N = N
        self.H = H
        self.mode = mode
        self.count = count
        self.members = np.arange(count) if members is None else members

    def select(self, t: int, rng: RngStream = None) -> np.ndarray:
        """
        Sorted 0-based Byzantine devices of iteration t
        """
        if self.count > self.N - self.H:
            raise InvalidArgument('{} Byzantine devices exceed the budget N - H = {}'.format(
                self.count, self.N - self.H))
        if self.mode == 'fixed' or self.count == 0:
            return self.members.copy()
        if rng is None:
            raise InvalidArgument('the resample schedule needs a random stream')
        generator = rng.child(Stream.BYZANTINE, t).generator()
        return np.sort(generator.choice(self.N, size=self.count, replace=False))

    def partition(self, t: int, rng: RngStream = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        (honest, byzantine) device indices of iteration t
        """
        byzantine = self.select(t, rng)
        honest = np.setdiff1d(np.arange(self.N), byzantine)
        return honest, byzantine

    @property
    def spec(self) -> str:
        return self.mode

    def __repr__(self) -> str:
        return 'ByzantineSchedule(mode={!r}, count={}, N={})'.format(self.mode, self.count, self.N)


def select_byzantine_set(schedule: ByzantineSchedule, t: int, rng: RngStream = None) -> np.ndarray:
    """
    The Byzantine set B^t of the schedule at iteration t; its complement is H^t

    :raises InvalidArgument: when the schedule's count exceeds N - H
    """
    return schedule.select(t, rng)
