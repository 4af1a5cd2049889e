"""
Numeric types, seeded randomness and permutations shared by every module

Indices are 0-based everywhere in code; the 1-based convention of the
protocol description is only used in log messages and CSV exports.

A model vector (model ``x``, gradients, coded vectors) is a plain 1-D
``numpy.ndarray`` of ``float64``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from bygrad.exceptions import InvalidArgument


class Stream(enum.IntEnum):
    """
    Entity labels used to key independent random streams
    """
    DATASET = 1
    TASKS = 2
    DATA_PERM = 3
    BYZANTINE = 4
    ATTACK = 5
    COMPRESS = 6
    SAMPLE = 7
    KAPPA = 8
    VERIFY = 9
    MATRIX = 10


@dataclass(frozen=True)
class RngStream:
    """
    An immutable (seed, stream_id) pair from which a numpy Generator is derived.

    Identical (seed, stream_id) pairs always produce identical draws, regardless
    of the order in which streams are derived, so devices and runs can be
    evaluated in any order (or in parallel) without changing results.

    :param seed: 64-bit experiment seed
    :type seed: int
    :param stream_id: integer labels, typically (entity, iteration, device)
    :type stream_id: Tuple[int, ...]
    """
    seed: int
    stream_id: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise InvalidArgument('seed must be a 64-bit unsigned integer, got {}'.format(self.seed))
        if any(int(label) < 0 for label in self.stream_id):
            raise InvalidArgument('stream labels must be non-negative: {}'.format(self.stream_id))

    def child(self, *labels: int) -> RngStream:
        """
        Derive a sub-stream by appending labels to the stream id

        :return: the derived stream
        :rtype: RngStream
        """
        return RngStream(self.seed, self.stream_id + tuple(int(label) for label in labels))

    def generator(self) -> np.random.Generator:
        """
        A fresh Generator positioned at the start of this stream
        """
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(sequence))


@dataclass(frozen=True)
class Permutation:
    """
    A bijection of {0..n-1}, stored as ``map[i]``
    """
    map: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.map)
        if values.ndim != 1 or not np.array_equal(np.sort(values), np.arange(len(values))):
            raise InvalidArgument('not a permutation: {}'.format(values))

    def __len__(self) -> int:
        return len(self.map)

    def __getitem__(self, index):
        return self.map[index]

    def one_based(self) -> list:
        return [int(value) + 1 for value in self.map]


def sample_permutation(rng: RngStream, n: int) -> Permutation:
    """
    Draw a uniformly random permutation of {0..n-1} from the given stream

    :param rng: the stream to draw from
    :type rng: RngStream
    :param n: number of elements
    :type n: int
    :raises InvalidArgument: when n < 1
    :return: the permutation
    :rtype: Permutation
    """
    if n < 1:
        raise InvalidArgument('cannot permute {} elements'.format(n))
    return Permutation(rng.generator().permutation(n))


def as_vector(values, finite: bool = True) -> np.ndarray:
    """
    Convert to a 1-D float64 model vector

    :param values: array-like input
    :param finite: reject NaN/Inf entries, defaults to True
    :type finite: bool, optional
    :raises InvalidArgument: on wrong rank or non-finite entries
    :rtype: np.ndarray
    """
    vector = np.asarray(values, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise InvalidArgument('expected a non-empty 1-D vector, got shape {}'.format(vector.shape))
    if finite and not np.all(np.isfinite(vector)):
        raise InvalidArgument('vector has non-finite entries')
    return vector


def check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise InvalidArgument('dimension mismatch: {} vs {}'.format(a.shape, b.shape))


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    check_dims(a, b)
    return a + b


def scale(a: np.ndarray, factor: float) -> np.ndarray:
    return a * float(factor)


def dot(a: np.ndarray, b: np.ndarray) -> float:
    check_dims(a, b)
    # elementwise product then np.sum, never BLAS, so the result is bit-stable
    return float(np.sum(a * b))


def sq_norm(a: np.ndarray) -> float:
    return dot(a, a)
