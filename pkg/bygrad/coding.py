"""
Cyclic computation-task matrix, task assignment and gradient encoding

Row r of the task matrix lists which d (permuted) subsets a device holding
task r must differentiate. Each iteration the server draws two independent
permutations: the task indices (device i gets row ``task_indices[i]``) and
the data permutation p (column k stands for subset ``p[k]``). A device
encodes by averaging its d local gradients.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from bygrad.core import Permutation, RngStream, Stream, sample_permutation
from bygrad.data import Dataset
from bygrad.exceptions import BudgetExceeded, InvalidArgument

logger = logging.getLogger(__name__)

EXACT_MAX_N = 8


class TaskMatrix:
    """
    N x N binary matrix with exactly d ones per row

    :param rows: boolean array of shape (N, N)
    :type rows: np.ndarray
    """

    def __init__(self, rows: np.ndarray) -> None:
        rows = np.asarray(rows).astype(bool)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1] or rows.shape[0] < 1:
            raise InvalidArgument('task matrix must be square, got shape {}'.format(rows.shape))

        row_sums = rows.sum(axis=1)
        if not np.all(row_sums == row_sums[0]) or row_sums[0] < 1:
            raise InvalidArgument('every row needs the same positive number of ones, got {}'.format(row_sums))

        self.rows = rows
        self.rows.setflags(write=False)
        # column positions of the ones, row by row
        self.columns = np.array([np.flatnonzero(row) for row in rows])

    @property
    def N(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return int(self.rows[0].sum())

    @property
    def column_sums(self) -> np.ndarray:
        return self.rows.sum(axis=0)

    @property
    def is_cyclic(self) -> bool:
        return all(np.array_equal(np.roll(self.rows[i - 1], 1), self.rows[i]) for i in range(1, self.N))

    @staticmethod
    def from_rows(rows) -> TaskMatrix:
        return TaskMatrix(np.asarray(rows))

    def as_array(self) -> np.ndarray:
        return self.rows.astype(np.float64)

    def __repr__(self) -> str:
        return 'TaskMatrix(N={}, d={}, cyclic={})'.format(self.N, self.d, self.is_cyclic)


def build_cyclic_matrix(N: int, d: int) -> TaskMatrix:
    """
    The cyclic task matrix: row 0 has ones at columns 0..d-1 and every row is
    the previous one shifted right by one column, so every row and column
    sums to d.

    :raises InvalidArgument: unless 1 <= d <= N
    """
    if N < 1 or d < 1 or d > N:
        raise InvalidArgument('need 1 <= d <= N, got N={} d={}'.format(N, d))
    first = np.zeros(N, dtype=bool)
    first[:d] = True
    return TaskMatrix(np.array([np.roll(first, i) for i in range(N)]))


def random_task_matrix(rng: RngStream, N: int, d: int) -> TaskMatrix:
    """
    A matrix with d ones per row at uniformly random columns (column sums vary)
    """
    if N < 1 or d < 1 or d > N:
        raise InvalidArgument('need 1 <= d <= N, got N={} d={}'.format(N, d))
    generator = rng.generator()
    rows = np.zeros((N, N), dtype=bool)
    for i in range(N):
        rows[i, generator.choice(N, size=d, replace=False)] = True
    return TaskMatrix(rows)


@dataclass(frozen=True)
class Assignment:
    """
    Task indices and data permutation of one iteration, drawn independently
    """
    task_indices: Permutation
    data_perm: Permutation

    def subsets_of(self, device: int, matrix: TaskMatrix) -> np.ndarray:
        """
        Sorted 0-based subset indices device must differentiate
        """
        return np.sort(self.data_perm.map[matrix.columns[self.task_indices.map[device]]])


def sample_assignment(rng: RngStream, N: int, t: int) -> Assignment:
    """
    Draw the (task indices, data permutation) pair of iteration t
    """
    return Assignment(
        task_indices=sample_permutation(rng.child(Stream.TASKS, t), N),
        data_perm=sample_permutation(rng.child(Stream.DATA_PERM, t), N),
    )


def _check(assignment: Assignment, dataset: Dataset, matrix: TaskMatrix) -> None:
    if not (len(assignment.task_indices) == len(assignment.data_perm) == matrix.N == dataset.N):
        raise InvalidArgument('assignment, task matrix and dataset sizes disagree')


def _average(gradients: np.ndarray, d: int) -> np.ndarray:
    return gradients.sum(axis=0) / d


def encode(device: int, assignment: Assignment, model: np.ndarray, dataset: Dataset,
           matrix: TaskMatrix) -> np.ndarray:
    """
    Coded vector of one device: (1/d) sum of the d selected local gradients.

    Only the d selected gradients are evaluated; they are summed in
    ascending subset order.
    """
    _check(assignment, dataset, matrix)
    if not 0 <= device < matrix.N:
        raise InvalidArgument('device {} out of range [0, {})'.format(device, matrix.N))
    return _average(dataset.local_gradients(model, assignment.subsets_of(device, matrix)), matrix.d)


def encode_all(assignment: Assignment, model: np.ndarray, dataset: Dataset,
               matrix: TaskMatrix) -> np.ndarray:
    """
    Coded vectors of all devices, shape (N, Q). Every subset gradient is
    evaluated once and shared; row i is bit-identical to ``encode(i, ...)``.
    """
    _check(assignment, dataset, matrix)
    gradients = dataset.local_gradients(model)
    return np.stack([
        _average(gradients[assignment.subsets_of(device, matrix)], matrix.d)
        for device in range(matrix.N)
    ])


def encoder_variance(model: np.ndarray, dataset: Dataset, d: int) -> float:
    """
    Closed form of E||g_i - mu||^2 over the assignment randomness:
    (1/(N d)) ((N - d)/(N - 1)) sum_k ||grad f_k - mu||^2
    """
    N = dataset.N
    if N == 1:
        return 0.0
    gradients = dataset.local_gradients(model)
    mu = gradients.sum(axis=0) / N
    spread = float(np.sum((gradients - mu) ** 2))
    return spread * (N - d) / (N * d * (N - 1))


@dataclass(frozen=True)
class EncoderMoments:
    """
    Moments of a coded vector over the assignment randomness

    ``*_stderr`` are zero in exact mode.
    """
    mean: np.ndarray
    second_moment: float
    deviation: float
    samples: int
    mean_stderr: np.ndarray = None
    deviation_stderr: float = 0.0
    exact: bool = True


def encoder_moments(model: np.ndarray, dataset: Dataset, matrix: TaskMatrix, mode: str = 'exact',
                    samples: int = 100000, rng: RngStream = None) -> EncoderMoments:
    """
    E[g_i], E||g_i||^2 and E||g_i - mu||^2 over uniformly random task rows and
    data permutations (the distribution is the same for every device).

    :param mode: ``exact`` enumerates all N! permutations x N rows (N <= 8);
        ``monte_carlo`` draws ``samples`` pairs from ``rng``
    :type mode: str
    :raises BudgetExceeded: exact mode with N > 8
    :rtype: EncoderMoments
    """
    N, d = matrix.N, matrix.d
    gradients = dataset.local_gradients(model)
    mu = gradients.sum(axis=0) / N
    weights = matrix.as_array() / d

    if mode == 'exact':
        if N > EXACT_MAX_N:
            raise BudgetExceeded('exact encoder enumeration needs N <= {}, got N={}'.format(EXACT_MAX_N, N))

        total = np.zeros(dataset.Q)
        second = 0.0
        deviation = 0.0
        for perm in itertools.permutations(range(N)):
            coded = weights @ gradients[list(perm)]
            total += coded.sum(axis=0)
            second += float(np.sum(coded ** 2))
            deviation += float(np.sum((coded - mu) ** 2))

        count = math.factorial(N) * N
        return EncoderMoments(total / count, second / count, deviation / count, count,
                              mean_stderr=np.zeros(dataset.Q), exact=True)

    if mode == 'monte_carlo':
        if rng is None:
            raise InvalidArgument('monte_carlo mode needs an rng')
        generator = rng.generator()
        coded = np.empty((samples, dataset.Q))
        for s in range(samples):
            row = generator.integers(N)
            perm = generator.permutation(N)
            coded[s] = weights[row] @ gradients[perm]
        errors = np.sum((coded - mu) ** 2, axis=1)
        return EncoderMoments(
            mean=coded.mean(axis=0),
            second_moment=float(np.mean(np.sum(coded ** 2, axis=1))),
            deviation=float(errors.mean()),
            samples=samples,
            mean_stderr=coded.std(axis=0, ddof=1) / np.sqrt(samples),
            deviation_stderr=float(errors.std(ddof=1) / np.sqrt(samples)),
            exact=False,
        )

    raise InvalidArgument('unknown mode {!r}'.format(mode))
