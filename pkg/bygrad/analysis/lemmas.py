"""
Enumeration oracles and Monte Carlo checks of the deviation lemmas
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import comb

from bygrad.aggregators import CWTM, Aggregator
from bygrad.analysis.theory import TheoryParams, compute_constants, lemma1_value
from bygrad.attacks import AttackContext, AttackPolicy, SignFlip
from bygrad.coding import TaskMatrix, build_cyclic_matrix, encode_all, random_task_matrix, sample_assignment
from bygrad.compressors import Compressor, Identity
from bygrad.core import RngStream, Stream, sq_norm
from bygrad.data import Dataset
from bygrad.exceptions import BudgetExceeded, InvalidArgument

logger = logging.getLogger(__name__)

MAX_HONEST_SETS = 10 ** 6
MAX_HONEST_CONFIGURATIONS = 2 * 10 ** 6
_CHUNK = 4096


class Estimate(NamedTuple):
    value: float
    stderr: float
    exact: bool


def _check_H(N: int, H: int) -> None:
    if not 1 <= H <= N:
        raise InvalidArgument('need 1 <= H <= N, got N={} H={}'.format(N, H))


def _honest_sets(N: int, H: int):
    # combinations in lexicographic order, in chunks of index arrays
    combinations = itertools.combinations(range(N), H)
    while True:
        chunk = np.array(list(itertools.islice(combinations, _CHUNK)), dtype=np.int64)
        if not chunk.size:
            return
        yield chunk


def task_matrix_deviation(matrix: TaskMatrix, H: int, mode: str = 'exact', samples: int = 100000,
                          rng: RngStream = None) -> Estimate:
    """
    E||(1/(dH)) h S - (1/N) 1||^2 over indicator vectors h with exactly H ones

    :param matrix: task matrix S
    :type matrix: TaskMatrix
    :param H: number of honest devices
    :type H: int
    :param mode: ``exact`` enumerates all C(N, H) indicators, ``closed`` uses
        the column sums, ``monte_carlo`` samples ``samples`` indicators
    :type mode: str
    :raises BudgetExceeded: exact mode with more than 10^6 indicators
    :rtype: Estimate
    """
    N, d = matrix.N, matrix.d
    _check_H(N, H)
    rows = matrix.as_array()
    target = np.full(N, 1.0 / N)

    if mode == 'closed':
        if N == 1:
            return Estimate(0.0, 0.0, True)
        theta = matrix.column_sums.astype(np.float64)
        pairs = H * (H - 1) / (N * (N - 1)) * (float(np.sum(theta ** 2)) - d * N)
        return Estimate((H * d + pairs) / (d * d * H * H) - 1.0 / N, 0.0, True)

    if mode == 'exact':
        count = comb(N, H, exact=True)
        if count > MAX_HONEST_SETS:
            raise BudgetExceeded('C({}, {}) = {} honest sets exceed the budget of {}'.format(
                N, H, count, MAX_HONEST_SETS))
        total = 0.0
        for chunk in _honest_sets(N, H):
            coverage = rows[chunk].sum(axis=1) / (d * H)
            total += float(np.sum((coverage - target) ** 2))
        return Estimate(total / count, 0.0, True)

    if mode == 'monte_carlo':
        if rng is None:
            raise InvalidArgument('monte_carlo mode needs an rng')
        generator = rng.generator()
        values = np.empty(samples)
        for s in range(samples):
            coverage = rows[generator.choice(N, size=H, replace=False)].sum(axis=0) / (d * H)
            values[s] = np.sum((coverage - target) ** 2)
        return Estimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(samples)), False)

    raise InvalidArgument('unknown mode {!r}'.format(mode))


def lemma1_enumeration(N: int, H: int, d: int) -> float:
    """
    Exact enumeration of the cyclic-matrix deviation, the oracle for
    :func:`bygrad.analysis.theory.lemma1_value`
    """
    return task_matrix_deviation(build_cyclic_matrix(N, d), H, 'exact').value


@dataclass(frozen=True)
class HonestAverageMoments:
    """
    Exact moments of the honest average over honest task rows and data permutations
    """
    deviation: float
    second_moment: float
    configurations: int
    bound: float


def honest_average_moments(model: np.ndarray, dataset: Dataset, matrix: TaskMatrix, H: int) -> HonestAverageMoments:
    """
    E||(1/H) sum_{i in honest} g_i - mu||^2 and E||(1/H) sum g_i||^2 without
    compression, enumerating every set of H task rows held by the honest
    devices and every data permutation. ``bound`` is
    (N beta_hat^2 + ||grad F||^2 / N) (N - H)(N - d)/(d H (N - 1) N).

    :raises BudgetExceeded: when C(N, H) N! exceeds 2 10^6
    """
    N, d = matrix.N, matrix.d
    _check_H(N, H)
    count = comb(N, H, exact=True) * math.factorial(N)
    if count > MAX_HONEST_CONFIGURATIONS:
        raise BudgetExceeded('{} configurations exceed the budget of {}'.format(count, MAX_HONEST_CONFIGURATIONS))

    gradients = dataset.local_gradients(model)
    mu = gradients.sum(axis=0) / N
    weights = matrix.as_array() / d
    honest_sets = np.array(list(itertools.combinations(range(N), H)), dtype=np.int64)

    deviation = 0.0
    second = 0.0
    for perm in itertools.permutations(range(N)):
        coded = weights @ gradients[list(perm)]
        averages = coded[honest_sets].mean(axis=1)
        deviation += float(np.sum((averages - mu) ** 2))
        second += float(np.sum(averages ** 2))

    scale = N * dataset.heterogeneity(model) + sq_norm(dataset.full_gradient(model)) / N
    bound = scale * lemma1_value(N, H, d) if N > 1 else 0.0
    return HonestAverageMoments(deviation / count, second / count, count, bound)


@dataclass
class LemmaReport:
    """
    Monte Carlo check of the aggregation-deviation and honest-average bounds
    at a frozen model, and of the cyclic-matrix infimum
    """
    samples: int
    partial: bool
    beta_hat: float
    grad_norm_sq: float
    deviation_mean: float
    deviation_stderr: float
    deviation_bound: float
    honest_sq_mean: float
    honest_sq_stderr: float
    honest_sq_bound: float
    cyclic_deviation: float
    min_random_deviation: float
    slack: float = 3.0

    @property
    def deviation_ok(self) -> bool:
        return self.deviation_mean - self.slack * self.deviation_stderr <= self.deviation_bound

    @property
    def honest_ok(self) -> bool:
        return self.honest_sq_mean - self.slack * self.honest_sq_stderr <= self.honest_sq_bound

    @property
    def corollary_ok(self) -> bool:
        return self.cyclic_deviation <= self.min_random_deviation + 1e-12

    @property
    def passed(self) -> bool:
        return self.deviation_ok and self.honest_ok and self.corollary_ok

    def as_dict(self) -> dict:
        content = asdict(self)
        content.update(deviation_ok=self.deviation_ok, honest_ok=self.honest_ok,
                       corollary_ok=self.corollary_ok, passed=self.passed)
        return content


def verify_lemma_bounds(dataset: Dataset, model: np.ndarray, p: TheoryParams, rng: RngStream,
                        d: int = None, aggregator: Aggregator = None, compressor: Compressor = None,
                        attack: AttackPolicy = None, samples: int = 2000, matrices: int = 20,
                        budget: int = 10 ** 7) -> LemmaReport:
    """
    Sample assignments, compression and attacks at a frozen model and compare
    the empirical E||g_hat - g_bar||^2 and E||g_bar||^2 with
    kappa kappa_1 + kappa kappa_2 ||grad F||^2 and kappa_3 + kappa_4 ||grad F||^2.

    beta is replaced by the empirical beta_hat at ``model`` and delta by the
    compressor's constant. The Byzantine set is redrawn every sample.
    Random task matrices are compared with the cyclic one through the
    closed-form deviation.

    :param dataset: training data, with N = p.N subsets
    :param model: frozen model x
    :param p: parameter point; its kappa is taken as the aggregator's
    :param rng: stream of the check
    :param aggregator: rule under test, defaults to a trimmed mean trimming N - H per side
    :param compressor: defaults to the identity
    :param attack: defaults to sign flip by -2
    :param samples: Monte Carlo samples
    :param budget: cap on samples x N encodings; beyond it the report is partial
    :raises InvalidArgument: on fewer than 2 samples or a dataset of another N
    :rtype: LemmaReport
    """
    if dataset.N != p.N:
        raise InvalidArgument('dataset has {} subsets, parameters N={}'.format(dataset.N, p.N))
    if samples < 2:
        raise InvalidArgument('the sampled bounds need samples >= 2, got {}'.format(samples))
    N, H = p.N, p.H
    d = p.d if d is None else d
    compressor = compressor or Identity(dataset.Q)
    aggregator = aggregator or CWTM((N - H) / N)
    attack = attack or SignFlip(-2.0)

    partial = samples * N > budget
    if partial:
        samples = max(2, budget // N)
        logger.warning('[LEMMA] sample budget exceeded, report is partial (%d samples)', samples)

    beta_hat = math.sqrt(dataset.heterogeneity(model))
    point = p.replace(d=d, beta=beta_hat, delta=compressor.delta)
    constants = compute_constants(point)
    grad_norm_sq = sq_norm(dataset.full_gradient(model))

    matrix = build_cyclic_matrix(N, d)
    deviations = np.empty(samples)
    honest_squares = np.empty(samples)
    for s in range(samples):
        stream = rng.child(Stream.VERIFY, s)
        assignment = sample_assignment(stream, N, 0)
        coded = encode_all(assignment, model, dataset, matrix)
        byzantine = np.sort(stream.child(Stream.BYZANTINE).generator().choice(N, size=N - H, replace=False))
        honest = np.setdiff1d(np.arange(N), byzantine)

        sent = np.stack([compressor.compress(coded[i], stream.child(Stream.COMPRESS, i)) for i in range(N)])
        honest_mean = sent[honest].sum(axis=0) / H
        messages = sent.copy()
        for j in byzantine:
            payload, _ = attack.craft(coded[j], AttackContext(0, int(j), honest_mean), stream.child(Stream.ATTACK, j))
            messages[j] = compressor.compress(payload, stream.child(Stream.COMPRESS, j))

        deviations[s] = sq_norm(aggregator.aggregate(messages) - honest_mean)
        honest_squares[s] = sq_norm(honest_mean)

    cyclic = task_matrix_deviation(matrix, H, 'closed').value
    random_values = [
        task_matrix_deviation(random_task_matrix(rng.child(Stream.MATRIX, k), N, d), H, 'closed').value
        for k in range(matrices)
    ]

    report = LemmaReport(
        samples=samples,
        partial=partial,
        beta_hat=beta_hat,
        grad_norm_sq=grad_norm_sq,
        deviation_mean=float(deviations.mean()),
        deviation_stderr=float(deviations.std(ddof=1) / math.sqrt(samples)),
        deviation_bound=p.kappa * constants.kappa1 + p.kappa * constants.kappa2 * grad_norm_sq,
        honest_sq_mean=float(honest_squares.mean()),
        honest_sq_stderr=float(honest_squares.std(ddof=1) / math.sqrt(samples)),
        honest_sq_bound=constants.kappa3 + constants.kappa4 * grad_norm_sq,
        cyclic_deviation=cyclic,
        min_random_deviation=min(random_values) if random_values else cyclic,
    )
    logger.info('[LEMMA] deviation %.4g <= %.4g: %s, honest average %.4g <= %.4g: %s, infimum: %s',
                report.deviation_mean, report.deviation_bound, report.deviation_ok,
                report.honest_sq_mean, report.honest_sq_bound, report.honest_ok, report.corollary_ok)
    return report
