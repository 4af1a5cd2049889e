"""
Training loops: LAD, Com-LAD, the d = 1 baselines and the oracle

Every iteration t of a coded run:

1. draw the task indices and data permutation of t,
2. every device encodes its d subset gradients at x^t,
3. honest devices send the (optionally compressed) coded vector,
   Byzantine devices send their payload,
4. the server aggregates and steps x^{t+1} = x^t - gamma g^t.

All randomness is derived from ``RngStream(seed)`` keyed by entity and
iteration, so records are bit-identical across reruns and evaluation order.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
import yaml
from joblib import Parallel, delayed

from bygrad import aggregators, attacks, compressors
from bygrad.attacks import AttackContext
from bygrad.coding import build_cyclic_matrix, encode_all, sample_assignment
from bygrad.compressors import Compressor
from bygrad.core import RngStream, Stream, sq_norm
from bygrad.data import Dataset, default_dataset_stream, generate_lr_dataset
from bygrad.exceptions import BygradError, InvalidArgument
from bygrad.timer import Timer

logger = logging.getLogger(__name__)

CODED_METHODS = ('LAD', 'ComLAD')
BASELINES = ('baseline_VA', 'baseline_CWTM', 'baseline_CWTM_NNM', 'baseline_ComTGN')
METHODS = CODED_METHODS + BASELINES + ('oracle',)

DEFAULT_AGGREGATORS = {
    'LAD': 'cwtm:0.1',
    'ComLAD': 'cwtm:0.1',
    'baseline_VA': 'mean',
    'baseline_CWTM': 'cwtm:0.1',
    'baseline_CWTM_NNM': 'nnm+cwtm:0.1',
    'baseline_ComTGN': 'tgn:0.2',
    'oracle': 'mean',
}

CSV_HEADER = ['t', 'loss', 'grad_norm_sq', 'agg_deviation_sq', 'uplink_scalars']


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One training run

    :param method: one of LAD, ComLAD, baseline_VA, baseline_CWTM,
        baseline_CWTM_NNM, baseline_ComTGN, oracle
    :param aggregator: aggregator config string, defaults per method
    :param byzantine: Byzantine devices per iteration, defaults to N - H
    :param feature_variance: variance of the generated features
    :param max_norm: Byzantine payloads are clipped to this norm
    :param x0: initial model, a scalar fill or a list of Q values, defaults to zero
    :param log_every: keep every log_every-th row of the record (the last row is always kept)
    """
    method: str = 'LAD'
    N: int = 100
    H: int = 80
    d: int = 10
    Q: int = 100
    T: int = 100
    gamma: float = 1e-6
    sigma_H: float = 0.0
    samples_per_subset: int = 1
    feature_variance: float = 100.0
    aggregator: Optional[Union[str, dict]] = None
    compressor: Union[str, dict] = 'identity'
    attack: Union[str, dict] = 'signflip:-2'
    schedule: str = 'fixed'
    byzantine: Optional[int] = None
    applies_after_compression: bool = False
    declared_kappa: Optional[float] = None
    max_norm: float = 1e12
    seed: int = 0
    x0: Optional[Union[float, List[float]]] = None
    label: str = ''
    log_every: int = 1
    divergence_limit: float = 1e30

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgument('unknown method {!r}, expected one of {}'.format(self.method, ', '.join(METHODS)))
        if not 2 * self.H > self.N or self.H > self.N:
            raise InvalidArgument('need N/2 < H <= N, got N={} H={}'.format(self.N, self.H))
        if not 1 <= self.d <= self.N:
            raise InvalidArgument('need 1 <= d <= N, got d={} N={}'.format(self.d, self.N))
        if self.Q < 1 or self.T < 1 or self.samples_per_subset < 1:
            raise InvalidArgument('Q, T and samples_per_subset must be >= 1')
        if not self.feature_variance > 0:
            raise InvalidArgument('feature_variance must be positive, got {}'.format(self.feature_variance))
        if not self.max_norm > 0:
            raise InvalidArgument('max_norm must be positive, got {}'.format(self.max_norm))
        if self.gamma < 0:
            raise InvalidArgument('gamma must be >= 0, got {}'.format(self.gamma))
        if self.log_every < 1:
            raise InvalidArgument('log_every must be >= 1, got {}'.format(self.log_every))
        if self.byzantine is not None and not 0 <= self.byzantine <= self.N - self.H:
            raise InvalidArgument('byzantine must be in [0, N - H], got {}'.format(self.byzantine))

    @property
    def is_baseline(self) -> bool:
        return self.method in BASELINES

    @property
    def aggregator_spec(self):
        return self.aggregator if self.aggregator is not None else DEFAULT_AGGREGATORS[self.method]

    @property
    def byzantine_count(self) -> int:
        return self.N - self.H if self.byzantine is None else self.byzantine

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)

    def resolved(self) -> ExperimentConfig:
        """
        The config actually run: baselines use d = 1 and the per-method aggregator
        """
        changes = {'aggregator': self.aggregator_spec}
        if self.is_baseline:
            changes['d'] = 1
        return self.replace(**changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def config_hash(self) -> str:
        """
        Short digest of the resolved config, labels excluded
        """
        content = self.resolved().as_dict()
        content.pop('label')
        text = yaml.safe_dump(content, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def initial_model(self) -> np.ndarray:
        if self.x0 is None:
            return np.zeros(self.Q)
        x0 = np.asarray(self.x0, dtype=np.float64)
        if x0.ndim == 0:
            return np.full(self.Q, float(x0))
        if x0.shape != (self.Q,):
            raise InvalidArgument('x0 has {} entries, Q={}'.format(x0.size, self.Q))
        return x0.copy()


@dataclass
class RunRecord:
    """
    Per-iteration metrics of one run

    Row t holds F(x^t), ||grad F(x^t)||^2, the aggregate deviation
    ||g^t - g_bar^t||^2 from the honest mean of iteration t and the uplink
    scalars one honest device sent at t. The last row describes x^T only, so
    its deviation is NaN and its uplink 0.
    """
    t: np.ndarray
    loss: np.ndarray
    grad_norm_sq: np.ndarray
    agg_deviation_sq: np.ndarray
    uplink_scalars: np.ndarray
    final_model: np.ndarray = None
    diverged: bool = False
    label: str = ''
    method: str = ''
    config_hash: str = ''
    status: str = 'ok'
    error: str = ''
    config: ExperimentConfig = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def final_loss(self) -> float:
        return float(self.loss[-1]) if len(self.loss) else float('nan')

    @property
    def ok(self) -> bool:
        return self.status != 'failed'

    def same_trajectory(self, other: RunRecord) -> bool:
        """
        Bit-identical metric columns and final model
        """
        columns = ('t', 'loss', 'grad_norm_sq', 'agg_deviation_sq', 'uplink_scalars', 'final_model')
        return self.diverged == other.diverged and all(
            np.array_equal(getattr(self, name), getattr(other, name), equal_nan=True) for name in columns)

    def to_csv(self, path: str) -> None:
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_HEADER)
            for row in zip(self.t, self.loss, self.grad_norm_sq, self.agg_deviation_sq, self.uplink_scalars):
                writer.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2])),
                                 repr(float(row[3])), int(row[4])])

    @staticmethod
    def from_csv(path: str, **metadata) -> RunRecord:
        """
        Read a record written by :meth:`to_csv`; metadata is passed through
        """
        with open(path, newline='') as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise InvalidArgument('{}: expected header {}, got {}'.format(path, CSV_HEADER, header))
            rows = [row for row in reader if row]

        table = np.array([[float(value) for value in row] for row in rows]).reshape(-1, len(CSV_HEADER))
        return RunRecord(
            t=table[:, 0].astype(np.int64),
            loss=table[:, 1],
            grad_norm_sq=table[:, 2],
            agg_deviation_sq=table[:, 3],
            uplink_scalars=table[:, 4].astype(np.int64),
            **metadata,
        )


class _Recorder:

    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config
        self.rows = []

    def keep(self, t: int) -> bool:
        return t % self.config.log_every == 0 or t == self.config.T

    def add(self, t: int, loss: float, grad_norm_sq: float, deviation: float, uplink: int) -> None:
        if self.keep(t):
            self.rows.append((t, loss, grad_norm_sq, deviation, uplink))
            logger.debug('[%s] t=%d loss=%.6g |grad|^2=%.6g', self.config.method, t, loss, grad_norm_sq)

    def record(self, final_model: np.ndarray, diverged: bool) -> RunRecord:
        columns = list(zip(*self.rows)) if self.rows else [()] * len(CSV_HEADER)
        return RunRecord(
            t=np.array(columns[0], dtype=np.int64),
            loss=np.array(columns[1], dtype=np.float64),
            grad_norm_sq=np.array(columns[2], dtype=np.float64),
            agg_deviation_sq=np.array(columns[3], dtype=np.float64),
            uplink_scalars=np.array(columns[4], dtype=np.int64),
            final_model=final_model,
            diverged=diverged,
            label=self.config.label,
            method=self.config.method,
            config_hash=self.config.config_hash,
            status='diverged' if diverged else 'ok',
            config=self.config,
        )


def build_dataset(config: ExperimentConfig) -> Dataset:
    return generate_lr_dataset(default_dataset_stream(config.seed), config.N, config.Q, config.sigma_H,
                               samples_per_subset=config.samples_per_subset,
                               feature_variance=config.feature_variance)


def _evaluate(dataset: Dataset, x: np.ndarray):
    with np.errstate(over='ignore', invalid='ignore'):
        return dataset.full_loss(x), sq_norm(dataset.full_gradient(x))


def _is_divergent(config: ExperimentConfig, loss: float) -> bool:
    return not np.isfinite(loss) or loss > config.divergence_limit


def _train(config: ExperimentConfig, compressor: Optional[Compressor], dataset: Dataset = None) -> RunRecord:
    config = config.resolved()
    dataset = dataset if dataset is not None else build_dataset(config)
    matrix = build_cyclic_matrix(config.N, config.d)
    aggregator = aggregators.from_spec(config.aggregator, byzantine=config.byzantine_count,
                                       declared_kappa=config.declared_kappa)
    attack = attacks.from_spec(config.attack, config.applies_after_compression, max_norm=config.max_norm)
    schedule = attacks.schedule_from_spec(config.schedule, config.N, config.H, config.byzantine)
    honest_mean_of = aggregators.Mean()

    root = RngStream(config.seed)
    uplink = compressor.uplink_scalars if compressor is not None else config.Q
    recorder = _Recorder(config)
    diverged = False
    clipped = 0

    logger.info('[INIT] %s %s: N=%d H=%d d=%d Q=%d T=%d gamma=%g agg=%s comp=%s attack=%s seed=%d',
                config.method, config.label, config.N, config.H, config.d, config.Q, config.T, config.gamma,
                aggregator.spec, compressor.kind if compressor else 'none', attack.spec, config.seed)

    x = config.initial_model()
    for t in range(config.T):
        loss, grad_norm_sq = _evaluate(dataset, x)

        assignment = sample_assignment(root, config.N, t)
        coded = encode_all(assignment, x, dataset, matrix)
        honest, byzantine = schedule.partition(t, root)

        if compressor is None:
            sent = coded.copy()
        else:
            sent = np.stack([compressor.compress(coded[i], root.child(Stream.COMPRESS, t, i))
                             for i in range(config.N)])

        honest_mean = honest_mean_of.aggregate(sent[honest])
        messages = sent.copy()
        for j in byzantine:
            context = AttackContext(t, int(j), honest_mean)
            stream = root.child(Stream.ATTACK, t, int(j))
            if compressor is not None and not attack.applies_after_compression:
                payload, was_clipped = attack.craft(coded[j], context, stream)
                payload = compressor.compress(payload, root.child(Stream.COMPRESS, t, int(j)))
            else:
                payload, was_clipped = attack.craft(sent[j], context, stream)
            messages[j] = payload
            clipped += was_clipped

        g = aggregator.aggregate(messages)
        recorder.add(t, loss, grad_norm_sq, sq_norm(g - honest_mean), uplink)
        x = x - config.gamma * g

        if _is_divergent(config, _evaluate(dataset, x)[0]):
            logger.warning('[%s] %s diverged at t=%d', config.method, config.label, t + 1)
            diverged = True
            break

    if clipped:
        logger.warning('[%s] %d Byzantine payloads were clipped to norm %g', config.method, clipped, attack.max_norm)

    if not diverged:
        loss, grad_norm_sq = _evaluate(dataset, x)
        recorder.add(config.T, loss, grad_norm_sq, float('nan'), 0)
    return recorder.record(x, diverged)


def run_lad(config: ExperimentConfig, dataset: Dataset = None) -> RunRecord:
    """
    LAD: honest devices send their uncompressed coded vectors

    :param config: run configuration with method LAD
    :type config: ExperimentConfig
    :param dataset: training data, generated from the seed when omitted
    :type dataset: Dataset, optional
    :rtype: RunRecord
    """
    if config.method != 'LAD':
        raise InvalidArgument('run_lad needs method LAD, got {}'.format(config.method))
    with Timer('run {} {}'.format(config.method, config.label)):
        return _train(config, None, dataset)


def run_com_lad(config: ExperimentConfig, dataset: Dataset = None) -> RunRecord:
    """
    Com-LAD: honest devices send C(g_i^t). Byzantine payloads are compressed
    with the same operator unless the attack applies after compression.
    """
    if config.method != 'ComLAD':
        raise InvalidArgument('run_com_lad needs method ComLAD, got {}'.format(config.method))
    with Timer('run {} {}'.format(config.method, config.label)):
        return _train(config, compressors.from_spec(config.compressor, config.Q), dataset)


def _oracle(config: ExperimentConfig, dataset: Dataset = None) -> RunRecord:
    config = config.resolved()
    dataset = dataset if dataset is not None else build_dataset(config)
    recorder = _Recorder(config)
    logger.info('[INIT] oracle %s: N=%d Q=%d T=%d gamma=%g seed=%d',
                config.label, config.N, config.Q, config.T, config.gamma, config.seed)

    x = config.initial_model()
    diverged = False
    for t in range(config.T):
        loss, grad_norm_sq = _evaluate(dataset, x)
        recorder.add(t, loss, grad_norm_sq, 0.0, config.Q)
        x = x - config.gamma * dataset.mean_gradient(x)
        if _is_divergent(config, _evaluate(dataset, x)[0]):
            logger.warning('[oracle] %s diverged at t=%d', config.label, t + 1)
            diverged = True
            break

    if not diverged:
        loss, grad_norm_sq = _evaluate(dataset, x)
        recorder.add(config.T, loss, grad_norm_sq, float('nan'), 0)
    return recorder.record(x, diverged)


def run_baseline(config: ExperimentConfig, dataset: Dataset = None) -> RunRecord:
    """
    The d = 1 baselines (every device sends one subset gradient, compressed
    with the configured compressor) and the adversary-free oracle, which
    steps along the exact mean gradient mu^t.
    """
    if config.method not in BASELINES + ('oracle',):
        raise InvalidArgument('run_baseline needs a baseline or oracle method, got {}'.format(config.method))
    with Timer('run {} {}'.format(config.method, config.label)):
        if config.method == 'oracle':
            return _oracle(config, dataset)
        return _train(config, compressors.from_spec(config.compressor, config.Q), dataset)


def run(config: ExperimentConfig, dataset: Dataset = None) -> RunRecord:
    """
    Dispatch on ``config.method``
    """
    if config.method == 'LAD':
        return run_lad(config, dataset)
    if config.method == 'ComLAD':
        return run_com_lad(config, dataset)
    return run_baseline(config, dataset)


def failed_record(config: ExperimentConfig, error: Exception) -> RunRecord:
    empty = np.array([])
    return RunRecord(
        t=empty.astype(np.int64), loss=empty, grad_norm_sq=empty, agg_deviation_sq=empty,
        uplink_scalars=empty.astype(np.int64), label=config.label, method=config.method,
        config_hash=config.config_hash, status='failed', error='{}: {}'.format(type(error).__name__, error),
        config=config,
    )


def run_safely(config: ExperimentConfig) -> RunRecord:
    try:
        return run(config)
    except BygradError as error:
        logger.error('[SWEEP] %s (%s) failed: %s', config.label, config.method, error)
        return failed_record(config, error)


def sweep(configs: Sequence[ExperimentConfig], jobs: int = 1) -> List[RunRecord]:
    """
    Run every config, in parallel across runs when ``jobs`` > 1

    A failing run yields a record with status 'failed' and the sweep goes on.
    Output order follows the input order.

    :param configs: runs to execute
    :type configs: Sequence[ExperimentConfig]
    :param jobs: joblib worker processes, -1 for all cores
    :type jobs: int, optional
    :rtype: List[RunRecord]
    """
    configs = list(configs)
    if not configs:
        return []
    with Timer('sweep of {} runs'.format(len(configs)), count=len(configs)):
        records = Parallel(n_jobs=jobs, prefer='processes')(delayed(run_safely)(config) for config in configs)
    failures = sum(not record.ok for record in records)
    if failures:
        logger.error('[SWEEP] %d of %d runs failed', failures, len(configs))
    return list(records)
