"""
Identity suite

Every check compares an implementation with an independent oracle (exact
enumeration, rational arithmetic, or a Monte Carlo band) and reports the
largest error it saw. ``mutation='lemma1'`` swaps in a wrong coverage-deviation closed
form so the suite can be shown to fail.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np
import sympy

from bygrad.aggregators import CWTM, Mean, estimate_kappa
from bygrad.analysis import lemmas, theory
from bygrad.analysis.theory import TheoryParams
from bygrad.coding import build_cyclic_matrix, encoder_moments, encoder_variance, random_task_matrix
from bygrad.compressors import RandomSparsification, StochasticQuantization
from bygrad.config import SuiteConfig
from bygrad.core import RngStream, Stream
from bygrad.data import generate_lr_dataset
from bygrad.exceptions import BygradError
from bygrad.sim import ExperimentConfig, run
from bygrad.timer import Timer

logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-10


@dataclass
class IdentityResult:
    name: str
    passed: bool
    max_error: float = 0.0
    detail: str = ''


@dataclass
class VerifyReport:
    results: List[IdentityResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failures(self) -> List[str]:
        return [result.name for result in self.results if not result.passed]

    def as_dict(self) -> dict:
        return {
            'passed': self.passed,
            'failures': self.failures,
            'identities': [{'name': r.name, 'passed': r.passed, 'max_error': float(r.max_error), 'detail': r.detail}
                           for r in self.results],
        }


def _relative(a, b) -> float:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def _wrong_lemma1(N: int, H: int, d: int) -> float:
    return (N - H) * (N - d) / (d * H * N * N)


def check_lemma1(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    closed_form = _wrong_lemma1 if suite.mutation == 'lemma1' else theory.lemma1_value
    worst = 0.0
    cases = 0
    for N in range(2, suite.lemma_n + 1):
        for H in range(N // 2 + 1, N + 1):
            for d in range(1, N + 1):
                worst = max(worst, abs(lemmas.lemma1_enumeration(N, H, d) - closed_form(N, H, d)))
                cases += 1
    return IdentityResult('lemma1_enumeration', worst <= EXACT_TOLERANCE, worst,
                          '{} (N, H, d) points, N <= {}'.format(cases, suite.lemma_n))


def check_infimum(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    N, d, H = 6, 2, 4
    cyclic = lemmas.task_matrix_deviation(build_cyclic_matrix(N, d), H, 'exact').value
    worst = 0.0
    violations = 0
    for k in range(100):
        matrix = random_task_matrix(rng.child(Stream.MATRIX, k), N, d)
        value = lemmas.task_matrix_deviation(matrix, H, 'exact').value
        closed = lemmas.task_matrix_deviation(matrix, H, 'closed').value
        worst = max(worst, abs(value - closed))
        uniform = bool(np.all(matrix.column_sums == d))
        if value < cyclic - EXACT_TOLERANCE or (abs(value - cyclic) <= EXACT_TOLERANCE) != uniform:
            violations += 1
    passed = violations == 0 and worst <= EXACT_TOLERANCE
    return IdentityResult('cyclic_infimum', passed, worst, '{} violations over 100 matrices'.format(violations))


def check_encoder(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    worst = 0.0
    for N in range(2, suite.max_n + 1):
        dataset = generate_lr_dataset(rng.child(Stream.DATASET, N), N, 3, 0.5, feature_variance=1.0)
        for m in range(suite.models):
            model = rng.child(Stream.SAMPLE, N, m).generator().normal(size=3)
            mu = dataset.mean_gradient(model)
            for d in range(1, N + 1):
                moments = encoder_moments(model, dataset, build_cyclic_matrix(N, d), mode='exact')
                worst = max(worst, _relative(moments.mean, mu),
                            _relative(moments.deviation, encoder_variance(model, dataset, d)))
    return IdentityResult('encoder_moments', worst <= 1e-12, worst,
                          'N <= {}, {} models'.format(suite.max_n, suite.models))


def check_sparsification(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    worst = 0.0
    for Q in range(1, 11):
        g = rng.child(Stream.COMPRESS, Q).generator().normal(size=Q)
        for keep in range(1, Q + 1):
            mean, error = RandomSparsification(Q, keep).exact_moments(g)
            worst = max(worst, _relative(mean, g), _relative(error, (Q / keep - 1) * float(np.sum(g ** 2))))
    return IdentityResult('sparsification_exact', worst <= 1e-12, worst, 'Q <= 10, all Q_hat')


def check_quantization(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    Q = 8
    compressor = StochasticQuantization(Q)
    g = rng.child(Stream.SAMPLE).generator().normal(size=Q)
    draws = np.stack([compressor.compress(g, rng.child(Stream.COMPRESS, s)) for s in range(suite.samples)])
    bias = np.abs(draws.mean(axis=0) - g)
    stderr = draws.std(axis=0, ddof=1) / math.sqrt(suite.samples)
    # columns at the extremes of g are constant up to rounding
    tolerance = 1e-12 * np.maximum(1.0, np.abs(g))
    constant = stderr <= tolerance
    z = np.where(constant, 0.0, bias / np.where(constant, 1.0, stderr))
    error = float(np.mean(np.sum((draws - g) ** 2, axis=1)))
    within = (bool(np.all(bias[constant] <= tolerance[constant])) and bool(np.all(z <= 4.0))
              and error <= compressor.delta * float(np.sum(g ** 2)) * 1.05)
    return IdentityResult('quantization_unbiased', within, float(z.max()),
                          'max z-score over {} draws, {} constant coordinates'.format(
                              suite.samples, int(constant.sum())))


_DELTA = sympy.Symbol('delta', nonnegative=True)


def _rational_constants(N: int, H: int, d: int, beta: float, delta: float) -> List[float]:
    """
    kappa_1..kappa_4 in exact rationals, then xi_1..xi_4 as the same
    expressions with delta substituted by 0
    """
    N, H, d = sympy.Integer(N), sympy.Integer(H), sympy.Integer(d)
    beta2 = sympy.Rational(beta) ** 2
    coverage = (N - H) * (N - d) / (d * H * (N - 1) * N)
    kappas = [
        N * beta2 * (1 / H + 1) * 4 * _DELTA / d + 4 * beta2 * (N - d) * N / (d * H * (N - 1)),
        ((1 / H + 1) * 4 * _DELTA / d + 4 * coverage) / N,
        (4 * _DELTA / (H * d) + 4 * coverage) * N * beta2,
        2 / N ** 2 + 4 * _DELTA / (H * d * N) + 4 * coverage / N,
    ]
    exact = [kappa.subs(_DELTA, sympy.Rational(delta)) for kappa in kappas]
    exact += [kappa.subs(_DELTA, 0) for kappa in kappas]
    return [float(value) for value in exact]


def check_constants(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    generator = rng.generator()
    worst = 0.0
    for _ in range(20):
        N = int(generator.integers(2, 200))
        H = int(generator.integers(N // 2 + 1, N + 1))
        d = int(generator.integers(1, N + 1))
        kappa, beta, delta = (float(value) for value in generator.uniform(0, 3, size=3))
        constants = theory.compute_constants(TheoryParams(N, H, d, kappa, beta, delta))
        computed = [constants.kappa1, constants.kappa2, constants.kappa3, constants.kappa4,
                    constants.xi1, constants.xi2, constants.xi3, constants.xi4]
        worst = max(worst, _relative(computed, _rational_constants(N, H, d, beta, delta)))

    # without compression both families coincide
    c = theory.compute_constants(TheoryParams(100, 65, 5, 1.5, 1.0, 0.0))
    collapse = max(abs(c.kappa1 - c.xi1), abs(c.kappa2 - c.xi2), abs(c.kappa3 - c.xi3), abs(c.kappa4 - c.xi4))
    worst = max(worst, collapse)
    threshold = theory.d_threshold(100, 65, 1.5)
    return IdentityResult('theory_constants', worst <= 1e-12 and threshold == 3, worst,
                          'rational oracle at 20 points, d_threshold={}'.format(threshold))


def check_curves(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    base = TheoryParams(100, 65, 5, 1.5, 1.0, 0.5)
    deltas = [row[2] for row in theory.error_curve(base, 'delta', theory.grid({'start': 0, 'stop': 3, 'step': 0.05}))]
    loads = [row[2] for row in theory.error_curve(base, 'd', range(1, 101))]
    increasing = all(b > a for a, b in zip(deltas, deltas[1:]))
    decreasing = all(b < a for a, b in zip(loads, loads[1:]))
    return IdentityResult('error_curves', increasing and decreasing, 0.0,
                          'delta increasing={} d decreasing={}'.format(increasing, decreasing))


def check_kappa(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    mean = estimate_kappa(Mean(), 20, 15, 5, 50, rng.child(Stream.KAPPA, 0), 'norm_escalating')
    cwtm = estimate_kappa(CWTM(0.25), 20, 15, 5, suite.trials, rng.child(Stream.KAPPA, 1))
    passed = mean.unbounded and not cwtm.unbounded
    return IdentityResult('kappa_estimator', passed, cwtm.kappa_hat,
                          'mean unbounded={} cwtm kappa_hat={:.4g}'.format(mean.unbounded, cwtm.kappa_hat))


def check_reductions(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    base = ExperimentConfig(N=10, H=8, d=3, Q=5, T=15, gamma=1e-4, sigma_H=0.3, seed=suite.seed)
    lad = run(base.replace(method='LAD'))
    com = run(base.replace(method='ComLAD', compressor='identity'))
    full = run(base.replace(method='LAD', d=10, H=10, aggregator='mean'))
    oracle = run(base.replace(method='oracle', H=10))
    passed = lad.same_trajectory(com) and full.same_trajectory(oracle)
    return IdentityResult('reduction_identities', passed, 0.0,
                          'identity compressor={} full load={}'.format(lad.same_trajectory(com),
                                                                       full.same_trajectory(oracle)))


def check_lemma_bounds(suite: SuiteConfig, rng: RngStream) -> IdentityResult:
    N, H, d = 6, 4, 2
    dataset = generate_lr_dataset(rng.child(Stream.DATASET), N, 3, 0.5, feature_variance=1.0)
    model = rng.child(Stream.SAMPLE).generator().normal(size=3)
    moments = lemmas.honest_average_moments(model, dataset, build_cyclic_matrix(N, d), H)
    honest_ok = moments.deviation <= moments.bound * (1 + 1e-12)

    aggregator = CWTM((N - H) / N)
    kappa = estimate_kappa(aggregator, N, H, 3, suite.trials, rng.child(Stream.KAPPA)).kappa_hat
    report = lemmas.verify_lemma_bounds(dataset, model, TheoryParams(N, H, d, kappa), rng.child(Stream.VERIFY),
                                        aggregator=aggregator, samples=min(suite.samples, 2000))
    return IdentityResult('lemma_bounds', honest_ok and report.passed, moments.deviation,
                          'honest average {:.4g} <= {:.4g}; sampled bounds passed={}'.format(
                              moments.deviation, moments.bound, report.passed))


IDENTITIES: List[Callable[[SuiteConfig, RngStream], IdentityResult]] = [
    check_lemma1,
    check_infimum,
    check_encoder,
    check_sparsification,
    check_quantization,
    check_constants,
    check_curves,
    check_kappa,
    check_reductions,
    check_lemma_bounds,
]


def run_suite(suite: SuiteConfig) -> VerifyReport:
    """
    Run every identity; an identity that raises counts as failed

    :rtype: VerifyReport
    """
    report = VerifyReport()
    root = RngStream(suite.seed, (Stream.VERIFY,))
    if suite.mutation:
        logger.warning('[VERIFY] mutation %r injected, the suite is expected to fail', suite.mutation)

    with Timer('verify suite'):
        for index, identity in enumerate(IDENTITIES):
            name = identity.__name__[len('check_'):]
            try:
                with Timer('identity {}'.format(name)):
                    result = identity(suite, root.child(index))
            except BygradError as error:
                result = IdentityResult(name, False, float('nan'), '{}: {}'.format(type(error).__name__, error))
            if result.passed:
                logger.info('[VERIFY] %-24s ok   (max error %.3g) %s', result.name, result.max_error, result.detail)
            else:
                logger.error('[VERIFY] %-24s FAIL (max error %.3g) %s', result.name, result.max_error, result.detail)
            report.results.append(result)
    return report
