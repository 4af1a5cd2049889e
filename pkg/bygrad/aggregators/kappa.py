"""
Empirical robustness coefficient

An aggregator is kappa-robust when, for any H honest vectors z_i with mean
z_bar and any N - H Byzantine vectors,

    ||agg(...) - z_bar||^2 <= kappa * (1/H) sum_i ||z_i - z_bar||^2

``estimate_kappa`` samples honest sets and adversarial placements and
returns the largest observed ratio, a lower bound on the true kappa.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from bygrad.aggregators.aggregator import Aggregator
from bygrad.core import RngStream
from bygrad.exceptions import InvalidArgument, Unsupported

logger = logging.getLogger(__name__)

POLICIES = ('mimic', 'signflip', 'shifted', 'norm_escalating', 'inlier')


@dataclass
class KappaEstimate:
    """
    Result of :func:`estimate_kappa`

    ``unbounded`` is set when the ratio exceeded the ceiling or was infinite
    (zero honest variance with a nonzero deviation).
    """
    kappa_hat: float
    num_trials: int
    worst_case_config: Dict[str, object]
    unbounded: bool = False
    per_policy: Dict[str, float] = field(default_factory=dict)


def robustness_ratio(aggregator: Aggregator, honest: np.ndarray, byzantine: np.ndarray) -> float:
    """
    ||agg(honest, byzantine) - z_bar||^2 over the honest empirical variance

    :return: the ratio; 0 when both are zero, inf when only the variance is
    :rtype: float
    """
    honest = np.asarray(honest, dtype=np.float64)
    byzantine = np.asarray(byzantine, dtype=np.float64).reshape(-1, honest.shape[1])
    center = honest.sum(axis=0) / honest.shape[0]

    output = aggregator.aggregate(np.vstack([honest, byzantine]))
    deviation = float(np.sum((output - center) ** 2))
    variance = float(np.sum((honest - center) ** 2)) / honest.shape[0]

    if variance == 0.0:
        return 0.0 if deviation == 0.0 else float('inf')
    return deviation / variance


def place_byzantine(policy: str, honest: np.ndarray, f: int, trial: int, num_trials: int,
                    generator: np.random.Generator) -> np.ndarray:
    """
    Byzantine vectors of one trial, shape (f, Q)
    """
    H, Q = honest.shape
    center = honest.sum(axis=0) / H

    if policy == 'mimic':
        return np.tile(center, (f, 1))

    if policy == 'signflip':
        return -2.0 * honest[generator.choice(H, size=f, replace=False)]

    signs = generator.choice([-1.0, 1.0], size=Q)

    if policy == 'shifted':
        spread = honest.std(axis=0)
        return np.tile(center + generator.uniform(0.0, 4.0) * spread * signs, (f, 1))

    if policy == 'inlier':
        edge = np.where(signs > 0, honest.max(axis=0), honest.min(axis=0))
        return np.tile(edge, (f, 1))

    if policy == 'norm_escalating':
        direction = generator.normal(size=Q)
        direction /= np.sqrt(np.sum(direction ** 2))
        radius = np.sqrt(np.sum((honest - center) ** 2) / H)
        magnitude = 10.0 ** (12.0 * (trial + 1) / num_trials)
        return np.tile(center + magnitude * radius * direction, (f, 1))

    raise Unsupported('unknown adversary policy {!r}'.format(policy))


def estimate_kappa(aggregator: Aggregator, N: int, H: int, Q: int, num_trials: int, rng: RngStream,
                   adversary_policy: str = 'all', ceiling: float = 1e6) -> KappaEstimate:
    """
    Monte Carlo lower bound on the robustness coefficient of an aggregator

    Honest vectors are drawn around a random center with a random spread;
    Byzantine vectors follow ``adversary_policy`` (one of ``mimic``,
    ``signflip``, ``shifted``, ``norm_escalating``, ``inlier``, or ``all`` to
    cycle through them trial by trial).

    :param aggregator: rule under test
    :type aggregator: Aggregator
    :param N: number of messages
    :param H: number of honest messages, H > N/2
    :param Q: vector dimension
    :param num_trials: number of sampled configurations
    :param rng: random stream of the estimate
    :type rng: RngStream
    :param adversary_policy: placement policy, defaults to 'all'
    :type adversary_policy: str, optional
    :param ceiling: ratios above this flag the rule as unbounded
    :type ceiling: float, optional
    :raises InvalidArgument: when H <= N/2
    :rtype: KappaEstimate
    """
    if not 2 * H > N or H > N:
        raise InvalidArgument('kappa needs N/2 < H <= N, got N={} H={}'.format(N, H))
    if Q < 1 or num_trials < 1:
        raise InvalidArgument('Q and num_trials must be >= 1')

    if adversary_policy == 'all':
        policies = POLICIES
    elif adversary_policy in POLICIES:
        policies = (adversary_policy,)
    else:
        raise Unsupported('unknown adversary policy {!r}'.format(adversary_policy))

    f = N - H
    generator = rng.generator()
    per_policy = {policy: 0.0 for policy in policies}
    kappa_hat = 0.0
    worst = {}

    for trial in range(num_trials):
        policy = policies[trial % len(policies)]
        center = generator.normal(0.0, 10.0, size=Q)
        honest = center + generator.lognormal(0.0, 1.0) * generator.normal(size=(H, Q))
        byzantine = place_byzantine(policy, honest, f, trial, num_trials, generator)

        ratio = robustness_ratio(aggregator, honest, byzantine)
        per_policy[policy] = max(per_policy[policy], ratio)
        if ratio > kappa_hat or not worst:
            kappa_hat = ratio
            worst = {'policy': policy, 'trial': trial, 'ratio': ratio}

    unbounded = not np.isfinite(kappa_hat) or kappa_hat > ceiling
    if unbounded:
        logger.warning('[KAPPA] %r looks unbounded: ratio %g under %s', aggregator, kappa_hat, worst['policy'])
    else:
        logger.info('[KAPPA] %r: kappa_hat=%.4g over %d trials (worst %s)',
                    aggregator, kappa_hat, num_trials, worst['policy'])

    return KappaEstimate(kappa_hat, num_trials, worst, unbounded, per_policy)
