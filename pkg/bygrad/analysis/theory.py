"""
Closed-form convergence theory of LAD and Com-LAD

The constants kappa_1..kappa_4 bound the aggregation deviation and the
honest average of Com-LAD; xi_1..xi_4 are their LAD counterparts. Both
feed the error term of the averaged squared-gradient bound

    eps = (leading + gamma0 (L kappa c1 + L c3)) / ((1/N - sqrt(kappa c2)) - gamma0 (L kappa c2 + L c4))

which exists only when sqrt(kappa c2) < 1/N and gamma0 is below the
stable learning rate.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from bygrad.exceptions import Infeasible, InvalidArgument

logger = logging.getLogger(__name__)

VARIANTS = ('ComLAD', 'LAD')
CURVE_AXES = ('delta', 'd', 'kappa')
CURVE_HEADER = ['param', 'value', 'error_term']


@dataclass(frozen=True)
class TheoryParams:
    """
    Inputs of the bounds

    :param N: number of devices (and subsets)
    :param H: honest devices, N/2 < H <= N
    :param d: computational load, 1 <= d <= N
    :param kappa: robustness coefficient of the aggregator
    :param beta: heterogeneity bound
    :param delta: compressor constant, 0 without compression
    :param L: smoothness constant of F
    :param gamma0: constant learning rate, > 0
    :param F0_minus_Fstar: F(x^0) - F*
    """
    N: int
    H: int
    d: int
    kappa: float
    beta: float = 1.0
    delta: float = 0.0
    L: float = 1.0
    gamma0: float = 1e-6
    F0_minus_Fstar: float = 0.0

    def __post_init__(self):
        if self.N < 2:
            raise InvalidArgument('the bounds need N >= 2, got N={}'.format(self.N))
        if not 2 * self.H > self.N or self.H > self.N:
            raise InvalidArgument('need N/2 < H <= N, got N={} H={}'.format(self.N, self.H))
        if not 1 <= self.d <= self.N:
            raise InvalidArgument('need 1 <= d <= N, got d={} N={}'.format(self.d, self.N))
        if min(self.kappa, self.beta, self.delta, self.F0_minus_Fstar) < 0:
            raise InvalidArgument('kappa, beta, delta and F0_minus_Fstar must be >= 0')
        if not self.gamma0 > 0:
            raise InvalidArgument('gamma0 must be positive, got {}'.format(self.gamma0))
        if not self.L > 0:
            raise InvalidArgument('L must be positive, got {}'.format(self.L))

    def replace(self, **changes) -> TheoryParams:
        return dataclasses.replace(self, **changes)

    @property
    def params_hash(self) -> str:
        """
        Short digest of the parameter point, keys the output files
        """
        text = yaml.safe_dump(dataclasses.asdict(self), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class Constants:
    kappa1: float
    kappa2: float
    kappa3: float
    kappa4: float
    xi1: float
    xi2: float
    xi3: float
    xi4: float

    def of(self, variant: str) -> Tuple[float, float, float, float]:
        """
        (c1, c2, c3, c4) of a variant: the kappas for ComLAD, the xis for LAD
        """
        _check_variant(variant)
        if variant == 'ComLAD':
            return self.kappa1, self.kappa2, self.kappa3, self.kappa4
        return self.xi1, self.xi2, self.xi3, self.xi4


@dataclass
class BoundReport:
    """
    Constants, feasibility and error terms of one parameter point. Fields
    that need an infeasible closed form are None.
    """
    params: TheoryParams
    constants: Constants
    feasible: bool
    feasible_lad: bool
    eps_com_lad: Optional[float]
    eps_lad: Optional[float]
    max_stable_gamma: Optional[float]
    max_stable_gamma_lad: Optional[float]
    transient_coeff: Optional[float]
    leading_com_lad: float
    leading_lad: float
    baseline_error: float

    def as_dict(self) -> dict:
        content = dataclasses.asdict(self)
        content['d_threshold'] = d_threshold(self.params.N, self.params.H, self.params.kappa)
        return content


class ErrorTerms(NamedTuple):
    eps_com_lad: Optional[float]
    eps_lad: Optional[float]


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise InvalidArgument('variant must be one of {}, got {!r}'.format(VARIANTS, variant))


def lemma1_value(N: int, H: int, d: int) -> float:
    """
    Expected squared deviation of the honest-weighted coverage from uniform
    under the cyclic task matrix:

        (N - H)(N - d) / (d H (N - 1) N)

    :raises InvalidArgument: when N = 1 or d, H are outside [1, N]
    """
    if N < 2:
        raise InvalidArgument('need N >= 2, got N={}'.format(N))
    if not 1 <= d <= N or not 1 <= H <= N:
        raise InvalidArgument('need 1 <= d, H <= N, got N={} H={} d={}'.format(N, H, d))
    return (N - H) * (N - d) / (d * H * (N - 1) * N)


def compute_constants(p: TheoryParams) -> Constants:
    """
    Evaluate kappa_1..kappa_4 and xi_1..xi_4

    The xis are the kappas at delta = 0.

    :param p: parameter point
    :type p: TheoryParams
    :rtype: Constants
    """
    N, H, d = p.N, p.H, p.d
    beta2, delta = p.beta ** 2, p.delta
    lemma1 = lemma1_value(N, H, d)
    spread = (N - d) * N / (d * H * (N - 1))
    pairs = (N - H) * (N - d) / (d * H * (N - 1))

    return Constants(
        kappa1=N * beta2 * ((1 / H + 1) * (4 * delta / d)) + 4 * beta2 * spread,
        kappa2=((1 / H + 1) * 4 * delta / d + 4 * lemma1) / N,
        kappa3=(4 * delta / (H * d) + 4 * lemma1) * N * beta2,
        kappa4=2 / N ** 2 + 4 * delta / (H * d * N) + 4 * pairs / N ** 2,
        xi1=4 * beta2 * spread,
        xi2=4 * lemma1 / N,
        xi3=4 * pairs * beta2,
        xi4=2 / N ** 2 + 4 * pairs / N ** 2,
    )


def is_feasible(p: TheoryParams, variant: str = 'ComLAD', constants: Constants = None) -> bool:
    """
    sqrt(kappa c2) < 1/N
    """
    _, c2, _, _ = (constants or compute_constants(p)).of(variant)
    return math.sqrt(p.kappa * c2) < 1 / p.N


def max_stable_gamma(p: TheoryParams, variant: str = 'ComLAD') -> float:
    """
    Strict upper bound on gamma0: (1/N - sqrt(kappa c2)) / (L kappa c2 + L c4)

    :raises Infeasible: when sqrt(kappa c2) >= 1/N
    """
    constants = compute_constants(p)
    _, c2, _, c4 = constants.of(variant)
    if not is_feasible(p, variant, constants):
        raise Infeasible('{}: sqrt(kappa c2) = {:.6g} is not below 1/N = {:.6g}'.format(
            variant, math.sqrt(p.kappa * c2), 1 / p.N))
    return (1 / p.N - math.sqrt(p.kappa * c2)) / (p.L * p.kappa * c2 + p.L * c4)


def leading_error_term(p: TheoryParams, variant: str = 'ComLAD') -> float:
    """
    The learning-rate free numerator of the error term, the quantity the
    error-versus-delta and error-versus-d curves trace:

    - ComLAD: kappa_1 sqrt(kappa) / (2 sqrt(kappa_2))
    - LAD: N beta (sqrt(kappa xi_1) / 2) sqrt(N / (N - H))

    Returns inf for LAD without Byzantine devices and for c1 > 0 = c2.
    """
    _check_variant(variant)
    constants = compute_constants(p)
    if variant == 'LAD':
        if p.H == p.N:
            return 0.0 if constants.xi1 == 0 or p.kappa == 0 else float('inf')
        return p.N * p.beta * (math.sqrt(p.kappa * constants.xi1) / 2) * math.sqrt(p.N / (p.N - p.H))

    c1, c2 = constants.kappa1, constants.kappa2
    if c2 == 0:
        return 0.0 if c1 == 0 or p.kappa == 0 else float('inf')
    return c1 * math.sqrt(p.kappa) / (2 * math.sqrt(c2))


def baseline_error(p: TheoryParams) -> float:
    """
    Order of the error of a kappa-robust rule without coding, beta^2 kappa
    """
    return p.beta ** 2 * p.kappa


def _denominator(p: TheoryParams, c2: float, c4: float) -> float:
    return (1 / p.N - math.sqrt(p.kappa * c2)) - p.gamma0 * (p.L * p.kappa * c2 + p.L * c4)


def _error_term(p: TheoryParams, variant: str, constants: Constants) -> Optional[float]:
    c1, c2, c3, c4 = constants.of(variant)
    if not is_feasible(p, variant, constants):
        return None
    denominator = _denominator(p, c2, c4)
    if denominator <= 0:
        return None
    return (leading_error_term(p, variant) + p.gamma0 * (p.L * p.kappa * c1 + p.L * c3)) / denominator


def error_terms(p: TheoryParams) -> ErrorTerms:
    """
    Evaluate the Com-LAD and LAD error terms. Either one is None when its
    feasibility condition fails or gamma0 is not below its stable rate.

    The LAD leading term is also compared with the delta = 0 limit of the
    Com-LAD form; a disagreement is logged with both values.

    :param p: parameter point
    :type p: TheoryParams
    :rtype: ErrorTerms
    """
    constants = compute_constants(p)
    eps_com_lad = _error_term(p, 'ComLAD', constants)
    eps_lad = _error_term(p, 'LAD', constants)

    for variant, value in (('ComLAD', eps_com_lad), ('LAD', eps_lad)):
        if value is None:
            logger.warning('[THEORY] %s error term unavailable at N=%d H=%d d=%d kappa=%g delta=%g gamma0=%g',
                           variant, p.N, p.H, p.d, p.kappa, p.delta, p.gamma0)

    lad = leading_error_term(p, 'LAD')
    limit = leading_error_term(p.replace(delta=0.0), 'ComLAD')
    if np.isfinite(lad) and np.isfinite(limit) and not math.isclose(lad, limit, rel_tol=1e-9, abs_tol=1e-300):
        logger.warning('[THEORY] LAD leading term %.12g differs from the delta=0 limit %.12g', lad, limit)

    return ErrorTerms(eps_com_lad, eps_lad)


def transient_coefficient(p: TheoryParams, variant: str = 'ComLAD') -> Optional[float]:
    """
    (F(x^0) - F*) / (gamma0 (1/N - sqrt(kappa c2)) - gamma0^2 (L kappa c2 + L c4)),
    the coefficient of 1/T in the bound
    """
    _, c2, _, c4 = compute_constants(p).of(variant)
    denominator = p.gamma0 * _denominator(p, c2, c4)
    if not is_feasible(p, variant) or denominator <= 0:
        return None
    return p.F0_minus_Fstar / denominator


def convergence_bound(p: TheoryParams, variant: str, T: int) -> float:
    """
    Upper bound on (1/T) sum_t E||grad F(x^t)||^2 after T iterations

    :raises Infeasible: when the bound does not exist at this point
    :raises InvalidArgument: when T < 1
    """
    if T < 1:
        raise InvalidArgument('T must be >= 1, got {}'.format(T))
    transient = transient_coefficient(p, variant)
    error = _error_term(p, variant, compute_constants(p))
    if transient is None or error is None:
        raise Infeasible('{} bound unavailable at N={} H={} d={} kappa={} gamma0={}'.format(
            variant, p.N, p.H, p.d, p.kappa, p.gamma0))
    return transient / T + error


def d_threshold(N: int, H: int, kappa: float) -> int:
    """
    Smallest load beating the uncoded baseline, ceil(N^2 / (kappa H (N - H) + N)).
    Without Byzantine devices (H = N) any load does and 1 is returned.
    """
    if not 1 <= H <= N or kappa < 0:
        raise InvalidArgument('need 1 <= H <= N and kappa >= 0, got N={} H={} kappa={}'.format(N, H, kappa))
    if H == N:
        logger.info('[THEORY] no Byzantine devices, every load d >= 1 qualifies')
        return 1
    return int(math.ceil(round(N ** 2 / (kappa * H * (N - H) + N), 9)))


def bound_report(p: TheoryParams) -> BoundReport:
    """
    Everything the closed forms say about one parameter point

    :rtype: BoundReport
    """
    constants = compute_constants(p)

    def stable(variant):
        try:
            return max_stable_gamma(p, variant)
        except Infeasible:
            return None

    terms = error_terms(p)
    return BoundReport(
        params=p,
        constants=constants,
        feasible=is_feasible(p, 'ComLAD', constants),
        feasible_lad=is_feasible(p, 'LAD', constants),
        eps_com_lad=terms.eps_com_lad,
        eps_lad=terms.eps_lad,
        max_stable_gamma=stable('ComLAD'),
        max_stable_gamma_lad=stable('LAD'),
        transient_coeff=transient_coefficient(p, 'ComLAD'),
        leading_com_lad=leading_error_term(p, 'ComLAD'),
        leading_lad=leading_error_term(p, 'LAD'),
        baseline_error=baseline_error(p),
    )


def grid(values: Union[Sequence[float], dict]) -> List[float]:
    """
    Expand a list, or an inclusive ``{start, stop, step}`` range
    """
    if isinstance(values, dict):
        try:
            start, stop, step = float(values['start']), float(values['stop']), float(values['step'])
        except KeyError as error:
            raise InvalidArgument('range needs start, stop and step, missing {}'.format(error)) from None
        if step <= 0 or stop < start:
            raise InvalidArgument('range needs step > 0 and stop >= start')
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(value) for value in values]


def error_curve(p: TheoryParams, axis: str, values: Iterable[float], variant: str = 'ComLAD',
                term: str = 'leading') -> List[Tuple[str, float, float]]:
    """
    Error term along one parameter axis

    :param p: base parameter point
    :type p: TheoryParams
    :param axis: 'delta', 'd' or 'kappa'
    :type axis: str
    :param values: axis values
    :param variant: 'ComLAD' or 'LAD'
    :param term: 'leading' for the learning-rate free term, 'full' for eps;
        unavailable points are NaN
    :return: (param, value, error_term) rows
    """
    if axis not in CURVE_AXES:
        raise InvalidArgument('curve axis must be one of {}, got {!r}'.format(CURVE_AXES, axis))
    if term not in ('leading', 'full'):
        raise InvalidArgument('term must be leading or full, got {!r}'.format(term))
    _check_variant(variant)

    rows = []
    for value in values:
        value = int(value) if axis == 'd' else float(value)
        point = p.replace(**{axis: value})
        if term == 'leading':
            error = leading_error_term(point, variant)
        else:
            error = _error_term(point, variant, compute_constants(point))
            error = float('nan') if error is None else error
        rows.append((axis, value, error))
    return rows


def write_curve_csv(path: str, rows: Iterable[Tuple[str, float, float]]) -> None:
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(CURVE_HEADER)
        for param, value, error in rows:
            writer.writerow([param, repr(value), repr(float(error))])


def read_curve_csv(path: str) -> List[Tuple[str, float, float]]:
    with open(path, newline='') as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != CURVE_HEADER:
            raise InvalidArgument('{}: expected header {}, got {}'.format(path, CURVE_HEADER, header))
        return [(row[0], float(row[1]), float(row[2])) for row in reader if row]
