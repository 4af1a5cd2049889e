"""
Robust aggregation rules

Selected by config string: ``mean``, ``cwtm:<alpha>``, ``tgn:<tau>``,
``nnm+<inner>:f=<f>`` (e.g. ``nnm+cwtm:0.1:f=20``); or by a mapping
``{type: dotted.path.Class, ...}``.
"""
import importlib
from typing import Any, Dict, Union

from bygrad.aggregators.aggregator import Aggregator, Mean
from bygrad.aggregators.cwtm import CWTM
from bygrad.aggregators.nnm import NNM, mix
from bygrad.aggregators.tgn import TGN
from bygrad.aggregators.kappa import KappaEstimate, estimate_kappa, robustness_ratio
from bygrad.exceptions import InvalidArgument, Unsupported

__all__ = [
    'Aggregator',
    'Mean',
    'CWTM',
    'NNM',
    'TGN',
    'mix',
    'KappaEstimate',
    'estimate_kappa',
    'robustness_ratio',
    'from_spec',
]


def _fraction(name: str, argument: str, default: float) -> float:
    if not argument:
        return default
    try:
        return float(argument)
    except ValueError:
        raise InvalidArgument('{} needs a numeric fraction, got {!r}'.format(name, argument)) from None


def from_spec(spec: Union[str, Dict[str, Any]], byzantine: int = None,
              declared_kappa: float = None) -> Aggregator:
    """
    Build an aggregator from its configuration

    :param spec: config string or ``{type: ..., **kwargs}`` mapping
    :param byzantine: Byzantine budget used as NNM's f when the string omits it
    :type byzantine: int, optional
    :param declared_kappa: kappa attached to the rule
    :type declared_kappa: float, optional
    :raises Unsupported: unknown kind
    :rtype: Aggregator
    """
    if isinstance(spec, dict):
        spec = dict(spec)
        module_name, class_name = spec.pop('type').rsplit('.', maxsplit=1)
        aggregator_cls = getattr(importlib.import_module(module_name), class_name)
        spec.setdefault('declared_kappa', declared_kappa)
        return aggregator_cls(**spec)

    spec = str(spec).strip()

    if spec.startswith('nnm+'):
        parts = spec[len('nnm+'):].split(':')
        budget = [part for part in parts if part.startswith('f=')]
        rest = [part for part in parts if not part.startswith('f=')]
        if budget:
            try:
                f = int(budget[-1][2:])
            except ValueError:
                raise InvalidArgument('NNM budget must be an integer, got {!r}'.format(spec)) from None
        elif byzantine is not None:
            f = byzantine
        else:
            raise InvalidArgument('{!r} needs f=<budget> or a known Byzantine count'.format(spec))
        return NNM(from_spec(':'.join(rest), byzantine), f, declared_kappa=declared_kappa)

    name, _, argument = spec.partition(':')

    if name in ('mean', 'va'):
        return Mean(declared_kappa)

    if name == 'cwtm':
        return CWTM(_fraction(name, argument, 0.1), declared_kappa)

    if name == 'tgn':
        return TGN(_fraction(name, argument, 0.2), declared_kappa)

    raise Unsupported('unknown aggregator {!r}'.format(spec))
