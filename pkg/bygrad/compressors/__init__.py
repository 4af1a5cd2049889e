"""
Unbiased compressors

Selected by config string: ``identity``, ``sparsify:<Q_hat>``,
``stoch_quant``; or by a mapping ``{type: dotted.path.Class, ...}``.
"""
import importlib
from typing import Any, Dict, Union

from bygrad.compressors.compressor import Compressor, Identity
from bygrad.compressors.sparsification import RandomSparsification
from bygrad.compressors.quantization import StochasticQuantization
from bygrad.exceptions import InvalidArgument, Unsupported

__all__ = [
    'Compressor',
    'Identity',
    'RandomSparsification',
    'StochasticQuantization',
    'from_spec',
    'delta_of',
]


def from_spec(spec: Union[str, Dict[str, Any]], dim: int) -> Compressor:
    """
    Build a compressor from its configuration

    :param spec: config string or ``{type: ..., **kwargs}`` mapping
    :param dim: vector dimension Q
    :type dim: int
    :raises Unsupported: unknown kind
    :rtype: Compressor
    """
    if isinstance(spec, dict):
        spec = dict(spec)
        module_name, class_name = spec.pop('type').rsplit('.', maxsplit=1)
        compressor_cls = getattr(importlib.import_module(module_name), class_name)
        return compressor_cls(dim, **spec)

    name, _, argument = str(spec).strip().partition(':')

    if name in ('identity', 'none'):
        return Identity(dim)

    if name == 'sparsify':
        try:
            keep = int(argument)
        except ValueError:
            raise InvalidArgument('sparsify needs an integer Q_hat, got {!r}'.format(spec)) from None
        return RandomSparsification(dim, keep)

    if name == 'stoch_quant':
        return StochasticQuantization(dim)

    raise Unsupported('unknown compressor {!r}'.format(spec))


def delta_of(compressor: Compressor) -> float:
    """
    The delta constant of a compressor
    """
    if not isinstance(compressor, Compressor):
        raise Unsupported('not a compressor: {!r}'.format(compressor))
    return compressor.delta
