"""
Byzantine behaviours and schedules

Attack config strings: ``signflip:<c>``, ``none``, ``const:<value>``,
``gauss:<scale>``, ``opposite[:<scale>]``; or a mapping
``{type: dotted.path.Class, ...}``. Schedule strings: ``fixed``,
``fixed:<1-based devices>`` (e.g. ``fixed:1,2,3``), ``resample``.
"""
import importlib
from typing import Any, Dict, Union

from bygrad.attacks.policy import (
    DEFAULT_MAX_NORM,
    AttackContext,
    AttackPolicy,
    ConstantVector,
    GaussianNoise,
    NoAttack,
    OmniscientOpposite,
    SignFlip,
    byzantine_payload,
)
from bygrad.attacks.schedule import ByzantineSchedule, select_byzantine_set
from bygrad.exceptions import InvalidArgument, Unsupported

__all__ = [
    'AttackContext',
    'AttackPolicy',
    'NoAttack',
    'SignFlip',
    'ConstantVector',
    'GaussianNoise',
    'OmniscientOpposite',
    'ByzantineSchedule',
    'byzantine_payload',
    'select_byzantine_set',
    'from_spec',
    'schedule_from_spec',
]

_KINDS = {
    'signflip': (SignFlip, -2.0),
    'const': (ConstantVector, 0.0),
    'gauss': (GaussianNoise, 1.0),
    'opposite': (OmniscientOpposite, 1.0),
}


def from_spec(spec: Union[str, Dict[str, Any]], applies_after_compression: bool = False,
              max_norm: float = DEFAULT_MAX_NORM) -> AttackPolicy:
    """
    Build an attack policy from its configuration. Every payload is clipped
    to ``max_norm``.

    :raises Unsupported: unknown kind
    :rtype: AttackPolicy
    """
    if isinstance(spec, dict):
        spec = dict(spec)
        module_name, class_name = spec.pop('type').rsplit('.', maxsplit=1)
        policy_cls = getattr(importlib.import_module(module_name), class_name)
        spec.setdefault('applies_after_compression', applies_after_compression)
        spec.setdefault('max_norm', max_norm)
        return policy_cls(**spec)

    name, _, argument = str(spec).strip().partition(':')

    if name == 'none':
        return NoAttack(applies_after_compression=applies_after_compression, max_norm=max_norm)

    if name not in _KINDS:
        raise Unsupported('unknown attack {!r}'.format(spec))

    policy_cls, default = _KINDS[name]
    try:
        value = float(argument) if argument else default
    except ValueError:
        raise InvalidArgument('{} needs a numeric argument, got {!r}'.format(name, spec)) from None
    return policy_cls(value, applies_after_compression=applies_after_compression, max_norm=max_norm)


def schedule_from_spec(spec: str, N: int, H: int, count: int = None) -> ByzantineSchedule:
    """
    Build a schedule; device lists in the string are 1-based
    """
    mode, _, argument = str(spec).strip().partition(':')
    if mode == 'fixed' and argument:
        try:
            members = [int(item) - 1 for item in argument.split(',') if item.strip()]
        except ValueError:
            raise InvalidArgument('fixed schedule needs comma-separated devices, got {!r}'.format(spec)) from None
        return ByzantineSchedule(N, H, 'fixed', count, members)
    if mode in ('fixed', 'resample'):
        return ByzantineSchedule(N, H, mode, count)
    raise Unsupported('unknown schedule {!r}'.format(spec))
