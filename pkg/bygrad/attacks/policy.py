"""
Byzantine payload policies
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from bygrad.core import RngStream, as_vector
from bygrad.exceptions import InvalidArgument

logger = logging.getLogger(__name__)

DEFAULT_MAX_NORM = 1e12


@dataclass(frozen=True)
class AttackContext:
    """
    What a Byzantine device may see when crafting its payload

    :param t: iteration index
    :param device: 0-based device index
    :param honest_mean: mean of the honest messages of the iteration, only
        used by omniscient policies
    """
    t: int = 0
    device: int = 0
    honest_mean: np.ndarray = None


class AttackPolicy:
    """
    Replaces the message a Byzantine device would have sent.

    :param applies_after_compression: attack the compressed honest message
        instead of compressing the crafted payload (Com-LAD only)
    :type applies_after_compression: bool
    :param max_norm: payloads are clipped to this norm
    :type max_norm: float
    """

    kind = 'abstract'

    def __init__(self, applies_after_compression: bool = False, max_norm: float = DEFAULT_MAX_NORM) -> None:
        if not max_norm > 0:
            raise InvalidArgument('max_norm must be positive, got {}'.format(max_norm))
        self.applies_after_compression = bool(applies_after_compression)
        self.max_norm = float(max_norm)

    def _craft(self, honest_msg: np.ndarray, context: AttackContext, rng: RngStream) -> np.ndarray:
        raise NotImplementedError()

    def craft(self, honest_msg: np.ndarray, context: AttackContext = None,
              rng: RngStream = None) -> Tuple[np.ndarray, bool]:
        """
        :param honest_msg: what the device would send if honest
        :type honest_msg: np.ndarray
        :return: the payload and whether it had to be clipped
        :rtype: Tuple[np.ndarray, bool]
        """
        honest_msg = as_vector(honest_msg)
        payload = np.asarray(self._craft(honest_msg, context or AttackContext(), rng), dtype=np.float64)
        payload = np.broadcast_to(payload, honest_msg.shape).copy()

        clipped = False
        if not np.all(np.isfinite(payload)):
            payload = np.nan_to_num(payload, nan=0.0, posinf=self.max_norm, neginf=-self.max_norm)
            clipped = True
        norm = np.sqrt(np.sum(payload ** 2))
        if norm > self.max_norm:
            payload *= self.max_norm / norm
            clipped = True
        return payload, clipped

    @property
    def spec(self) -> str:
        return self.kind

    def __repr__(self) -> str:
        return '{}({!r})'.format(type(self).__name__, self.spec)


class NoAttack(AttackPolicy):
    """
    Byzantine devices behave honestly
    """

    kind = 'none'

    def _craft(self, honest_msg, context, rng):
        return honest_msg


class SignFlip(AttackPolicy):
    """
    Send c times the honest message
    """

    kind = 'signflip'

    def __init__(self, coefficient: float = -2.0, **kwargs) -> None:
        super().__init__(**kwargs)
        self.coefficient = float(coefficient)

    def _craft(self, honest_msg, context, rng):
        return self.coefficient * honest_msg

    @property
    def spec(self) -> str:
        return 'signflip:{:g}'.format(self.coefficient)


class ConstantVector(AttackPolicy):
    """
    Send a fixed vector (a scalar fills every coordinate)
    """

    kind = 'const'

    def __init__(self, value=0.0, **kwargs) -> None:
        super().__init__(**kwargs)
        self.value = np.asarray(value, dtype=np.float64)

    def _craft(self, honest_msg, context, rng):
        if self.value.ndim and self.value.shape != honest_msg.shape:
            raise InvalidArgument('constant payload has shape {}, messages {}'.format(
                self.value.shape, honest_msg.shape))
        return self.value

    @property
    def spec(self) -> str:
        return 'const:{:g}'.format(float(self.value)) if self.value.ndim == 0 else 'const'


class GaussianNoise(AttackPolicy):
    """
    Send pure noise N(0, scale^2 I), ignoring the honest message
    """

    kind = 'gauss'

    def __init__(self, scale: float = 1.0, **kwargs) -> None:
        super().__init__(**kwargs)
        if scale < 0:
            raise InvalidArgument('noise scale must be >= 0, got {}'.format(scale))
        self.scale = float(scale)

    def _craft(self, honest_msg, context, rng):
        if rng is None:
            raise InvalidArgument('gaussian attack needs a random stream')
        return rng.generator().normal(0.0, self.scale, size=honest_msg.shape)

    @property
    def spec(self) -> str:
        return 'gauss:{:g}'.format(self.scale)


class OmniscientOpposite(AttackPolicy):
    """
    Send -scale times the mean of the honest messages of the iteration
    """

    kind = 'opposite'

    def __init__(self, scale: float = 1.0, **kwargs) -> None:
        super().__init__(**kwargs)
        self.scale = float(scale)

    def _craft(self, honest_msg, context, rng):
        if context.honest_mean is None:
            raise InvalidArgument('omniscient attack needs the honest mean in its context')
        return -self.scale * np.asarray(context.honest_mean)

    @property
    def spec(self) -> str:
        return 'opposite:{:g}'.format(self.scale)


def byzantine_payload(policy: AttackPolicy, honest_msg: np.ndarray, context: AttackContext = None,
                      rng: RngStream = None) -> np.ndarray:
    """
    The message a Byzantine device sends in place of ``honest_msg``
    """
    payload, clipped = policy.craft(honest_msg, context, rng)
    if clipped:
        logger.warning('[ATTACK] payload of device %d at t=%d clipped to norm %g',
                       (context or AttackContext()).device + 1, (context or AttackContext()).t, policy.max_norm)
    return payload
