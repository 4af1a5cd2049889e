"""
Configuration documents

YAML files are read with ``yaml.SafeLoader`` through its node tree so that
every key keeps its line; unknown or missing keys are reported as
``path:line: message``.
"""
from __future__ import annotations

import dataclasses
import itertools
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from bygrad.analysis.theory import CURVE_AXES, VARIANTS, TheoryParams, grid
from bygrad.exceptions import BygradError, ConfigError
from bygrad.sim import CODED_METHODS, ExperimentConfig

DEFAULT_OUTPUT = 'bygrad_out'
OUTPUT_ENV = 'BYGRAD_OUT'
PRESET_DIRS = [Path.cwd() / 'cfg', Path(__file__).resolve().parent.parent / 'cfg']

TRAIN_KEYS = {'name', 'experiment', 'runs', 'sweep', 'output'}
THEORY_KEYS = {'name', 'params', 'curves', 'output'}
VERIFY_KEYS = {'name', 'suite', 'output'}
SWEEP_AXES = ('method', 'd', 'sigma_H', 'compressor', 'seed')
CURVE_KEYS = {'axis', 'values', 'variant', 'term', 'name'}

_EXPERIMENT_FIELDS = {item.name: item for item in dataclasses.fields(ExperimentConfig)}
_THEORY_FIELDS = {item.name for item in dataclasses.fields(TheoryParams)}
_INTS = {'N', 'H', 'd', 'Q', 'T', 'samples_per_subset', 'byzantine', 'seed', 'log_every'}
_FLOATS = {'gamma', 'sigma_H', 'feature_variance', 'declared_kappa', 'max_norm', 'divergence_limit',
           'kappa', 'beta', 'delta', 'L', 'gamma0', 'F0_minus_Fstar'}


class Document:
    """
    A parsed YAML document with the line of every mapping and key

    :param data: plain Python content
    :param lines: 1-based line per key path, ``()`` is the root
    :param path: file the document came from
    """

    def __init__(self, data: Any, lines: Dict[Tuple, int], path: str = None) -> None:
        self.data = data
        self.lines = lines
        self.path = path

    def line(self, *keys) -> Optional[int]:
        keys = tuple(keys)
        while keys not in self.lines and keys:
            keys = keys[:-1]
        return self.lines.get(keys)

    def error(self, message: str, *keys) -> ConfigError:
        return ConfigError(message, self.path, self.line(*keys))

    @staticmethod
    def parse(text: str, path: str = None) -> Document:
        try:
            node = yaml.compose(text, Loader=yaml.SafeLoader)
        except yaml.YAMLError as error:
            mark = getattr(error, 'problem_mark', None)
            raise ConfigError('invalid YAML: {}'.format(getattr(error, 'problem', error)), path,
                              mark.line + 1 if mark else None) from None
        lines = {}
        try:
            data = _construct(node, (), lines, yaml.SafeLoader('')) if node is not None else {}
        except ConfigError as error:
            raise ConfigError(error.message, path, error.line) from None
        return Document(data, lines, path)

    @staticmethod
    def load(path: str) -> Document:
        try:
            with open(path, 'r') as handle:
                return Document.parse(handle.read(), str(path))
        except OSError as error:
            raise ConfigError('cannot read config: {}'.format(error.strerror), str(path)) from None


def _construct(node: yaml.Node, keys: Tuple, lines: Dict[Tuple, int], loader: yaml.SafeLoader) -> Any:
    lines[keys] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        content = {}
        for key_node, value_node in node.value:
            if not isinstance(key_node, yaml.ScalarNode):
                raise ConfigError('mapping keys must be scalars', line=key_node.start_mark.line + 1)
            key = key_node.value
            content[key] = _construct(value_node, keys + (key,), lines, loader)
            lines[keys + (key,)] = key_node.start_mark.line + 1
        return content
    if isinstance(node, yaml.SequenceNode):
        return [_construct(item, keys + (index,), lines, loader) for index, item in enumerate(node.value)]
    return loader.construct_object(node, deep=True)


def _require_mapping(document: Document, value, *keys) -> dict:
    if not isinstance(value, dict):
        raise document.error('expected a mapping', *keys)
    return value


def _reject_unknown(document: Document, mapping: dict, allowed, *keys) -> None:
    for key in mapping:
        if key not in allowed:
            raise document.error('unknown key {!r}, expected one of {}'.format(key, ', '.join(sorted(allowed))),
                                 *keys, key)


def _coerce(document: Document, key: str, value, *keys):
    if value is None:
        return None
    try:
        if key in _INTS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if key in _FLOATS:
            return float(value)
    except (TypeError, ValueError):
        raise document.error('{} must be a number, got {!r}'.format(key, value), *keys) from None
    return value


def _experiment_fields(document: Document, mapping: dict, *keys) -> dict:
    mapping = _require_mapping(document, mapping, *keys)
    _reject_unknown(document, mapping, _EXPERIMENT_FIELDS, *keys)
    return {key: _coerce(document, key, value, *keys, key) for key, value in mapping.items()}


@dataclass
class TrainPlan:
    name: str
    configs: List[ExperimentConfig]
    output: Optional[str] = None


@dataclass
class CurveSpec:
    axis: str
    values: List[float]
    variant: str = 'ComLAD'
    term: str = 'leading'
    name: str = ''


@dataclass
class TheoryPlan:
    name: str
    params: TheoryParams
    curves: List[CurveSpec] = field(default_factory=list)
    output: Optional[str] = None


@dataclass
class SuiteConfig:
    """
    Knobs of the identity suite

    :param max_n: largest N of the exact encoder enumeration
    :param lemma_n: largest N of the exact coverage-deviation enumeration
    :param models: random model points per encoder identity
    :param trials: kappa-estimator trials
    :param samples: Monte Carlo draws of the compressor and lemma checks
    :param mutation: inject a known-wrong formula ('lemma1') as a negative control
    """
    max_n: int = 7
    lemma_n: int = 12
    models: int = 5
    trials: int = 2000
    samples: int = 100000
    seed: int = 0
    mutation: Optional[str] = None


@dataclass
class VerifyPlan:
    name: str
    suite: SuiteConfig
    output: Optional[str] = None


def _name(document: Document) -> str:
    name = document.data.get('name')
    if name is None and document.path:
        return Path(document.path).stem
    return str(name or 'bygrad')


def _root(document: Document, allowed) -> dict:
    data = _require_mapping(document, document.data)
    _reject_unknown(document, data, allowed)
    return data


def _label_value(value) -> str:
    return '{:g}'.format(value) if isinstance(value, (int, float)) else str(value)


def parse_train(document: Document, seed: int = None) -> TrainPlan:
    """
    Expand ``experiment`` + ``runs`` x ``sweep`` into run configs

    Every run inherits ``experiment`` and overrides it; a sweep axis varies
    a key only for runs that do not set it (and ``d`` only for coded
    methods). The ``compressor`` axis sweeps delta through compressor
    specs. ``seed`` replaces every seed.

    :raises ConfigError: on unknown keys or invalid values
    :rtype: TrainPlan
    """
    data = _root(document, TRAIN_KEYS)
    base = _experiment_fields(document, data.get('experiment') or {}, 'experiment')

    runs = data.get('runs')
    if runs is None:
        runs = [{}]
    if not isinstance(runs, list):
        raise document.error('runs must be a list', 'runs')

    axes = _require_mapping(document, data.get('sweep') or {}, 'sweep')
    _reject_unknown(document, axes, SWEEP_AXES, 'sweep')
    for axis, values in axes.items():
        if not isinstance(values, list):
            raise document.error('sweep axis {} must be a list'.format(axis), 'sweep', axis)
        axes[axis] = [_coerce(document, axis, value, 'sweep', axis) for value in values]
    if seed is not None:
        axes['seed'] = [seed]
        base['seed'] = seed

    configs = []
    for index, run in enumerate(runs):
        overrides = _experiment_fields(document, run, 'runs', index)
        fields = dict(base, **overrides)
        if seed is not None:
            fields['seed'] = seed

        swept = [axis for axis in SWEEP_AXES if axis in axes and axis not in overrides]
        seen = set()
        for values in itertools.product(*(axes[axis] for axis in swept)):
            point = dict(zip(swept, values))
            method = point.get('method', fields.get('method', 'LAD'))
            if method not in CODED_METHODS:
                point.pop('d', None)
            key = repr(sorted(point.items()))
            if key in seen:
                continue
            seen.add(key)

            label = fields.get('label') or method
            if fields.get('label') and 'method' in point:
                label = '{} {}'.format(label, method)
            suffix = ' '.join('{}={}'.format(axis, _label_value(value)) for axis, value in point.items()
                              if axis not in ('seed', 'method'))
            try:
                configs.append(ExperimentConfig(**dict(fields, **point, label=' '.join(filter(None, [label, suffix])))))
            except (BygradError, TypeError) as error:
                raise document.error(str(error), 'runs', index) from None

    return TrainPlan(_name(document), configs, data.get('output'))


def parse_theory(document: Document) -> TheoryPlan:
    """
    Read ``params`` and the list of ``curves``
    """
    data = _root(document, THEORY_KEYS)
    if 'params' not in data:
        raise document.error('missing required key params')
    params = _require_mapping(document, data['params'], 'params')
    _reject_unknown(document, params, _THEORY_FIELDS, 'params')
    try:
        theory = TheoryParams(**{key: _coerce(document, key, value, 'params', key) for key, value in params.items()})
    except (BygradError, TypeError) as error:
        raise document.error(str(error), 'params') from None

    curves = []
    for index, curve in enumerate(data.get('curves') or []):
        curve = _require_mapping(document, curve, 'curves', index)
        _reject_unknown(document, curve, CURVE_KEYS, 'curves', index)
        for key in ('axis', 'values'):
            if key not in curve:
                raise document.error('missing required key {}'.format(key), 'curves', index)
        if curve['axis'] not in CURVE_AXES:
            raise document.error('axis must be one of {}'.format(', '.join(CURVE_AXES)), 'curves', index, 'axis')
        variant = curve.get('variant', 'ComLAD')
        if variant not in VARIANTS:
            raise document.error('variant must be one of {}'.format(', '.join(VARIANTS)), 'curves', index, 'variant')
        try:
            values = grid(curve['values'])
        except (BygradError, TypeError, ValueError) as error:
            raise document.error('bad values: {}'.format(error), 'curves', index, 'values') from None
        curves.append(CurveSpec(curve['axis'], values, variant, curve.get('term', 'leading'),
                                str(curve.get('name') or '{}_{}'.format(curve['axis'], variant))))

    return TheoryPlan(_name(document), theory, curves, data.get('output'))


def parse_verify(document: Document, seed: int = None) -> VerifyPlan:
    """
    Read the ``suite`` mapping; every key is optional
    """
    data = _root(document, VERIFY_KEYS)
    suite = _require_mapping(document, data.get('suite') or {}, 'suite')
    allowed = {item.name for item in dataclasses.fields(SuiteConfig)}
    _reject_unknown(document, suite, allowed, 'suite')
    ints = {'max_n', 'lemma_n', 'models', 'trials', 'samples', 'seed'}
    content = {}
    for key, value in suite.items():
        if key in ints:
            if not isinstance(value, int) or isinstance(value, bool):
                raise document.error('{} must be an integer'.format(key), 'suite', key)
        content[key] = value
    if seed is not None:
        content['seed'] = seed
    if content.get('mutation') not in (None, 'lemma1'):
        raise document.error('unknown mutation {!r}'.format(content['mutation']), 'suite', 'mutation')
    return VerifyPlan(_name(document), SuiteConfig(**content), data.get('output'))


def resolve_preset(name: str) -> Path:
    """
    Path of ``cfg/<name>.yaml`` in the working directory or next to the package
    """
    for directory in PRESET_DIRS:
        candidate = directory / '{}.yaml'.format(name)
        if candidate.is_file():
            return candidate
    raise ConfigError('unknown preset {!r} (searched {})'.format(name, ', '.join(str(d) for d in PRESET_DIRS)))


def output_dir(cli_out: str = None, document_out: str = None) -> Path:
    """
    ``--out`` > the document's ``output`` > ``$BYGRAD_OUT`` > ``./bygrad_out``
    """
    return Path(cli_out or document_out or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)
