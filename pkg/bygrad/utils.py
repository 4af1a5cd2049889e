"""
Utility functions used by the bygrad orchestrator: run files, the
manifest and the final-loss summary
"""
import csv
import logging
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from bygrad.exceptions import InvalidArgument
from bygrad.sim import RunRecord

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.csv'
MANIFEST_HEADER = ['file', 'label', 'method', 'aggregator', 'compressor', 'attack', 'd', 'seed',
                   'sigma_H', 'config_hash', 'status', 'diverged', 'final_loss']


def run_filename(record: RunRecord) -> str:
    return 'run_{}.csv'.format(record.config_hash)


def _component(spec) -> str:
    if isinstance(spec, dict):
        return str(spec.get('type', spec))
    return str(spec)


def write_runs(directory: Path, records: Sequence[RunRecord]) -> Path:
    """
    Write one CSV per successful run plus the manifest; returns the manifest path
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    rows = []
    for record in records:
        filename = ''
        if record.ok:
            filename = run_filename(record)
            record.to_csv(str(directory / filename))

        config = record.config.resolved() if record.config is not None else None
        rows.append([
            filename,
            record.label,
            record.method,
            _component(config.aggregator) if config else '',
            _component(config.compressor) if config else '',
            _component(config.attack) if config else '',
            config.d if config else '',
            config.seed if config else '',
            config.sigma_H if config else '',
            record.config_hash,
            record.status,
            int(record.diverged),
            repr(record.final_loss),
        ])

    manifest = directory / MANIFEST
    with open(manifest, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(MANIFEST_HEADER)
        writer.writerows(rows)
    logger.info('[OUTPUT] %d runs written to %s', len(rows), directory)
    return manifest


def read_manifest(path) -> List[Dict[str, str]]:
    """
    Manifest rows as dicts keyed by the header
    """
    with open(path, newline='') as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != MANIFEST_HEADER:
            raise InvalidArgument('{}: expected manifest header {}, got {}'.format(
                path, MANIFEST_HEADER, reader.fieldnames))
        return list(reader)


def summarize(records: Sequence[RunRecord]) -> List[Dict[str, object]]:
    """
    Median final loss per label over its seeds, in first-seen label order
    """
    groups: Dict[str, List[RunRecord]] = {}
    for record in records:
        groups.setdefault(record.label, []).append(record)

    summary = []
    for label, group in groups.items():
        finished = [record.final_loss for record in group if record.ok]
        summary.append({
            'label': label,
            'method': group[0].method,
            'runs': len(group),
            'failed': sum(not record.ok for record in group),
            'diverged': sum(record.diverged for record in group),
            'median_final_loss': float(np.median(finished)) if finished else float('nan'),
        })
    return summary


def format_table(summary: Sequence[Dict[str, object]]) -> str:
    if not summary:
        return '(no runs)'
    width = max(len('label'), max(len(str(row['label'])) for row in summary))
    lines = ['{:<{w}}  {:<18}  {:>4}  {:>6}  {:>8}  {:>16}'.format(
        'label', 'method', 'runs', 'failed', 'diverged', 'median final', w=width)]
    for row in summary:
        lines.append('{:<{w}}  {:<18}  {:>4}  {:>6}  {:>8}  {:>16.6g}'.format(
            row['label'], row['method'], row['runs'], row['failed'], row['diverged'],
            row['median_final_loss'], w=width))
    return '\n'.join(lines)
