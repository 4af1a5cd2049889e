"""
Static figures, drawn from the CSV outputs only
"""
import logging
from collections import OrderedDict
from pathlib import Path
from typing import List

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from bygrad.analysis.theory import read_curve_csv  # noqa: E402
from bygrad.exceptions import InvalidArgument  # noqa: E402
from bygrad.sim import RunRecord  # noqa: E402
from bygrad.utils import read_manifest  # noqa: E402

logger = logging.getLogger(__name__)


def setup_plotting(fontsize_labels=9, fontsize_ticks=8, fontsize_legend=8):
    plt.rcParams['font.family'] = 'serif'
    plt.rcParams['axes.labelsize'] = fontsize_labels
    plt.rcParams['xtick.labelsize'] = fontsize_ticks
    plt.rcParams['ytick.labelsize'] = fontsize_ticks
    plt.rcParams['legend.fontsize'] = fontsize_legend
    plt.rcParams['savefig.bbox'] = 'tight'


def plot_manifest(manifest_path, out_dir=None, log_scale: bool = False) -> List[Path]:
    """
    One loss-versus-iteration overlay per manifest, one curve per label
    (the median over the label's seeds)

    :param manifest_path: manifest written by ``bygrad train``
    :param out_dir: image directory, defaults to the manifest's
    :param log_scale: logarithmic loss axis
    :raises InvalidArgument: when a listed run file is missing
    :return: written image paths
    """
    manifest_path = Path(manifest_path)
    out_dir = Path(out_dir) if out_dir else manifest_path.parent
    rows = [row for row in read_manifest(manifest_path) if row['file']]
    if not rows:
        logger.warning('[PLOT] %s lists no runs, nothing to plot', manifest_path)
        return []

    curves = OrderedDict()
    for row in rows:
        path = manifest_path.parent / row['file']
        if not path.is_file():
            raise InvalidArgument('missing run file {}'.format(path))
        record = RunRecord.from_csv(str(path))
        curves.setdefault(row['label'], []).append(record)

    setup_plotting()
    figure, axis = plt.subplots(figsize=(6, 4))
    for label, records in curves.items():
        length = min(len(record) for record in records)
        losses = np.median(np.stack([record.loss[:length] for record in records]), axis=0)
        axis.plot(records[0].t[:length], losses, label=label, linewidth=1.2)

    if log_scale:
        axis.set_yscale('log')
    axis.set_xlabel('iteration')
    axis.set_ylabel('training loss')
    axis.legend()
    axis.grid(alpha=0.3)

    out_dir.mkdir(parents=True, exist_ok=True)
    image = out_dir / '{}_loss.png'.format(manifest_path.stem)
    figure.savefig(image, dpi=150)
    plt.close(figure)
    logger.info('[PLOT] %s', image)
    return [image]


def plot_curve(curve_path, out_dir=None, log_scale: bool = True) -> Path:
    """
    Error term against the swept parameter of a ``curve_*.csv`` file
    """
    curve_path = Path(curve_path)
    rows = read_curve_csv(str(curve_path))
    if not rows:
        raise InvalidArgument('{} has no rows'.format(curve_path))

    setup_plotting()
    figure, axis = plt.subplots(figsize=(5, 3.5))
    values = np.array([row[1] for row in rows])
    errors = np.array([row[2] for row in rows])
    axis.plot(values, errors, marker='.', linewidth=1.0)
    if log_scale and np.all(errors[np.isfinite(errors)] > 0):
        axis.set_yscale('log')
    axis.set_xlabel(rows[0][0])
    axis.set_ylabel('error term')
    axis.grid(alpha=0.3)

    out_dir = Path(out_dir) if out_dir else curve_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    image = out_dir / '{}.png'.format(curve_path.stem)
    figure.savefig(image, dpi=150)
    plt.close(figure)
    logger.info('[PLOT] %s', image)
    return image
