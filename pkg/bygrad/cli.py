"""
Command line entry point: ``bygrad train|theory|verify|plot``
"""
import argparse
import logging
import sys
from typing import List

from bygrad.bygrad import Bygrad
from bygrad.config import resolve_preset
from bygrad.exceptions import BygradError

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def _seed(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError('seed must be a 64-bit unsigned integer')
    return seed


def _jobs(value: str) -> int:
    jobs = int(value)
    if jobs == 0:
        raise argparse.ArgumentTypeError('jobs must be non-zero (negative counts from the CPU count)')
    return jobs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='bygrad',
        description='Byzantine-robust distributed training with cyclic gradient coding')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='warnings and errors only')

    commands = parser.add_subparsers(dest='command', required=True)
    for name, description in (('train', 'run a training sweep and write run CSVs plus a manifest'),
                              ('theory', 'evaluate the closed-form bounds and write curve CSVs'),
                              ('verify', 'run the identity suite')):
        command = commands.add_parser(name, help=description, description=description)
        command.add_argument('--config', help='YAML document, wins over --preset')
        command.add_argument('--preset', help='name of a document in cfg/')
        command.add_argument('--out', help='output directory')
        command.add_argument('--seed', type=_seed, help='replaces every seed of the document')
        if name == 'train':
            command.add_argument('--jobs', type=_jobs, default=1, help='worker processes')

    plot = commands.add_parser('plot', help='render manifests and curve CSVs',
                               description='render manifests and curve CSVs')
    plot.add_argument('paths', nargs='+', help='manifest.csv, curve_*.csv or a directory holding them')
    plot.add_argument('--out', help='image directory, defaults to next to each input')
    plot.add_argument('--log', action='store_true', help='logarithmic y-axis')
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def main(argv: List[str] = None) -> int:
    """
    Parse arguments, run one subcommand and return its exit code: 0 on
    success, 1 when an identity fails, 2 on an invalid configuration or a
    failed run
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    try:
        if args.command == 'plot':
            return Bygrad.plot(args.paths, args.out, log_scale=args.log)

        path = args.config
        if path is None and args.preset:
            path = str(resolve_preset(args.preset))
        bygrad = Bygrad.load(path, args.command, seed=args.seed, output=args.out,
                             jobs=getattr(args, 'jobs', 1))
        return bygrad.run(args.command)
    except BygradError as error:
        logger.error('%s', error)
        return 2


if __name__ == '__main__':
    sys.exit(main())
