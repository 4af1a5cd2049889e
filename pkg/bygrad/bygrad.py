"""
Bygrad Class
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional

import yaml

from bygrad.analysis import theory
from bygrad.config import (Document, TheoryPlan, TrainPlan, VerifyPlan, output_dir, parse_theory, parse_train,
                           parse_verify)
from bygrad.exceptions import InvalidArgument
from bygrad.plotting import plot_curve, plot_manifest
from bygrad.sim import sweep
from bygrad.timer import Timer
from bygrad.utils import MANIFEST, format_table, summarize, write_runs
from bygrad.verify import run_suite

logger = logging.getLogger(__name__)

COMMANDS = ('train', 'theory', 'verify')


class Bygrad:
    """
    The Bygrad orchestrator. Holds the plan of one subcommand and writes its
    outputs below ``output``.

    :param name: plan name, used for the output sub-directory of training runs
    :type name: str
    :param output: root output directory
    :type output: Path
    :param train: training sweep, defaults to None
    :type train: TrainPlan, optional
    :param theory: closed-form evaluation, defaults to None
    :type theory: TheoryPlan, optional
    :param verify: identity suite, defaults to None
    :type verify: VerifyPlan, optional
    :param jobs: worker processes of a training sweep, defaults to 1
    :type jobs: int, optional
    """

    def __init__(
            self,
            name: str = 'bygrad',
            output: Path = None,
            train: TrainPlan = None,
            theory: TheoryPlan = None,
            verify: VerifyPlan = None,
            jobs: int = 1) -> None:

        self.name = name
        self.output = Path(output) if output else output_dir()
        self.train_plan = train
        self.theory_plan = theory
        self.verify_plan = verify
        self.jobs = jobs

        logger.info('[INIT] %s -> %s', self.name, self.output)

    def train(self) -> int:
        """
        Run the sweep, write one CSV per run plus the manifest and print the
        final-loss summary

        :return: 0, or 2 when a run of the sweep failed
        :rtype: int
        """
        plan = self._require(self.train_plan, 'train')
        if not plan.configs:
            logger.warning('[TRAIN] %s has an empty sweep, nothing to run', plan.name)
            return 0

        logger.info('[TRAIN] %s: %d runs on %d jobs', plan.name, len(plan.configs), self.jobs)
        with Timer('sweep {}'.format(plan.name)):
            records = sweep(plan.configs, jobs=self.jobs)

        manifest = write_runs(self.output / plan.name, records)
        print(format_table(summarize(records)))
        print('manifest: {}'.format(manifest))

        failed = [record for record in records if record.status == 'failed']
        for record in failed:
            logger.error('[TRAIN] %s failed: %s', record.label, record.error)
        return 2 if failed else 0

    def theory(self) -> int:
        """
        Write the constants, feasibility, thresholds and stable learning rates
        of the plan's parameter point to ``theory_<name>_<hash>.yaml`` and every
        curve to ``curve_<curve>_<hash>.csv``, the hash keyed on the parameters

        :return: 0, also for infeasible parameters
        :rtype: int
        """
        plan = self._require(self.theory_plan, 'theory')
        self.output.mkdir(parents=True, exist_ok=True)

        report = theory.bound_report(plan.params)
        if not report.feasible:
            logger.warning('[THEORY] %s: Com-LAD feasibility condition fails at %s', plan.name, plan.params)
        if not report.feasible_lad:
            logger.warning('[THEORY] %s: LAD feasibility condition fails at %s', plan.name, plan.params)

        digest = plan.params.params_hash
        content = report.as_dict()
        content['params_hash'] = digest
        path = self.output / 'theory_{}_{}.yaml'.format(plan.name, digest)
        with open(path, 'w') as handle:
            yaml.safe_dump(content, handle, sort_keys=False)

        print('d threshold: {}'.format(content['d_threshold']))
        print('max stable gamma (Com-LAD): {}'.format(report.max_stable_gamma))
        print('max stable gamma (LAD): {}'.format(report.max_stable_gamma_lad))
        print('report: {}'.format(path))

        for curve in plan.curves:
            rows = theory.error_curve(plan.params, curve.axis, curve.values, curve.variant, curve.term)
            curve_path = self.output / 'curve_{}_{}.csv'.format(curve.name, digest)
            theory.write_curve_csv(str(curve_path), rows)
            logger.info('[THEORY] %d points of %s written to %s', len(rows), curve.name, curve_path)
        return 0

    def verify(self) -> int:
        """
        Run the identity suite and write ``verify_<name>.yaml``

        :return: 0 when every identity holds, 1 otherwise
        :rtype: int
        """
        plan = self._require(self.verify_plan, 'verify')
        report = run_suite(plan.suite)

        self.output.mkdir(parents=True, exist_ok=True)
        path = self.output / 'verify_{}.yaml'.format(plan.name)
        with open(path, 'w') as handle:
            yaml.safe_dump(report.as_dict(), handle, sort_keys=False)

        for result in report.results:
            print('{:<24} {:<4} {:.3g}'.format(result.name, 'ok' if result.passed else 'FAIL', result.max_error))
        if not report.passed:
            print('failing identities: {}'.format(', '.join(report.failures)))
        print('report: {}'.format(path))
        return 0 if report.passed else 1

    @staticmethod
    def plot(paths: List[str], out: str = None, log_scale: bool = False) -> int:
        """
        Render manifests and ``curve_*.csv`` files. A directory stands for its
        manifest and curve files.

        :raises InvalidArgument: on a missing path
        """
        targets = []
        for path in (Path(item) for item in paths):
            if path.is_dir():
                if (path / MANIFEST).is_file():
                    targets.append(path / MANIFEST)
                targets.extend(sorted(path.glob('curve_*.csv')))
            elif path.is_file():
                targets.append(path)
            else:
                raise InvalidArgument('no such file or directory: {}'.format(path))

        if not targets:
            logger.warning('[PLOT] nothing to plot in %s', ', '.join(paths))
        for target in targets:
            if target.name.startswith('curve_'):
                plot_curve(target, out, log_scale=log_scale)
            else:
                plot_manifest(target, out, log_scale=log_scale)
        return 0

    def run(self, command: str) -> int:
        if command not in COMMANDS:
            raise InvalidArgument('unknown command {!r}'.format(command))
        return getattr(self, command)()

    @staticmethod
    def _require(plan, command: str):
        if plan is None:
            raise InvalidArgument('no {} plan loaded'.format(command))
        return plan

    @staticmethod
    def load(path: Optional[str], command: str, seed: int = None, output: str = None, jobs: int = 1) -> Bygrad:
        """
        Generates a Bygrad instance for one subcommand from the configuration
        file at path. ``verify`` runs the default suite without a file.

        :param path: The path to the configuration file
        :type path: str
        :param command: one of train, theory, verify
        :type command: str
        :param seed: replaces every seed of the document
        :type seed: int, optional
        :param output: output directory given on the command line
        :type output: str, optional
        :raises ConfigError: on an invalid document
        :return: A Bygrad instance
        :rtype: Bygrad
        """
        if command not in COMMANDS:
            raise InvalidArgument('unknown command {!r}'.format(command))

        if path is None:
            if command != 'verify':
                raise InvalidArgument('{} needs --config or --preset'.format(command))
            document = Document.parse('{}', None)
        else:
            document = Document.load(path)

        if command == 'train':
            plan = parse_train(document, seed=seed)
        elif command == 'theory':
            plan = parse_theory(document)
        else:
            plan = parse_verify(document, seed=seed)

        return Bygrad(
            name=plan.name,
            output=output_dir(output, plan.output),
            jobs=jobs,
            **{command: plan}
        )
