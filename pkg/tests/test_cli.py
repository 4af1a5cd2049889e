"""
Tests for the command line and the Bygrad orchestrator
"""
import os
import shutil
import tempfile
import unittest

import yaml

from bygrad import Bygrad
from bygrad.analysis.theory import read_curve_csv
from bygrad.cli import build_parser, main
from bygrad.config import Document, parse_theory, resolve_preset
from bygrad.exceptions import InvalidArgument
from bygrad.utils import MANIFEST, read_manifest

TINY = """
name: tiny
experiment: {N: 10, H: 8, Q: 5, T: 6, gamma: 1.0e-4, sigma_H: 0.3}
runs:
  - {label: CWTM, method: baseline_CWTM}
  - {label: LAD-CWTM, method: LAD, d: 3, aggregator: 'cwtm:0.1'}
sweep:
  seed: [0, 1]
"""

SUITE = """
name: quick
suite: {lemma_n: 5, max_n: 3, models: 1, trials: 100, samples: 2000, mutation: lemma1}
"""


class TestCli(unittest.TestCase):
    """
    Test the subcommands end to end
    """

    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.out = os.path.join(self.directory, 'out')

    def tearDown(self):
        shutil.rmtree(self.directory)

    def write(self, name, text):
        path = os.path.join(self.directory, name)
        with open(path, 'w') as handle:
            handle.write(text)
        return path

    def test_parser(self):
        """
        Test subcommands and their options
        """
        parser = build_parser()
        args = parser.parse_args(['-q', 'train', '--preset', 'fig4', '--seed', '0x10', '--jobs', '2'])
        self.assertEqual((args.command, args.preset, args.seed, args.jobs, args.quiet), ('train', 'fig4', 16, 2, True))
        with self.assertRaises(SystemExit):
            parser.parse_args(['train', '--jobs', '0'])
        with self.assertRaises(SystemExit):
            parser.parse_args(['theory', '--jobs', '2'])
        with self.assertRaises(SystemExit):
            parser.parse_args(['-v', '-q', 'verify'])

    def test_train(self):
        """
        Test a training sweep writes its runs and manifest
        """
        self.assertEqual(main(['-q', 'train', '--config', self.write('tiny.yaml', TINY), '--out', self.out]), 0)
        rows = read_manifest(os.path.join(self.out, 'tiny', MANIFEST))
        self.assertEqual(len(rows), 4)
        self.assertEqual({row['status'] for row in rows}, {'ok'})
        for row in rows:
            self.assertTrue(os.path.isfile(os.path.join(self.out, 'tiny', row['file'])))

        self.assertEqual(main(['-q', 'plot', os.path.join(self.out, 'tiny')]), 0)
        self.assertTrue(os.path.isfile(os.path.join(self.out, 'tiny', 'manifest_loss.png')))

    def test_train_failed_run(self):
        """
        Test a failing run is recorded and sets the exit code
        """
        text = TINY.replace("'cwtm:0.1'", "'krum'")
        self.assertEqual(main(['-q', 'train', '--config', self.write('tiny.yaml', text), '--out', self.out]), 2)
        statuses = [row['status'] for row in read_manifest(os.path.join(self.out, 'tiny', MANIFEST))]
        self.assertEqual(statuses.count('failed'), 2)

    def test_empty_sweep(self):
        """
        Test an empty run list succeeds without output
        """
        path = self.write('empty.yaml', 'experiment: {N: 10, H: 8}\nruns: []\n')
        self.assertEqual(main(['-q', 'train', '--config', path, '--out', self.out]), 0)
        self.assertFalse(os.path.exists(self.out))

    def test_bad_config(self):
        """
        Test configuration errors exit with 2
        """
        path = self.write('bad.yaml', 'experiment: {N: 10, H: 8, rate: 1}\n')
        with self.assertLogs('bygrad.cli', 'ERROR') as logs:
            self.assertEqual(main(['train', '--config', path]), 2)
        self.assertIn('bad.yaml:1', logs.output[0])
        self.assertEqual(main(['-q', 'train']), 2)
        self.assertEqual(main(['-q', 'theory', '--preset', 'fig9']), 2)

    def test_theory(self):
        """
        Test the theory subcommand writes the report and curves
        """
        self.assertEqual(main(['-q', 'theory', '--preset', 'fig3', '--out', self.out]), 0)
        digest = parse_theory(Document.load(str(resolve_preset('fig3')))).params.params_hash
        with open(os.path.join(self.out, 'theory_fig3_{}.yaml'.format(digest))) as handle:
            report = yaml.safe_load(handle)
        self.assertEqual(report['params_hash'], digest)
        self.assertFalse(report['feasible'])
        self.assertEqual(report['d_threshold'], 3)
        for name in ('d', 'd_lad'):
            rows = read_curve_csv(os.path.join(self.out, 'curve_{}_{}.csv'.format(name, digest)))
            self.assertEqual(len(rows), 100)

        self.assertEqual(main(['-q', 'plot', self.out, '--out', os.path.join(self.out, 'png')]), 0)
        self.assertTrue(os.path.isfile(os.path.join(self.out, 'png', 'curve_d_{}.png'.format(digest))))

    def test_verify_mutation(self):
        """
        Test the suite fails with the injected wrong formula
        """
        path = self.write('quick.yaml', SUITE)
        self.assertEqual(main(['-q', 'verify', '--config', path, '--out', self.out]), 1)
        with open(os.path.join(self.out, 'verify_quick.yaml')) as handle:
            report = yaml.safe_load(handle)
        self.assertIn('lemma1_enumeration', report['failures'])

    def test_plot_missing(self):
        """
        Test plotting a missing path fails
        """
        self.assertEqual(main(['-q', 'plot', os.path.join(self.directory, 'nothing')]), 2)


class TestBygrad(unittest.TestCase):
    """
    Test Bygrad loading
    """

    def test_load(self):
        """
        Test plans are attached to their subcommand
        """
        bygrad = Bygrad.load(None, 'verify', seed=3, output='/tmp/bygrad-test')
        self.assertEqual(bygrad.verify_plan.suite.seed, 3)
        self.assertIsNone(bygrad.train_plan)
        self.assertEqual(str(bygrad.output), '/tmp/bygrad-test')

    def test_errors(self):
        """
        Test unknown commands and missing plans
        """
        with self.assertRaises(InvalidArgument):
            Bygrad.load(None, 'train')
        with self.assertRaises(InvalidArgument):
            Bygrad.load(None, 'deploy')
        with self.assertRaises(InvalidArgument):
            Bygrad(output='/tmp/bygrad-test').run('theory')


if __name__ == '__main__':
    unittest.main()
