# -*- coding: utf-8 -*-
import os
import shutil
import tempfile
import unittest
from copy import deepcopy
from io import StringIO

from mock import patch
from yaml import safe_dump

from greenran.scheduler.maximin.harness import SweepSpec
from greenran.scheduler.maximin.oracle import GridSpec
from greenran.scheduler.maximin.simulator import MaximinSimulator, build_parser, main, oracle_check
from greenran.scheduler.maximin.tests.base import TEST_CONFIG, make_params
from greenran.scheduler.maximin.utils import SchedulerConfigError


class TestMaximinSimulator(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_init(self):
        simulator = MaximinSimulator(TEST_CONFIG)
        self.assertEqual(simulator.scheduler, 'stochastic')
        self.assertEqual(simulator.slots, 50)
        self.assertEqual(simulator.stats_window, 0.1)
        self.assertFalse(simulator.grid_power)
        self.assertEqual(simulator.config.slots, 50)
        self.assertEqual(simulator.params.seed, 7)

    def test_init_errors(self):
        with self.assertRaises(SchedulerConfigError):
            MaximinSimulator({})
        with self.assertRaises(SchedulerConfigError):
            MaximinSimulator({'main': {'simulation': {}}})
        config = deepcopy(TEST_CONFIG)
        config['main']['scenario']['alpha'] = 1.2
        with self.assertRaises(SchedulerConfigError):
            MaximinSimulator(config)

    def test_run_writes_csv(self):
        log = MaximinSimulator(TEST_CONFIG).run(slots=5, out=self.tmp)
        self.assertEqual(len(log), 5)
        self.assertTrue(os.path.isfile(os.path.join(self.tmp, 'stochastic_7.csv')))

    def test_run_overrides(self):
        log = MaximinSimulator(TEST_CONFIG).run(scheduler='pf-sum', slots=4, seed=11, out=self.tmp, grid_power=True)
        self.assertEqual(log.scheduler, 'pf-sum')
        self.assertEqual(log.seed, 11)
        self.assertTrue(os.path.isfile(os.path.join(self.tmp, 'pf-sum_11.csv')))

    def test_sweep(self):
        spec = SweepSpec('harvest_prob', [0.4, 0.8], slots=3)
        rows = MaximinSimulator(TEST_CONFIG).sweep(spec, out=self.tmp, workers=2)
        self.assertEqual(len(rows), 2)
        self.assertTrue(os.path.isfile(os.path.join(self.tmp, 'sweep_harvest_prob.csv')))


class TestOracleCheck(unittest.TestCase):

    @patch('sys.stdout', new_callable=StringIO)
    def test_gaps(self, mocked_stdout):
        gaps = oracle_check(make_params(), 2, GridSpec(30, 9, 2), 3, 0, 4.0)
        self.assertEqual(len(gaps), 3)
        self.assertTrue(all(gap <= 1e-6 for gap in gaps))
        self.assertEqual(mocked_stdout.getvalue().count('trial'), 3)


class TestMain(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.config_path = os.path.join(self.tmp, 'config.yml')
        with open(self.config_path, 'w') as f:
            f.write(safe_dump(TEST_CONFIG))

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_parser(self):
        args = build_parser().parse_args(['run', '--config', 'c.yml', '--grid-power', '--slots', '9'])
        self.assertEqual((args.command, args.config, args.slots, args.grid_power), ('run', 'c.yml', 9, True))
        args = build_parser().parse_args(['sweep', '--spec', 's.yml', '--config', 'c.yml', '--workers', '1'])
        self.assertEqual((args.command, args.spec, args.workers), ('sweep', 's.yml', 1))
        args = build_parser().parse_args(['oracle-check'])
        self.assertEqual((args.users, args.grid, args.trials, args.seed), (2, '200x41', 20, 0))

    def test_run(self):
        out = os.path.join(self.tmp, 'out')
        code = main(['run', '--config', self.config_path, '--slots', '3', '--seed', '5', '--out', out])
        self.assertEqual(code, 0)
        self.assertTrue(os.path.isfile(os.path.join(out, 'stochastic_5.csv')))

    def test_sweep(self):
        spec_path = os.path.join(self.tmp, 'sweep.yml')
        with open(spec_path, 'w') as f:
            f.write('variable: r_bh\nvalues: [1 Mbps]\nslots: 2\nschedulers: [pf-per-user]\n')
        code = main(['sweep', '--spec', spec_path, '--config', self.config_path, '--out', self.tmp])
        self.assertEqual(code, 0)
        self.assertTrue(os.path.isfile(os.path.join(self.tmp, 'sweep_r_bh.csv')))

    @patch('sys.stdout', new_callable=StringIO)
    def test_oracle_check(self, mocked_stdout):
        code = main(['oracle-check', '--config', self.config_path, '--grid', '20x9', '--trials', '2'])
        self.assertEqual(code, 0)
        self.assertIn('gap', mocked_stdout.getvalue())

    def test_config_errors_exit_nonzero(self):
        bad = deepcopy(TEST_CONFIG)
        bad['main']['scenario']['alpha'] = 1.2
        bad_path = os.path.join(self.tmp, 'bad.yml')
        with open(bad_path, 'w') as f:
            f.write(safe_dump(bad))
        self.assertEqual(main(['run', '--config', bad_path]), 2)
        self.assertEqual(main(['run', '--config', os.path.join(self.tmp, 'missing.yml')]), 2)
        self.assertEqual(main(['run', '--config', self.config_path, '--scheduler', 'round-robin',
                               '--out', self.tmp]), 2)
        self.assertEqual(main(['oracle-check', '--grid', 'big', '--config', self.config_path]), 2)


def suite():
    suite = unittest.TestSuite()
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestMaximinSimulator))
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestOracleCheck))
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestMain))
    return suite


if __name__ == '__main__':
    unittest.main(defaultTest='suite')
