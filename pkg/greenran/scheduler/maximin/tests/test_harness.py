# -*- coding: utf-8 -*-
import os
import shutil
import tempfile
import unittest

import numpy as np

from greenran.scheduler.maximin.harness import (
    SWEEP_COLUMNS,
    MetricsLog,
    SweepSpec,
    csv_header,
    jain_index,
    run_simulation,
    run_sweep,
    write_svg,
    write_sweep_csv
)
from greenran.scheduler.maximin.scheduler import per_user_backhaul_cap
from greenran.scheduler.maximin.tests.base import ACCEPTANCE_SLOTS, BATTERY_RUN_SLOTS, LONG_RUN_SLOTS, make_params
from greenran.scheduler.maximin.utils import SchedulerConfigError

try:
    import matplotlib
except ImportError:
    matplotlib = None


class TestJainIndex(unittest.TestCase):

    def test_examples(self):
        self.assertAlmostEqual(jain_index([3.0] * 6), 1.0)
        self.assertAlmostEqual(jain_index([0, 0, 5.0, 0, 0, 0]), 1.0 / 6)
        self.assertAlmostEqual(jain_index([1.0, 3.0]), 0.8)

    def test_errors(self):
        with self.assertRaises(ValueError):
            jain_index([0.0, 0.0])
        with self.assertRaises(ValueError):
            jain_index([1.0, -1.0])


class TempDirTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)


class TestMetricsLog(TempDirTestCase):

    def setUp(self):
        super(TestMetricsLog, self).setUp()
        self.params = make_params()

    def test_header_order(self):
        self.assertEqual(csv_header(2), [
            'slot', 's_star', 'battery', 'consumed', 'harvested', 'outage', 'dropped_voice', 'converged',
            'rate_0', 'rate_1', 'avg_rate_0', 'avg_rate_1', 'lambda_0', 'lambda_1', 'mu_0', 'mu_1',
            'served_bits_0', 'served_bits_1', 'codes_0', 'codes_1'])

    def test_cold_start_single_slot(self):
        log = run_simulation(self.params, 'stochastic', 1)
        self.assertEqual(len(log), 1)
        np.testing.assert_array_equal(log.rates, 0.0)
        cap = per_user_backhaul_cap(self.params)
        np.testing.assert_allclose(log.lam[0], self.params.epsilon * cap / self.params.rate_unit)

    def test_columns(self):
        log = run_simulation(self.params, 'stochastic', 30)
        self.assertEqual(log.rates.shape, (30, 6))
        self.assertEqual(log.slot.tolist(), list(range(30)))
        self.assertEqual(log.battery.shape, (30,))
        with self.assertRaises(AttributeError):
            log.no_such_column

    def test_running_averages_consistent(self):
        log = run_simulation(self.params, 'stochastic', 40)
        counts = np.arange(1, 41)[:, None]
        expected = np.cumsum(log.rates, axis=0) / counts
        np.testing.assert_allclose(log.avg_rates, expected, rtol=1e-9, atol=1e-6)
        np.testing.assert_allclose(log.served_bits, np.cumsum(log.rates, axis=0) * self.params.slot_duration,
                                   rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(log.min_average(), expected.min(axis=1), rtol=1e-9, atol=1e-6)

    def test_grid_power_battery_constant(self):
        log = run_simulation(self.params, 'stochastic', 20, grid_power=True)
        np.testing.assert_array_equal(log.battery, self.params.b_max)

    def test_same_seed_same_bytes(self):
        paths = []
        for name in ('first.csv', 'second.csv'):
            path = os.path.join(self.tmp, name)
            run_simulation(self.params, 'stochastic', 25, seed=3).write_csv(path)
            paths.append(path)
        with open(paths[0], 'rb') as first, open(paths[1], 'rb') as second:
            self.assertEqual(first.read(), second.read())

    def test_other_seed_other_trace(self):
        first = run_simulation(self.params, 'stochastic', 10, seed=1)
        second = run_simulation(self.params, 'stochastic', 10, seed=2)
        self.assertFalse(np.array_equal(first.rates, second.rates))

    def test_csv_round_trip(self):
        log = run_simulation(self.params, 'pf-per-user', 15, integer_codes=True)
        path = os.path.join(self.tmp, 'run.csv')
        log.write_csv(path)
        parsed = MetricsLog.read_csv(path, self.params.slot_duration)
        self.assertEqual(len(parsed), len(log))
        for column in ('slot', 's_star', 'battery', 'consumed', 'harvested', 'outage', 'dropped_voice',
                       'converged', 'rates', 'avg_rates', 'lam', 'mu', 'served_bits', 'codes'):
            np.testing.assert_array_equal(getattr(parsed, column), getattr(log, column))
        np.testing.assert_array_equal(parsed.final_averages(), log.final_averages())

    def test_read_rejects_foreign_csv(self):
        path = os.path.join(self.tmp, 'foreign.csv')
        with open(path, 'w') as stream:
            stream.write('a,b,c\n1,2,3\n')
        with self.assertRaises(ValueError):
            MetricsLog.read_csv(path, 0.002)

    def test_summary(self):
        log = run_simulation(self.params, 'stochastic', 20)
        summary = log.summary(0.5)
        self.assertEqual(summary['slots'], 20)
        self.assertEqual(summary['mean_lambda'].shape, (6,))
        self.assertAlmostEqual(summary['mean_battery'], log.battery[-10:].mean())
        self.assertAlmostEqual(summary['sum_avg_rate'], log.avg_rates[-1].sum())
        with self.assertRaises(ValueError):
            log.summary(0.0)
        with self.assertRaises(ValueError):
            MetricsLog(6, 0.002).summary()

    def test_invalid_slots(self):
        with self.assertRaises(SchedulerConfigError):
            run_simulation(self.params, 'stochastic', 0)
        with self.assertRaises(SchedulerConfigError):
            run_simulation(self.params, 'round-robin', 5)

    @unittest.skipIf(matplotlib is None, 'matplotlib is not installed')
    def test_svg(self):
        log = run_simulation(self.params, 'stochastic', 10)
        paths = write_svg(log, self.tmp, 'demo')
        self.assertEqual(len(paths), 4)
        for path in paths:
            self.assertTrue(os.path.isfile(path))
            self.assertTrue(path.endswith('.svg'))


class TestSweep(TempDirTestCase):

    def test_spec_load(self):
        spec = SweepSpec.load('variable: r_bh\nvalues: [500 Kbps, 2 Mbps]\nslots: 5\nschedulers: [stochastic, pf-sum]\n')
        self.assertEqual(spec.variable, 'r_bh')
        self.assertEqual(spec.values, ['500 Kbps', '2 Mbps'])
        self.assertEqual(spec.slots, 5)
        self.assertEqual(spec.schedulers, ['stochastic', 'pf-sum'])
        self.assertFalse(spec.grid_power)

    def test_spec_errors(self):
        for text in ('variable: theta\nvalues: [0.1]\n', 'variable: r_bh\nvalues: []\n', 'values: [1]\n',
                     'variable: r_bh\nvalues: [2 Mbps]\nspeed: 3\n', 'variable: r_bh\nvalues: [2 Mbps]\nslots: 0\n',
                     '[unclosed'):
            with self.assertRaises(SchedulerConfigError):
                SweepSpec.load(text)

    def test_single_point(self):
        params = make_params()
        spec = SweepSpec('r_bh', ['2 Mbps'], slots=5, schedulers=['stochastic'])
        rows = run_sweep(spec, params, seed=1, workers=2, out=self.tmp)
        self.assertEqual(len(rows), 1)
        row = rows[0]
        self.assertEqual(set(row), set(SWEEP_COLUMNS))
        self.assertEqual(row['scheduler'], 'stochastic')
        self.assertAlmostEqual(row['available_backhaul'], 1522500.0, places=6)
        self.assertTrue(os.path.isfile(os.path.join(self.tmp, 'sweep_r_bh_0_stochastic.csv')))

    def test_rows_follow_value_then_scheduler(self):
        params = make_params()
        spec = SweepSpec('alpha', [0.2, 0.4], slots=3, schedulers=['stochastic', 'pf-per-user'])
        rows = run_sweep(spec, params, workers=3)
        self.assertEqual([(r['value'], r['scheduler']) for r in rows],
                         [(0.2, 'stochastic'), (0.2, 'pf-per-user'), (0.4, 'stochastic'), (0.4, 'pf-per-user')])
        path = os.path.join(self.tmp, 'sweep.csv')
        write_sweep_csv(rows, path)
        with open(path) as stream:
            lines = stream.read().splitlines()
        self.assertEqual(lines[0], ','.join(SWEEP_COLUMNS))
        self.assertEqual(len(lines), 5)

    def test_unknown_scheduler_fails_early(self):
        spec = SweepSpec('r_bh', ['2 Mbps'], slots=3, schedulers=['round-robin'])
        with self.assertRaises(SchedulerConfigError):
            run_sweep(spec, make_params())


@unittest.skipUnless(ACCEPTANCE_SLOTS, 'set ACCEPTANCE_SLOTS for the long statistical runs')
class TestLongRun(unittest.TestCase):

    def tail_mean(self, column):
        return column[-max(len(column) // 10, 1):].mean(axis=0)

    def test_backhaul_limited(self):
        params = make_params(r_bh='500 Kbps')
        log = run_simulation(params, 'stochastic', LONG_RUN_SLOTS, grid_power=True)
        cap = per_user_backhaul_cap(params)
        self.assertTrue(np.all(log.final_averages() <= cap * 1.02))
        self.assertTrue(np.all(self.tail_mean(log.mu) > 0))

    def test_access_limited(self):
        params = make_params()
        log = run_simulation(params, 'stochastic', LONG_RUN_SLOTS, grid_power=True)
        self.assertTrue(np.all(self.tail_mean(log.mu) <= 1e-2 * self.tail_mean(log.lam)))
        averages = log.final_averages()
        self.assertLessEqual(averages.max() / averages.min(), 1.05)

    def test_fairer_than_pf(self):
        params = make_params()
        stochastic = run_simulation(params, 'stochastic', LONG_RUN_SLOTS, grid_power=True)
        pf = run_simulation(params, 'pf-per-user', LONG_RUN_SLOTS, grid_power=True)
        self.assertGreaterEqual(jain_index(stochastic.final_averages()), jain_index(pf.final_averages()))

    def test_battery_settles_at_harvest_balance(self):
        # with a hardware limit far above alpha * B the station spends alpha * B every slot
        params = make_params(p_bs_max='1 W', alpha=0.1)
        log = run_simulation(params, 'stochastic', BATTERY_RUN_SLOTS)
        battery = log.battery
        self.assertTrue(np.all(battery >= 0.0))
        self.assertTrue(np.all(battery <= params.b_max))
        balance = params.harvest_prob(0) * params.packet_energy / params.alpha
        self.assertAlmostEqual(balance, 240e-6, places=12)
        self.assertGreaterEqual(battery[len(battery) // 2:].mean(), 0.98 * balance)

    def test_sum_rate_grows_with_backhaul(self):
        spec = SweepSpec('r_bh', ['500 Kbps', '1 Mbps', '2 Mbps'], slots=ACCEPTANCE_SLOTS, grid_power=True)
        rows = run_sweep(spec, make_params(), seed=1)
        sums = [row['sum_avg_rate'] for row in rows]
        self.assertEqual(sums, sorted(sums))


def suite():
    suite = unittest.TestSuite()
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestJainIndex))
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestMetricsLog))
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestSweep))
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestLongRun))
    return suite


if __name__ == '__main__':
    unittest.main(defaultTest='suite')
