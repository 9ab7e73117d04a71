# -*- coding: utf-8 -*-
import unittest

import numpy as np

from greenran.scheduler.maximin.oracle import (
    GridSpec,
    OracleResult,
    brute_force_inner,
    kkt_report,
    oracle_gap,
    random_instance,
    sinr_direct
)
from greenran.scheduler.maximin.solver import DataAllocation, WeightedInstance
from greenran.scheduler.maximin.tests.base import make_params
from greenran.scheduler.maximin.utils import InvalidAllocationError, OracleError


class TestGridSpec(unittest.TestCase):

    def test_parse(self):
        grid = GridSpec.parse('200x41', 2)
        self.assertEqual((grid.power_points, grid.code_points, grid.users), (200, 41, 2))

    def test_errors(self):
        for text, users in (('200', 2), ('ax4', 2), ('200x41', 4), ('200x41', 0), ('1x41', 1),
                            ('1000x100', 3)):
            with self.assertRaises(OracleError):
                GridSpec.parse(text, users)


class TestBruteForce(unittest.TestCase):

    def setUp(self):
        self.params = make_params()

    def test_single_user_takes_the_corner(self):
        instance = WeightedInstance([1.0], [3e-12], 1.5e-2, 5e-3, 4.0, self.params)
        found = brute_force_inner(instance, GridSpec(11, 5, 1))
        self.assertIsInstance(found, OracleResult)
        self.assertEqual(found.powers[0], 5e-3)
        self.assertEqual(found.codes[0], 4.0)

    def test_grid_point_is_feasible_and_scored_independently(self):
        rng = np.random.default_rng(5)
        for users in (2, 3):
            instance = random_instance(rng, users, self.params, 4.0, WeightedInstance)
            found = brute_force_inner(instance, GridSpec(15, 9, users))
            self.assertLessEqual(found.powers.sum(), instance.power_budget * (1 + 1e-12))
            self.assertLessEqual(found.codes.sum(), 4.0 * (1 + 1e-12))
            found.powers[found.codes == 0] = 0.0
            self.assertAlmostEqual(instance.objective(found.powers, found.codes) / found.objective, 1.0, places=9)

    def test_matches_exhaustive_loop(self):
        instance = WeightedInstance([1.0, 0.6], [3e-12, 6e-12], 1.5e-2, 5e-3, 2.0, self.params)
        found = brute_force_inner(instance, GridSpec(6, 5, 2))
        power_axis, code_axis = np.linspace(0, 5e-3, 6), np.linspace(0, 2.0, 5)
        best = 0.0
        for i1 in range(6):
            for j1 in range(5):
                for i2 in range(6 - i1):
                    for j2 in range(5 - j1):
                        p = np.array([power_axis[i1], power_axis[i2]])
                        n = np.array([code_axis[j1], code_axis[j2]])
                        p[n == 0] = 0.0
                        best = max(best, instance.objective(p, n))
        self.assertAlmostEqual(found.objective / best, 1.0, places=9)

    def test_user_count_mismatch(self):
        instance = WeightedInstance([1.0, 1.0], [3e-12, 6e-12], 1.5e-2, 5e-3, 2.0, self.params)
        with self.assertRaises(OracleError):
            brute_force_inner(instance, GridSpec(6, 5, 3))


class TestKktReport(unittest.TestCase):

    def setUp(self):
        self.params = make_params()
        self.instance = WeightedInstance([1.0, 1.0], [3e-12, 6e-12], 1.5e-2, 5e-3, 4.0, self.params)

    def test_infeasible(self):
        allocation = DataAllocation([4e-3, 4e-3], [2.0, 2.0], [0.0, 0.0], beta=1.0, varphi=1.0)
        with self.assertRaises(InvalidAllocationError):
            kkt_report(self.instance, allocation)

    def test_suboptimal_allocation_has_residuals(self):
        allocation = DataAllocation([2.5e-3, 2.5e-3], [2.0, 2.0], [0.0, 0.0], beta=1e3, varphi=1e3)
        report = kkt_report(self.instance, allocation)
        self.assertGreater(report.stationarity, 1.0)
        self.assertAlmostEqual(report.power_slack, 0.0)
        self.assertEqual(report.power_slackness, abs(1e3 * report.power_slack))


class TestHelpers(unittest.TestCase):

    def setUp(self):
        self.params = make_params()

    def test_exact_sinr_is_higher(self):
        exact = sinr_direct(1e-4, 1e-2, 1e-10, self.params)
        approximate = sinr_direct(1e-4, 1e-2, 1e-10, self.params, exact=False)
        self.assertGreater(exact, approximate)
        self.assertIsInstance(exact, float)

    def test_gap(self):
        self.assertEqual(oracle_gap(100.0, 100.0), 0.0)
        self.assertAlmostEqual(oracle_gap(99.0, 100.0), 0.01)
        self.assertLess(oracle_gap(101.0, 100.0), 0.0)
        self.assertEqual(oracle_gap(0.0, 0.0), 0.0)

    def test_random_instance(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            instance = random_instance(rng, 3, self.params, 4.0, WeightedInstance)
            self.assertEqual(instance.size, 3)
            self.assertTrue(0.1 * self.params.p_bs_max <= instance.power_budget <= self.params.p_bs_max)
            self.assertTrue(np.all((instance.weights >= 0.1) & (instance.weights <= 1.0)))
            self.assertAlmostEqual(instance.p_rad, instance.power_budget + self.params.p_cpich)


def suite():
    suite = unittest.TestSuite()
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestGridSpec))
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestBruteForce))
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestKktReport))
    suite.addTest(unittest.defaultTestLoader.loadTestsFromTestCase(TestHelpers))
    return suite


if __name__ == '__main__':
    unittest.main(defaultTest='suite')
