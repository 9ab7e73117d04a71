# -*- coding: utf-8 -*-
import csv
import logging
import os
from time import time

import numpy as np
from munch import munchify
from yaml import YAMLError, safe_load

from greenran.scheduler.maximin.constants import DEFAULTS, SWEEP_VARIABLES
from greenran.scheduler.maximin.scheduler import SchedulerState, load_scheduler
from greenran.scheduler.maximin.utils import SchedulerConfigError, generate_run_id, journal_context


logger = logging.getLogger(__name__)

HEAD_COLUMNS = ('slot', 's_star', 'battery', 'consumed', 'harvested', 'outage', 'dropped_voice', 'converged')
USER_COLUMNS = ('rate', 'avg_rate', 'lambda', 'mu', 'served_bits', 'codes')
INTEGER_COLUMNS = ('slot', 'outage', 'dropped_voice', 'converged')
SWEEP_COLUMNS = ('variable', 'value', 'scheduler', 'sum_avg_rate', 'min_avg_rate', 'max_avg_rate', 'jain',
                 'available_backhaul')


def jain_index(rates):
    rates = np.asarray(rates, dtype=float)
    if np.any(rates < 0):
        raise ValueError('Rates must be nonnegative: {!r}'.format(rates))
    total = rates.sum()
    if total == 0:
        raise ValueError('Jain index of all-zero rates is undefined')
    return float(total ** 2 / (rates.size * np.sum(rates ** 2)))


def csv_header(num_users):
    return list(HEAD_COLUMNS) + ['{}_{}'.format(column, k) for column in USER_COLUMNS for k in range(num_users)]


class MetricsLog(object):

    """
    Per-slot trace of a run

    Columns are numpy arrays of length `slots`; per-user columns have shape
    (slots, users). Rates are in bits/s, multipliers in inverse rate units.
    """

    def __init__(self, num_users, slot_duration, scheduler=None, seed=None):
        self.num_users = num_users
        self.slot_duration = slot_duration
        self.scheduler = scheduler
        self.seed = seed
        self._rows = []
        self._avg = np.zeros(num_users)
        self._served = np.zeros(num_users)
        self._frozen = None

    def record(self, result, lam, mu):
        rates = np.asarray(result.rates, dtype=float)
        count = len(self._rows) + 1
        self._avg = self._avg + (rates - self._avg) / count
        self._served = self._served + rates * self.slot_duration
        # integer view when the slot was rounded for reporting
        codes = (result.reported if result.reported is not None else result.data).codes
        self._rows.append((
            (result.slot, result.s_star, result.battery_after, result.consumed, result.harvested,
             int(result.outage), len(result.dropped_voice), int(result.converged)),
            (rates, self._avg.copy(), np.array(lam, dtype=float), np.array(mu, dtype=float), self._served.copy(),
             np.array(codes, dtype=float))
        ))
        self._frozen = None

    def _columns(self):
        if self._frozen is None:
            head = [[row[0][i] for row in self._rows] for i in range(len(HEAD_COLUMNS))]
            users = [np.array([row[1][i] for row in self._rows]).reshape(len(self._rows), self.num_users)
                     for i in range(len(USER_COLUMNS))]
            frozen = {}
            for name, values in zip(HEAD_COLUMNS, head):
                frozen[name] = np.array(values, dtype=int if name in INTEGER_COLUMNS else float)
            frozen.update(zip(('rates', 'avg_rates', 'lam', 'mu', 'served_bits', 'codes'), users))
            self._frozen = frozen
        return self._frozen

    def __len__(self):
        return len(self._rows)

    def __getattr__(self, name):
        if name.startswith('_'):
            raise AttributeError(name)
        columns = self._columns()
        if name in columns:
            return columns[name]
        raise AttributeError(name)

    def final_averages(self):
        return self._avg.copy()

    def min_average(self):
        """min over users of the running-average rate after each slot"""
        return self.avg_rates.min(axis=1) if len(self) else np.zeros(0)

    def summary(self, window=0.1):
        if not 0 < window <= 1:
            raise ValueError('window out of (0,1]: {!r}'.format(window))
        if not len(self):
            raise ValueError('Empty metrics log')
        tail = max(int(round(len(self) * window)), 1)
        averages = self.final_averages()
        return {
            'slots': len(self),
            'jain': jain_index(averages) if averages.sum() > 0 else None,
            'sum_avg_rate': float(averages.sum()),
            'min_avg_rate': float(averages.min()),
            'max_avg_rate': float(averages.max()),
            'mean_lambda': self.lam[-tail:].mean(axis=0),
            'mean_mu': self.mu[-tail:].mean(axis=0),
            'mean_battery': float(self.battery[-tail:].mean()),
            'outage_slots': int(self.outage.sum()),
            'dropped_voice': int(self.dropped_voice.sum()),
        }

    def write_csv(self, path):
        """One header row, one row per slot; floats in shortest round-trip notation"""
        with open(path, 'w', newline='') as stream:
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow(csv_header(self.num_users))
            for head, users in self._rows:
                row = [repr(int(v)) if name in INTEGER_COLUMNS else repr(float(v))
                       for name, v in zip(HEAD_COLUMNS, head)]
                for column in users:
                    row.extend(repr(float(v)) for v in column)
                writer.writerow(row)

    @classmethod
    def read_csv(cls, path, slot_duration):
        with open(path, newline='') as stream:
            reader = csv.reader(stream)
            header = next(reader)
            num_users = (len(header) - len(HEAD_COLUMNS)) // len(USER_COLUMNS)
            if header != csv_header(num_users):
                raise ValueError('Unexpected CSV header in {}'.format(path))
            log = cls(num_users, slot_duration)
            for row in reader:
                head = tuple(int(v) if name in INTEGER_COLUMNS else float(v)
                             for name, v in zip(HEAD_COLUMNS, row))
                values = np.array([float(v) for v in row[len(HEAD_COLUMNS):]]).reshape(len(USER_COLUMNS),
                                                                                       num_users)
                log._rows.append((head, tuple(values)))
            if log._rows:
                log._avg = np.array(log._rows[-1][1][1])
                log._served = np.array(log._rows[-1][1][4])
        return log


def run_simulation(params, scheduler='stochastic', num_slots=None, seed=None, grid_power=False,
                   integer_codes=False):
    """
    Run one scheduler over consecutive slots

    :param SystemParams params: Scenario
    :param str scheduler: Registry name of the scheduler
    :param int num_slots: Slots to simulate
    :param int seed: Overrides the scenario seed
    :param bool grid_power: Keep the battery full every slot
    :rtype: MetricsLog
    """
    num_slots = DEFAULTS['simulation']['slots'] if num_slots is None else num_slots
    if num_slots < 1:
        raise SchedulerConfigError('num_slots must be at least 1: {!r}'.format(num_slots))
    seed = params.seed if seed is None else seed
    plugin = load_scheduler(scheduler)(params)
    state = SchedulerState.initial(params, seed=seed, grid_power=grid_power, integer_codes=integer_codes)
    log = MetricsLog(params.num_data_users, params.slot_duration, scheduler=scheduler, seed=seed)
    run_id = generate_run_id()
    context = {'RUN_ID': run_id, 'SCHEDULER': scheduler, 'SEED': seed}
    logger.info('Start {} slots with scheduler {}'.format(num_slots, scheduler),
                extra=journal_context({'MESSAGE_ID': 'simulation_start'}, context))
    started = time()
    for _ in range(num_slots):
        result, state = plugin.run_slot(state)
        lam, mu = plugin.multipliers(state)
        log.record(result, lam, mu)
    averages = log.final_averages()
    logger.info('Finished {} slots in {:.1f} s, min average rate {:.1f} bps'.format(
        num_slots, time() - started, float(averages.min())),
        extra=journal_context({'MESSAGE_ID': 'simulation_done'}, context))
    return log


def write_svg(log, directory, prefix='run'):
    """Line charts of average rates, battery level and multipliers; needs matplotlib"""
    try:
        import matplotlib
        matplotlib.use('Agg')
        matplotlib.rcParams['svg.hashsalt'] = 'greenran'
        from matplotlib import pyplot
    except ImportError:
        raise SchedulerConfigError('SVG output needs matplotlib (install the "plot" extra)')
    slots = log.slot
    charts = (
        ('avg_rates', log.avg_rates / 1e3, 'average rate [kbps]'),
        ('battery', log.battery[:, None] * 1e6, u'battery [μJ]'),
        ('lambda', log.lam, 'lambda'),
        ('mu', log.mu, 'mu'),
    )
    paths = []
    for name, values, label in charts:
        figure, axes = pyplot.subplots(figsize=(8, 4))
        for k in range(values.shape[1]):
            axes.plot(slots, values[:, k], linewidth=0.8, label=None if values.shape[1] == 1 else 'user {}'.format(k))
        axes.set_xlabel('slot')
        axes.set_ylabel(label)
        if values.shape[1] > 1:
            axes.legend(loc='best', fontsize='small')
        path = os.path.join(directory, '{}_{}.svg'.format(prefix, name))
        # fixed metadata keeps the files reproducible
        figure.savefig(path, format='svg', metadata={'Date': None})
        pyplot.close(figure)
        paths.append(path)
    return paths


class SweepSpec(object):

    def __init__(self, variable, values, slots=None, schedulers=None, grid_power=None):
        defaults = DEFAULTS['sweep']
        if variable not in SWEEP_VARIABLES:
            raise SchedulerConfigError('Sweep variable must be one of {}: {!r}'.format(SWEEP_VARIABLES, variable))
        if not values:
            raise SchedulerConfigError('Sweep needs at least one value')
        self.variable = variable
        self.values = list(values)
        self.slots = defaults['slots'] if slots is None else slots
        if self.slots < 1:
            raise SchedulerConfigError('Sweep slots must be positive: {!r}'.format(self.slots))
        self.schedulers = list(defaults['schedulers'] if schedulers is None else schedulers)
        if not self.schedulers:
            raise SchedulerConfigError('Sweep needs at least one scheduler')
        self.grid_power = defaults['grid_power'] if grid_power is None else grid_power

    @classmethod
    def load(cls, text):
        try:
            document = munchify(safe_load(text))
        except YAMLError as e:
            raise SchedulerConfigError('Sweep document does not parse: {}'.format(e))
        if not isinstance(document, dict) or 'variable' not in document or 'values' not in document:
            raise SchedulerConfigError("Sweep document needs 'variable' and 'values'")
        unknown = set(document) - {'variable', 'values', 'slots', 'schedulers', 'grid_power'}
        if unknown:
            raise SchedulerConfigError("Unknown sweep key '{}'".format(sorted(unknown)[0]))
        # item access: `values` is also a dict method
        return cls(document['variable'], document['values'], document.get('slots'), document.get('schedulers'),
                   document.get('grid_power'))


def run_sweep(spec, params, seed=None, workers=None, out=None):
    """
    Final sum of average rates per (value, scheduler) pair

    :return: list of row dicts keyed by `SWEEP_COLUMNS`, ordered by value then scheduler
    """
    from greenran.scheduler.maximin.workers import SweepWorker, run_pool

    seed = params.seed if seed is None else seed
    greenlets = []
    for index, value in enumerate(spec.values):
        point = params.override(**{spec.variable: value})
        for scheduler in spec.schedulers:
            load_scheduler(scheduler)
            greenlets.append(SweepWorker(point, scheduler, index, value, spec, seed, out))
    rows = run_pool(greenlets, DEFAULTS['sweep']['workers'] if workers is None else workers)
    logger.info('Sweep over {} finished with {} rows'.format(spec.variable, len(rows)),
                extra={'MESSAGE_ID': 'sweep_done'})
    return rows


def write_sweep_csv(rows, path):
    with open(path, 'w', newline='') as stream:
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in SWEEP_COLUMNS])
