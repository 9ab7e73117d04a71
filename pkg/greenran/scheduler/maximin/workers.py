# -*- coding: utf-8 -*-
import logging
import os

import gevent.pool
from gevent import Greenlet
from zope.interface import implementer

from greenran.scheduler.maximin.baselines import sum_backhaul_cap
from greenran.scheduler.maximin.harness import run_simulation
from greenran.scheduler.maximin.interfaces import ISweepWorker
from greenran.scheduler.maximin.utils import journal_context


logger = logging.getLogger(__name__)


@implementer(ISweepWorker)
class SweepWorker(Greenlet):

    """One (value, scheduler) point of a sweep; its value is the result row"""

    def __init__(self, params, scheduler, index, value, spec, seed, out_dir=None):
        Greenlet.__init__(self)
        self.params = params
        self.scheduler = scheduler
        self.index = index
        self.point_value = value
        self.spec = spec
        self.seed = seed
        self.out_dir = out_dir

    @property
    def csv_name(self):
        return 'sweep_{}_{}_{}.csv'.format(self.spec.variable, self.index, self.scheduler)

    def _run(self):
        log = run_simulation(self.params, self.scheduler, self.spec.slots, self.seed,
                             grid_power=self.spec.grid_power)
        if self.out_dir is not None:
            log.write_csv(os.path.join(self.out_dir, self.csv_name))
        summary = log.summary()
        row = {
            'variable': self.spec.variable,
            'value': self.point_value,
            'scheduler': self.scheduler,
            'sum_avg_rate': summary['sum_avg_rate'],
            'min_avg_rate': summary['min_avg_rate'],
            'max_avg_rate': summary['max_avg_rate'],
            'jain': summary['jain'],
            'available_backhaul': sum_backhaul_cap(self.params),
        }
        logger.info(
            'Sweep point {}={} with {}: sum of average rates {:.1f} bps'.format(
                self.spec.variable, self.point_value, self.scheduler, row['sum_avg_rate']),
            extra=journal_context({'MESSAGE_ID': 'sweep_point'}, {'SCHEDULER': self.scheduler})
        )
        return row


def run_pool(workers, size):
    """
    Run sweep greenlets in a bounded pool and return their rows in submission order

    Points are CPU bound and never yield, so the pool orders and bounds them
    rather than running them in parallel.
    """
    pool = gevent.pool.Pool(size)
    for worker in workers:
        pool.start(worker)
    pool.join(raise_error=True)
    return [worker.value for worker in workers]
