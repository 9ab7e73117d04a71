# -*- coding: utf-8 -*-
"""
Proportional-fair schedulers with instantaneous backhaul caps.

`per_user_cap` keeps every user's slot rate under the per-user backhaul share,
`sum_cap` keeps the total slot rate under the data backhaul.
"""
import logging
from math import log, sqrt

import numpy as np
from zope.interface import implementer

from greenran.scheduler.maximin.interfaces import IScheduler
from greenran.scheduler.maximin.scheduler import (
    SlotResult,
    per_user_backhaul_cap,
    prepare_slot,
    settle_slot
)
from greenran.scheduler.maximin.solver import DataAllocation, InnerOptions, WeightedInstance, rate_of, solve_inner
from greenran.scheduler.maximin.utils import journal_context


logger = logging.getLogger(__name__)

LN2 = log(2.0)
MODES = ('per_user_cap', 'sum_cap')
SUM_CAP_TOL = 1e-4


class PfState(object):

    __slots__ = ('avg_throughput', 'window')

    def __init__(self, avg_throughput, window=500):
        self.avg_throughput = np.asarray(avg_throughput, dtype=float)
        if window <= 1:
            raise ValueError('window must exceed 1: {!r}'.format(window))
        if np.any(self.avg_throughput < 0):
            raise ValueError('Average throughput must be nonnegative')
        self.window = window

    @classmethod
    def zeros(cls, size, window=500):
        return cls(np.zeros(size), window)


def pf_weights(state, floor=1.0):
    return 1.0 / np.maximum(state.avg_throughput, floor)


def pf_update(state, rates):
    rates = np.asarray(rates, dtype=float)
    if np.any(rates < 0):
        raise ValueError('Rates must be nonnegative: {!r}'.format(rates))
    forget = 1.0 / state.window
    return PfState((1.0 - forget) * state.avg_throughput + forget * rates, state.window)


def sum_backhaul_cap(params):
    return (params.r_bh - params.r_bh_voice) / params.xi


def _assemble(instance, powers, codes, beta, varphi, iterations, converged, eta):
    rates = rate_of(powers, codes, instance.gains, instance.p_rad, instance.params)
    return DataAllocation(powers, codes, rates, beta=beta, varphi=varphi,
                          objective=float(np.dot(instance.weights, rates)),
                          iterations=iterations, converged=converged, eta=eta)


def _solve_per_user_cap(instance, cap, options):
    """
    Pin users whose rate exceeds the cap and re-solve the rest

    A pinned user keeps its power-to-code ratio and is scaled down onto the
    cap; the remaining users share whatever budget is left.
    """
    size = instance.size
    powers, codes = np.zeros(size), np.zeros(size)
    pinned = np.zeros(size, dtype=bool)
    free = np.flatnonzero(instance.weights > 0)
    budget, n_max = instance.power_budget, instance.n_max
    beta, varphi, iterations, converged = 0.0, 0.0, 0, True

    while free.size:
        sub = solve_inner(instance.restrict(free, budget, n_max), options)
        beta, varphi = sub.beta, sub.varphi
        iterations += sub.iterations
        converged &= sub.converged
        over = sub.rates > cap
        powers[free], codes[free] = sub.powers, sub.codes
        if not np.any(over):
            break
        scale = cap / sub.rates[over]
        hit = free[over]
        powers[hit] *= scale
        codes[hit] *= scale
        pinned[hit] = True
        budget = max(budget - powers[hit].sum(), 0.0)
        n_max = max(n_max - codes[hit].sum(), 0.0)
        free = free[~over]
        if not free.size:
            # every user sits on the cap and the leftover budget is free
            beta, varphi = 0.0, 0.0
        logger.debug(
            'Pinned users {} at the per-user cap'.format(hit.tolist()),
            extra=journal_context({'MESSAGE_ID': 'pf_cap_pinned'}, {'PINNED': len(hit)})
        )
        if budget <= 0 or n_max <= 0:
            powers[free], codes[free] = 0.0, 0.0
            beta = 0.0
            break

    eta = np.zeros(size)
    for k in np.flatnonzero(pinned & (codes > 0)):
        a, c = instance.snr_gain[k], instance.bandwidth
        x = powers[k] / codes[k]
        eta[k] = max(instance.weights[k] - beta * LN2 * (1.0 + a * x) / (c * a), 0.0)
    return _assemble(instance, powers, codes, beta, varphi, iterations, converged, eta)


def _scaled_onto(allocation, instance, limit):
    total = allocation.rates.sum()
    if total <= limit:
        return allocation
    scale = limit / total
    return _assemble(instance, allocation.powers * scale, allocation.codes * scale, allocation.beta,
                     allocation.varphi, allocation.iterations, allocation.converged, allocation.eta)


def _solve_sum_cap(instance, limit, options):
    """
    Common rate price on the total slot rate

    Projected supergradient on the price inside a bracket, keeping the best
    iterate after scaling it under the cap.
    """
    size = instance.size
    base = solve_inner(instance, options)
    if base.rates.sum() <= limit:
        base.eta = np.zeros(size)
        return base

    weights = instance.weights
    eta_hi = float(weights.max())
    lo, hi, scaled = 0.0, 1.0, 0.5
    best = _scaled_onto(base, instance, limit)
    best.eta = np.zeros(size)
    iterations = base.iterations
    converged = False
    for q in range(1, options.max_outer + 1):
        eta = scaled * eta_hi
        shifted = WeightedInstance(weights - eta, instance.gains, instance.p_rad, instance.power_budget,
                                   instance.n_max, instance.params)
        trial = solve_inner(shifted, options)
        iterations += trial.iterations
        excess = trial.rates.sum() - limit
        candidate = _scaled_onto(_assemble(instance, trial.powers, trial.codes, trial.beta, trial.varphi,
                                           trial.iterations, trial.converged, np.full(size, eta)),
                                 instance, limit)
        candidate.eta = np.full(size, eta)
        if candidate.objective > best.objective:
            best = candidate
        if abs(excess) <= SUM_CAP_TOL * limit or hi - lo <= options.tol:
            converged = True
            break
        if excess > 0:
            lo = scaled
        else:
            hi = scaled
        scaled = max(0.0, scaled + options.q_scale / sqrt(q) * np.sign(excess))
        if not lo < scaled < hi:
            scaled = 0.5 * (lo + hi)
    best.iterations = iterations
    best.converged = converged
    return best


def solve_pf_slot(state, instance, params, mode, options=None):
    """
    Weighted-rate slot allocation with proportional-fair weights and an instantaneous cap

    :param PfState state: Averaged throughputs before the slot
    :param WeightedInstance instance: Slot instance; its weights are replaced by the PF weights
    :param SystemParams params: Scenario
    :param str mode: `per_user_cap` or `sum_cap`
    :return: tuple (DataAllocation, PfState)
    """
    if mode not in MODES:
        raise ValueError('Unknown cap mode: {!r}'.format(mode))
    options = InnerOptions.from_params(params) if options is None else options
    weighted = WeightedInstance(pf_weights(state, params.pf_throughput_floor), instance.gains, instance.p_rad,
                                instance.power_budget, instance.n_max, params)
    if mode == 'per_user_cap':
        allocation = _solve_per_user_cap(weighted, per_user_backhaul_cap(params), options)
    else:
        allocation = _solve_sum_cap(weighted, sum_backhaul_cap(params), options)
    if not allocation.converged:
        logger.warning(
            'PF slot solved without convergence',
            extra={'MESSAGE_ID': 'solver_not_converged'}
        )
    return allocation, pf_update(state, allocation.rates)


class PfScheduler(object):

    mode = None

    def __init__(self, params):
        self.params = params
        self.options = InnerOptions.from_params(params)

    def run_slot(self, state):
        params = self.params
        pf = state.pf if state.pf is not None else PfState.zeros(params.num_data_users, params.pf_window)
        context = prepare_slot(state, params)
        if context.outage:
            data = DataAllocation.zeros(params.num_data_users)
            next_pf = pf_update(pf, data.rates)
        else:
            instance = WeightedInstance(np.ones(params.num_data_users), context.channels.data_gains,
                                        context.voice.p_rad, context.data_budget(params), params.n_max, params)
            data, next_pf = solve_pf_slot(pf, instance, params, self.mode, self.options)
        consumed, battery_after = settle_slot(state, context, data, params)
        result = SlotResult(context.slot, context.voice, data, 0.0, consumed, context.harvest,
                            state.battery.level, battery_after.level, outage=context.outage,
                            cap=per_user_backhaul_cap(params), duals=state.duals,
                            channels=context.channels)
        memo = None if context.outage else context.voice
        return result, state.evolve(battery=battery_after, voice=memo, pf=next_pf)

    def multipliers(self, state):
        size = self.params.num_data_users
        return np.zeros(size), np.zeros(size)


@implementer(IScheduler)
class PerUserCapPfScheduler(PfScheduler):

    name = 'pf-per-user'
    mode = 'per_user_cap'


@implementer(IScheduler)
class SumCapPfScheduler(PfScheduler):

    name = 'pf-sum'
    mode = 'sum_cap'
