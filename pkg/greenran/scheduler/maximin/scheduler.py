# -*- coding: utf-8 -*-
import logging
from importlib import import_module

import numpy as np
from zope.interface import implementer

from greenran.scheduler.maximin.constants import BUILTIN_SCHEDULERS, SCHEDULER_PLUGINS_GROUP
from greenran.scheduler.maximin.energy import (
    BatteryState,
    energy_cap_g,
    sample_harvest,
    slot_energy,
    traffic_budget_phi,
    update_battery
)
from greenran.scheduler.maximin.interfaces import IScheduler
from greenran.scheduler.maximin.scenario import FadingProcess, make_streams, sample_channels
from greenran.scheduler.maximin.solver import DataAllocation, InnerOptions, WeightedInstance, round_codes, solve_inner
from greenran.scheduler.maximin.utils import InvalidAllocationError, SchedulerConfigError, journal_context
from greenran.scheduler.maximin.voice import VoiceAllocation, admit_voice

try:
    from importlib.metadata import entry_points
except ImportError:  # pragma: no cover
    entry_points = None


logger = logging.getLogger(__name__)
ENERGY_TOL = 1e-9


class DualState(object):

    __slots__ = ('lam', 'mu')

    def __init__(self, lam, mu):
        self.lam = np.asarray(lam, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        if np.any(self.lam < 0) or np.any(self.mu < 0):
            raise ValueError('Multipliers must be nonnegative')

    @classmethod
    def zeros(cls, size):
        return cls(np.zeros(size), np.zeros(size))

    @property
    def weights(self):
        return self.lam - self.mu


class SlotResult(object):

    """Everything that happened in one scheduling period; rates and caps in bits/s"""

    def __init__(self, slot, voice, data, s_star, consumed, harvested, battery_before, battery_after,
                 outage=False, cap=None, duals=None, reported=None, channels=None):
        self.slot = slot
        self.channels = channels
        self.voice = voice
        self.data = data
        self.s_star = s_star
        self.consumed = consumed
        self.harvested = harvested
        self.battery_before = battery_before
        self.battery_after = battery_after
        self.outage = outage
        self.cap = cap
        # multipliers after this slot's update
        self.duals = duals
        # integer-code view of `data`, reporting only
        self.reported = reported

    @property
    def rates(self):
        return self.data.rates

    @property
    def dropped_voice(self):
        return self.voice.dropped

    @property
    def converged(self):
        return self.data.converged


class SchedulerState(object):

    """
    State carried from slot to slot

    The fading process and both random streams are shared with the next state
    and advance in place; battery, multipliers and the voice memo are replaced.
    """

    def __init__(self, battery, duals, fading, channel_rng, harvest_rng, grid_power=False,
                 integer_codes=False, voice=None, pf=None):
        self.battery = battery
        self.duals = duals
        self.fading = fading
        self.channel_rng = channel_rng
        self.harvest_rng = harvest_rng
        self.grid_power = grid_power
        self.integer_codes = integer_codes
        self.voice = voice
        self.pf = pf

    @classmethod
    def initial(cls, params, seed=None, grid_power=False, integer_codes=False):
        seed = params.seed if seed is None else seed
        channel_rng, harvest_rng = make_streams(seed)
        fading = FadingProcess.from_params(params, channel_rng)
        level = params.b_max if grid_power else params.initial_battery
        return cls(BatteryState(level, 0), DualState.zeros(params.num_data_users), fading,
                   channel_rng, harvest_rng, grid_power=grid_power, integer_codes=integer_codes)

    def evolve(self, **changes):
        fields = dict(self.__dict__)
        fields.update(changes)
        return SchedulerState(**fields)


def per_user_backhaul_cap(params):
    """Data backhaul left after voice, split evenly over data users with overhead"""
    spare = params.r_bh - params.r_bh_voice
    if spare <= 0:
        raise ValueError('Backhaul leaves nothing for data: {!r}'.format(spare))
    return spare / (params.xi * params.num_data_users)


def target_rate_s_star(duals, cap, utility='log'):
    if utility != 'log':
        raise ValueError('Unsupported utility: {!r}'.format(utility))
    total = float(np.sum(duals.lam))
    if total <= 0:
        return cap
    return min(max(1.0 / total, 0.0), cap)


def update_duals(duals, s_star, rates, cap, epsilon, mu_epsilon=None):
    """
    Projected noisy-gradient step of both multipliers

    `mu_epsilon` is the backhaul multiplier's own step, `epsilon` when omitted.
    """
    mu_epsilon = epsilon if mu_epsilon is None else mu_epsilon
    if epsilon <= 0 or mu_epsilon <= 0:
        raise ValueError('Steps must be strictly positive: {!r}, {!r}'.format(epsilon, mu_epsilon))
    rates = np.asarray(rates, dtype=float)
    return DualState(np.maximum(duals.lam + epsilon * (s_star - rates), 0.0),
                     np.maximum(duals.mu + mu_epsilon * (rates - cap), 0.0))


class SlotContext(object):

    """Channel, energy and voice picture of a slot, shared by all schedulers"""

    def __init__(self, slot, channels, g, phi, voice, harvest, outage):
        self.slot = slot
        self.channels = channels
        self.g = g
        self.phi = phi
        self.voice = voice
        self.harvest = harvest
        self.outage = outage

    def data_budget(self, params):
        return max(self.phi / params.slot_duration - self.voice.total_power, 0.0)


def _slot_voice(state, channels, params):
    battery = state.battery
    memo = state.voice
    if memo is not None and battery.slot % params.voice_period_slots != 0:
        phi = traffic_budget_phi(battery, params)
        if params.slot_duration * memo.total_power <= phi:
            # frozen between epochs: same powers, radiated power follows the budget
            return VoiceAllocation(memo.powers, memo.served, phi / params.slot_duration + params.p_cpich,
                                   memo.gamma_used, memo.dropped)
    return admit_voice(channels.voice_gains, battery, params)


def prepare_slot(state, params):
    """Channels, harvest draw, energy budget and voice allocation of the coming slot"""
    battery = state.battery
    channels = sample_channels(state.fading, state.channel_rng)
    harvest = sample_harvest(params.harvest_prob(battery.slot), params.packet_energy, state.harvest_rng)
    g = energy_cap_g(battery, params)
    phi = g - params.overhead_energy
    if phi < 0:
        logger.warning(
            'Outage: battery {:.4g} J cannot pay pilot and fixed consumption'.format(battery.level),
            extra=journal_context({'MESSAGE_ID': 'outage_slot'}, {'SLOT': battery.slot})
        )
        voice = VoiceAllocation(np.zeros(params.num_voice_users), (), 0.0, params.gamma,
                                dropped=range(params.num_voice_users))
        return SlotContext(battery.slot, channels, g, phi, voice, harvest.amount, True)
    voice = _slot_voice(state, channels, params)
    return SlotContext(battery.slot, channels, g, phi, voice, harvest.amount, False)


def settle_slot(state, context, data, params):
    """
    Energy bookkeeping and battery update for a slot whose allocation is decided

    :return: tuple (consumed energy, next battery)
    """
    battery = state.battery
    if context.outage:
        consumed = min(battery.level, params.overhead_energy)
    else:
        consumed = slot_energy(params.p_cpich, context.voice.total_power + data.total_power,
                               params.p_fixed, params.slot_duration)
        if consumed > context.g * (1.0 + ENERGY_TOL):
            raise InvalidAllocationError('Slot {} spends {!r} J above its cap {!r} J'.format(
                battery.slot, consumed, context.g))
        consumed = min(consumed, context.g)
    if state.grid_power:
        return consumed, BatteryState(params.b_max, battery.slot + 1)
    return consumed, update_battery(battery, consumed, context.harvest, params.b_max)


def run_slot(state, params, options=None):
    """
    One pass of the stochastic maximin algorithm

    :param SchedulerState state: State at the start of the slot
    :param SystemParams params: Scenario
    :param InnerOptions options: Inner solver stopping rules
    :return: tuple (SlotResult, next SchedulerState)
    """
    options = InnerOptions.from_params(params) if options is None else options
    context = prepare_slot(state, params)
    duals = state.duals
    if context.outage:
        data = DataAllocation.zeros(params.num_data_users)
    else:
        instance = WeightedInstance(duals.weights, context.channels.data_gains, context.voice.p_rad,
                                    context.data_budget(params), params.n_max, params)
        data = solve_inner(instance, options)
        if not data.converged:
            logger.warning(
                'Slot solved without convergence, keeping the scaled best iterate',
                extra=journal_context({'MESSAGE_ID': 'solver_not_converged'}, {'SLOT': context.slot})
            )
    reported = None
    if state.integer_codes and not context.outage:
        reported = round_codes(data, instance)

    # the multiplier recursion runs in rate units; per-slot rates overshoot the
    # cap by an order of magnitude, so the backhaul multiplier takes a smaller step
    unit = params.rate_unit
    cap = per_user_backhaul_cap(params)
    s_star = target_rate_s_star(duals, cap / unit, params.utility)
    next_duals = update_duals(duals, s_star, data.rates / unit, cap / unit, params.epsilon,
                              params.epsilon * params.backhaul_step_scale)

    consumed, battery_after = settle_slot(state, context, data, params)
    result = SlotResult(context.slot, context.voice, data, s_star * unit, consumed, context.harvest,
                        state.battery.level, battery_after.level, outage=context.outage, cap=cap,
                        duals=next_duals, reported=reported, channels=context.channels)
    memo = None if context.outage else context.voice
    return result, state.evolve(battery=battery_after, duals=next_duals, voice=memo)


@implementer(IScheduler)
class StochasticScheduler(object):

    name = 'stochastic'

    def __init__(self, params):
        self.params = params
        self.options = InnerOptions.from_params(params)

    def run_slot(self, state):
        return run_slot(state, self.params, self.options)

    def multipliers(self, state):
        return state.duals.lam, state.duals.mu


def _load_object(path):
    module_name, _, attribute = path.partition(':')
    return getattr(import_module(module_name), attribute)


def load_scheduler(name):
    """Scheduler class registered under `name`, installed plugins first"""
    if entry_points is not None:
        try:
            found = entry_points(group=SCHEDULER_PLUGINS_GROUP, name=name)
        except TypeError:  # pragma: no cover
            found = [ep for ep in entry_points().get(SCHEDULER_PLUGINS_GROUP, ()) if ep.name == name]
        for entry_point in found:
            return entry_point.load()
    if name in BUILTIN_SCHEDULERS:
        return _load_object(BUILTIN_SCHEDULERS[name])
    raise SchedulerConfigError("Unknown scheduler '{}'".format(name))


def scheduler_names():
    names = set(BUILTIN_SCHEDULERS)
    if entry_points is not None:
        try:
            names.update(ep.name for ep in entry_points(group=SCHEDULER_PLUGINS_GROUP))
        except TypeError:  # pragma: no cover
            names.update(ep.name for ep in entry_points().get(SCHEDULER_PLUGINS_GROUP, ()))
    return sorted(names)
