# -*- coding: utf-8 -*-
import logging

import numpy as np

from greenran.scheduler.maximin.energy import traffic_budget_phi
from greenran.scheduler.maximin.utils import journal_context


logger = logging.getLogger(__name__)


class VoiceAllocation(object):

    """Voice powers for one slot; dropped users keep a zero entry in `powers`"""

    def __init__(self, powers, served, p_rad, gamma_used, dropped=frozenset()):
        self.powers = np.asarray(powers, dtype=float)
        self.served = frozenset(served)
        self.p_rad = p_rad
        self.gamma_used = gamma_used
        self.dropped = frozenset(dropped)

    @property
    def total_power(self):
        return float(self.powers.sum())

    def __repr__(self):
        return 'VoiceAllocation(served={}, p_rad={!r}, gamma_used={!r})'.format(
            sorted(self.served), self.p_rad, self.gamma_used)


class FeasibilityVerdict(object):

    def __init__(self, feasible, deficit=0.0):
        self.feasible = feasible
        self.deficit = deficit

    def __bool__(self):
        return self.feasible

    __nonzero__ = __bool__


def radiated_power_star(phi_budget, slot_duration, p_cpich):
    """Total radiated power when the traffic budget is spent in full"""
    if phi_budget < 0:
        raise ValueError('Traffic budget must be nonnegative: {!r}'.format(phi_budget))
    return phi_budget / slot_duration + p_cpich


def voice_power(h_k, p_rad, params, gamma=None):
    """Power that puts a voice user exactly at its target SINR"""
    gamma = params.gamma if gamma is None else gamma
    h_k = np.asarray(h_k, dtype=float)
    if np.any(h_k <= 0):
        raise ValueError('Channel gain must be strictly positive: {!r}'.format(h_k))
    power = gamma * (params.theta * p_rad * h_k + params.sigma2) / (params.m_v * h_k)
    return float(power) if power.ndim == 0 else power


def kappa_constants(num_served, params, gamma=None):
    gamma = params.gamma if gamma is None else gamma
    kappa1 = (params.m_v - num_served * params.theta * gamma) / (params.sigma2 * params.slot_duration * gamma)
    kappa2 = num_served * params.theta * params.p_cpich / params.sigma2
    return kappa1, kappa2


def _check_budget(gains, phi, params, gamma):
    if len(gains) == 0:
        return FeasibilityVerdict(True)
    kappa1, kappa2 = kappa_constants(len(gains), params, gamma)
    deficit = float(np.sum(1.0 / np.asarray(gains, dtype=float))) - (kappa1 * phi - kappa2)
    if deficit > 0:
        return FeasibilityVerdict(False, deficit)
    return FeasibilityVerdict(True)


def feasibility_check(voice_gains, battery, params, gamma=None):
    """
    Can every listed voice user reach its SINR target within this slot's budget

    Uses the closed inverse-gain form, which is the power-sum test
    `T_s * sum(voice powers) <= phi` rearranged.

    :return: verdict, truthy when feasible, with the dimensionless `deficit` otherwise
    :rtype: FeasibilityVerdict
    """
    return _check_budget(voice_gains, traffic_budget_phi(battery, params), params, gamma)


def feasibility_direct(voice_gains, battery, params, gamma=None):
    phi = traffic_budget_phi(battery, params)
    if len(voice_gains) == 0:
        return True
    if phi < 0:
        return False
    p_rad = radiated_power_star(phi, params.slot_duration, params.p_cpich)
    powers = voice_power(np.asarray(voice_gains, dtype=float), p_rad, params, gamma)
    return params.slot_duration * float(np.sum(powers)) <= phi


def _drop_worst(gains, candidates, phi, params, gamma):
    # candidates sorted by gain, worst first
    order = sorted(candidates, key=lambda k: (gains[k], k))
    while order and not _check_budget(gains[order], phi, params, gamma):
        order.pop(0)
    return order


def admit_voice(voice_gains, battery, params, policy=None, candidates=None):
    """
    Voice admission control and power allocation

    :param voice_gains: Channel gains of all configured voice users
    :param BatteryState battery: Battery at the start of the slot
    :param SystemParams params: Scenario
    :param str policy: `drop_worst` or `scale_gamma`, defaults to the scenario's policy
    :param candidates: Indices competing for admission, all users when omitted
    :rtype: VoiceAllocation
    """
    policy = params.voice_policy if policy is None else policy
    gains = np.asarray(voice_gains, dtype=float)
    candidates = list(range(len(gains))) if candidates is None else sorted(candidates)
    phi = max(traffic_budget_phi(battery, params), 0.0)
    gamma = params.gamma

    if policy == 'scale_gamma':
        floor = params.gamma_floor * params.gamma
        while candidates and not _check_budget(gains[candidates], phi, params, gamma):
            if gamma * params.gamma_scale_factor < floor:
                break
            gamma *= params.gamma_scale_factor
    elif policy != 'drop_worst':
        raise ValueError('Unknown voice policy: {!r}'.format(policy))

    served = _drop_worst(gains, candidates, phi, params, gamma)
    p_rad = radiated_power_star(phi, params.slot_duration, params.p_cpich)
    powers = np.zeros(len(gains))
    if served:
        powers[served] = voice_power(gains[served], p_rad, params, gamma)
    dropped = frozenset(candidates) - frozenset(served)
    if dropped:
        logger.info(
            'Dropped voice users {} at gamma {:.4g}'.format(sorted(dropped), gamma),
            extra=journal_context({'MESSAGE_ID': 'voice_dropped'}, {'SLOT': battery.slot})
        )
    elif gamma != params.gamma:
        logger.info(
            'Voice target reduced to {:.4g}'.format(gamma),
            extra=journal_context({'MESSAGE_ID': 'voice_admission'}, {'SLOT': battery.slot})
        )
    return VoiceAllocation(powers, served, p_rad, gamma, dropped)
