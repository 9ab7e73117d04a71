# -*- coding: utf-8 -*-
import logging
from bisect import bisect_right


logger = logging.getLogger(__name__)


class HarvestProfile(object):

    """
    Harvesting probability as a function of the slot index

    Piecewise constant: each segment `(start_slot, prob)` holds until the next
    one starts. With `period` set the schedule repeats, which is how day and
    night cycles are described.
    """

    def __init__(self, segments, period=None):
        segments = sorted((int(start), float(prob)) for start, prob in segments)
        if not segments:
            raise ValueError('harvest profile needs at least one segment')
        if segments[0][0] != 0:
            raise ValueError('first harvest segment must start at slot 0')
        if len(set(start for start, _ in segments)) != len(segments):
            raise ValueError('harvest segments must start at distinct slots')
        for _, prob in segments:
            if not 0.0 <= prob <= 1.0:
                raise ValueError('prob out of [0,1]: {!r}'.format(prob))
        if period is not None and period <= segments[-1][0]:
            raise ValueError('harvest period must exceed the last segment start')
        self.segments = segments
        self.period = period
        self._starts = [start for start, _ in segments]

    @property
    def constant(self):
        return len(self.segments) == 1

    def __call__(self, slot):
        if self.period is not None:
            slot %= self.period
        return self.segments[bisect_right(self._starts, slot) - 1][1]

    def mean(self):
        """Time-average probability over one period, or the last value without a period"""
        if self.period is None:
            return self.segments[-1][1]
        ends = self._starts[1:] + [self.period]
        return sum((end - start) * prob for (start, prob), end in zip(self.segments, ends)) / float(self.period)

    def __repr__(self):
        return 'HarvestProfile({!r}, period={!r})'.format(self.segments, self.period)


class BatteryState(object):

    __slots__ = ('level', 'slot')

    def __init__(self, level, slot=0):
        if level < 0:
            raise ValueError('battery level must be nonnegative: {!r}'.format(level))
        self.level = float(level)
        self.slot = int(slot)

    def __repr__(self):
        return 'BatteryState(level={!r}, slot={!r})'.format(self.level, self.slot)


class HarvestSample(object):

    __slots__ = ('amount',)

    def __init__(self, amount):
        self.amount = float(amount)


def sample_harvest(prob, packet_energy, rng):
    """One Bernoulli harvesting draw: `packet_energy` with probability `prob`"""
    if not 0.0 <= prob <= 1.0:
        raise ValueError('prob out of [0,1]: {!r}'.format(prob))
    # one uniform per slot whatever prob is, so the stream stays aligned across profiles
    hit = rng.random() < prob
    return HarvestSample(packet_energy if hit else 0.0)


def slot_energy(p_cpich, p_bs, p_fixed, slot_duration):
    """Energy drawn by the station in one slot"""
    for name, value in (('p_cpich', p_cpich), ('p_bs', p_bs), ('p_fixed', p_fixed),
                        ('slot_duration', slot_duration)):
        if value < 0:
            raise ValueError('{} must be nonnegative: {!r}'.format(name, value))
    return slot_duration * (p_cpich + p_bs + p_fixed)


def energy_cap_g(battery, params):
    """Most energy the station may spend this slot"""
    return min(params.hardware_energy, params.alpha * battery.level)


def traffic_budget_phi(battery, params):
    """Energy left for voice and data once pilot and fixed consumption are paid; negative means outage"""
    return energy_cap_g(battery, params) - params.overhead_energy


def update_battery(battery, consumed, harvested, b_max):
    if consumed < 0 or harvested < 0:
        raise ValueError('consumed and harvested energy must be nonnegative: {!r}, {!r}'.format(consumed, harvested))
    level = min(max(battery.level - consumed + harvested, 0.0), b_max)
    return BatteryState(level, battery.slot + 1)


def expected_battery_lower_bound(prob, packet_energy, alpha):
    if alpha <= 0:
        raise ValueError('alpha must be strictly positive: {!r}'.format(alpha))
    return prob * packet_energy / alpha
