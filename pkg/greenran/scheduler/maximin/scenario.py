# -*- coding: utf-8 -*-
import logging
from copy import deepcopy

import numpy as np
from yaml import YAMLError, safe_load

from greenran.scheduler.maximin.constants import SCENARIO_DEFAULTS
from greenran.scheduler.maximin.energy import HarvestProfile
from greenran.scheduler.maximin.utils import SchedulerConfigError, journal_context, parse_quantity


logger = logging.getLogger(__name__)

# key -> unit dimension understood by `parse_quantity`
KEY_DIMENSIONS = {
    'p_bs_max': 'power',
    'p_cpich': 'power',
    'p_fixed': 'power',
    'theta': None,
    'm_v': None,
    'm_d': None,
    'gamma': 'ratio',
    'gamma_over_m_v': 'ratio',
    'sigma2': 'power',
    'chip_rate': 'frequency',
    'b_max': 'energy',
    'packet_energy': 'energy',
    'alpha': None,
    'slot_duration': 'time',
    'r_bh': 'rate',
    'r_bh_voice': 'rate',
    'xi': None,
    'epsilon': None,
    'fading_correlation': None,
    'path_loss_exponent': None,
    'path_loss_ref_db': 'decibel',
    'path_loss_ref_distance': 'distance',
    'gamma_scale_factor': None,
    'gamma_floor': None,
    'rate_unit': 'rate',
    'backhaul_step_scale': None,
    'pf_window': None,
    'pf_throughput_floor': 'rate',
    'inner_tol': None,
    'inner_q': None,
    'initial_battery': 'energy',
}
COUNT_KEYS = ('num_voice_users', 'num_data_users', 'n_max', 'seed', 'voice_period_slots',
              'inner_max_outer', 'inner_max_inner', 'harvest_period')
SPECIAL_KEYS = ('utility', 'voice_policy', 'harvest_prob', 'voice_distances', 'data_distances')
REQUIRED_KEYS = (
    'num_voice_users', 'num_data_users', 'p_bs_max', 'p_cpich', 'p_fixed', 'n_max', 'theta', 'm_v',
    'm_d', 'sigma2', 'chip_rate', 'b_max', 'packet_energy', 'alpha', 'slot_duration', 'r_bh',
    'r_bh_voice', 'xi', 'epsilon', 'harvest_prob', 'voice_distances', 'data_distances'
)
KNOWN_KEYS = frozenset(KEY_DIMENSIONS) | frozenset(COUNT_KEYS) | frozenset(SPECIAL_KEYS)
UTILITIES = ('log',)
VOICE_POLICIES = ('drop_worst', 'scale_gamma')


class SystemParams(object):

    """Physical and protocol constants of one scenario, in SI units"""

    def __init__(self, **fields):
        self.source = fields.pop('source', {})
        for key, value in fields.items():
            setattr(self, key, value)
        self.validate()

    def _check(self, condition, message, key):
        if not condition:
            raise SchedulerConfigError('{}: {!r}'.format(message, getattr(self, key)))

    def validate(self):
        for key in ('p_bs_max', 'p_cpich', 'p_fixed', 'sigma2', 'chip_rate', 'b_max', 'packet_energy',
                    'slot_duration', 'r_bh', 'gamma', 'epsilon', 'rate_unit', 'pf_throughput_floor',
                    'inner_tol', 'inner_q'):
            self._check(getattr(self, key) > 0, '{} must be strictly positive'.format(key), key)
        self._check(self.r_bh_voice >= 0, 'r_bh_voice must be nonnegative', 'r_bh_voice')
        self._check(0.0 <= self.alpha <= 1.0, 'alpha out of [0,1]', 'alpha')
        self._check(0.0 < self.backhaul_step_scale <= 1.0, 'backhaul_step_scale out of (0,1]',
                    'backhaul_step_scale')
        self._check(self.xi >= 1.0, 'xi must be at least 1', 'xi')
        self._check(0.0 <= self.theta <= 1.0, 'theta out of [0,1]', 'theta')
        self._check(0.0 <= self.fading_correlation < 1.0, 'fading_correlation out of [0,1)',
                    'fading_correlation')
        self._check(self.r_bh > self.r_bh_voice, 'r_bh must exceed r_bh_voice', 'r_bh')
        self._check(self.num_data_users >= 1, 'num_data_users must be at least 1', 'num_data_users')
        self._check(self.num_voice_users >= 0, 'num_voice_users must be nonnegative', 'num_voice_users')
        self._check(self.n_max > 0, 'n_max must be strictly positive', 'n_max')
        self._check(self.m_d > 0, 'm_d must be strictly positive', 'm_d')
        self._check(self.m_v > self.num_voice_users * self.theta * self.gamma,
                    'm_v must exceed num_voice_users * theta * gamma', 'm_v')
        self._check(len(self.voice_distances) == self.num_voice_users,
                    'voice_distances must list one distance per voice user', 'voice_distances')
        self._check(len(self.data_distances) == self.num_data_users,
                    'data_distances must list one distance per data user', 'data_distances')
        self._check(self.path_loss_ref_distance > 0, 'path_loss_ref_distance must be strictly positive',
                    'path_loss_ref_distance')
        for key in ('voice_distances', 'data_distances'):
            self._check(all(d >= self.path_loss_ref_distance for d in getattr(self, key)),
                        '{} must not be below path_loss_ref_distance'.format(key), key)
        self._check(0.0 < self.gamma_scale_factor < 1.0, 'gamma_scale_factor out of (0,1)',
                    'gamma_scale_factor')
        self._check(0.0 < self.gamma_floor <= 1.0, 'gamma_floor out of (0,1]', 'gamma_floor')
        self._check(self.voice_period_slots >= 1, 'voice_period_slots must be at least 1', 'voice_period_slots')
        self._check(self.pf_window > 1, 'pf_window must exceed 1', 'pf_window')
        self._check(0.0 <= self.initial_battery <= self.b_max, 'initial_battery out of [0,b_max]',
                    'initial_battery')
        self._check(self.utility in UTILITIES, 'utility must be one of {}'.format(UTILITIES), 'utility')
        self._check(self.voice_policy in VOICE_POLICIES, 'voice_policy must be one of {}'.format(VOICE_POLICIES),
                    'voice_policy')

    @property
    def hardware_energy(self):
        """T_s * (P_CPICH + P^max_BS + P_c)"""
        return self.slot_duration * (self.p_cpich + self.p_bs_max + self.p_fixed)

    @property
    def overhead_energy(self):
        """T_s * (P_CPICH + P_c), spent whenever the station is on"""
        return self.slot_duration * (self.p_cpich + self.p_fixed)

    def override(self, **changes):
        """Re-load with some config keys replaced; values use config notation"""
        mapping = deepcopy(self.source)
        mapping.update(changes)
        return params_from_mapping(mapping)


def _parse_count(key, value):
    if value is None and key == 'harvest_period':
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise SchedulerConfigError("Invalid value for '{}': {!r}".format(key, value))
    return int(value)


def _parse_harvest(value, period):
    if isinstance(value, (list, tuple)):
        try:
            segments = [(int(start), float(prob)) for start, prob in value]
        except (TypeError, ValueError):
            raise SchedulerConfigError("Invalid value for 'harvest_prob': {!r}".format(value))
    else:
        segments = [(0, parse_quantity('harvest_prob', value))]
    try:
        return HarvestProfile(segments, period=period)
    except ValueError as e:
        raise SchedulerConfigError("Invalid value for 'harvest_prob': {}".format(e))


def params_from_mapping(mapping):
    """
    Build `SystemParams` from a flat key-value mapping in config notation

    :param dict mapping: Scenario keys, values as numbers or "<number> <unit>" strings
    :return: Validated parameters in SI units
    :rtype: SystemParams
    """
    if not isinstance(mapping, dict):
        raise SchedulerConfigError('Scenario document must be a mapping')
    unknown = sorted(set(mapping) - KNOWN_KEYS)
    if unknown:
        raise SchedulerConfigError("Unknown key '{}'".format(unknown[0]))
    for key in REQUIRED_KEYS:
        if key not in mapping:
            raise SchedulerConfigError("Missing required key '{}'".format(key))
    if ('gamma' in mapping) == ('gamma_over_m_v' in mapping):
        raise SchedulerConfigError("Exactly one of 'gamma' and 'gamma_over_m_v' is required")

    raw = deepcopy(SCENARIO_DEFAULTS)
    raw.update(mapping)
    fields = {'source': deepcopy(mapping)}
    for key in COUNT_KEYS:
        fields[key] = _parse_count(key, raw[key])
    for key, dimension in KEY_DIMENSIONS.items():
        if key in raw and raw[key] is not None:
            fields[key] = parse_quantity(key, raw[key], dimension)
    if 'gamma_over_m_v' in fields:
        fields['gamma'] = fields.pop('gamma_over_m_v') * fields['m_v']
    if fields.get('initial_battery') is None:
        fields['initial_battery'] = fields['b_max']
    fields['utility'] = raw['utility']
    fields['voice_policy'] = raw['voice_policy']
    for key in ('voice_distances', 'data_distances'):
        if not isinstance(raw[key], (list, tuple)):
            raise SchedulerConfigError("Invalid value for '{}': {!r}".format(key, raw[key]))
        fields[key] = tuple(parse_quantity(key, d, 'distance') for d in raw[key])
    if fields['harvest_period'] is not None and fields['harvest_period'] < 1:
        raise SchedulerConfigError("Invalid value for 'harvest_period': {!r}".format(fields['harvest_period']))
    fields['harvest_prob'] = _parse_harvest(raw['harvest_prob'], fields['harvest_period'])
    return SystemParams(**fields)


def load_params(config_text):
    """
    Parse a scenario document

    Accepts either the flat scenario mapping itself or a full config document
    carrying it under `main.scenario`.
    """
    try:
        document = safe_load(config_text)
    except YAMLError as e:
        raise SchedulerConfigError('Config document does not parse: {}'.format(e))
    if isinstance(document, dict) and isinstance(document.get('main'), dict):
        document = document['main'].get('scenario')
    params = params_from_mapping(document)
    logger.info(
        'Loaded scenario with {} voice and {} data users'.format(params.num_voice_users, params.num_data_users),
        extra=journal_context({'MESSAGE_ID': 'load_params'}, {'SEED': params.seed})
    )
    return params


def path_loss_gain(distance, exponent, ref_loss_db, ref_distance):
    """Log-distance path loss as a linear power gain"""
    distance = np.asarray(distance, dtype=float)
    if ref_distance <= 0:
        raise ValueError('ref_distance must be strictly positive: {!r}'.format(ref_distance))
    if np.any(distance < ref_distance):
        raise ValueError('distance below ref_distance {}: {!r}'.format(ref_distance, distance))
    loss_db = ref_loss_db + 10.0 * exponent * np.log10(distance / ref_distance)
    gain = 10.0 ** (-loss_db / 10.0)
    return float(gain) if gain.ndim == 0 else gain


def make_streams(seed):
    """Independent generators for the channel and harvesting processes"""
    channel_seq, harvest_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(channel_seq), np.random.default_rng(harvest_seq)


class ChannelSnapshot(object):

    def __init__(self, slot, voice_gains, data_gains):
        self.slot = slot
        self.voice_gains = np.array(voice_gains, dtype=float)
        self.data_gains = np.array(data_gains, dtype=float)
        if not (np.all(np.isfinite(self.voice_gains)) and np.all(self.voice_gains > 0) and
                np.all(np.isfinite(self.data_gains)) and np.all(self.data_gains > 0)):
            raise ValueError('Channel gains must be positive and finite')
        self.voice_gains.flags.writeable = False
        self.data_gains.flags.writeable = False


class FadingProcess(object):

    """First-order autoregressive Rayleigh fading over static path loss"""

    def __init__(self, voice_path_gains, data_path_gains, correlation, rng):
        self.num_voice = len(voice_path_gains)
        self.path_gains = np.concatenate([np.asarray(voice_path_gains, dtype=float),
                                          np.asarray(data_path_gains, dtype=float)])
        self.correlation = float(correlation)
        # stationary start: unit-power circular gaussian
        self.state = self._innovation(rng, self.path_gains.size)
        self.slot = 0

    @staticmethod
    def _innovation(rng, size):
        draws = rng.standard_normal((2, size)) * np.sqrt(0.5)
        return draws[0] + 1j * draws[1]

    @classmethod
    def from_params(cls, params, rng):
        voice = path_loss_gain(params.voice_distances, params.path_loss_exponent,
                               params.path_loss_ref_db, params.path_loss_ref_distance)
        data = path_loss_gain(params.data_distances, params.path_loss_exponent,
                              params.path_loss_ref_db, params.path_loss_ref_distance)
        return cls(np.atleast_1d(voice) if params.num_voice_users else [], np.atleast_1d(data),
                   params.fading_correlation, rng)

    def advance(self, rng):
        rho = self.correlation
        self.state = rho * self.state + np.sqrt(1.0 - rho * rho) * self._innovation(rng, self.state.size)
        self.slot += 1
        return self.state


def sample_channels(process, rng):
    """Advance the fading process one slot and emit the channel gains h_k"""
    slot = process.slot
    envelope = process.advance(rng)
    power = np.maximum(np.abs(envelope) ** 2, np.finfo(float).tiny)
    gains = process.path_gains * power
    return ChannelSnapshot(slot, gains[:process.num_voice], gains[process.num_voice:])
