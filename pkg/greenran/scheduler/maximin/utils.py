# -*- coding: utf-8 -*-
import re
from uuid import uuid4


class SchedulerConfigError(Exception):
    pass


class SolverError(Exception):
    pass


class InvalidAllocationError(ValueError):
    pass


class OracleError(Exception):
    pass


def journal_context(record=None, params=None):
    record = {} if record is None else record
    for k, v in (params or {}).items():
        record["JOURNAL_" + k] = v
    return record


def generate_run_id():
    return 'maximin-run-' + uuid4().hex


def db_to_linear(value_db):
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm):
    return db_to_linear(value_dbm) * 1e-3


UNITS = {
    'power': {
        'W': lambda x: x,
        'mW': lambda x: x * 1e-3,
        'uW': lambda x: x * 1e-6,
        u'μW': lambda x: x * 1e-6,
        'dBm': dbm_to_watts,
        'dBW': db_to_linear,
    },
    'ratio': {
        'dB': db_to_linear,
    },
    'decibel': {
        'dB': lambda x: x,
    },
    'time': {
        's': lambda x: x,
        'ms': lambda x: x * 1e-3,
        'us': lambda x: x * 1e-6,
        u'μs': lambda x: x * 1e-6,
    },
    'energy': {
        'J': lambda x: x,
        'mJ': lambda x: x * 1e-3,
        'uJ': lambda x: x * 1e-6,
        u'μJ': lambda x: x * 1e-6,
        'nJ': lambda x: x * 1e-9,
    },
    'rate': {
        'bps': lambda x: x,
        'Kbps': lambda x: x * 1e3,
        'kbps': lambda x: x * 1e3,
        'Mbps': lambda x: x * 1e6,
        'Gbps': lambda x: x * 1e9,
    },
    'frequency': {
        'Hz': lambda x: x,
        'kHz': lambda x: x * 1e3,
        'MHz': lambda x: x * 1e6,
        'cps': lambda x: x,
        'kcps': lambda x: x * 1e3,
        'Mcps': lambda x: x * 1e6,
    },
    'distance': {
        'm': lambda x: x,
        'km': lambda x: x * 1e3,
    },
}

QUANTITY_RE = re.compile(r'^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$', re.UNICODE)


def parse_quantity(key, value, dimension=None):
    """
    Convert a config value to SI

    :param str key: Config key, used in error messages
    :param value: Plain number (taken as SI) or string "<number> <suffix>"
    :param str dimension: One of the keys of `UNITS`, None for plain numbers
    :return: float in SI units
    """
    if isinstance(value, bool):
        raise SchedulerConfigError("Invalid value for '{}': {!r}".format(key, value))
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise SchedulerConfigError("Invalid value for '{}': {!r}".format(key, value))
    match = QUANTITY_RE.match(value)
    if match is None:
        raise SchedulerConfigError("Invalid value for '{}': {!r}".format(key, value))
    number, suffix = float(match.group(1)), match.group(2)
    if not suffix:
        return number
    converter = UNITS.get(dimension, {}).get(suffix)
    if converter is None:
        raise SchedulerConfigError("Unknown unit suffix '{}' for '{}'".format(suffix, key))
    return converter(number)
