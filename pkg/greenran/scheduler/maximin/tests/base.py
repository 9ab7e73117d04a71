# -*- coding: utf-8 -*-
import os
from copy import deepcopy

from yaml import safe_dump, safe_load

from greenran.scheduler.maximin.scenario import params_from_mapping


# Long statistical runs only happen when set; a value above the floors below lengthens them.
ACCEPTANCE_SLOTS = int(os.environ.get('ACCEPTANCE_SLOTS', '0'))
LONG_RUN_SLOTS = max(ACCEPTANCE_SLOTS, 50000)
BATTERY_RUN_SLOTS = max(ACCEPTANCE_SLOTS, 100000)
CONFIG_FILE = "{}/test.yml".format(os.path.dirname(__file__))
with open(CONFIG_FILE, 'r') as f:
    TEST_CONFIG = safe_load(f.read())


def scenario(**changes):
    """Copy of the test scenario mapping with some keys replaced"""
    mapping = deepcopy(TEST_CONFIG['main']['scenario'])
    mapping.update(changes)
    return mapping


def make_params(**changes):
    return params_from_mapping(scenario(**changes))


def scenario_text(**changes):
    return safe_dump(scenario(**changes))


def config_text(**changes):
    config = deepcopy(TEST_CONFIG)
    config['main']['scenario'].update(changes)
    return safe_dump(config)
