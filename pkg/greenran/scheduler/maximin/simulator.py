# -*- coding: utf-8 -*-
import argparse
import logging
import logging.config
import os
import sys
from copy import deepcopy

import numpy as np
from munch import munchify
from yaml import YAMLError, safe_load

from greenran.scheduler.maximin.constants import DEFAULTS, REFERENCE_SCENARIO
from greenran.scheduler.maximin.harness import SweepSpec, run_simulation, run_sweep, write_svg, write_sweep_csv
from greenran.scheduler.maximin.oracle import GridSpec, brute_force_inner, oracle_gap, random_instance
from greenran.scheduler.maximin.scenario import params_from_mapping
from greenran.scheduler.maximin.solver import InnerOptions, WeightedInstance, solve_inner
from greenran.scheduler.maximin.utils import OracleError, SchedulerConfigError


logger = logging.getLogger(__name__)


class MaximinSimulator(object):

    """Simulator driven by a config document with a `main` section"""

    def __init__(self, config):
        super(MaximinSimulator, self).__init__()
        main = config.get('main') if isinstance(config, dict) else None
        if not isinstance(main, dict):
            raise SchedulerConfigError("Config document needs a 'main' mapping")
        defaults = deepcopy(DEFAULTS['simulation'])
        defaults.update(main.get('simulation') or {})
        self.config = munchify(defaults)
        # Init config
        for key, value in defaults.items():
            setattr(self, key, value)
        if main.get('scenario') is None:
            raise SchedulerConfigError("Config document needs 'main.scenario'")
        self.params = params_from_mapping(main['scenario'])

    def run(self, scheduler=None, slots=None, seed=None, out=None, grid_power=None, svg=None, integer_codes=None):
        scheduler = self.scheduler if scheduler is None else scheduler
        seed = self.seed if seed is None else seed
        seed = self.params.seed if seed is None else seed
        out = self.out if out is None else out
        log = run_simulation(
            self.params, scheduler,
            self.slots if slots is None else slots,
            seed,
            grid_power=self.grid_power if grid_power is None else grid_power,
            integer_codes=self.integer_codes if integer_codes is None else integer_codes,
        )
        os.makedirs(out, exist_ok=True)
        prefix = '{}_{}'.format(scheduler, seed)
        log.write_csv(os.path.join(out, prefix + '.csv'))
        if self.svg if svg is None else svg:
            write_svg(log, out, prefix)
        summary = log.summary(self.stats_window)
        logger.info('Run {}: Jain {}, min average rate {:.1f} bps, sum {:.1f} bps, mean battery {:.4g} J'.format(
            prefix, summary['jain'], summary['min_avg_rate'], summary['sum_avg_rate'], summary['mean_battery']))
        return log

    def sweep(self, spec, seed=None, out=None, workers=None):
        seed = self.seed if seed is None else seed
        out = self.out if out is None else out
        os.makedirs(out, exist_ok=True)
        rows = run_sweep(spec, self.params, seed=seed, workers=workers, out=out)
        write_sweep_csv(rows, os.path.join(out, 'sweep_{}.csv'.format(spec.variable)))
        return rows


def oracle_check(params, users, grid, trials, seed, n_max):
    """Solver objective against the exhaustive grid on random instances; returns the per-trial gaps"""
    rng = np.random.default_rng(seed)
    options = InnerOptions.from_params(params)
    gaps = []
    for trial in range(trials):
        instance = random_instance(rng, users, params, n_max, WeightedInstance)
        solved = solve_inner(instance, options)
        found = brute_force_inner(instance, grid)
        gap = oracle_gap(solved.objective, found.objective)
        gaps.append(gap)
        logger.debug('Oracle trial {}: solver {!r}, grid {!r}'.format(trial, solved.objective, found.objective),
                     extra={'MESSAGE_ID': 'oracle_trial'})
        print('trial {:3d}  solver {:.6e}  grid {:.6e}  gap {:+.4%}'.format(
            trial, solved.objective, found.objective, gap))
    return gaps


def load_config(path):
    if not os.path.isfile(path):
        raise SchedulerConfigError('Config file not found: {}'.format(path))
    with open(path) as config_file_obj:
        try:
            return safe_load(config_file_obj.read())
        except YAMLError as e:
            raise SchedulerConfigError('Config document does not parse: {}'.format(e))


def configure_logging(config):
    if isinstance(config, dict) and 'version' in config:
        logging.config.dictConfig(config)
    else:
        logging.basicConfig(level=logging.INFO, format='%(asctime)s %(name)s %(levelname)s %(message)s')


def build_parser():
    parser = argparse.ArgumentParser(description='---- Maximin downlink scheduler simulator ----')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    run = commands.add_parser('run', help='Simulate one scheduler')
    run.add_argument('--config', required=True, help='Path to configuration file')
    run.add_argument('--scheduler', help='Registered scheduler name')
    run.add_argument('--slots', type=int)
    run.add_argument('--seed', type=int)
    run.add_argument('--out', help='Output directory')
    run.add_argument('--grid-power', action='store_true', default=None, help='Keep the battery full')
    run.add_argument('--svg', action='store_true', default=None, help='Also write SVG charts')
    run.add_argument('--integer-codes', action='store_true', default=None, help='Report integer code shares')

    sweep = commands.add_parser('sweep', help='Sweep one scenario parameter')
    sweep.add_argument('--spec', required=True, help='Path to sweep document')
    sweep.add_argument('--config', required=True, help='Path to configuration file')
    sweep.add_argument('--seed', type=int)
    sweep.add_argument('--out', help='Output directory')
    sweep.add_argument('--workers', type=int,
                       help='Pool size; greenlets share one thread, so points run one after another in order')

    check = commands.add_parser('oracle-check', help='Compare the slot solver with exhaustive search')
    check.add_argument('--users', type=int, default=2)
    check.add_argument('--grid', default='200x41', help='<power points>x<code points>')
    check.add_argument('--trials', type=int, default=20)
    check.add_argument('--seed', type=int, default=0)
    check.add_argument('--n-max', type=float, default=4.0, help='Code budget of the random instances')
    check.add_argument('--config', help='Scenario for the radio parameters')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else None
        configure_logging(config)
        if args.command == 'oracle-check':
            params = MaximinSimulator(config).params if config else params_from_mapping(REFERENCE_SCENARIO)
            oracle_check(params, args.users, GridSpec.parse(args.grid, args.users), args.trials, args.seed,
                         args.n_max)
        elif args.command == 'run':
            MaximinSimulator(config).run(args.scheduler, args.slots, args.seed, args.out, args.grid_power,
                                         args.svg, args.integer_codes)
        else:
            with open(args.spec) as spec_file_obj:
                spec = SweepSpec.load(spec_file_obj.read())
            MaximinSimulator(config).sweep(spec, args.seed, args.out, args.workers)
    except (SchedulerConfigError, OracleError, IOError) as e:
        logger.error('Config error: {}'.format(e), extra={'MESSAGE_ID': 'exceptions'})
        return 2
    return 0


##############################################################

if __name__ == "__main__":
    sys.exit(main())
