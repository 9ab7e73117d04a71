# -*- coding: utf-8 -*-
# Scenario keys that may be omitted from a config document.
SCENARIO_DEFAULTS = {
    'utility': 'log',
    'fading_correlation': 0.0,
    'seed': 0,
    'path_loss_exponent': 3.5,
    'path_loss_ref_db': '40 dB',
    'path_loss_ref_distance': '1 m',
    'voice_policy': 'drop_worst',
    'gamma_scale_factor': 0.9,
    'gamma_floor': 0.25,
    'voice_period_slots': 1,
    'rate_unit': '200 Kbps',
    'backhaul_step_scale': 0.04,
    'harvest_period': None,
    'pf_window': 500,
    'pf_throughput_floor': '1 bps',
    'inner_tol': 1e-6,
    'inner_max_outer': 2000,
    'inner_max_inner': 500,
    'inner_q': 1.0,
    'initial_battery': None,
}

# Rural deployment with three voice and six data users.
REFERENCE_SCENARIO = {
    'num_voice_users': 3,
    'num_data_users': 6,
    'p_bs_max': '9 dBm',
    'p_cpich': '4 dBm',
    'p_fixed': '3 dBm',
    'n_max': 15,
    'theta': 0.35,
    'm_v': 128,
    'm_d': 16,
    'gamma_over_m_v': '-13.7 dB',
    'sigma2': '-102 dBm',
    'chip_rate': '3.84 Mcps',
    'b_max': '410 uJ',
    'packet_energy': '30 uJ',
    'alpha': 0.3,
    'slot_duration': '2 ms',
    'r_bh': '2 Mbps',
    'r_bh_voice': '173 Kbps',
    'xi': 1.2,
    'epsilon': 1e-3,
    'harvest_prob': 0.8,
    'voice_distances': [80, 100, 120],
    'data_distances': [120, 145, 170, 195, 220, 245],
}

DEFAULTS = {
    'simulation': {
        'scheduler': 'stochastic',
        'slots': 10000,
        'seed': None,
        'grid_power': False,
        'stats_window': 0.1,
        'integer_codes': False,
        'svg': False,
        'out': 'results',
    },
    'sweep': {
        'workers': 4,
        'slots': 10000,
        'schedulers': ['stochastic'],
        'grid_power': False,
    },
}

SCHEDULER_PLUGINS_GROUP = 'greenran.scheduler.maximin.scheduler_plugins'

BUILTIN_SCHEDULERS = {
    'stochastic': 'greenran.scheduler.maximin.scheduler:StochasticScheduler',
    'pf-per-user': 'greenran.scheduler.maximin.baselines:PerUserCapPfScheduler',
    'pf-sum': 'greenran.scheduler.maximin.baselines:SumCapPfScheduler',
}

# Guard on the power price in the closed-form power allocation.
BETA_MIN = 1e-12

SWEEP_VARIABLES = ('r_bh', 'harvest_prob', 'alpha')
