# -*- coding: utf-8 -*-
"""
Brute-force and analytic checks of the slot solver.

Nothing here is used on the scheduling path, and nothing is imported from the
solver module: the rate expression is written out again on purpose.
"""
import logging

import numpy as np

from greenran.scheduler.maximin.utils import InvalidAllocationError, OracleError


logger = logging.getLogger(__name__)

MAX_USERS = 3
MAX_EVALUATIONS = 1e8
FEASIBILITY_TOL = 1e-6


class GridSpec(object):

    def __init__(self, power_points, code_points, users):
        if power_points < 2 or code_points < 2:
            raise OracleError('Grid needs at least two points per axis')
        if not 1 <= users <= MAX_USERS:
            raise OracleError('Grid search supports 1 to {} users, got {}'.format(MAX_USERS, users))
        if float(power_points * code_points) ** users > MAX_EVALUATIONS:
            raise OracleError('Grid of {}x{} points for {} users is too large'.format(
                power_points, code_points, users))
        self.power_points = power_points
        self.code_points = code_points
        self.users = users

    @classmethod
    def parse(cls, text, users):
        """`"200x41"` -> 200 power points and 41 code points per user"""
        try:
            power_points, code_points = (int(part) for part in text.lower().split('x'))
        except ValueError:
            raise OracleError('Grid must read <power points>x<code points>: {!r}'.format(text))
        return cls(power_points, code_points, users)


class OracleResult(object):

    def __init__(self, powers, codes, objective):
        self.powers = powers
        self.codes = codes
        self.objective = objective


def _weighted_rate(weight, power, codes, gain, p_rad, params):
    """w * n * (W / M_D) * log2(1 + M_D * p * h / (n * (theta * P_rad * h + sigma2))), zero without codes"""
    power, codes = np.broadcast_arrays(np.asarray(power, dtype=float), np.asarray(codes, dtype=float))
    interference = params.theta * p_rad * gain + params.sigma2
    out = np.zeros(power.shape)
    mask = codes > 0
    sinr = params.m_d * power[mask] * gain / (codes[mask] * interference)
    out[mask] = weight * codes[mask] * (params.chip_rate / params.m_d) * np.log2(1.0 + sinr)
    return out


def _maxplus(previous, values):
    """Best total over all splits of the grid indices between earlier users and one more"""
    rows, cols = values.shape
    best = np.full((rows, cols), -np.inf)
    choice = np.zeros((rows, cols), dtype=int)
    for i in range(rows):
        for j in range(cols):
            candidate = previous[:rows - i, :cols - j] + values[i, j]
            better = candidate > best[i:, j:]
            best[i:, j:][better] = candidate[better]
            choice[i:, j:][better] = i * cols + j
    return best, choice


def brute_force_inner(instance, grid):
    """
    Exhaustive maximum of the slot objective over a uniform power x code grid

    Each user's power and codes sit on the grids `budget * i / (P - 1)` and
    `n_max * j / (C - 1)`; combinations whose index sums exceed the grid are
    infeasible, so the search runs as a max-plus recursion over users.
    """
    size = len(instance.weights)
    if size != grid.users:
        raise OracleError('Grid built for {} users, instance has {}'.format(grid.users, size))
    params = instance.params
    power_axis = np.linspace(0.0, instance.power_budget, grid.power_points)
    code_axis = np.linspace(0.0, instance.n_max, grid.code_points)
    p_grid, n_grid = np.meshgrid(power_axis, code_axis, indexing='ij')

    values = [_weighted_rate(instance.weights[k], p_grid, n_grid, instance.gains[k], instance.p_rad, params)
              for k in range(size)]
    total, choices = values[0], []
    for k in range(1, size):
        total, choice = _maxplus(total, values[k])
        choices.append(choice)

    cell = np.unravel_index(int(np.argmax(total)), total.shape)
    objective = float(total[cell])
    powers, codes = np.zeros(size), np.zeros(size)
    i, j = cell
    for k in range(size - 1, 0, -1):
        own_i, own_j = divmod(int(choices[k - 1][i, j]), grid.code_points)
        powers[k], codes[k] = power_axis[own_i], code_axis[own_j]
        i, j = i - own_i, j - own_j
    powers[0], codes[0] = power_axis[i], code_axis[j]
    return OracleResult(powers, codes, objective)


class KktReport(object):

    def __init__(self, power_residual, code_residual, power_slackness, code_slackness, power_slack,
                 code_slack, objective):
        self.power_residual = power_residual
        self.code_residual = code_residual
        self.power_slackness = power_slackness
        self.code_slackness = code_slackness
        self.power_slack = power_slack
        self.code_slack = code_slack
        self.objective = objective

    @property
    def stationarity(self):
        return max(self.power_residual, self.code_residual)


def _derivative(func, point, rel_step):
    step = rel_step * max(abs(point), np.finfo(float).eps)
    return (func(point + step) - func(point - step)) / (2.0 * step)


def kkt_report(instance, allocation, rel_step=1e-6):
    """
    Optimality residuals of an allocation at its own prices

    Stationarity is measured by centred finite differences of each user's
    Lagrangian term at interior coordinates, relative to the matching price.
    """
    params = instance.params
    powers, codes = np.asarray(allocation.powers, dtype=float), np.asarray(allocation.codes, dtype=float)
    power_slack = instance.power_budget - powers.sum()
    code_slack = instance.n_max - codes.sum()
    if (np.any(powers < 0) or np.any(codes < 0) or
            power_slack < -FEASIBILITY_TOL * max(instance.power_budget, np.finfo(float).tiny) or
            code_slack < -FEASIBILITY_TOL * instance.n_max):
        raise InvalidAllocationError('Allocation is not feasible: {!r}, {!r}'.format(powers, codes))
    beta, varphi = allocation.beta, allocation.varphi

    power_residual = code_residual = 0.0
    for k in np.flatnonzero((powers > 0) & (codes > 0)):
        w, h, p, n = instance.weights[k], instance.gains[k], powers[k], codes[k]

        def along_power(value):
            return float(_weighted_rate(w, value, n, h, instance.p_rad, params)) - beta * value

        def along_codes(value):
            return float(_weighted_rate(w, p, value, h, instance.p_rad, params)) - varphi * value

        power_residual = max(power_residual,
                             abs(_derivative(along_power, p, rel_step)) / max(beta, np.finfo(float).tiny))
        code_residual = max(code_residual,
                            abs(_derivative(along_codes, n, rel_step)) / max(varphi, np.finfo(float).tiny))

    objective = float(sum(_weighted_rate(instance.weights[k], powers[k], codes[k], instance.gains[k],
                                         instance.p_rad, params) for k in range(len(powers))))
    return KktReport(power_residual, code_residual, abs(beta * power_slack), abs(varphi * code_slack),
                     power_slack, code_slack, objective)


def sinr_direct(p_voice, p_rad, h_k, params, exact=True):
    """Voice SINR; the approximate form counts the user's own power as interference too"""
    p_voice = np.asarray(p_voice, dtype=float)
    own = p_voice if exact else 0.0
    sinr = params.m_v * p_voice * h_k / (params.theta * (p_rad - own) * h_k + params.sigma2)
    return float(sinr) if sinr.ndim == 0 else sinr


def random_instance(rng, users, params, n_max, instance_cls):
    """
    Random slot instance on the scenario's radio parameters

    Weights uniform in [0.1, 1], gains from a log-distance path loss at
    uniform distances times unit-mean exponential fading, and a data budget
    between 10% and 100% of the station's maximum power.
    """
    distances = rng.uniform(params.path_loss_ref_distance * 50.0, params.path_loss_ref_distance * 250.0, users)
    loss_db = params.path_loss_ref_db + 10.0 * params.path_loss_exponent * np.log10(
        distances / params.path_loss_ref_distance)
    gains = 10.0 ** (-loss_db / 10.0) * rng.exponential(1.0, users)
    budget = params.p_bs_max * rng.uniform(0.1, 1.0)
    weights = rng.uniform(0.1, 1.0, users)
    return instance_cls(weights, gains, budget + params.p_cpich, budget, n_max, params)


def oracle_gap(solver_objective, oracle_objective):
    """Relative shortfall of the solver against the grid, negative when the solver is better"""
    if oracle_objective <= 0:
        return 0.0 if solver_objective >= oracle_objective else float('inf')
    return (oracle_objective - solver_objective) / oracle_objective


