# -*- coding: utf-8 -*-
"""
Per-slot weighted-rate allocation of data powers and codes.

The objective `sum(w_k * n_k * c * log2(1 + a_k * p_k / n_k))` is positively
homogeneous in each user's (p_k, n_k), so for a power price `beta` every user
has a best per-code power `x_k(beta)` and per-code net value `G_k(beta)`.
Codes go to the users whose net value is largest and the code price `varphi`
equals that value. The price `beta` is found by a one dimensional search and
the allocation is then recovered with the alternating power/code passes.
"""
import logging
from math import log, sqrt

import numpy as np

from greenran.scheduler.maximin.constants import BETA_MIN
from greenran.scheduler.maximin.utils import InvalidAllocationError, SolverError, journal_context


logger = logging.getLogger(__name__)

LN2 = log(2.0)
TIE_TOL = 1e-9


def code_bandwidth(params):
    """Symbol rate carried by one data code, W / M_D"""
    return params.chip_rate / params.m_d


def per_code_gain(gains, p_rad, params):
    """M_D * h / (theta * P_rad * h + sigma2), the SNR per watt on one code"""
    gains = np.asarray(gains, dtype=float)
    return params.m_d * gains / (params.theta * p_rad * gains + params.sigma2)


def rate_of(p, n, h, p_rad, params):
    """
    Data rate in bits/s of users transmitting power `p` over `n` codes

    Vectorised over users. `n == 0` yields zero rate and is only valid with `p == 0`.
    """
    p = np.asarray(p, dtype=float)
    n = np.asarray(n, dtype=float)
    if np.any(p < 0) or np.any(n < 0):
        raise ValueError('Powers and codes must be nonnegative: {!r}, {!r}'.format(p, n))
    if np.any((n == 0) & (p > 0)):
        raise InvalidAllocationError('Positive power on zero codes: {!r}, {!r}'.format(p, n))
    a = per_code_gain(h, p_rad, params)
    safe_n = np.where(n > 0, n, 1.0)
    rate = np.where(n > 0, n * code_bandwidth(params) * np.log1p(a * p / safe_n) / LN2, 0.0)
    return float(rate) if rate.ndim == 0 else rate


class WeightedInstance(object):

    def __init__(self, weights, gains, p_rad, power_budget, n_max, params):
        self.weights = np.asarray(weights, dtype=float)
        self.gains = np.asarray(gains, dtype=float)
        if self.weights.shape != self.gains.shape:
            raise ValueError('weights and gains must have equal length')
        if power_budget < 0:
            raise ValueError('power_budget must be nonnegative: {!r}'.format(power_budget))
        if n_max <= 0:
            raise ValueError('n_max must be strictly positive: {!r}'.format(n_max))
        if np.any(self.gains <= 0) or not np.all(np.isfinite(self.gains)):
            raise ValueError('gains must be positive and finite: {!r}'.format(self.gains))
        self.p_rad = float(p_rad)
        self.power_budget = float(power_budget)
        self.n_max = float(n_max)
        self.params = params
        self.bandwidth = code_bandwidth(params)
        self.snr_gain = per_code_gain(self.gains, self.p_rad, params)

    @property
    def size(self):
        return self.weights.size

    def objective(self, powers, codes):
        return float(np.dot(self.weights, rate_of(powers, codes, self.gains, self.p_rad, self.params)))

    def restrict(self, users, power_budget=None, n_max=None):
        """Sub-instance over `users`, optionally with other budgets"""
        users = np.asarray(users, dtype=int)
        return WeightedInstance(
            self.weights[users], self.gains[users], self.p_rad,
            self.power_budget if power_budget is None else power_budget,
            self.n_max if n_max is None else n_max, self.params
        )


class DataAllocation(object):

    def __init__(self, powers, codes, rates, beta=0.0, varphi=0.0, objective=0.0, iterations=0,
                 converged=True, eta=None):
        self.powers = np.asarray(powers, dtype=float)
        self.codes = np.asarray(codes, dtype=float)
        self.rates = np.asarray(rates, dtype=float)
        self.beta = beta
        self.varphi = varphi
        self.objective = objective
        self.iterations = iterations
        self.converged = converged
        # per-user rate-cap multipliers, set by the capped baselines
        self.eta = eta

    @classmethod
    def zeros(cls, size, beta=0.0, converged=True):
        return cls(np.zeros(size), np.zeros(size), np.zeros(size), beta=beta, converged=converged)

    @property
    def total_power(self):
        return float(self.powers.sum())

    @property
    def total_codes(self):
        return float(self.codes.sum())

    def __repr__(self):
        return 'DataAllocation(objective={!r}, beta={!r}, varphi={!r}, converged={!r})'.format(
            self.objective, self.beta, self.varphi, self.converged)


class InnerOptions(object):

    """Stopping rules of `solve_inner`; `beta_init` is relative to the largest useful power price"""

    def __init__(self, tol=1e-6, max_outer=2000, max_inner=500, q_scale=1.0, beta_init=1.0, varphi_init=0.0):
        self.tol = tol
        self.max_outer = max_outer
        self.max_inner = max_inner
        self.q_scale = q_scale
        self.beta_init = beta_init
        self.varphi_init = varphi_init

    @classmethod
    def from_params(cls, params):
        return cls(tol=params.inner_tol, max_outer=params.inner_max_outer,
                   max_inner=params.inner_max_inner, q_scale=params.inner_q)


def per_code_power(instance, beta):
    """Water level minus inverse per-code SNR, floored at zero; zero for nonpositive weights"""
    w = instance.weights
    positive = w > 0
    x = np.zeros(instance.size)
    x[positive] = np.maximum(
        w[positive] * instance.bandwidth / (LN2 * beta) - 1.0 / instance.snr_gain[positive], 0.0)
    return x


def per_code_value(instance, beta, x=None):
    """Weighted rate minus power cost of one code carrying power `x`"""
    x = per_code_power(instance, beta) if x is None else x
    return instance.weights * instance.bandwidth * np.log1p(instance.snr_gain * x) / LN2 - beta * x


def optimal_power_given_codes(instance, codes, beta):
    if beta < BETA_MIN:
        raise SolverError('beta below {}: {!r}'.format(BETA_MIN, beta))
    codes = np.asarray(codes, dtype=float)
    return codes * per_code_power(instance, beta)


def _per_code_snr(kappa, max_iter, tol):
    """
    Solve ln(1 + u) - u / (1 + u) = kappa for u > 0, elementwise

    Newton steps kept inside the bracket [e^kappa - 1, e^(kappa + 1) - 1].
    """
    lo = np.expm1(kappa)
    hi = np.expm1(kappa + 1.0)
    u = lo.copy()
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        residual = np.log1p(u) - u / (1.0 + u) - kappa
        lo = np.where(residual < 0, u, lo)
        hi = np.where(residual > 0, u, hi)
        slope = u / (1.0 + u) ** 2
        with np.errstate(divide='ignore', invalid='ignore'):
            step = np.where(slope > 0, u - residual / slope, np.nan)
        inside = np.isfinite(step) & (step > lo) & (step < hi)
        new_u = np.where(inside, step, 0.5 * (lo + hi))
        change = np.abs(new_u - u) / np.maximum(np.abs(new_u), np.finfo(float).tiny)
        u = new_u
        if np.all(change < tol):
            converged = True
            break
    return u, iterations, converged


def optimal_codes_fixed_point(instance, powers, codes_init, varphi, max_iter=500, tol=1e-6):
    """
    Codes that make each user's code derivative vanish at price `varphi`

    The stationarity condition fixes the per-code SNR `u = a * p / n`, which is
    solved for directly; the codes follow as `n = a * p / u`. A user whose
    incoming iterate is not profitable at `varphi` (zero or negative
    denominator of the code update) gets no codes. With `varphi == 0` codes are
    free and a powered user takes the whole code budget.

    :return: tuple (codes, iterations, converged)
    """
    powers = np.asarray(powers, dtype=float)
    codes_init = np.asarray(codes_init, dtype=float)
    w, a, c = instance.weights, instance.snr_gain, instance.bandwidth
    codes = np.zeros(instance.size)
    active = (powers > 0) & (w > 0)
    if not np.any(active):
        return codes, 0, True

    # denominator guard on the incoming iterate
    incoming = codes_init > 0
    u0 = np.where(incoming, a * powers / np.where(incoming, codes_init, 1.0), 0.0)
    denominator = w * c * np.log1p(u0) / LN2 - varphi
    active &= ~(incoming & (denominator <= 0))
    if varphi <= 0:
        codes[active] = instance.n_max
        return codes, 0, True
    if not np.any(active):
        return codes, 0, True

    kappa = LN2 * varphi / (w[active] * c)
    u, iterations, converged = _per_code_snr(kappa, max_iter, tol)
    codes[active] = a[active] * powers[active] / u
    if not converged:
        logger.warning(
            'Code fixed point stopped after {} iterations'.format(iterations),
            extra={'MESSAGE_ID': 'solver_not_converged'}
        )
    return codes, iterations, converged


def update_inner_duals(beta, varphi, powers, codes, instance, iter_index, q_scale=1.0):
    """Projected supergradient step on the power and code prices with step Q / sqrt(q)"""
    if iter_index < 1:
        raise ValueError('iter_index must be at least 1: {!r}'.format(iter_index))
    gradient = np.array([np.sum(powers) - instance.power_budget, np.sum(codes) - instance.n_max])
    norm = np.linalg.norm(gradient)
    if norm == 0:
        return beta, varphi
    step = q_scale / sqrt(iter_index) / norm
    return max(0.0, beta + step * gradient[0]), max(0.0, varphi + step * gradient[1])


def _winners(values):
    best = values.max()
    return np.flatnonzero(values >= best - TIE_TOL * max(abs(best), np.finfo(float).tiny))


def _mix_codes(instance, x, winners):
    """Split the code budget over tied users so that the spent power equals the budget"""
    codes = np.zeros(instance.size)
    n_max, target = instance.n_max, instance.power_budget / instance.n_max
    xs = x[winners]
    if xs.max() - xs.min() <= TIE_TOL * xs.max():
        codes[winners] = n_max / winners.size
        return codes
    mean = xs.mean()
    extreme = winners[np.argmax(xs)] if target >= mean else winners[np.argmin(xs)]
    share = (x[extreme] - target) / (x[extreme] - mean)
    share = min(max(share, 0.0), 1.0)
    codes[winners] = share * n_max / winners.size
    codes[extreme] += (1.0 - share) * n_max
    return codes


def _price_search(instance, options):
    """
    Power price that minimises the dual function

    Tries each user's single-winner closed form first; otherwise runs the
    supergradient recursion inside a shrinking bracket, bisecting whenever a
    step leaves it. Returns (beta, winners, iterations, converged).
    """
    w, a, c = instance.weights, instance.snr_gain, instance.bandwidth
    budget, n_max = instance.power_budget, instance.n_max
    positive = np.flatnonzero(w > 0)
    beta_hi = float(np.max(w[positive] * c * a[positive] / LN2))

    candidates = w[positive] * c * a[positive] / (LN2 * (1.0 + a[positive] * budget / n_max))
    bounds = [beta * budget + n_max * per_code_value(instance, beta)[k] for beta, k in zip(candidates, positive)]
    best = int(np.argmax(bounds))
    beta = float(candidates[best])
    winners = _winners(per_code_value(instance, beta))
    if positive[best] in winners:
        return beta, winners, 0, True

    lo, hi = BETA_MIN / beta_hi, 1.0
    scaled = min(max(options.beta_init, lo), hi)
    for q in range(1, options.max_outer + 1):
        beta = scaled * beta_hi
        x = per_code_power(instance, beta)
        winners = _winners(per_code_value(instance, beta, x))
        spend = n_max * x[winners]
        if spend.min() <= budget <= spend.max():
            return beta, winners, q, True
        if hi - lo <= TIE_TOL * hi:
            # crossing point of two value curves: the winners on both sides share the codes
            edges = [_winners(per_code_value(instance, edge * beta_hi)) for edge in (lo, hi)]
            return beta, np.union1d(np.union1d(edges[0], edges[1]), winners), q, True
        powers = np.zeros(instance.size)
        codes = np.zeros(instance.size)
        lead = winners[0]
        powers[lead], codes[lead] = spend[0], n_max
        if spend.max() < budget:
            hi = scaled
        else:
            lo = scaled
        scaled, _ = update_inner_duals(scaled, 0.0, powers, codes, instance, q, options.q_scale)
        if not lo < scaled < hi:
            scaled = 0.5 * (lo + hi)
    beta = scaled * beta_hi
    return beta, _winners(per_code_value(instance, beta)), options.max_outer, False


def _finish(instance, powers, codes, beta, varphi, iterations, converged):
    """Scale onto both budgets and compute rates"""
    powers = np.where(codes > 0, powers, 0.0)
    codes = np.where(powers > 0, codes, 0.0)
    total_power, total_codes = powers.sum(), codes.sum()
    if total_power > 0:
        powers = powers * (instance.power_budget / total_power)
    if total_codes > 0:
        codes = codes * (instance.n_max / total_codes)
    rates = rate_of(powers, codes, instance.gains, instance.p_rad, instance.params)
    objective = float(np.dot(instance.weights, rates))
    return DataAllocation(powers, codes, rates, beta=beta, varphi=varphi, objective=objective,
                          iterations=iterations, converged=converged)


def solve_inner(instance, options=None):
    """
    Maximise the weighted data rate of one slot

    :param WeightedInstance instance: Weights, gains and budgets of the slot
    :param InnerOptions options: Stopping rules
    :rtype: DataAllocation
    """
    options = InnerOptions() if options is None else options
    if instance.size == 0 or not np.any(instance.weights > 0):
        return DataAllocation.zeros(instance.size)
    if instance.power_budget <= 0:
        beta_hi = float(np.max(instance.weights * instance.bandwidth * instance.snr_gain / LN2))
        return DataAllocation.zeros(instance.size, beta=beta_hi)

    beta, winners, outer, converged = _price_search(instance, options)
    x = per_code_power(instance, beta)
    varphi = max(float(per_code_value(instance, beta, x).max()), 0.0)
    codes = _mix_codes(instance, x, winners)

    # alternate the closed-form power and the code fixed point at the final prices
    inner_converged = False
    for step in range(options.max_inner):
        powers = optimal_power_given_codes(instance, codes, beta)
        new_codes, _, _ = optimal_codes_fixed_point(instance, powers, codes, varphi, options.max_inner, options.tol)
        scale = np.maximum(np.abs(new_codes), np.finfo(float).tiny)
        change = float(np.max(np.abs(new_codes - codes) / scale)) if np.any(new_codes > 0) else 0.0
        codes = new_codes
        if change < options.tol:
            inner_converged = True
            break
    powers = optimal_power_given_codes(instance, codes, beta)
    if not np.any(powers > 0):
        # recovery lost every user; fall back to the mixed split
        codes = _mix_codes(instance, x, winners)
        powers = codes * x

    allocation = _finish(instance, powers, codes, beta, varphi, outer, converged and inner_converged)
    if not allocation.converged:
        logger.warning(
            'Inner solver stopped without convergence after {} price iterations'.format(outer),
            extra={'MESSAGE_ID': 'solver_not_converged'}
        )
    return allocation


def round_codes(allocation, instance):
    """
    Integer codes for reporting

    Floors the continuous codes and hands the leftover whole codes out one at a
    time to the user with the largest weighted rate gain. Users left without a
    code lose their power.
    """
    powers = allocation.powers.copy()
    codes = np.floor(allocation.codes + 1e-9)
    leftover = int(np.floor(instance.n_max + 1e-9) - codes.sum())
    powered = powers > 0

    def weighted_rate(k, n):
        if n == 0:
            return 0.0
        return instance.weights[k] * rate_of(powers[k], n, instance.gains[k], instance.p_rad, instance.params)

    for _ in range(max(leftover, 0)):
        gains = [weighted_rate(k, codes[k] + 1) - weighted_rate(k, codes[k]) if powered[k] else -np.inf
                 for k in range(instance.size)]
        if not gains or max(gains) == -np.inf:
            break
        codes[int(np.argmax(gains))] += 1
    powers[codes == 0] = 0.0
    rates = rate_of(powers, codes, instance.gains, instance.p_rad, instance.params)
    return DataAllocation(powers, codes, rates, beta=allocation.beta, varphi=allocation.varphi,
                          objective=float(np.dot(instance.weights, rates)),
                          iterations=allocation.iterations, converged=allocation.converged, eta=allocation.eta)
