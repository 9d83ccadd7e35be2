'''
Weak type (1,1) quotients alpha * gamma{H_* f > alpha} by Monte Carlo over
the invariant measure, and the large time level sets in polar coordinates.
'''

import math

import attr
import numpy as np
from scipy import optimize, stats

from . import geometry
from .exceptions import BudgetExceeded, ModelError, NoRoot
from .mehler import KernelSpec, kappa_transition
from .model import SpectralParams, covariance_matrix
from .semigroup import TGrid
from .tech import parallel
from .tech.rng import chunk_sizes, stream
from .zones import cell_grid, check_large_alpha, smm_c


CHUNK = 20_000
MAX_BUDGET = 10 ** 8
# the proposal covers R <= PROPOSAL_FACTOR * log(max alpha / |f|_1)
PROPOSAL_FACTOR = 2.0
DIAGONAL_ATOL = 1e-13
CAP_ORDER = 16
SALPHA_XTOL = 1e-14


@attr.s(auto_attribs=True, frozen=True, eq=False)
class LevelSetReport:
    alphas: np.ndarray
    measures: np.ndarray
    stderrs: np.ndarray
    # gamma{R > proposal level}, added to every measure
    tail: float
    samples: int

    @property
    def quotients(self):
        return self.alphas * self.measures

    @property
    def slope(self):
        '''
            Least squares slope of log quotient against log alpha.
        '''
        if len(self.alphas) < 2:
            return math.nan
        return float(np.polyfit(np.log(self.alphas), np.log(self.quotients), 1)[0])


def _alphas(alphas):
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or not alphas.size or not np.all(alphas > 1):
        raise ValueError('levels must be a nonempty list of numbers above 1')
    if np.any(np.diff(alphas) <= 0):
        raise ValueError('levels must increase')
    return alphas


def _check_budget(budget):
    if budget > MAX_BUDGET:
        raise BudgetExceeded(f'budget {budget} above {MAX_BUDGET}')
    if budget < 1:
        raise ValueError(f'budget must be positive, got {budget}')
    return int(budget)


def _truncated_chi2(rng, dof, low, high, size):
    '''
        Draws of chi^2_dof conditioned on [low, high].
    '''
    upper, lower = stats.chi2.sf(low, dof), stats.chi2.sf(high, dof)
    return stats.chi2.isf(lower + (upper - lower) * (1 - rng.uniform(size=size)), dof)


def _whitened(rng, dof, low, high, size):
    '''
        Standard normal vectors with |z|^2 conditioned on [low, high].
    '''
    directions = rng.standard_normal((size, dof))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * np.sqrt(_truncated_chi2(rng, dof, low, high, size))[:, None]


def _scan(maximal, chol, alphas, norm, budget, seed, threads):
    '''
        gamma{maximal > alpha} with gamma = N(0, chol chol^T) restricted to
        R <= PROPOSAL_FACTOR log(max alpha / |f|_1), plus the analytic tail.

        The proposal only depends on alpha / |f|_1, so scaling f and the
        levels together leaves the report unchanged.
    '''
    dim = chol.shape[0]
    if norm <= 0:
        zeros = np.zeros_like(alphas)
        return LevelSetReport(alphas, zeros, zeros, tail=0.0, samples=budget)
    limit = 2 * PROPOSAL_FACTOR * max(math.log(alphas[-1] / norm), 1.0)
    inside = float(stats.chi2.cdf(limit, dim))
    sizes = chunk_sizes(budget, CHUNK)

    def count(task):
        chunk, size = task
        x = _whitened(stream(seed, chunk), dim, 0.0, limit, size) @ chol.T
        values = maximal(x)
        return (values[:, None] > alphas).sum(axis=0)

    hits = np.sum(parallel.map_tasks(count, enumerate(sizes), threads), axis=0)
    p = hits / budget
    tail = float(stats.chi2.sf(limit, dim))
    return LevelSetReport(
        alphas=alphas, measures=inside * p + tail,
        stderrs=inside * np.sqrt(p * (1 - p) / budget), tail=tail, samples=budget)


def kappa_maximal(spec, f, x, grid):
    '''
        max over the grid of H^kappa_t f(x), for x of shape (m, n).
    '''
    best = np.zeros(len(x))
    for t in grid.points:
        log_mass, mean, var = kappa_transition(spec.lambdas, spec.kappa, t, x)
        best = np.maximum(best, np.exp(log_mass) * f.expectation(mean, var))
    return best


def drift_maximal(model, f, x, grid):
    '''
        max over the grid of H_t f(x) = E f(e^{tB} x + Y), Y ~ N(0, Q_t) with
        Q_t diagonal.
    '''
    best = np.zeros(len(x))
    for t in grid.points:
        cov = covariance_matrix(model, t)
        var = np.diag(cov)
        if np.abs(cov - np.diag(var)).max() > DIAGONAL_ATOL * var.max():
            raise ModelError('weak type scans need a diagonal Q_t: decompose the model first')
        mean = x @ model.drift_exp(t).T
        best = np.maximum(best, f.expectation(mean, np.broadcast_to(var, mean.shape)))
    return best


def kappa_weak_type_scan(spec, f, alphas, mc_budget, seed=0, grid=None, threads=1):
    '''
        Level sets of sup_t H^kappa_t f over gamma_inf with the rates of `spec`.
    '''
    alphas = _alphas(alphas)
    budget = _check_budget(mc_budget)
    grid = TGrid.default() if grid is None else grid
    chol = np.diag(1 / np.sqrt(2 * spec.lambdas))
    return _scan(
        lambda x: kappa_maximal(spec, f, x, grid), chol, alphas, f.norm(), budget, seed,
        threads)


def weak_type_scan(model, f, alphas, mc_budget, seed=0, grid=None, threads=1):
    '''
        Level sets of H_* f over gamma_inf.

        Diagonal models take the kappa = 1 route, so a kappa = 1 scan with
        the same seed gives the same report.
    '''
    if model.is_diagonal:
        spec = KernelSpec(SpectralParams.from_model(model), 1.0)
        return kappa_weak_type_scan(spec, f, alphas, mc_budget, seed, grid, threads)
    alphas = _alphas(alphas)
    budget = _check_budget(mc_budget)
    grid = TGrid.default() if grid is None else grid
    chol = np.linalg.cholesky(model.stationary_covariance)
    return _scan(
        lambda x: drift_maximal(model, f, x, grid), chol, alphas, f.norm(), budget, seed,
        threads)


# large times

def _global_params(params, k):
    return params if params.n == k else params.head(k)


def _cap_support(f, nu, order):
    '''
        Quadrature of f dgamma^k over u_loc in the dilated cell, origin dropped.
    '''
    points, weights = f.quadrature_points(order)
    keep = weights > 0
    if f.k < f.n:
        keep &= cell_grid(f.k, f.n, nu).in_cell(points[:, f.k:], nu, geometry.DILATE)
    keep &= np.any(points[:, :f.k] != 0, axis=1)
    return points[keep, :f.k], weights[keep]


def cap_integral(xi_tilde, f, beta, params, c=None, nu=(), order=CAP_ORDER):
    '''
        int exp(-c |xi~ - eta~|^2) f(u) dgamma^k(u), eta~ the projection of
        eta on E_beta along the dilations; over points xi_tilde of E_beta.
    '''
    head = _global_params(params, f.k)
    c = smm_c(head) if c is None else c
    xi_tilde = np.atleast_2d(np.asarray(xi_tilde, dtype=float))
    eta, weights = _cap_support(f, nu, order)
    if not len(eta):
        return np.zeros(len(xi_tilde))
    eta_tilde = geometry.polar_decompose(eta, beta, head).xi_tilde
    gaps = ((xi_tilde[:, None, :] - eta_tilde[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-c * gaps) @ weights


def salpha_from_integral(integral, xi_tilde, alpha, params):
    '''
        s with exp(R(e^{lambda s} xi~)) * integral = alpha.
    '''
    if not integral > 0:
        raise NoRoot('the cap integral vanishes: f misses the cap')
    xi_tilde = np.asarray(xi_tilde, dtype=float)
    beta = float(geometry.quadratic_form(params, xi_tilde))
    target = math.log(alpha / integral)
    ratio = math.log(target / beta)
    low, high = sorted([ratio / (2 * params.lambda_max), ratio / (2 * params.lambda_min)])
    if low == high:
        return low

    def residual(s):
        dilated = geometry.dilation(params, s, xi_tilde)
        return float(geometry.quadratic_form(params, dilated)) - target

    return optimize.brentq(residual, low, high, xtol=SALPHA_XTOL)


def salpha_solve(xi_tilde, f, alpha, params, c=None, nu=()):
    '''
        s_alpha(xi~) for xi~ on E_{log alpha}.
    '''
    head = _global_params(params, f.k)
    check_large_alpha(alpha, head)
    integral = float(cap_integral(xi_tilde, f, math.log(alpha), head, c, nu)[0])
    return salpha_from_integral(integral, xi_tilde, alpha, head)


@attr.s(auto_attribs=True, frozen=True)
class LargeTimeReport:
    alpha: float
    measure: float
    stderr: float
    samples: int

    @property
    def quotient(self):
        return self.alpha * self.measure

    @property
    def bound_ratio(self):
        '''
            alpha sqrt(log alpha) gamma^k(A)
        '''
        return self.quotient * math.sqrt(math.log(self.alpha))


def large_t_levelset(model, f, alpha, mc_budget, seed=0, nu=None, c=None, threads=1):
    '''
        gamma^k(A(alpha)), A(alpha) the points of crown x C_nu with
        s > s_alpha(xi~), polar coordinates at level log(alpha).

        s > s_alpha implies R(xi) > log(alpha): the sampling law is gamma^k
        conditioned on log(alpha) < R <= 2 log(alpha).
    '''
    params = model if isinstance(model, SpectralParams) else SpectralParams.from_model(model)
    k = f.k
    head = _global_params(params, k)
    nu = tuple(int(i) for i in (nu if nu is not None else [0] * (f.n - k)))
    check_large_alpha(alpha, head)
    budget = _check_budget(mc_budget)
    beta = math.log(alpha)
    c = smm_c(head) if c is None else c
    lambdas = np.asarray(head.lambdas)

    def count(task):
        chunk, size = task
        xi = _whitened(stream(seed, chunk), k, 2 * beta, 4 * beta, size) / np.sqrt(2 * lambdas)
        polar = geometry.polar_decompose(xi, beta, head)
        integral = cap_integral(polar.xi_tilde, f, beta, head, c, nu)
        # s > s_alpha  <=>  exp(R(xi)) * integral > alpha
        with np.errstate(divide='ignore'):
            log_integral = np.log(integral)
        return int((geometry.quadratic_form(head, xi) + log_integral > beta).sum())

    hits = sum(parallel.map_tasks(count, enumerate(chunk_sizes(budget, CHUNK)), threads))
    shell = float(stats.chi2.sf(2 * beta, k) - stats.chi2.sf(4 * beta, k))
    local = 1.0
    if k < f.n:
        low, high = cell_grid(k, f.n, nu).cell(nu)
        local = float(np.prod(high - low))
    p = hits / budget
    scale = shell * local
    return LargeTimeReport(
        alpha=float(alpha), measure=scale * p, stderr=scale * math.sqrt(p * (1 - p) / budget),
        samples=budget)
