'''
Gaussian expectations by tensor Gauss-Hermite rules, with a Monte Carlo
fallback in higher dimensions.
'''

import functools
import itertools

import attr
import numpy as np
from scipy import linalg

from ..exceptions import CholeskyFailure, DimensionMismatch


DEFAULT_ORDER = 64
TENSOR_MAX_DIM = 3
# tensor rules above this many nodes are thinned by lowering the order
MAX_TENSOR_NODES = 200_000
MC_SAMPLES = 200_000


@attr.s(auto_attribs=True, frozen=True)
class Estimate:
    '''
        Numerical value with its standard error (0 for deterministic rules).
    '''
    value: float
    stderr: float = 0.0

    def __float__(self):
        return float(self.value)


@functools.lru_cache(maxsize=None)
def hermite_rule(order):
    '''
        Nodes and weights for E[g(Z)], Z ~ N(0, 1).
    '''
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / np.sqrt(2 * np.pi)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


@functools.lru_cache(maxsize=None)
def legendre_rule(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def cholesky(cov):
    cov = np.asarray(cov, dtype=float)
    try:
        return linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError:
        raise CholeskyFailure('covariance is not numerically positive definite')


def tensor_order(order, dim):
    while dim > 1 and order > 4 and order ** dim > MAX_TENSOR_NODES:
        order //= 2
    return order


def standard_rule(dim, order=DEFAULT_ORDER):
    '''
        Tensor rule (points (m, dim), weights (m,)) for N(0, I_dim).
    '''
    order = tensor_order(order, dim)
    nodes, weights = hermite_rule(order)
    points = np.array(list(itertools.product(nodes, repeat=dim)), dtype=float)
    tensor_weights = np.prod(
        np.array(list(itertools.product(weights, repeat=dim)), dtype=float), axis=1)
    return points.reshape(-1, dim), tensor_weights


def gaussian_rule(mean, cov, order=DEFAULT_ORDER):
    '''
        Rule (points, weights) for N(mean, cov).
    '''
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (mean.size, mean.size):
        raise DimensionMismatch(f'mean {mean.shape} and covariance {cov.shape}')
    points, weights = standard_rule(mean.size, order)
    return mean + points @ cholesky(cov).T, weights


def expectation(func, mean, cov, order=DEFAULT_ORDER, rng=None, samples=MC_SAMPLES):
    '''
        E[func(X)], X ~ N(mean, cov), func vectorized over rows.

        Up to TENSOR_MAX_DIM dimensions a tensor Gauss-Hermite rule is used,
        above that plain Monte Carlo with `samples` draws from `rng`.
    '''
    mean = np.asarray(mean, dtype=float)
    if mean.size <= TENSOR_MAX_DIM:
        points, weights = gaussian_rule(mean, cov, order)
        return Estimate(float(weights @ func(points)))
    if rng is None:
        rng = np.random.default_rng(0)
    chol = cholesky(cov)
    points = mean + rng.standard_normal((samples, mean.size)) @ chol.T
    values = func(points)
    return Estimate(float(values.mean()), float(values.std(ddof=1) / np.sqrt(samples)))
