'''
Nonnegative test functions normalized in L^1 of the mixed measure
gamma^k_inf: the invariant Gaussian in the first k coordinates and
Lebesgue measure in the remaining (local) ones.
'''

import enum
import itertools
import math

import attr
import numpy as np
from scipy import special

from .exceptions import DimensionMismatch
from .model import readonly_array
from .tech import quadrature


# a bump is negligible beyond this many widths
BUMP_SUPPORT_WIDTHS = 6.0
DEFAULT_POINTS_ORDER = 16


class Kind(enum.Enum):
    GAUSSIAN_BUMP = 'gaussian-bump'
    INDICATOR_BOX = 'indicator-box'
    ATOM_CLOUD = 'atom-cloud'


def _centers(value):
    return readonly_array(np.atleast_2d(np.asarray(value, dtype=float)))


def _gaussian_density(lambdas, k, u):
    '''
        Density of gamma^k_inf (product of 1D Gaussians over the first k coordinates).
    '''
    lam = lambdas[:k]
    return np.exp((0.5 * np.log(lam / math.pi) - lam * u[..., :k] ** 2).sum(axis=-1))


@attr.s(auto_attribs=True, frozen=True, eq=False)
class TestFunction:
    '''
        f(u) = scale * sum_i weights_i * phi(u - centers_i)
    '''
    __test__ = False

    kind: Kind
    centers: np.ndarray = attr.ib(converter=_centers)
    width: float
    weights: np.ndarray = attr.ib(converter=readonly_array)
    lambdas: np.ndarray = attr.ib(converter=readonly_array)
    k: int
    scale: float

    def __attrs_post_init__(self):
        m, n = self.centers.shape
        if self.weights.shape != (m,) or self.lambdas.shape != (n,):
            raise DimensionMismatch('centers, weights and rates do not fit together')
        if not 0 <= self.k <= n:
            raise DimensionMismatch(f'global dimension {self.k} out of range for n={n}')
        if self.kind is not Kind.ATOM_CLOUD and not self.width > 0:
            raise ValueError(f'width must be positive, got {self.width}')

    @property
    def n(self):
        return self.centers.shape[1]

    @classmethod
    def _normalized(cls, kind, centers, width, lambdas, k, weights):
        centers = _centers(centers)
        lambdas = np.broadcast_to(np.asarray(lambdas, dtype=float), centers.shape[1:])
        k = centers.shape[1] if k is None else k
        weights = np.ones(len(centers)) if weights is None else np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        raw = cls(kind, centers, float(width), weights, lambdas, k, 1.0)
        return attr.evolve(raw, scale=1 / raw.norm())

    @classmethod
    def gaussian_bump(cls, centers, width, lambdas, k=None, weights=None):
        return cls._normalized(Kind.GAUSSIAN_BUMP, centers, width, lambdas, k, weights)

    @classmethod
    def indicator_box(cls, centers, width, lambdas, k=None, weights=None):
        '''
            Indicator of the cube with half-side `width` around each center.
        '''
        return cls._normalized(Kind.INDICATOR_BOX, centers, width, lambdas, k, weights)

    @classmethod
    def atom_cloud(cls, centers, lambdas, k=None, weights=None):
        '''
            Weighted point masses: f dgamma^k = sum_i weights_i delta_{centers_i}.
        '''
        return cls._normalized(Kind.ATOM_CLOUD, centers, 0.0, lambdas, k, weights)

    @classmethod
    def create(cls, kind, centers, width, lambdas, k=None):
        kind = Kind(kind)
        if kind is Kind.ATOM_CLOUD:
            return cls.atom_cloud(centers, lambdas, k)
        return cls._normalized(kind, centers, width, lambdas, k, None)

    def scaled(self, factor):
        return attr.evolve(self, scale=self.scale * factor)

    def norm(self):
        '''
            int f dgamma^k_inf
        '''
        if self.kind is Kind.ATOM_CLOUD:
            return self.scale * float(self.weights.sum())
        k = self.k
        v = 1 / (2 * self.lambdas[:k])
        c_global, c_local = self.centers[:, :k], self.centers[:, k:]
        w = self.width
        if self.kind is Kind.GAUSSIAN_BUMP:
            factors = np.prod(
                np.exp(-c_global ** 2 / (w ** 2 + 2 * v)) / np.sqrt(1 + 2 * v / w ** 2), axis=1)
            local = (w * math.sqrt(math.pi)) ** (self.n - k)
        else:
            sd = np.sqrt(v)
            factors = np.prod(
                special.ndtr((c_global + w) / sd) - special.ndtr((c_global - w) / sd), axis=1)
            local = (2 * w) ** (self.n - k)
        return self.scale * float(self.weights @ factors) * local

    def __call__(self, points):
        if self.kind is Kind.ATOM_CLOUD:
            raise TypeError('an atom cloud has no pointwise values')
        points = np.asarray(points, dtype=float)
        diff = points[..., None, :] - self.centers
        if self.kind is Kind.GAUSSIAN_BUMP:
            phi = np.exp(-(diff ** 2).sum(axis=-1) / self.width ** 2)
        else:
            phi = np.all(np.abs(diff) <= self.width, axis=-1).astype(float)
        return (phi @ self.weights) * self.scale

    def expectation(self, mean, var):
        '''
            E f(U) for U ~ N(mean, diag(var)), broadcast over leading axes.

            For an atom cloud this is the matching limit: the sum of
            weights_i times the density of U at centers_i over the
            invariant density there.
        '''
        mean = np.asarray(mean, dtype=float)[..., None, :]
        var = np.asarray(var, dtype=float)[..., None, :]
        diff = mean - self.centers
        if self.kind is Kind.GAUSSIAN_BUMP:
            spread = self.width ** 2 + 2 * var
            phi = np.prod(np.exp(-diff ** 2 / spread) / np.sqrt(2 * var / self.width ** 2 + 1),
                          axis=-1)
        elif self.kind is Kind.INDICATOR_BOX:
            sd = np.sqrt(var)
            phi = np.prod(
                special.ndtr((self.width - diff) / sd) - special.ndtr((-self.width - diff) / sd),
                axis=-1)
        else:
            log_u = (-0.5 * np.log(2 * math.pi * var) - diff ** 2 / (2 * var)).sum(axis=-1)
            phi = np.exp(log_u) / _gaussian_density(self.lambdas, self.k, self.centers)
        return (phi @ self.weights) * self.scale

    def support_box(self):
        '''
            (low, high) corners of the box holding the support (per center).
        '''
        if self.kind is Kind.ATOM_CLOUD:
            return self.centers, self.centers
        half = self.width * (
            BUMP_SUPPORT_WIDTHS if self.kind is Kind.GAUSSIAN_BUMP else 1.0)
        return self.centers - half, self.centers + half

    def quadrature_points(self, order=DEFAULT_POINTS_ORDER):
        '''
            Points and weights with sum_i w_i g(p_i) ~ int g f dgamma^k_inf.
        '''
        if self.kind is Kind.ATOM_CLOUD:
            return np.array(self.centers), self.weights * self.scale
        nodes, node_weights = quadrature.legendre_rule(order)
        grid = np.array(list(itertools.product(nodes, repeat=self.n)))
        grid_weights = np.prod(
            np.array(list(itertools.product(node_weights, repeat=self.n))), axis=1)
        low, high = self.support_box()
        all_points, all_weights = [], []
        for i in range(len(self.centers)):
            half = (high[i] - low[i]) / 2
            points = (low[i] + high[i]) / 2 + grid * half
            single = attr.evolve(self, centers=self.centers[i:i + 1], weights=[1.0])
            weights = (grid_weights * np.prod(half) * single(points)
                       * _gaussian_density(self.lambdas, self.k, points))
            all_points.append(points)
            all_weights.append(weights * self.weights[i])
        return np.concatenate(all_points), np.concatenate(all_weights)
