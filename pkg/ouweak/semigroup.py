'''
The semigroup H_t applied to functions, its maximal operator over a time
grid, and exact sampling of the OU process.

Scalar fields are vectorized callables: f(points) with points of shape
(m, n) returns m values.
'''

import attr
import numpy as np

from . import mehler
from .exceptions import DimensionMismatch, InvalidTime
from .model import INFINITE_TIME, SpectralParams, covariance_matrix
from .tech import quadrature
from .tech.rng import stream


DEFAULT_GRID_SIZE = 200
GRID_EXPONENTS = (-4, 2)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class TGrid:
    points: np.ndarray = attr.ib(converter=lambda v: np.array(v, dtype=float))

    @points.validator
    def _check_points(self, attribute, value):
        if value.ndim != 1 or not np.all(value > 0) or not np.all(np.diff(value) > 0):
            raise InvalidTime('time grid must be strictly increasing and positive')
        if not (value[0] <= 1 < value[-1]):
            raise InvalidTime('time grid must have points both in (0, 1] and above 1')

    def __attrs_post_init__(self):
        self.points.flags.writeable = False

    @property
    def split_at_one(self):
        '''
            Number of points t <= 1.
        '''
        return int(np.searchsorted(self.points, 1.0, side='right'))

    def __len__(self):
        return len(self.points)

    @classmethod
    def default(cls, size=DEFAULT_GRID_SIZE):
        low, high = GRID_EXPONENTS
        return cls(np.unique(np.concatenate([np.logspace(low, high, size), [1.0]])))

    def refined(self):
        '''
            Grid with the geometric midpoint of every gap inserted.
        '''
        midpoints = np.sqrt(self.points[1:] * self.points[:-1])
        return TGrid(np.sort(np.concatenate([self.points, midpoints])))


@attr.s(auto_attribs=True, frozen=True)
class MaximalValue:
    value: float
    argmax_t: float
    small_t_value: float
    large_t_value: float


def _point(model, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise DimensionMismatch(f'point of shape {x.shape}, model of dimension {model.n}')
    return x


def _check_time(t):
    if not t > 0:
        raise InvalidTime(f'time must be positive, got {t}')
    return float(t)


def apply_kolmogorov(model, f, x, t, order=quadrature.DEFAULT_ORDER, seed=0):
    '''
        H_t f(x) = int f(e^{tB} x + y) dgamma_t(y).
    '''
    x = _point(model, x)
    t = _check_time(t)
    mean = np.zeros(model.n) if t == INFINITE_TIME else model.drift_exp(t) @ x
    return quadrature.expectation(
        f, mean, covariance_matrix(model, t), order, rng=stream(seed, 0))


def _kernel(model, t):
    if model.is_diagonal:
        params = SpectralParams.from_model(model)
        return lambda x, u: mehler.kernel_diag(params, t, x, u)
    return lambda x, u: mehler.transition_kernel(model, t, x, u)


def apply_mehler(model, f, x, t, order=quadrature.DEFAULT_ORDER, seed=0):
    '''
        H_t f(x) = int K_t(x, u) f(u) dgamma_inf(u).
    '''
    x = _point(model, x)
    t = _check_time(t)
    if t == INFINITE_TIME:
        return apply_kolmogorov(model, f, x, t, order, seed)
    kernel = _kernel(model, t)
    return quadrature.expectation(
        lambda u: kernel(x, u) * f(u),
        np.zeros(model.n), covariance_matrix(model, INFINITE_TIME), order,
        rng=stream(seed, 1))


def apply_kappa(spec, f, x, t):
    '''
        H^kappa_t f(x) for a test function with closed-form Gaussian expectations.
    '''
    log_mass, mean, var = mehler.kappa_transition(spec.lambdas, spec.kappa, t, x)
    return np.exp(log_mass) * f.expectation(mean, var)


ROUTES = {
    'kolmogorov': apply_kolmogorov,
    'mehler': apply_mehler,
}


def maximal(model, f, x, grid, route='kolmogorov', order=quadrature.DEFAULT_ORDER):
    '''
        max over the grid of |H_t f(x)|, the first maximizing t, and the
        maxima over t <= 1 and t > 1 separately.
    '''
    apply = ROUTES[route]
    values = np.abs([float(apply(model, f, x, t, order)) for t in grid.points])
    split = grid.split_at_one
    best = int(np.argmax(values))
    return MaximalValue(
        value=float(values[best]),
        argmax_t=float(grid.points[best]),
        small_t_value=float(values[:split].max()),
        large_t_value=float(values[split:].max()))


def sde_sample(model, x, t, count, seed):
    '''
        Exact draws of X(t, x) ~ N(e^{tB} x, Q_t), shape (count, n).
    '''
    return sde_path(model, x, [t], seed, count)[:, 0, :]


def sde_path(model, x, times, seed, count=1):
    '''
        Exact paths at the given increasing times, shape (count, len(times), n).
    '''
    x = _point(model, x)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or not np.all(np.diff(np.concatenate([[0.0], times])) > 0):
        raise InvalidTime('path times must be positive and strictly increasing')
    if count < 1:
        raise ValueError(f'count must be positive, got {count}')
    rng = stream(seed)
    path = np.empty((count, len(times), model.n))
    state = np.broadcast_to(x, (count, model.n))
    previous = 0.0
    for i, t in enumerate(times):
        step = t - previous
        chol = quadrature.cholesky(covariance_matrix(model, step))
        noise = rng.standard_normal((count, model.n))
        state = state @ model.drift_exp(step).T + noise @ chol.T
        path[:, i, :] = state
        previous = t
    return path
