'''
Mehler kernels with respect to the invariant measure, in log space.

All functions broadcast over leading axes: points have the coordinate
index last, times broadcast against the leading shape.
'''

import attr
import numpy as np

from .exceptions import DimensionMismatch, InvalidTime
from .model import covariance_qt, invariant_measure


TWO_PI = 2 * np.pi


def _times(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise InvalidTime('kernel times must be positive')
    return t


def _decay(lam, t):
    '''
        a = e^{-lambda t} and D = 1 - e^{-2 lambda t}
    '''
    return np.exp(-lam * t), -np.expm1(-2 * lam * t)


def _points(x, u, n):
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape[-1:] != (n,) or u.shape[-1:] != (n,):
        raise DimensionMismatch(
            f'points of dimension {x.shape[-1:]} and {u.shape[-1:]}, expected {n}')
    return x, u


def _lambdas(params):
    return np.asarray(params.lambdas, dtype=float)


@attr.s(auto_attribs=True, frozen=True)
class KernelSpec:
    '''
        Rates (SpectralParams or CanonicalForm) and the damping factor kappa.
    '''
    params: object
    kappa: float = attr.ib(default=1.0, converter=float)

    @kappa.validator
    def _check_kappa(self, attribute, value):
        if not value > 0:
            raise ValueError(f'kappa must be positive, got {value}')

    @property
    def lambdas(self):
        return _lambdas(self.params)


def log_kernel_1d(lam, t, x, u):
    t = _times(t)
    a, D = _decay(lam, t)
    return lam * x ** 2 - 0.5 * np.log(D) - lam * (x - a * u) ** 2 / D


def kernel_1d(lam, t, x, u):
    return np.exp(log_kernel_1d(lam, t, x, u))


def _log_kernel_kappa(lambdas, kappa, t, x, u):
    t = _times(t)[..., None]
    a, D = _decay(lambdas, t)
    terms = lambdas * x ** 2 - 0.5 * np.log(D) - kappa * lambdas * (x - a * u) ** 2 / D
    return terms.sum(axis=-1)


def log_kernel_diag(params, t, x, u):
    lambdas = _lambdas(params)
    x, u = _points(x, u, lambdas.size)
    return _log_kernel_kappa(lambdas, 1.0, t, x, u)


def kernel_diag(params, t, x, u):
    return np.exp(log_kernel_diag(params, t, x, u))


def log_kernel_kappa(spec, t, x, u):
    lambdas = spec.lambdas
    x, u = _points(x, u, lambdas.size)
    return _log_kernel_kappa(lambdas, spec.kappa, t, x, u)


def kernel_kappa(spec, t, x, u):
    return np.exp(log_kernel_kappa(spec, t, x, u))


def _rotation(q, t):
    angle = np.fmod(q * t, TWO_PI)
    return np.cos(angle), np.sin(angle)


def _log_block(lam, q, t, x, u, rotation_weight):
    t = _times(t)
    a, D = _decay(lam, t)
    cos, sin = _rotation(q, t)
    x1, x2 = x[..., 0], x[..., 1]
    u1, u2 = u[..., 0], u[..., 1]
    inner = x1 * u1 + x2 * u2
    wedge = x1 * u2 - x2 * u1
    distance = (x1 - a * u1) ** 2 + (x2 - a * u2) ** 2
    return (
        lam * (x1 ** 2 + x2 ** 2) - np.log(D) - lam * distance / D
        - rotation_weight * lam * a / D * ((1 - cos) * inner + sin * wedge))


def log_kernel_block2d(lam, q, t, x, u):
    x, u = _points(x, u, 2)
    return _log_block(lam, q, t, x, u, rotation_weight=1)


def kernel_block2d(lam, q, t, x, u):
    return np.exp(log_kernel_block2d(lam, q, t, x, u))


def log_transition_block2d(lam, q, t, x, u):
    '''
        Exact transition density of the building block (lambda, q) with
        respect to its invariant measure.
    '''
    x, u = _points(x, u, 2)
    return _log_block(lam, q, t, x, u, rotation_weight=2)


def transition_kernel_block2d(lam, q, t, x, u):
    return np.exp(log_transition_block2d(lam, q, t, x, u))


def log_bound_block2d(lam, t, x, u):
    x, u = _points(x, u, 2)
    t = _times(t)
    a, D = _decay(lam, t)
    return (
        lam * (x ** 2).sum(axis=-1) - np.log(D)
        - 0.5 * lam * ((x - a[..., None] * u) ** 2).sum(axis=-1) / D)


def bound_block2d(lam, t, x, u):
    return np.exp(log_bound_block2d(lam, t, x, u))


def block_bound_margin(lam, q, t, x, u):
    '''
        log bound_block2d - log kernel_block2d, in the closed form
        lambda |x - a R u|^2 / (2 D), R the rotation by q t.
    '''
    x, u = _points(x, u, 2)
    t = _times(t)
    a, D = _decay(lam, t)
    cos, sin = _rotation(q, t)
    u1, u2 = u[..., 0], u[..., 1]
    v1 = x[..., 0] - a * (cos * u1 - sin * u2)
    v2 = x[..., 1] - a * (sin * u1 + cos * u2)
    return lam * (v1 ** 2 + v2 ** 2) / (2 * D)


def _log_general(form, t, x, u, rotation_weight):
    x, u = _points(x, u, form.n)
    total = 0.0
    for j, (lam, q) in enumerate(form.blocks):
        pair = slice(2 * j, 2 * j + 2)
        total = total + _log_block(lam, q, t, x[..., pair], u[..., pair], rotation_weight)
    offset = 2 * len(form.blocks)
    if len(form.scalars):
        total = total + _log_kernel_kappa(
            np.asarray(form.scalars), 1.0, t, x[..., offset:], u[..., offset:])
    return total


def log_kernel_general(form, t, x, u):
    '''
        Tensor product of block and scalar kernels, canonical coordinates.
    '''
    return _log_general(form, t, x, u, rotation_weight=1)


def kernel_general(form, t, x, u):
    return np.exp(log_kernel_general(form, t, x, u))


def log_transition_general(form, t, x, u):
    return _log_general(form, t, x, u, rotation_weight=2)


def transition_kernel_general(form, t, x, u):
    return np.exp(log_transition_general(form, t, x, u))


def log_transition_kernel(model, t, x, u):
    '''
        log of the N(e^{tB}x, Q_t) density over the invariant density at u.
    '''
    x, u = _points(x, u, model.n)
    mean = x @ model.drift_exp(float(_times(t))).T
    return covariance_qt(model, t).log_density(u - mean) - invariant_measure(model).log_density(u)


def transition_kernel(model, t, x, u):
    return np.exp(log_transition_kernel(model, t, x, u))


def kappa_transition(lambdas, kappa, t, x):
    '''
        Gaussian reduction of the kappa kernel:

            int K^kappa_t(x, u) f(u) dgamma_inf(u) = exp(log_mass) E f(U),

        with U ~ N(mean, diag(var)).  Returns (log_mass, mean, var), log_mass
        summed over coordinates.
    '''
    lambdas = np.asarray(lambdas, dtype=float)
    x = np.asarray(x, dtype=float)
    t = _times(t)[..., None]
    a, D = _decay(lambdas, t)
    denominator = kappa * a ** 2 + D
    log_mass = (-0.5 * np.log(denominator)
                + lambdas * (1 - kappa) * D * x ** 2 / denominator).sum(axis=-1)
    mean = kappa * a * x / denominator
    var = D / (2 * lambdas * denominator)
    return log_mass, mean, np.broadcast_to(var, mean.shape)
