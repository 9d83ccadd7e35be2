'''
Ornstein-Uhlenbeck models (Q, B): validation, covariances Q_t, Gaussian
measures and the infinitesimal generator.
'''

import math

import attr
import numpy as np
from cached_property import cached_property
from scipy import integrate, linalg

from .exceptions import (
    DimensionMismatch, InvalidTime, NotHurwitz, NotPositiveDefinite, NotSymmetric,
    QuadratureFailure)
from .tech import modelfile


INFINITE_TIME = math.inf

SYMMETRY_RTOL = 1e-12
NORMALITY_RTOL = 1e-12
QT_EPSABS = 1e-12
QT_MAX_ERROR = 1e-9


def readonly_array(value):
    array = np.array(value, dtype=float)
    array.flags.writeable = False
    return array


def _check_time(t):
    t = float(t)
    if math.isnan(t) or t <= 0:
        raise InvalidTime(f'time must be positive, got {t}')
    return t


@attr.s(auto_attribs=True, frozen=True, eq=False)
class OUModel:
    '''
        The (Q, B) pair: diffusion covariance Q and drift B.

        Create through `validate_model` - the constructor does not check.
    '''
    Q: np.ndarray = attr.ib(converter=readonly_array)
    B: np.ndarray = attr.ib(converter=readonly_array)
    eigenvalues: np.ndarray = attr.ib(converter=np.asarray)

    @property
    def n(self):
        return self.Q.shape[0]

    @cached_property
    def has_diagonal_drift(self):
        return not np.any(self.B - np.diag(np.diag(self.B)))

    @cached_property
    def is_diagonal(self):
        '''
            Q = I and B = -diag(lambda)
        '''
        return self.has_diagonal_drift and np.array_equal(self.Q, np.eye(self.n))

    @cached_property
    def stationary_covariance(self):
        return _lyapunov(self.B, self.Q)

    def drift_exp(self, t):
        '''
            e^{tB}
        '''
        if self.has_diagonal_drift:
            return np.diag(np.exp(t * np.diag(self.B)))
        return linalg.expm(t * self.B)

    @property
    def lambdas(self):
        '''
            Rates of the diagonal case.
        '''
        assert self.has_diagonal_drift
        return -np.diag(self.B)

    def __repr__(self):
        return f'OUModel(Q={self.Q.tolist()}, B={self.B.tolist()})'


@attr.s(auto_attribs=True, frozen=True, eq=False)
class SpectralParams:
    lambdas: np.ndarray = attr.ib(converter=readonly_array)

    @lambdas.validator
    def _check_lambdas(self, attribute, value):
        if value.ndim != 1 or value.size == 0:
            raise DimensionMismatch('rates must be a nonempty vector')
        if not np.all(value > 0):
            raise ValueError(f'rates must be positive, got {value.tolist()}')

    @property
    def n(self):
        return self.lambdas.size

    @property
    def lambda_max(self):
        return float(self.lambdas.max())

    @property
    def lambda_min(self):
        return float(self.lambdas.min())

    @property
    def trace(self):
        return float(self.lambdas.sum())

    def head(self, k):
        '''
            Parameters of the first k (global) coordinates.
        '''
        return SpectralParams(self.lambdas[:k])

    @classmethod
    def from_model(cls, model):
        if not model.is_diagonal:
            raise ValueError('spectral parameters need Q = I and a diagonal drift')
        return cls(model.lambdas)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class GaussianMeasure:
    '''
        Zero mean Gaussian measure N(0, sigma).
    '''
    sigma: np.ndarray = attr.ib(converter=readonly_array)
    cholesky: np.ndarray = attr.ib(converter=readonly_array)

    @classmethod
    def from_covariance(cls, sigma):
        sigma = np.asarray(sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise DimensionMismatch(f'covariance must be square, got {sigma.shape}')
        try:
            chol = linalg.cholesky(sigma, lower=True)
        except linalg.LinAlgError:
            raise NotPositiveDefinite('covariance is not positive definite')
        return cls(sigma, chol)

    @property
    def n(self):
        return self.sigma.shape[0]

    @cached_property
    def log_norm(self):
        '''
            log of (2 pi)^{-n/2} det(sigma)^{-1/2}
        '''
        return float(
            -0.5 * self.n * math.log(2 * math.pi) - np.log(np.diag(self.cholesky)).sum())

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DimensionMismatch(f'point of dimension {x.shape[-1]}, measure of {self.n}')
        flat = x.reshape(-1, self.n)
        white = linalg.solve_triangular(self.cholesky, flat.T, lower=True)
        return (self.log_norm - 0.5 * (white ** 2).sum(axis=0)).reshape(x.shape[:-1])

    def density(self, x):
        return np.exp(self.log_density(x))

    def sample(self, count, rng):
        return rng.standard_normal((count, self.n)) @ self.cholesky.T


def validate_model(Q, B):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DimensionMismatch(f'Q must be square, got shape {Q.shape}')
    if B.shape != Q.shape:
        raise DimensionMismatch(f'B has shape {B.shape}, Q has {Q.shape}')
    if not np.all(np.isfinite(Q)) or not np.all(np.isfinite(B)):
        raise DimensionMismatch('Q and B must be finite')
    if np.abs(Q - Q.T).max() > SYMMETRY_RTOL * max(1.0, np.abs(Q).max()):
        raise NotSymmetric(f'Q is not symmetric: {Q.tolist()}')
    Q = (Q + Q.T) / 2
    if linalg.eigvalsh(Q).min() <= 0:
        raise NotPositiveDefinite(f'Q is not positive definite: {Q.tolist()}')
    eigenvalues = linalg.eigvals(B)
    if np.any(eigenvalues.real >= 0):
        raise NotHurwitz(
            f'drift eigenvalue with nonnegative real part: {eigenvalues.tolist()}')
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    return OUModel(Q, B, eigenvalues[order])


def diagonal_model(lambdas):
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    return validate_model(np.eye(lambdas.size), -np.diag(lambdas))


def _lyapunov(B, Q):
    '''
        X with B X + X B^T = -Q, by the Kronecker linear system.
    '''
    n = B.shape[0]
    eye = np.eye(n)
    system = np.kron(B, eye) + np.kron(eye, B)
    X = linalg.solve(system, -Q.reshape(-1)).reshape(n, n)
    return (X + X.T) / 2


def lyapunov_residual(model, sigma):
    return float(np.linalg.norm(model.B @ sigma + sigma @ model.B.T + model.Q))


def _is_normal(B):
    commutator = B @ B.T - B.T @ B
    return np.linalg.norm(commutator) <= NORMALITY_RTOL * max(1.0, np.linalg.norm(B) ** 2)


def _diagonal_qt(model, t):
    rates = model.lambdas
    sums = rates[:, None] + rates[None, :]
    if t == INFINITE_TIME:
        return model.Q / sums
    return model.Q * -np.expm1(-sums * t) / sums


def _isotropic_qt(model, t, scale):
    # Q = scale * I and B normal: e^{sB} e^{sB^T} = e^{s(B + B^T)}
    mu, V = linalg.eigh((model.B + model.B.T) / 2)
    if t == INFINITE_TIME:
        factors = -1 / (2 * mu)
    else:
        factors = np.expm1(2 * mu * t) / (2 * mu)
    return scale * (V * factors) @ V.T


def _quadrature_qt(model, t):
    def integrand(s):
        E = linalg.expm(s * model.B)
        return E @ model.Q @ E.T

    value, error = integrate.quad_vec(integrand, 0, t, epsabs=QT_EPSABS, epsrel=QT_EPSABS)
    if not error <= QT_MAX_ERROR * max(1.0, np.abs(value).max()):
        raise QuadratureFailure(f'Q_t integral error estimate {error} at t={t}')
    return value


def covariance_matrix(model, t):
    '''
        Q_t = int_0^t e^{sB} Q e^{sB^T} ds, for t in (0, +inf].
    '''
    t = _check_time(t)
    if model.has_diagonal_drift:
        sigma = _diagonal_qt(model, t)
    elif _is_normal(model.B) and np.array_equal(model.Q, model.Q[0, 0] * np.eye(model.n)):
        sigma = _isotropic_qt(model, t, model.Q[0, 0])
    elif t == INFINITE_TIME:
        sigma = model.stationary_covariance
    else:
        sigma = _quadrature_qt(model, t)
    return (sigma + sigma.T) / 2


def covariance_qt(model, t):
    return GaussianMeasure.from_covariance(covariance_matrix(model, t))


def invariant_measure(model):
    return covariance_qt(model, INFINITE_TIME)


def gaussian_density(measure, x):
    return measure.density(x)


def gaussian_sample(measure, count, rng):
    return measure.sample(count, rng)


def _stencil(n):
    '''
        Offsets (in step units) for central first and second differences.
    '''
    eye = np.eye(n)
    offsets = [np.zeros(n)]
    for i in range(n):
        offsets += [eye[i], -eye[i]]
    for i in range(n):
        for j in range(i + 1, n):
            offsets += [
                eye[i] + eye[j], eye[i] - eye[j], -eye[i] + eye[j], -eye[i] - eye[j]]
    return np.array(offsets)


def generator_apply(model, f, x):
    '''
        (1/2) tr(Q D^2 f(x)) + <Bx, grad f(x)> by central differences.

        f is evaluated once, on all stencil points at the same time.
    '''
    x = np.asarray(x, dtype=float)
    n = model.n
    if x.shape != (n,):
        raise DimensionMismatch(f'point of shape {x.shape}, model of dimension {n}')
    eps = np.finfo(float).eps
    scale = 1 + np.abs(x).max()
    h1 = eps ** (1 / 3) * scale
    h2 = eps ** (1 / 4) * scale
    offsets = _stencil(n)
    values = np.asarray(
        f(np.concatenate([x + h1 * offsets[1:2 * n + 1], x + h2 * offsets])), dtype=float)
    first, second = values[:2 * n], values[2 * n:]
    center = second[0]

    gradient = (first[0::2] - first[1::2]) / (2 * h1)
    hessian = np.empty((n, n))
    plus, minus = second[1:2 * n + 1:2], second[2:2 * n + 1:2]
    hessian[np.diag_indices(n)] = (plus - 2 * center + minus) / h2 ** 2
    mixed = iter(second[2 * n + 1:].reshape(-1, 4))
    for i in range(n):
        for j in range(i + 1, n):
            pp, pm, mp, mm = next(mixed)
            hessian[i, j] = hessian[j, i] = (pp - pm - mp + mm) / (4 * h2 ** 2)

    return float(0.5 * np.sum(model.Q * hessian) + (model.B @ x) @ gradient)


def model_from_text(text):
    content = modelfile.parse(text)
    if 'lambdas' in content:
        return diagonal_model(content['lambdas'])
    n = int(content['n'][0])
    return validate_model(
        np.reshape(content['Q'], (n, n)), np.reshape(content['B'], (n, n)))


def model_to_text(model):
    if model.is_diagonal:
        return modelfile.format_lambdas(model.lambdas)
    return modelfile.format_matrices(model.Q.tolist(), model.B.tolist())


def model_from_file(path):
    with open(path) as f:
        return model_from_text(f.read())


def model_to_file(model, path):
    with open(path, 'w') as f:
        f.write(model_to_text(model))
