'''
Normality test and canonical form of normal OU semigroups.

A normal model is brought to Q = I by whitening, after which an orthogonal
change of coordinates makes the drift block diagonal, with 2x2 blocks

    [[-lambda, q], [-q, -lambda]]   (q > 0)

first, followed by scalar rates -lambda on the diagonal.
'''

import warnings

import attr
import numpy as np
from scipy import linalg, stats

from .exceptions import DegenerateBlockWarning, NotNormal
from .model import SpectralParams, readonly_array, validate_model


DEGENERATE_Q = 1e-10
NORMALITY_RTOL = 1e-9
ORTHOGONALITY_TOL = 1e-10
SKEW_TOL = 1e-12
SCHUR_RESIDUAL_RTOL = 1e-8


@attr.s(auto_attribs=True, frozen=True)
class NormalityCheck:
    is_normal: bool
    commutator_norm: float
    tolerance: float

    def __bool__(self):
        return bool(self.is_normal)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class BuildingBlock:
    '''
        Q = I, B = lambda (R - I) with R skew-symmetric.
    '''
    lam: float = attr.ib(converter=float)
    R: np.ndarray = attr.ib(converter=readonly_array)

    @lam.validator
    def _check_lam(self, attribute, value):
        if not value > 0:
            raise ValueError(f'rate must be positive, got {value}')

    @R.validator
    def _check_R(self, attribute, value):
        if np.abs(value + value.T).max() > SKEW_TOL:
            raise ValueError('R must be skew-symmetric')

    @classmethod
    def from_pair(cls, lam, q):
        return cls(lam, [[0, q / lam], [-q / lam, 0]])

    @classmethod
    def scalar(cls, lam):
        return cls(lam, [[0.0]])

    @property
    def drift(self):
        return self.lam * (self.R - np.eye(len(self.R)))


def _block_matrix(lam, q):
    return np.array([[-lam, q], [-q, -lam]])


@attr.s(auto_attribs=True, frozen=True, eq=False)
class CanonicalForm:
    '''
        Canonical coordinates y = basis @ whitening @ x.
    '''
    blocks: np.ndarray = attr.ib(converter=lambda v: readonly_array(np.reshape(v, (-1, 2))))
    scalars: np.ndarray = attr.ib(converter=lambda v: readonly_array(np.reshape(v, -1)))
    basis: np.ndarray = attr.ib(converter=readonly_array)
    whitening: np.ndarray = attr.ib(converter=readonly_array)

    @blocks.validator
    def _check_blocks(self, attribute, value):
        if np.any(value[:, 0] <= 0) or np.any(value[:, 1] == 0):
            raise ValueError('blocks need lambda > 0 and q != 0')

    @scalars.validator
    def _check_scalars(self, attribute, value):
        if np.any(value <= 0):
            raise ValueError('scalar rates must be positive')

    @basis.validator
    def _check_basis(self, attribute, value):
        if value.ndim != 2 or value.shape[0] != value.shape[1]:
            raise ValueError('basis must be a square matrix')
        if np.linalg.norm(value.T @ value - np.eye(len(value))) > ORTHOGONALITY_TOL:
            raise ValueError('basis is not orthogonal')

    def __attrs_post_init__(self):
        if self.basis.shape != (self.n, self.n) or self.whitening.shape != (self.n, self.n):
            raise ValueError('basis and whitening must match the block structure')

    @classmethod
    def from_parameters(cls, blocks=(), scalars=()):
        '''
            Form already in canonical coordinates (identity basis and whitening).
        '''
        n = 2 * len(blocks) + len(scalars)
        eye = readonly_array(np.eye(n))
        return cls(blocks, scalars, eye, eye)

    @property
    def n(self):
        return 2 * len(self.blocks) + len(self.scalars)

    @property
    def lambdas(self):
        '''
            Rate per canonical coordinate, block rates repeated.
        '''
        return np.concatenate([np.repeat(self.blocks[:, 0], 2), self.scalars])

    @property
    def spectral_params(self):
        return SpectralParams(self.lambdas)

    @property
    def drift(self):
        return linalg.block_diag(
            *[_block_matrix(lam, q) for lam, q in self.blocks],
            *[[[-lam]] for lam in self.scalars])

    @property
    def transform(self):
        '''
            The map x -> y.
        '''
        return self.basis @ self.whitening

    def to_canonical(self, x):
        return np.asarray(x, dtype=float) @ self.transform.T

    def from_canonical(self, y):
        return linalg.solve(self.transform, np.asarray(y, dtype=float).T).T

    def building_blocks(self):
        return (
            [BuildingBlock.from_pair(lam, q) for lam, q in self.blocks]
            + [BuildingBlock.scalar(lam) for lam in self.scalars])


def _sqrt_pair(S):
    w, V = linalg.eigh(S)
    return (V * np.sqrt(w)) @ V.T, (V / np.sqrt(w)) @ V.T


def check_normal(model, tol=None):
    '''
        Commutator test on A = Q_inf^{-1/2} B Q_inf^{1/2}.
    '''
    root, inverse_root = _sqrt_pair(model.stationary_covariance)
    A = inverse_root @ model.B @ root
    norm = float(np.linalg.norm(A @ A.T - A.T @ A))
    if tol is None:
        tol = NORMALITY_RTOL * np.linalg.norm(A) ** 2
    return NormalityCheck(norm <= tol, norm, float(tol))


def canonical_blocks(T, Z):
    '''
        Read (lambda, q) blocks and scalar rates off a real Schur form.

        Returns blocks, scalars, and the matching basis (columns of Z with
        signs flipped so that every q > 0, reordered: blocks by descending
        (lambda, q), then scalars by descending lambda).
    '''
    n = len(T)
    Z = np.array(Z, dtype=float)
    blocks, scalars = [], []
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0:
            lam = -(T[i, i] + T[i + 1, i + 1]) / 2
            q = (T[i, i + 1] - T[i + 1, i]) / 2
            if abs(q) < DEGENERATE_Q:
                warnings.warn(DegenerateBlockWarning(
                    f'block at {i} has rotation {q:.3g}, split into two scalars'))
                scalars += [(lam, Z[:, i]), (lam, Z[:, i + 1])]
            else:
                if q < 0:
                    q = -q
                    Z[:, i + 1] = -Z[:, i + 1]
                blocks.append((lam, q, Z[:, i], Z[:, i + 1]))
            i += 2
        else:
            scalars.append((-T[i, i], Z[:, i]))
            i += 1

    blocks.sort(key=lambda b: (-b[0], -b[1]))
    scalars.sort(key=lambda s: -s[0])
    columns = [c for b in blocks for c in b[2:]] + [s[1] for s in scalars]
    return (
        [(lam, q) for lam, q, _, _ in blocks],
        [lam for lam, _ in scalars],
        np.column_stack(columns))


def decompose(model):
    check = check_normal(model)
    if not check:
        raise NotNormal(
            f'commutator norm {check.commutator_norm:.3g} above {check.tolerance:.3g}')

    root, whitening = _sqrt_pair(model.Q)
    drift = whitening @ model.B @ root
    T, Z = linalg.schur(drift, output='real')

    off_block = np.tril(T, -2) + np.triu(T, 2)
    for i in range(len(T) - 1):
        if T[i + 1, i] == 0:
            off_block[i, i + 1] = T[i, i + 1]
    if np.linalg.norm(off_block) > SCHUR_RESIDUAL_RTOL * max(1.0, np.linalg.norm(T)):
        raise NotNormal('whitened drift is not block diagonalizable by an orthogonal map')

    blocks, scalars, columns = canonical_blocks(T, Z)
    basis = readonly_array(columns.T)
    return CanonicalForm(blocks, scalars, basis, whitening)


def reconstruct(form):
    '''
        Model with the canonical drift, mapped back to the original coordinates.
    '''
    inverse_whitening = linalg.inv(form.whitening)
    B = inverse_whitening @ form.basis.T @ form.drift @ form.basis @ form.whitening
    Q = inverse_whitening @ inverse_whitening.T
    return validate_model((Q + Q.T) / 2, B)


# random instances

def random_canonical(rng, n):
    '''
        Random (blocks, scalars) of total dimension n.
    '''
    block_count = rng.integers(0, n // 2 + 1)
    blocks = [
        (rng.uniform(0.2, 3), rng.choice([-1, 1]) * rng.uniform(0.3, 4))
        for _ in range(block_count)]
    scalars = rng.uniform(0.2, 3, size=n - 2 * block_count)
    return blocks, scalars


def random_normal_model(rng, n, whiten=True):
    '''
        Normal model with random canonical data hidden by a random rotation
        and, with whiten, by a random diffusion Q.
        Returns (model, blocks, scalars).
    '''
    blocks, scalars = random_canonical(rng, n)
    drift = linalg.block_diag(
        *[_block_matrix(lam, q) for lam, q in blocks], *[[[-lam]] for lam in scalars])
    U = stats.ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
    B = U.T @ drift @ U
    if not whiten:
        return validate_model(np.eye(n), B), blocks, scalars
    C = rng.standard_normal((n, n))
    Q = C @ C.T + np.eye(n)
    root, _ = _sqrt_pair(Q)
    return validate_model(Q, root @ B @ linalg.inv(root)), blocks, scalars
