'''
Localization structures for the local coordinates and the elliptic geometry
of the global ones.

Local side: intervals I_s = (s - r(s), s + r(s)], r(s) = 1/(1+|s|), tiling
the line, and the rectangles C_nu built from them.

Global side: the quadratic form R(xi) = sum lambda_j xi_j^2, polar-like
coordinates xi = e^{lambda s} xi_tilde with xi_tilde on the ellipsoid
E_beta = {R = beta}, and the Gaussian weight of the tube swept by a cap of
E_beta under the anisotropic dilations.
'''

import math

import attr
import numpy as np
from scipy import optimize, special, stats

from .exceptions import BudgetExceeded, DimensionMismatch, ZeroVector
from .model import readonly_array
from .tech import quadrature, rootfind
from .tech.rng import chunk_sizes, stream


DILATE = 3
INTERVAL_XTOL = 1e-14
ON_ELLIPSOID_RTOL = 1e-10

# composite Gauss-Legendre in the dilation parameter of a tube
TUBE_S_PANELS = 16
TUBE_S_ORDER = 16
# e^{-TUBE_TAIL} is negligible next to e^{-beta}
TUBE_TAIL = 60.0
TUBE_ARC_SCAN = 4096
TUBE_ARC_PANELS = 4
TUBE_AZIMUTH_POINTS = 64
TUBE_POLAR_SCAN = 512

MC_CHUNK = 100_000
MC_MAX_BUDGET = 10 ** 8


def radius(s):
    return 1 / (1 + np.abs(s))


# local coordinates

@attr.s(auto_attribs=True, frozen=True, eq=False)
class IntervalSequence:
    '''
        Consecutive centers s^(nu), nu = first, first + 1, ...
    '''
    centers: np.ndarray = attr.ib(converter=readonly_array)
    first: int

    def __len__(self):
        return len(self.centers)

    @property
    def indices(self):
        return np.arange(self.first, self.first + len(self.centers))

    @property
    def radii(self):
        return radius(self.centers)

    @property
    def left(self):
        return self.centers - self.radii

    @property
    def right(self):
        return self.centers + self.radii

    def center(self, nu):
        i = int(nu) - self.first
        if not 0 <= i < len(self.centers):
            raise IndexError(f'interval {nu} is outside the generated window')
        return float(self.centers[i])

    def locate(self, points):
        '''
            nu with points in I_{s^(nu)}.
        '''
        points = np.asarray(points, dtype=float)
        i = np.searchsorted(self.right, points, side='left')
        below = points <= self.left[np.minimum(i, len(self) - 1)]
        if np.any(i >= len(self)) or np.any(below):
            raise ValueError('point outside the generated window')
        return self.first + i

    def overlap(self, points, dilate=DILATE):
        '''
            Number of dilated intervals dilate * I_s holding each point.
        '''
        points = np.asarray(points, dtype=float)[..., None]
        reach = dilate * self.radii
        inside = (points > self.centers - reach) & (points <= self.centers + reach)
        return inside.sum(axis=-1)


def _next_center(right):
    return rootfind.solve_increasing(
        lambda s: s - radius(s), right, start=right, xtol=INTERVAL_XTOL)


def build_interval_sequence(lo, hi):
    '''
        The centers whose intervals meet [lo, hi], generated from s^(0) = 0
        by solving s - 1/(1+s) = previous right endpoint, mirrored for nu < 0.
    '''
    if not lo < hi:
        raise ValueError(f'empty window [{lo}, {hi}]')
    positive = [0.0]
    while positive[-1] + radius(positive[-1]) < max(hi, 0.0):
        positive.append(_next_center(positive[-1] + radius(positive[-1])))
    negative = []
    reach = -min(lo, 0.0)
    last = 0.0
    while last + radius(last) <= reach:
        last = _next_center(last + radius(last))
        negative.append(-last)
    centers = np.array(negative[::-1] + positive)
    first = -len(negative)
    keep = (centers + radius(centers) >= lo) & (centers - radius(centers) < hi)
    offset = int(np.argmax(keep))
    return IntervalSequence(centers[keep], first + offset)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class LocalizationGrid:
    '''
        Rectangles C_nu, nu in Z^{n-k}, over the local coordinates k+1..n.
    '''
    axis: IntervalSequence
    k: int
    n: int

    @property
    def local_dim(self):
        return self.n - self.k

    def _check(self, nu):
        nu = np.atleast_1d(np.asarray(nu, dtype=int))
        if nu.shape != (self.local_dim,):
            raise DimensionMismatch(f'cell index {nu.tolist()} for {self.local_dim} local axes')
        return nu

    def centers(self, nu):
        return np.array([self.axis.center(i) for i in self._check(nu)])

    def cell(self, nu, dilate=1):
        '''
            (low, high) corners of dilate * C_nu.
        '''
        centers = self.centers(nu)
        half = dilate * radius(centers)
        return centers - half, centers + half

    def in_cell(self, x_loc, nu, dilate=1):
        low, high = self.cell(nu, dilate)
        x_loc = np.asarray(x_loc, dtype=float)
        return np.all((x_loc >= low) & (x_loc <= high), axis=-1)

    def locate(self, x_loc):
        return self.axis.locate(x_loc)

    @classmethod
    def covering(cls, lo, hi, k, n):
        return cls(build_interval_sequence(lo, hi), k, n)


def membership_mk(x, u, k):
    '''
        (x, u) in M_k: global condition on the first k coordinates, local
        condition on the rest.
    '''
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if not 0 <= k <= x.shape[-1]:
        raise DimensionMismatch(f'global dimension {k} out of range for n={x.shape[-1]}')
    far = np.abs(x - u) > radius(x)
    return np.all(far[..., :k], axis=-1) & np.all(~far[..., k:], axis=-1)


def classify_pair(x, u):
    '''
        (k, permutation) with (x[permutation], u[permutation]) in M_k:
        global coordinates first, both groups in their original order.
    '''
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    far = np.abs(x - u) > radius(x)
    permutation = np.concatenate([np.flatnonzero(far), np.flatnonzero(~far)])
    return int(far.sum()), permutation


@attr.s(auto_attribs=True, frozen=True)
class ImplicationCheck:
    '''
        s' in I_s and |s'' - s'| <= r(s')  =>  s'' in 3 I_s
    '''
    premise: np.ndarray
    conclusion: np.ndarray
    # distance of s'' to the boundary of 3 I_s, positive inside
    margin: np.ndarray

    @property
    def holds(self):
        return ~self.premise | self.conclusion


def check_impl(s, s_prime, s_second):
    s, s_prime, s_second = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (s, s_prime, s_second)))
    r = radius(s)
    premise = ((s_prime > s - r) & (s_prime <= s + r)
               & (np.abs(s_second - s_prime) <= radius(s_prime)))
    margin = DILATE * r - np.abs(s_second - s)
    conclusion = (s_second > s - DILATE * r) & (s_second <= s + DILATE * r)
    return ImplicationCheck(premise, conclusion, margin)


def density_exponent(grid, nu, params):
    '''
        D_nu = sum over local axes of lambda_j (s^(nu_j))^2
    '''
    lambdas = np.asarray(params.lambdas)[grid.k:]
    return float(lambdas @ grid.centers(nu) ** 2)


def density_comparability(grid, nu, params, dilate=DILATE):
    '''
        (min, max) of exp(sum lambda_j u_j^2 - D_nu) over u_loc in dilate * C_nu.

        Exact: the exponent separates over the axes and every axis term is
        a parabola on an interval.
    '''
    lambdas = np.asarray(params.lambdas)[grid.k:]
    centers = grid.centers(nu)
    low, high = grid.cell(nu, dilate)
    top = np.maximum(low ** 2, high ** 2)
    bottom = np.where((low <= 0) & (high >= 0), 0.0, np.minimum(low ** 2, high ** 2))
    base = centers ** 2
    return (float(np.exp(lambdas @ (bottom - base))),
            float(np.exp(lambdas @ (top - base))))


# global coordinates

def quadratic_form(params, xi):
    xi = np.asarray(xi, dtype=float)
    lambdas = np.asarray(params.lambdas)
    if xi.shape[-1] != lambdas.size:
        raise DimensionMismatch(f'point of dimension {xi.shape[-1]}, rates {lambdas.size}')
    return (lambdas * xi ** 2).sum(axis=-1)


def dilation(params, s, xi):
    '''
        e^{lambda s} xi
    '''
    s = np.asarray(s, dtype=float)[..., None]
    return np.exp(np.asarray(params.lambdas) * s) * xi


@attr.s(auto_attribs=True, frozen=True, eq=False)
class PolarPoint:
    '''
        xi = e^{lambda s} xi_tilde, R(xi_tilde) = beta.

        s has the leading shape of xi_tilde.
    '''
    s: np.ndarray
    xi_tilde: np.ndarray
    beta: float


def polar_decompose(xi, beta, params):
    xi = np.asarray(xi, dtype=float)
    if not beta > 0:
        raise ValueError(f'level must be positive, got {beta}')
    level = quadratic_form(params, xi)
    if np.any(level == 0):
        raise ZeroVector('the origin has no polar coordinates')
    ratio = np.log(level / beta)
    lambdas = np.asarray(params.lambdas)
    a = ratio / (2 * lambdas.max())
    b = ratio / (2 * lambdas.min())
    s = rootfind.bisect_decreasing(
        lambda s: quadratic_form(params, dilation(params, -s, xi)),
        beta, np.minimum(a, b), np.maximum(a, b))
    return PolarPoint(s, dilation(params, -s, xi), float(beta))


def compose(point, params):
    return dilation(params, point.s, point.xi_tilde)


def _gradient_norms(params, s, xi):
    '''
        |Lambda xi|^2 weighted by e^{-2 lambda s} and e^{2 lambda s}
    '''
    lambdas = np.asarray(params.lambdas)
    v2 = (lambdas * xi) ** 2
    growth = np.exp(2 * lambdas * np.asarray(s, dtype=float)[..., None])
    return v2.sum(axis=-1), (v2 / growth).sum(axis=-1), (v2 * growth).sum(axis=-1)


def transversality(s, xi, params):
    '''
        cos of the angle between the normal of the dilated ellipsoid and
        the dilation direction d/ds e^{lambda s} xi.
    '''
    plain, shrunk, grown = _gradient_norms(params, s, np.asarray(xi, dtype=float))
    return plain / np.sqrt(shrunk * grown)


def transversality_floor(s, params):
    '''
        Infimum of transversality over the ellipsoid (Kantorovich bound).
    '''
    spread = params.lambda_max - params.lambda_min
    return 1 / np.cosh(spread * np.asarray(s, dtype=float))


def surface_ratio(s, xi, params):
    '''
        Area scaling of the dilation at xi_tilde on E_beta.
    '''
    xi = np.asarray(xi, dtype=float)
    lambdas = np.asarray(params.lambdas)
    v2 = (lambdas * xi) ** 2
    exponents = 2 * (lambdas.sum() - lambdas) * np.asarray(s, dtype=float)[..., None]
    return np.sqrt((np.exp(exponents) * v2).sum(axis=-1) / v2.sum(axis=-1))


@attr.s(auto_attribs=True, frozen=True)
class LebesgueJacobian:
    '''
        d xi = exact ds dS(xi_tilde), next to the comparable factor |e^{lambda s} xi_tilde|.
    '''
    factor: np.ndarray
    exact: np.ndarray

    @property
    def ratio(self):
        return self.exact / self.factor


def lebesgue_jacobian(point, params):
    lambdas = np.asarray(params.lambdas)
    s = np.asarray(point.s, dtype=float)
    factor = np.linalg.norm(compose(point, params), axis=-1)
    exact = np.exp(s * lambdas.sum()) * np.linalg.norm(lambdas * point.xi_tilde, axis=-1)
    return LebesgueJacobian(factor, exact)


def tail_bound(beta, params):
    '''
        gamma^k{R > beta}: 2R is chi^2 with k degrees of freedom.
    '''
    return float(stats.chi2.sf(2 * beta, params.n))


# tubes

def _on_ellipsoid(instance, attribute, value):
    level = float(quadratic_form(instance.params, value))
    if abs(level - instance.beta) > ON_ELLIPSOID_RTOL * max(1.0, instance.beta):
        raise ValueError(f'center has R = {level}, not on the level {instance.beta}')


@attr.s(auto_attribs=True, frozen=True, eq=False)
class TubeSpec:
    '''
        Z = {e^{lambda s} xi : s > 0, xi in E_beta, |xi - center| < a}
    '''
    beta: float = attr.ib(converter=float)
    params: object
    a: float = attr.ib(converter=float)
    center: np.ndarray = attr.ib(converter=readonly_array, validator=_on_ellipsoid)

    @beta.validator
    def _check_beta(self, attribute, value):
        if not value > 0:
            raise ValueError(f'level must be positive, got {value}')

    @a.validator
    def _check_a(self, attribute, value):
        if not value > 0:
            raise ValueError(f'cap radius must be positive, got {value}')

    @property
    def k(self):
        return self.params.n

    @classmethod
    def towards(cls, direction, beta, a, params):
        '''
            Tube around the point of E_beta in the given direction.
        '''
        direction = np.asarray(direction, dtype=float)
        scale = math.sqrt(beta / quadratic_form(params, direction))
        return cls(beta, params, a, direction * scale)

    def in_cap(self, xi_tilde):
        return np.linalg.norm(xi_tilde - self.center, axis=-1) < self.a

    def contains(self, xi):
        point = polar_decompose(xi, self.beta, self.params)
        return (point.s > 0) & self.in_cap(point.xi_tilde)

    def bound_ratio(self, measure):
        '''
            mu_R(Z) sqrt(beta) e^beta / a^{k-1}
        '''
        return float(measure) * math.sqrt(self.beta) * math.exp(self.beta) / self.a ** (self.k - 1)


def _s_rule(spec):
    s_max = math.log((spec.beta + TUBE_TAIL) / spec.beta) / (2 * spec.params.lambda_min)
    nodes, weights = quadrature.legendre_rule(TUBE_S_ORDER)
    edges = np.linspace(0, s_max, TUBE_S_PANELS + 1)
    half = np.diff(edges)[:, None] / 2
    points = (edges[:-1, None] + half * (nodes + 1)).reshape(-1)
    return points, (half * weights).reshape(-1)


def _sweep(spec, xi_tilde):
    '''
        e^beta * int_0^inf e^{s tr} |Lambda xi_tilde| e^{-R(e^{lambda s} xi_tilde)} ds
    '''
    lambdas = np.asarray(spec.params.lambdas)
    s, w = _s_rule(spec)
    level = quadratic_form(spec.params, dilation(spec.params, s, xi_tilde[..., None, :]))
    integrand = np.exp(s * lambdas.sum() - (level - spec.beta))
    return np.linalg.norm(lambdas * xi_tilde, axis=-1) * (integrand @ w)


def _panel_rule(low, high, panels, order):
    nodes, weights = quadrature.legendre_rule(order)
    edges = np.linspace(low, high, panels + 1)
    half = np.diff(edges)[:, None] / 2
    return ((edges[:-1, None] + half * (nodes + 1)).reshape(-1),
            (half * weights).reshape(-1))


def _sign_intervals(func, low, high, scan):
    '''
        Subintervals of [low, high] where func < 0, ends refined by brentq.
    '''
    grid = np.linspace(low, high, scan + 1)
    values = func(grid)
    ends = [low]
    for i in np.flatnonzero(np.sign(values[:-1]) != np.sign(values[1:])):
        ends.append(optimize.brentq(func, grid[i], grid[i + 1], xtol=1e-15))
    ends.append(high)
    return [(a, b) for a, b in zip(ends[:-1], ends[1:]) if func((a + b) / 2) < 0]


def _tube_planar(spec):
    axes = np.sqrt(spec.beta / np.asarray(spec.params.lambdas))
    theta0 = math.atan2(spec.center[1] / axes[1], spec.center[0] / axes[0])

    def point(theta):
        theta = np.asarray(theta, dtype=float)
        return np.stack([axes[0] * np.cos(theta), axes[1] * np.sin(theta)], axis=-1)

    def outside(theta):
        return np.linalg.norm(point(theta) - spec.center, axis=-1) - spec.a

    total = 0.0
    arcs = _sign_intervals(outside, theta0 - math.pi, theta0 + math.pi, TUBE_ARC_SCAN)
    for low, high in arcs:
        theta, w = _panel_rule(low, high, TUBE_ARC_PANELS, quadrature.DEFAULT_ORDER // 2)
        speed = np.hypot(axes[0] * np.sin(theta), axes[1] * np.cos(theta))
        total += float((speed * _sweep(spec, point(theta))) @ w)
    return total


def _tangent_frame(axis):
    '''
        Two unit vectors completing the unit vector axis to an orthonormal basis.
    '''
    _, _, vt = np.linalg.svd(axis[None, :])
    return vt[1], vt[2]


def _tube_spatial(spec):
    axes = np.sqrt(spec.beta / np.asarray(spec.params.lambdas))
    pole = spec.center / axes
    pole = pole / np.linalg.norm(pole)
    e1, e2 = _tangent_frame(pole)
    omegas = np.linspace(0, 2 * math.pi, TUBE_AZIMUTH_POINTS, endpoint=False)
    det = float(np.prod(axes))

    def sphere(phi, omega):
        phi = np.asarray(phi, dtype=float)[..., None]
        return np.cos(phi) * pole + np.sin(phi) * (np.cos(omega) * e1 + np.sin(omega) * e2)

    # the cap is taken star shaped around the pole: first exit along each meridian
    total = 0.0
    for omega in omegas:
        def outside(phi):
            return np.linalg.norm(axes * sphere(phi, omega) - spec.center, axis=-1) - spec.a

        phis = np.linspace(0, math.pi, TUBE_POLAR_SCAN + 1)
        crossing = np.flatnonzero(outside(phis) >= 0)
        if crossing.size:
            edge = optimize.brentq(outside, phis[crossing[0] - 1], phis[crossing[0]], xtol=1e-15)
        else:
            edge = math.pi
        phi, w = _panel_rule(0.0, edge, 2, quadrature.DEFAULT_ORDER // 2)
        u = sphere(phi, omega)
        area = det * np.linalg.norm(u / axes, axis=-1) * np.sin(phi)
        total += float((area * _sweep(spec, axes * u)) @ w)
    return total * 2 * math.pi / TUBE_AZIMUTH_POINTS


def _tube_quadrature(spec):
    if spec.k == 1:
        # the cap holds -center as well once a exceeds the diameter
        rays = 2 if 2 * abs(float(spec.center[0])) < spec.a else 1
        return rays * 0.5 * math.sqrt(math.pi / spec.params.lambda_min) * special.erfc(
            math.sqrt(spec.beta))
    if spec.k == 2:
        return _tube_planar(spec) * math.exp(-spec.beta)
    if spec.k == 3:
        return _tube_spatial(spec) * math.exp(-spec.beta)
    raise ValueError(f'tube quadrature needs k in {{1, 2, 3}}, got {spec.k}')


def _tube_monte_carlo(spec, budget, seed):
    '''
        gamma^k(Z) by sampling gamma^k conditioned on R > beta, which holds on Z.
    '''
    if budget > MC_MAX_BUDGET:
        raise BudgetExceeded(f'budget {budget} above {MC_MAX_BUDGET}')
    k = spec.k
    lambdas = np.asarray(spec.params.lambdas)
    tail = tail_bound(spec.beta, spec.params)
    hits = 0
    for chunk, size in enumerate(chunk_sizes(budget, MC_CHUNK)):
        rng = stream(seed, chunk)
        directions = rng.standard_normal((size, k))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii2 = stats.chi2.isf(rng.uniform(size=size) * tail, k)
        xi = directions * np.sqrt(radii2)[:, None] / np.sqrt(2 * lambdas)
        hits += int(spec.contains(xi).sum())
    p = hits / budget
    # mu_R = gamma^k / normalization of the Gaussian density
    scale = tail / float(np.prod(np.sqrt(lambdas / math.pi)))
    return quadrature.Estimate(scale * p, scale * math.sqrt(p * (1 - p) / budget))


def tube_measure(spec, method='quadrature', budget=MC_CHUNK, seed=0):
    '''
        mu_R(Z) = int_Z e^{-R(xi)} d xi
    '''
    if method == 'quadrature':
        return quadrature.Estimate(_tube_quadrature(spec))
    if method == 'montecarlo':
        return _tube_monte_carlo(spec, int(budget), seed)
    raise ValueError(f'unknown tube method {method!r}')
