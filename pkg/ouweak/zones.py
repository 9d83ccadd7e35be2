'''
Small time level sets: dyadic pieces of the kernel restricted to M_k and
the forbidden zone covering of their level sets on a finite grid.

Points are split as x = (xi, x_loc): xi the k global coordinates, x_loc
the n - k local ones, localized in a cell C_nu of the interval sequence.
'''

import itertools
import math

import attr
import numpy as np
from scipy import optimize, stats

from . import geometry
from .exceptions import AlphaTooSmall, DimensionMismatch, GridTooCoarse, InvalidTime
from .exceptions import NonTermination
from .functions import TestFunction
from .model import SpectralParams
from .tech import rootfind
from .tech.rng import stream


SMM_C_FACTOR = 1 / 8
DEFAULT_M = 2.0
GLOBAL_RESOLUTION = 200
LOCAL_RESOLUTION = 20
T_GRID_SIZE = 48
F_ORDER = 16
CHUNK = 4096
MAX_SELECTIONS = 10 ** 6
# polar s of a zone's own center is zero up to the bisection tolerance
ZERO_S = -1e-9
BOUND_RTOL = 1e-6
LOCAL_VOLUME_POINTS = 64
THRESHOLD_RTOL = 1e-9
TUNING_GROWTH = 2.0
TUNING_ROUNDS = 12
# atom offset from the threshold point, in units of sqrt(t); inside the m1 = 0 shell
MIRROR_SHIFT = 0.95


def smm_c(params, factor=SMM_C_FACTOR):
    '''
        Decay constant of the dyadic pieces: factor * min(lambda_min, 1).
    '''
    return factor * min(params.lambda_min, 1.0)


def large_alpha_threshold(params, k=None):
    '''
        Smallest alpha with lambda_min log alpha >= k lambda_max over the
        global rates.
    '''
    k = params.n if k is None else k
    head = params.head(k)
    return math.exp(k * head.lambda_max / head.lambda_min)


def check_large_alpha(alpha, params, k=None):
    k = params.n if k is None else k
    head = params.head(k)
    if not alpha > 1 or head.lambda_min * math.log(alpha) < (
            k * head.lambda_max * (1 - THRESHOLD_RTOL)):
        raise AlphaTooSmall(
            f'alpha = {alpha} is below the large level threshold'
            f' {large_alpha_threshold(params, k)}')


def epsilon_constant(params):
    '''
        c0 with (1 + |xi|)^2 4^{m1} t >= c0 whenever t <= 1 and the m1-th
        dyadic piece meets M_k: the root of

            sqrt(c) + lambda_max e^{lambda_max} c (1 + sqrt(c)) = 1.
    '''
    growth = params.lambda_max * math.exp(params.lambda_max)
    return rootfind.solve_increasing(
        lambda c: math.sqrt(c) + growth * c * (1 + math.sqrt(c)), 1.0, step=0.25)


def epsilon_bound(x, m1, params, k=None):
    '''
        Smallest time at which the m1-th dyadic piece can be nonzero at x.
    '''
    k = params.n if k is None else k
    xi = np.asarray(x, dtype=float)[..., :k]
    c0 = epsilon_constant(params.head(k))
    return c0 / ((1 + np.linalg.norm(xi, axis=-1)) ** 2 * 4.0 ** np.asarray(m1))


def cell_grid(k, n, nu):
    '''
        Localization grid whose interval sequence reaches the cell nu.
    '''
    reach = 3.0 * (1 + np.abs(np.atleast_1d(nu)).max(initial=0))
    return geometry.LocalizationGrid.covering(-reach, reach, k, n)


def in_shell(distance, t, m):
    '''
        distance in (2^{m-1}, 2^m] sqrt(t), or in [0, sqrt(t)] for m = 0.
    '''
    root = np.sqrt(t)
    upper = distance <= 2.0 ** m * root
    if m == 0:
        return upper
    return upper & (distance > 2.0 ** (m - 1) * root)


def shell_index(distance, t):
    '''
        The m with distance in the m-th dyadic shell of sqrt(t).
    '''
    distance = np.asarray(distance, dtype=float)
    ratio = distance / np.sqrt(t)
    guess = np.where(ratio > 1, np.ceil(np.log2(np.maximum(ratio, 1))), 0).astype(int)
    # log2 may round across a shell boundary
    root = np.sqrt(t)
    guess = np.where((guess > 0) & (distance <= 2.0 ** (guess - 1) * root), guess - 1, guess)
    guess = np.where(distance > 2.0 ** guess * root, guess + 1, guess)
    return guess


def _global_gap(xi, eta, t, lambdas):
    return np.linalg.norm(xi - np.exp(-lambdas * t) * eta, axis=-1)


def _local_gap(x_loc, u_loc):
    return np.linalg.norm(x_loc - u_loc, axis=-1)


def _check_time(t):
    if not 0 < t <= 1:
        raise InvalidTime(f'dyadic pieces live on 0 < t <= 1, got {t}')
    return float(t)


def _split(x, u, k, params):
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape[-1] != params.n or u.shape[-1] != params.n:
        raise DimensionMismatch(f'points of dimension {x.shape[-1]}, rates {params.n}')
    if not 0 <= k <= params.n:
        raise DimensionMismatch(f'global dimension {k} out of range for n={params.n}')
    return x, u


def smm_membership(x, u, t, m1, m2, k, nu, params, grid=None):
    '''
        (x, u) in S^{m1,m2}_t: dyadic shells of |xi - e^{-lambda t} eta| and
        |x_loc - u_loc| in units of sqrt(t), x_loc in C_nu, u_loc in the
        dilated cell.
    '''
    t = _check_time(t)
    x, u = _split(x, u, k, params)
    grid = cell_grid(k, params.n, nu) if grid is None else grid
    lambdas = np.asarray(params.lambdas)[:k]
    member = in_shell(_global_gap(x[..., :k], u[..., :k], t, lambdas), t, m1)
    member &= in_shell(_local_gap(x[..., k:], u[..., k:]), t, m2)
    if k < params.n:
        member &= grid.in_cell(x[..., k:], nu)
        member &= grid.in_cell(u[..., k:], nu, geometry.DILATE)
    return member


def _piece_support(x, u, t, m1, m2, k, nu, params, grid):
    return smm_membership(x, u, t, m1, m2, k, nu, params, grid) & geometry.membership_mk(
        x, u, k)


def _log_piece_scale(xi, t, m1, m2, n, head, c):
    return (geometry.quadratic_form(head, xi) - n / 2 * math.log(t)
            - c * 4.0 ** m1 - c * 4.0 ** m2)


def smm_kernel(x, u, t, m1, m2, k, nu, params, c=None, grid=None):
    '''
        exp(R(xi)) t^{-n/2} exp(-c 4^{m1} - c 4^{m2}) on S^{m1,m2}_t within M_k,
        zero elsewhere.
    '''
    c = smm_c(params) if c is None else c
    support = _piece_support(x, u, t, m1, m2, k, nu, params, grid)
    xi = np.asarray(x, dtype=float)[..., :k]
    scale = np.exp(_log_piece_scale(xi, t, m1, m2, params.n, params.head(k), c))
    return np.where(support, scale, 0.0)


def log_restricted_kernel(x, u, t, k, params):
    '''
        log of the kernel of H_t with respect to gamma^k_inf on M_k: Mehler
        in the global coordinates, transition density in the local ones.
        -inf outside M_k.
    '''
    x, u = _split(x, u, k, params)
    lambdas = np.asarray(params.lambdas)
    a = np.exp(-lambdas * t)
    D = -np.expm1(-2 * lambdas * t)
    # symmetric form of the Mehler exponent
    mehler = lambdas * x ** 2 - 0.5 * np.log(D) - lambdas * (x - a * u) ** 2 / D
    local = mehler + 0.5 * np.log(lambdas / math.pi) - lambdas * u ** 2
    value = mehler[..., :k].sum(axis=-1) + local[..., k:].sum(axis=-1)
    return np.where(geometry.membership_mk(x, u, k), value, -np.inf)


def domination_bound(params, k, c=None):
    '''
        log C with K_t <= C sum_{m1,m2} smm_kernel on M_k for t <= 1.
    '''
    c = smm_c(params) if c is None else c
    lambdas = np.asarray(params.lambdas)
    log_gap = -0.5 * np.log(-np.expm1(-2 * lambdas))
    local = 6 * lambdas + 0.5 * np.log(lambdas / math.pi) + log_gap
    return float(log_gap[:k].sum() + local[k:].sum() + 2 * c)


def domination_constant(params, k, nu, sample_budget, seed=0, c=None):
    '''
        Largest observed log(K_t / smm_kernel) over pairs in M_k with
        x_loc in C_nu, u_loc in the dilated cell and 0 < t <= 1.
    '''
    c = smm_c(params) if c is None else c
    n = params.n
    grid = cell_grid(k, n, nu)
    rng = stream(seed, k)
    size = int(sample_budget)
    t = 1 - rng.uniform(size=size)
    x = np.empty((size, n))
    u = np.empty((size, n))
    x[:, :k] = rng.uniform(-4, 4, (size, k))
    far = geometry.radius(x[:, :k]) * (1 + rng.exponential(size=(size, k)))
    u[:, :k] = x[:, :k] + rng.choice([-1.0, 1.0], (size, k)) * far
    if k < n:
        low, high = grid.cell(nu)
        x[:, k:] = rng.uniform(low, high, (size, n - k))
        near = rng.uniform(-1, 1, (size, n - k)) * geometry.radius(x[:, k:])
        u[:, k:] = x[:, k:] + near
    keep = geometry.membership_mk(x, u, k)
    if k < n:
        keep &= grid.in_cell(u[:, k:], nu, geometry.DILATE)
    x, u, t = x[keep], u[keep], t[keep]
    lambdas = np.asarray(params.lambdas)
    m1 = shell_index(_global_gap(x[:, :k], u[:, :k], t[:, None], lambdas[:k]), t)
    m2 = shell_index(_local_gap(x[:, k:], u[:, k:]), t)
    log_piece = (geometry.quadratic_form(params.head(k), x[:, :k]) - n / 2 * np.log(t)
                 - c * 4.0 ** m1 - c * 4.0 ** m2)
    log_kernel = log_restricted_kernel(x, u, t[:, None], k, params)
    return float((log_kernel - log_piece).max())


# selection balls and forbidden zones

def ellipsoids_disjoint(center1, axes1, center2, axes2):
    '''
        Closed axis aligned ellipsoids are disjoint iff

            max_{0<tau<1} sum_j d_j^2 tau (1 - tau) / (tau a_j^2 + (1 - tau) b_j^2) > 1,

        d the center difference, a, b the semi axes; the function is concave in tau.
    '''
    d2 = (np.asarray(center1) - np.asarray(center2)) ** 2
    a2 = np.asarray(axes1) ** 2
    b2 = np.asarray(axes2) ** 2

    def negative_separation(tau):
        return -float((d2 * tau * (1 - tau) / (tau * a2 + (1 - tau) * b2)).sum())

    result = optimize.minimize_scalar(
        negative_separation, bounds=(0, 1), method='bounded', options=dict(xatol=1e-12))
    return -result.fun > 1


@attr.s(auto_attribs=True, frozen=True, eq=False)
class SelectionBall:
    '''
        B = {(eta, u_loc): |xi - e^{-lambda t} eta| <= r, |x_loc - u_loc| <= r_loc,
             u_loc in the dilated cell}
    '''
    xi: np.ndarray
    x_loc: np.ndarray
    t: float
    radius: float
    local_radius: float
    lambdas: np.ndarray
    cell_low: np.ndarray
    cell_high: np.ndarray

    @property
    def center(self):
        return np.exp(self.lambdas * self.t) * self.xi

    @property
    def semi_axes(self):
        return np.exp(self.lambdas * self.t) * self.radius

    def contains(self, u):
        u = np.asarray(u, dtype=float)
        k = self.xi.size
        inside = _global_gap(self.xi, u[..., :k], self.t, self.lambdas) <= self.radius
        inside &= _local_gap(self.x_loc, u[..., k:]) <= self.local_radius
        return inside & np.all((u[..., k:] >= self.cell_low) & (u[..., k:] <= self.cell_high),
                               axis=-1)

    def disjoint_from(self, other):
        if self.x_loc.size and (np.linalg.norm(self.x_loc - other.x_loc)
                                > self.local_radius + other.local_radius):
            return True
        return ellipsoids_disjoint(self.center, self.semi_axes, other.center, other.semi_axes)


def _local_volume(center, radius, low, high):
    '''
        Lebesgue measure of the ball around center intersected with the box.
    '''
    dim = center.size
    if dim == 0:
        return 1.0
    low = np.maximum(low, center - radius)
    high = np.minimum(high, center + radius)
    if np.any(high <= low):
        return 0.0
    if dim == 1:
        return float(high[0] - low[0])
    steps = (high - low) / LOCAL_VOLUME_POINTS
    axes = [lo + (np.arange(LOCAL_VOLUME_POINTS) + 0.5) * h for lo, h in zip(low, steps)]
    points = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, dim)
    inside = np.linalg.norm(points - center, axis=-1) <= radius
    return float(inside.mean() * np.prod(high - low))


@attr.s(auto_attribs=True, frozen=True, eq=False)
class ForbiddenZone:
    '''
        Z = {(e^{lambda s} eta, u_loc): s >= 0, eta in the cap of the tube,
             |u_loc - x_loc| < local_radius, u_loc in the dilated cell}
    '''
    tube: geometry.TubeSpec
    x_loc: np.ndarray
    local_radius: float
    cell_low: np.ndarray
    cell_high: np.ndarray

    def contains(self, points):
        points = np.asarray(points, dtype=float)
        k = self.tube.k
        polar = geometry.polar_decompose(points[..., :k], self.tube.beta, self.tube.params)
        inside = (polar.s >= ZERO_S) & self.tube.in_cap(polar.xi_tilde)
        local = points[..., k:]
        inside &= _local_gap(self.x_loc, local) < self.local_radius
        return inside & np.all((local >= self.cell_low) & (local <= self.cell_high), axis=-1)

    def measure(self):
        '''
            gamma^k_inf(Z)
        '''
        lambdas = np.asarray(self.tube.params.lambdas)
        tube = geometry.tube_measure(self.tube).value * float(np.prod(np.sqrt(lambdas / math.pi)))
        return tube * _local_volume(self.x_loc, self.local_radius, self.cell_low, self.cell_high)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class ZoneStep:
    x: np.ndarray
    t: float
    value: float
    ball: SelectionBall
    zone: ForbiddenZone
    # int_B f dgamma^k
    mass: float
    zone_measure: float
    # gamma^k(Z) alpha / (e^{-c 4^m1 - c 4^m2} mass)
    ratio: float

    @property
    def beta(self):
        return self.zone.tube.beta


@attr.s(auto_attribs=True, frozen=True, eq=False)
class ForbiddenZoneRun:
    alpha: float
    k: int
    nu: tuple
    m1: int
    m2: int
    A: float
    B: float
    M: float
    c: float
    epsilon: float
    # zone_ratio_limit of the run, fixed before the first selection
    ratio_limit: float
    steps: tuple
    grid_size: int
    level_set_size: int
    covered: bool
    overlapping: tuple

    @property
    def selections(self):
        return len(self.steps)

    @property
    def disjoint(self):
        return not self.overlapping

    @property
    def ratios(self):
        return [step.ratio for step in self.steps]

    @property
    def ratios_bounded(self):
        return all(ratio <= self.ratio_limit * (1 + BOUND_RTOL) for ratio in self.ratios)

    @property
    def holds(self):
        return self.disjoint and self.covered and self.ratios_bounded

    @property
    def verdicts(self):
        return dict(
            disjoint=self.disjoint, covered=self.covered, ratios_bounded=self.ratios_bounded)


def zone_constants(params, k, M=DEFAULT_M):
    '''
        A = 2 e^{lambda_max} sqrt(M), B = 2 sqrt(M).
    '''
    head = params.head(k)
    return 2 * math.exp(head.lambda_max) * math.sqrt(M), 2 * math.sqrt(M)


def zone_ratio_limit(params, k, alpha, m1, m2, B):
    '''
        Bound on gamma^k(Z) alpha / (e^{-c 4^m1 - c 4^m2} int_B f dgamma^k)
        for every zone of a run at level alpha:

            H ((1 + xi_max) 2^m1)^k c0^{-k/2} (2 B 4^m1 2^m2)^{n-k},

        H = max of e^beta gamma^k(R >= beta) over the crown levels, xi_max
        the crown radius, c0 = epsilon_constant. The tube lies in
        {R >= beta}, the local ball in its cube and t >= eps(x).
    '''
    head = params.head(k)
    log_alpha = math.log(alpha)
    # e^beta chi2.sf(2 beta, k) is monotone in beta
    tail = max(math.exp(beta + stats.chi2.logsf(2 * beta, k))
               for beta in (log_alpha / 2, 2 * log_alpha))
    xi_max = math.sqrt(2 * log_alpha / head.lambda_min)
    global_part = ((1 + xi_max) * 2.0 ** m1) ** k / epsilon_constant(head) ** (k / 2)
    return tail * global_part * (2 * B * 4.0 ** m1 * 2.0 ** m2) ** (params.n - k)


def _grid_points(params, k, alpha, grid, nu, resolution, local_resolution):
    '''
        Grid of the crown {log(alpha)/2 <= R(xi) <= 2 log(alpha)} times C_nu,
        in lexicographic order.
    '''
    log_alpha = math.log(alpha)
    head = params.head(k)
    half = np.sqrt(2 * log_alpha / np.asarray(head.lambdas))
    axes = [np.linspace(-h, h, resolution) for h in half]
    xi = np.array(list(itertools.product(*axes))).reshape(-1, k)
    level = geometry.quadratic_form(head, xi)
    xi = xi[(level >= log_alpha / 2) & (level <= 2 * log_alpha)]
    if k == params.n:
        return xi
    low, high = grid.cell(nu)
    steps = (high - low) / local_resolution
    local_axes = [lo + (np.arange(local_resolution) + 0.5) * h for lo, h in zip(low, steps)]
    local = np.array(list(itertools.product(*local_axes)))
    return np.concatenate([np.repeat(xi, len(local), axis=0),
                           np.tile(local, (len(xi), 1))], axis=1)


def _levels(points, f_points, f_weights, times, eps, m1, m2, k, nu, params, grid, c):
    '''
        Per grid point: max over the allowed times of int K^{m1,m2}_t f dgamma^k,
        and the first maximizing time.
    '''
    head = params.head(k)
    best = np.zeros(len(points))
    best_t = np.full(len(points), np.nan)
    for start in range(0, len(points), CHUNK):
        x = points[start:start + CHUNK]
        for t in times:
            support = _piece_support(
                x[:, None, :], f_points[None, :, :], t, m1, m2, k, nu, params, grid)
            mass = support @ f_weights
            value = np.exp(_log_piece_scale(x[:, :k], t, m1, m2, params.n, head, c)) * mass
            value = np.where(t >= eps[start:start + CHUNK], value, 0.0)
            better = value > best[start:start + CHUNK]
            best[start:start + CHUNK] = np.where(better, value, best[start:start + CHUNK])
            best_t[start:start + CHUNK] = np.where(better, t, best_t[start:start + CHUNK])
    return best, best_t


def _step(x, t, value, alpha, f_points, f_weights, setup):
    params, k, nu, m1, m2, A, B, c, grid = setup
    n = params.n
    head = params.head(k)
    low, high = grid.cell(nu, geometry.DILATE) if k < n else (np.empty(0), np.empty(0))
    ball = SelectionBall(
        xi=x[:k], x_loc=x[k:], t=t, radius=2.0 ** m1 * math.sqrt(t),
        local_radius=2.0 ** m2 * math.sqrt(t), lambdas=np.asarray(head.lambdas),
        cell_low=low, cell_high=high)
    beta = float(geometry.quadratic_form(head, x[:k]))
    tube = geometry.TubeSpec(beta, head, A * 8.0 ** m1 * math.sqrt(t), x[:k])
    zone = ForbiddenZone(
        tube=tube, x_loc=x[k:], local_radius=B * 4.0 ** m1 * 2.0 ** m2 * math.sqrt(t),
        cell_low=low, cell_high=high)
    mass = float(f_weights @ ball.contains(f_points))
    zone_measure = zone.measure()
    ratio = zone_measure * alpha / (math.exp(-c * 4.0 ** m1 - c * 4.0 ** m2) * mass)
    return ZoneStep(
        x=x, t=t, value=value, ball=ball, zone=zone, mass=mass, zone_measure=zone_measure,
        ratio=ratio)


def _select(points, level, values, times, alpha, f_points, f_weights, setup):
    params, k = setup[0], setup[1]
    R = geometry.quadratic_form(params.head(k), points[:, :k])
    excluded = np.zeros(len(level), dtype=bool)
    steps = []
    for _ in range(MAX_SELECTIONS):
        remaining = np.flatnonzero(~excluded)
        if not remaining.size:
            return steps
        # first minimum: lexicographic tie breaking
        pick = remaining[np.argmin(R[level[remaining]])]
        i = level[pick]
        step = _step(points[i], float(times[i]), float(values[i]), alpha,
                     f_points, f_weights, setup)
        inside = step.zone.contains(points[level])
        if not inside[pick]:
            raise GridTooCoarse(f'the zone of grid point {points[i].tolist()} misses the point')
        excluded |= inside
        steps.append(step)
    raise NonTermination(f'more than {MAX_SELECTIONS} selections')


def forbidden_zone_recursion(
        model, f, alpha, k, nu, m1, m2, A=None, B=None, M=DEFAULT_M,
        resolution=GLOBAL_RESOLUTION, local_resolution=LOCAL_RESOLUTION,
        t_points=T_GRID_SIZE, c=None, order=F_ORDER):
    '''
        Greedy covering of the grid level set

            {x in crown x C_nu : sup_{eps <= t <= 1} int K^{m1,m2}_t(x, .) f dgamma^k >= alpha}

        by forbidden zones: repeatedly select the level set point with the
        smallest R(xi) outside all previous zones, record its time, its
        selection ball and its zone.

        model is a diagonal OUModel or the SpectralParams of one.
    '''
    params = model if isinstance(model, SpectralParams) else SpectralParams.from_model(model)
    n = params.n
    nu = tuple(int(i) for i in np.atleast_1d(nu)) if k < n else ()
    if f.n != n or f.k != k:
        raise DimensionMismatch(f'test function on (n={f.n}, k={f.k}), recursion on ({n}, {k})')
    check_large_alpha(alpha, params, k)
    c = smm_c(params) if c is None else c
    default_A, default_B = zone_constants(params, k, M)
    A = default_A if A is None else A
    B = default_B if B is None else B
    grid = cell_grid(k, n, nu)
    points = _grid_points(params, k, alpha, grid, nu, resolution, local_resolution)
    if not len(points):
        raise GridTooCoarse(f'no grid point in the crown at resolution {resolution}')
    eps = epsilon_bound(points, m1, params, k)
    times = np.geomspace(eps.min(), 1.0, t_points)
    f_points, f_weights = f.quadrature_points(order)
    values, best_t = _levels(
        points, f_points, f_weights, times, eps, m1, m2, k, nu, params, grid, c)
    level = np.flatnonzero(values >= alpha)
    setup = (params, k, nu, m1, m2, A, B, c, grid)
    steps = _select(points, level, values, best_t, alpha, f_points, f_weights, setup)
    betas = [step.beta for step in steps]
    assert all(b1 <= b2 for b1, b2 in zip(betas, betas[1:]))
    covered = np.zeros(len(level), dtype=bool)
    for step in steps:
        covered |= step.zone.contains(points[level])
    overlapping = tuple(
        (i, j) for i, j in itertools.combinations(range(len(steps)), 2)
        if not steps[i].ball.disjoint_from(steps[j].ball))
    return ForbiddenZoneRun(
        alpha=float(alpha), k=k, nu=nu, m1=m1, m2=m2, A=float(A), B=float(B), M=float(M),
        c=float(c), epsilon=float(eps.min()),
        ratio_limit=zone_ratio_limit(params, k, alpha, m1, m2, B),
        steps=tuple(steps), grid_size=len(points),
        level_set_size=int(level.size), covered=bool(covered.all()), overlapping=overlapping)


def refinement_stable(coarse, fine):
    '''
        Same verdicts at two grid resolutions.
    '''
    return coarse.verdicts == fine.verdicts


# randomized instances

@attr.s(auto_attribs=True, frozen=True, eq=False)
class ZoneInstance:
    params: SpectralParams
    f: object
    alpha: float
    k: int
    nu: tuple
    m1: int
    m2: int

    def run(self, M=DEFAULT_M, **options):
        return forbidden_zone_recursion(
            self.params, self.f, self.alpha, self.k, self.nu, self.m1, self.m2, M=M, **options)


def mirror_instance(lambdas, xi, t, m2=0):
    '''
        Two atoms of weight 1/2 at global coordinates +-eta, local
        coordinates at the center of C_0, with

            eta = e^{lambda_1 t} (xi + MIRROR_SHIFT sqrt(t))

        and alpha the piece (0, m2) at global coordinate xi and time t, so
        the level set holds a ray segment on each side. Zones reach
        A sqrt(t) along the level set, far less than the 2 xi between the
        sides: every run selects on both sides.
    '''
    lambdas = np.asarray(lambdas, dtype=float)
    params = SpectralParams(lambdas)
    n, k = params.n, 1
    nu = (0,) * (n - k)
    atom = np.empty(n)
    atom[0] = math.exp(lambdas[0] * t) * (xi + MIRROR_SHIFT * math.sqrt(t))
    atom[k:] = cell_grid(k, n, nu).centers(nu)
    mirror = atom.copy()
    mirror[0] = -atom[0]
    f = TestFunction.atom_cloud(np.array([atom, mirror]), lambdas, k)
    weight = float(f.quadrature_points()[1][0])
    log_alpha = _log_piece_scale(np.array([xi]), t, 0, m2, n, params.head(k), smm_c(params))
    return ZoneInstance(params, f, math.exp(float(log_alpha)) * weight, k, nu, 0, m2)


def random_instance(seed, index, n=2):
    '''
        mirror_instance with a slow global rate, xi in [5, 6] and t in
        [0.05, 0.08]. The level set then reaches times up to about 0.2,
        and a tuned M lets one zone per side cover its local range.
    '''
    rng = stream(seed, index)
    lambdas = np.concatenate([rng.uniform(0.5, 0.75, 1), rng.uniform(0.5, 2.0, n - 1)])
    xi = rng.uniform(5.0, 6.0)
    t = rng.uniform(0.05, 0.08)
    return mirror_instance(lambdas, xi, t, m2=int(rng.integers(0, 2)))


def random_instances(seed, count, **options):
    return [random_instance(seed, i, **options) for i in range(count)]


def tune_zone_constant(instances, M=DEFAULT_M, grids=None, **options):
    '''
        Smallest M = M_start * growth^j making every selection ball family
        disjoint on every grid, with the runs at that M, one list per grid.

        grids are (resolution, local_resolution) pairs, the default grid
        when not given.
    '''
    grids = grids or [(GLOBAL_RESOLUTION, LOCAL_RESOLUTION)]
    for _ in range(TUNING_ROUNDS):
        runs = [
            [instance.run(M=M, resolution=resolution, local_resolution=local_resolution,
                          **options) for instance in instances]
            for resolution, local_resolution in grids]
        if all(run.disjoint for grid_runs in runs for run in grid_runs):
            return M, runs
        M *= TUNING_GROWTH
    raise NonTermination(f'no M up to {M} separates the selection balls')
