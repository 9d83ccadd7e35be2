'''
Sampling harness for the inequalities behind the weak type estimate.

Every registered inequality draws samples satisfying its hypotheses and
returns one margin per sample:

    explicit  - the inequality has explicit constants, margin = RHS - LHS
                (or its log form) and must never be negative;
    empirical - the constant is only known to exist, the margin is the
                quotient RHS/LHS without constant, whose infimum over the
                samples estimates it; it must be positive and stable when
                the budget is doubled.
'''

import itertools
import math

import attr
import numpy as np

from . import geometry, mehler
from .exceptions import UnknownLemma
from .tech.rng import chunk_sizes, stream
from .zones import epsilon_constant


CHUNK = 100_000
# explicit margins are log or difference forms of O(1..100) quantities
EXPLICIT_TOL = 1e-9
MAX_DRIFT = 0.2

# rates, rotation speeds and times of the building block inequality
BLOCK_RATES = (0.3, 1.0, 2.5)
BLOCK_TWISTS = (-10.0, -1.0, -0.1, 0.1, 1.0, 10.0)
BLOCK_TIMES = np.logspace(-3, 1, 30)
BLOCK_GRID = np.array(list(itertools.product(BLOCK_RATES, BLOCK_TWISTS, BLOCK_TIMES)))

EXPLICIT = 'explicit'
EMPIRICAL = 'empirical'


@attr.s(auto_attribs=True, frozen=True)
class MarginReport:
    lemma: str
    kind: str
    samples: int
    margin: float
    witness: dict
    # relative change of the infimum between the budget and its double
    drift: float = None
    # analytic lower bound of an empirical constant, when one is known
    floor: float = None

    @property
    def holds(self):
        if self.kind == EXPLICIT:
            return self.margin >= -EXPLICIT_TOL
        if not self.margin > 0 or self.drift > MAX_DRIFT:
            return False
        return self.floor is None or self.margin >= self.floor * (1 - EXPLICIT_TOL)


def _log_uniform(rng, low, high, size):
    return np.exp(rng.uniform(math.log(low), math.log(high), size))


def _unit_interval(rng, size):
    # (0, 1]
    return 1 - rng.uniform(size=size)


def _pick_rates(rng, params, size):
    return np.asarray(params.lambdas)[rng.integers(params.n, size=size)]


def _on_ellipsoid(rng, params, beta, size):
    directions = rng.standard_normal((size, params.n))
    scale = np.sqrt(beta / geometry.quadratic_form(params, directions))
    return directions * scale[..., None]


# explicit

def _local_bound_chain(rng, params, size):
    lam = _pick_rates(rng, params, size)
    t = _log_uniform(rng, 1e-4, 10, size)
    x = rng.uniform(-20, 20, size)
    u = x - rng.uniform(-1, 1, size) * geometry.radius(x)
    a = np.exp(-lam * t)
    # ((x - a u)^2 - (x - u)^2) / (1 - a^2), cancelled
    margin = u * (2 * x - u * (1 + a)) / (1 + a) + 4
    return margin, dict(lam=lam, t=t, x=x, u=u)


def _local_kernel(rng, params, size):
    '''
        Local condition => K_{t,j} <= C e^{lambda x^2} m^{-1/2} exp(-c (x-u)^2 / m),
        m = min(1, t), C = e^{4 lambda} (1 - e^{-2 lambda})^{-1/2}, c = lambda / max(1, 2 lambda).
    '''
    lam = _pick_rates(rng, params, size)
    t = _log_uniform(rng, 1e-4, 10, size)
    x = rng.uniform(-6, 6, size)
    u = x - rng.uniform(-1, 1, size) * geometry.radius(x)
    m = np.minimum(1, t)
    log_c = 4 * lam - 0.5 * np.log(-np.expm1(-2 * lam))
    c = lam / np.maximum(1, 2 * lam)
    log_rhs = lam * x ** 2 + log_c - 0.5 * np.log(m) - c * (x - u) ** 2 / m
    margin = log_rhs - mehler.log_kernel_1d(lam, t, x, u)
    return margin, dict(lam=lam, t=t, x=x, u=u)


def _interval_implication(rng, params, size):
    s = rng.uniform(-50, 50, size)
    s_prime = s + rng.uniform(-1, 1, size) * geometry.radius(s)
    s_second = s_prime + rng.uniform(-1, 1, size) * geometry.radius(s_prime)
    check = geometry.check_impl(s, s_prime, s_second)
    keep = check.premise
    return check.margin[keep], dict(s=s[keep], s_prime=s_prime[keep], s_second=s_second[keep])


def _transversality(rng, params, size):
    beta = rng.uniform(1, 10, size)
    xi = _on_ellipsoid(rng, params, beta, size)
    s = rng.uniform(0, 3, size)
    margin = geometry.transversality(s, xi, params) - geometry.transversality_floor(s, params)
    return margin, dict(beta=beta, s=s, xi=xi)


def _area_bound(rng, params, size):
    '''
        1 <= surface_ratio^2 <= e^{2 (k-1) lambda_max s}, both as sums of
        nonnegative terms.
    '''
    lambdas = np.asarray(params.lambdas)
    beta = rng.uniform(1, 10, size)
    xi = _on_ellipsoid(rng, params, beta, size)
    s = rng.uniform(0, 3, size)[:, None]
    weights = (lambdas * xi) ** 2
    weights /= weights.sum(axis=1, keepdims=True)
    exponent = 2 * (lambdas.sum() - lambdas) * s
    above_one = (np.expm1(exponent) * weights).sum(axis=1)
    headroom = 2 * ((params.n - 1) * params.lambda_max - lambdas.sum() + lambdas) * s
    below_top = (np.exp(exponent) * np.expm1(headroom) * weights).sum(axis=1)
    return np.minimum(above_one, below_top), dict(beta=beta, s=s[:, 0], xi=xi)


def _block_bound(rng, params, size):
    '''
        Cycles through BLOCK_GRID, fresh x and u for every cell visit. The
        building block is a model of its own, its rates are not taken from
        params.
    '''
    lam, q, t = BLOCK_GRID[np.arange(size) % len(BLOCK_GRID)].T
    x = 2 * rng.standard_normal((size, 2))
    u = 2 * rng.standard_normal((size, 2))
    margin = mehler.log_bound_block2d(lam, t, x, u) - mehler.log_kernel_block2d(lam, q, t, x, u)
    return margin, dict(lam=lam, q=q, t=t, x=x, u=u)


# empirical

def _global_pairs(rng, params, t, size):
    '''
        (x, u) in M_k with k = n, u = e^{lambda t} (x - w) for w of random scale.
    '''
    lambdas = np.asarray(params.lambdas)
    x = rng.uniform(-5, 5, (size, params.n))
    scale = _log_uniform(rng, 1e-3, 1, size)[:, None]
    w = scale * rng.standard_normal((size, params.n))
    u = np.exp(lambdas * t[:, None]) * (x - w)
    keep = geometry.membership_mk(x, u, params.n)
    return x, u, keep


def _mixed_pairs(rng, params, t, size):
    '''
        (x, u) in M_k for k uniform in 1..n: the first k coordinates as in
        _global_pairs, u_loc within radius(x_loc) of x_loc.
    '''
    n = params.n
    k = rng.integers(1, n + 1, size)
    x, u, _ = _global_pairs(rng, params, t, size)
    local = np.arange(n) >= k[:, None]
    near = x + rng.uniform(-1, 1, (size, n)) * geometry.radius(x)
    u = np.where(local, near, u)
    far = np.abs(x - u) > geometry.radius(x)
    keep = np.all(np.where(local, ~far, far), axis=1)
    return x, u, k, local, keep


def _distance_lower_bound(rng, params, size):
    '''
        (x, u) in M_k, 0 < t <= 1, xi the k global coordinates:
        (1+|xi|)^{-2} <~ t^2 |xi|^2 + sum_{j<=k} (x_j - e^{-lambda_j t} u_j)^2
    '''
    lambdas = np.asarray(params.lambdas)
    t = _unit_interval(rng, size)
    x, u, k, local, keep = _mixed_pairs(rng, params, t, size)
    x, u, t, k, local = x[keep], u[keep], t[keep], k[keep], local[keep]
    norm = np.linalg.norm(np.where(local, 0.0, x), axis=1)
    gap = np.where(local, 0.0, x - np.exp(-lambdas * t[:, None]) * u) ** 2
    value = (t ** 2 * norm ** 2 + gap.sum(axis=1)) * (1 + norm) ** 2
    return value, dict(k=k, t=t, x=x, u=u)


def _kernel_growth(rng, params, size):
    '''
        (x, u) in M_k:  K_t(x, u) <~ e^{R(xi)} (1+|xi|)^n
    '''
    t = 2 * _unit_interval(rng, size)
    x, u, keep = _global_pairs(rng, params, t, size)
    x, u, t = x[keep], u[keep], t[keep]
    norm = np.linalg.norm(x, axis=1)
    log_kernel = mehler.log_kernel_diag(params, t, x, u)
    log_value = (geometry.quadratic_form(params, x) + params.n * np.log1p(norm) - log_kernel)
    return np.exp(log_value), dict(t=t, x=x, u=u)


def distance_sides(xi0, xi1, beta, params):
    '''
        |xi0 - xi1|, |xi0~ - xi1~| and |s0 - s1| in polar coordinates at level beta.
    '''
    xi0 = np.asarray(xi0, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    p0 = geometry.polar_decompose(xi0, beta, params)
    p1 = geometry.polar_decompose(xi1, beta, params)
    return (np.linalg.norm(xi0 - xi1, axis=-1),
            np.linalg.norm(p0.xi_tilde - p1.xi_tilde, axis=-1),
            np.abs(p0.s - p1.s))


def _polar_pairs(rng, params, size, nonnegative_s1):
    '''
        xi0 with R(xi0) > beta / 2; half of the pairs are close neighbours.
    '''
    beta = rng.uniform(1, 10, size)
    lowest = -math.log(2) / (2 * params.lambda_min)
    s0 = rng.uniform(lowest, 2, size)
    tilde0 = _on_ellipsoid(rng, params, beta, size)
    far = rng.uniform(size=size) < 0.5
    tilde1 = np.where(
        far[:, None], _on_ellipsoid(rng, params, beta, size),
        tilde0 + 0.05 * np.sqrt(beta)[:, None] * rng.standard_normal((size, params.n)))
    tilde1 *= np.sqrt(beta / geometry.quadratic_form(params, tilde1))[:, None]
    near = s0 + 0.05 * rng.standard_normal(size)
    if nonnegative_s1:
        s1 = np.where(far, rng.uniform(0, 2, size), np.maximum(0, near))
    else:
        s1 = np.where(far, rng.uniform(-3, 2, size), near)
    xi0 = geometry.dilation(params, s0, tilde0)
    xi1 = geometry.dilation(params, s1, tilde1)
    keep = geometry.quadratic_form(params, xi0) > beta / 2
    return beta[keep], xi0[keep], xi1[keep]


def _tilde_separation(rng, params, size):
    '''
        |xi0 - xi1| >~ |xi0~ - xi1~|
    '''
    beta, xi0, xi1 = _polar_pairs(rng, params, size, nonnegative_s1=False)
    distance, tilde_gap, _ = _sides_per_level(xi0, xi1, beta, params)
    keep = tilde_gap > 0
    return distance[keep] / tilde_gap[keep], dict(beta=beta[keep], xi0=xi0[keep], xi1=xi1[keep])


def _scale_separation(rng, params, size):
    '''
        s1 >= 0:  |xi0 - xi1| >~ sqrt(beta) |s0 - s1|
    '''
    beta, xi0, xi1 = _polar_pairs(rng, params, size, nonnegative_s1=True)
    distance, _, s_gap = _sides_per_level(xi0, xi1, beta, params)
    keep = s_gap > 0
    value = distance[keep] / (np.sqrt(beta[keep]) * s_gap[keep])
    return value, dict(beta=beta[keep], xi0=xi0[keep], xi1=xi1[keep])


def _sides_per_level(xi0, xi1, beta, params):
    # polar_decompose takes one level: rescale to beta = 1, s is invariant under it
    scale = np.sqrt(beta)[:, None]
    distance, tilde_gap, s_gap = distance_sides(xi0 / scale, xi1 / scale, 1.0, params)
    return distance * scale[:, 0], tilde_gap * scale[:, 0], s_gap


def _time_window(rng, params, size):
    '''
        (x, u) in M_k with |xi - e^{-lambda t} eta| <= 2^{m1} sqrt(t), 0 < t <= 1:
        (1+|xi|)^2 4^{m1} t >~ 1
    '''
    lambdas = np.asarray(params.lambdas)
    k = params.n
    t = _unit_interval(rng, size)
    m1 = rng.integers(0, 5, size)
    x = rng.uniform(-5, 5, (size, k))
    directions = rng.standard_normal((size, k))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    reach = 2.0 ** m1 * np.sqrt(t) * rng.uniform(size=size) ** (1 / k)
    u = np.exp(lambdas * t[:, None]) * (x - directions * reach[:, None])
    keep = geometry.membership_mk(x, u, k)
    x, t, m1 = x[keep], t[keep], m1[keep]
    value = (1 + np.linalg.norm(x, axis=1)) ** 2 * 4.0 ** m1 * t
    return value, dict(t=t, m1=m1, x=x, u=u[keep])


LEMMAS = {
    'lemma-3.1': (EXPLICIT, _local_kernel),
    'local-bound-chain': (EXPLICIT, _local_bound_chain),
    'lemma-4.1': (EMPIRICAL, _distance_lower_bound),
    'claim-4.3': (EMPIRICAL, _kernel_growth),
    'lemma-4.2a': (EMPIRICAL, _tilde_separation),
    'lemma-4.2b': (EMPIRICAL, _scale_separation),
    'stima-t': (EMPIRICAL, _time_window),
    'area-bound': (EXPLICIT, _area_bound),
    'interval-implication': (EXPLICIT, _interval_implication),
    'transversality': (EXPLICIT, _transversality),
    'block-bound': (EXPLICIT, _block_bound),
}

LEMMA_IDS = tuple(LEMMAS)


def _floor(lemma_id, params):
    if lemma_id == 'stima-t':
        return epsilon_constant(params)
    return None


def _draw(lemma_id, sampler, total, params, seed):
    key = LEMMA_IDS.index(lemma_id)
    margins, witnesses = [], []
    for chunk, size in enumerate(chunk_sizes(total, CHUNK)):
        margin, witness = sampler(stream(seed, key, chunk), params, size)
        margins.append(margin)
        witnesses.append(witness)
    return np.concatenate(margins), witnesses


def _witness(witnesses, index):
    for witness in witnesses:
        size = len(next(iter(witness.values())))
        if index < size:
            return {name: np.asarray(value[index]).tolist() for name, value in witness.items()}
        index -= size
    raise IndexError(index)


def verify_inequality(lemma_id, sample_budget, params, seed=0):
    '''
        MarginReport with the smallest margin over the samples and its witness.

        Empirical inequalities are also sampled at twice the budget; drift
        is the relative change of the infimum.
    '''
    try:
        kind, sampler = LEMMAS[lemma_id]
    except KeyError:
        raise UnknownLemma(lemma_id)
    total = int(sample_budget) * (2 if kind == EMPIRICAL else 1)
    margins, witnesses = _draw(lemma_id, sampler, total, params, seed)
    if not margins.size:
        raise ValueError(f'no sample of {lemma_id} met its hypotheses')
    best = int(np.argmin(margins))
    margin = float(margins[best])
    drift = None
    if kind == EMPIRICAL:
        first = _draw(lemma_id, sampler, int(sample_budget), params, seed)[0]
        half = float(first.min())
        drift = abs(half - margin) / half if half > 0 else math.inf
    return MarginReport(
        lemma=lemma_id, kind=kind, samples=int(margins.size), margin=margin,
        witness=_witness(witnesses, best), drift=drift, floor=_floor(lemma_id, params))
