import math

import numpy as np
import pytest
from numpy.polynomial import hermite

from .test import TestCase
from . import mehler as m
from .exceptions import DimensionMismatch, InvalidTime
from .model import SpectralParams, diagonal_model
from .normal_form import CanonicalForm, decompose, random_normal_model
from .tech import quadrature


def gamma_rule(lambdas, order=64):
    lambdas = np.asarray(lambdas, dtype=float)
    return quadrature.gaussian_rule(np.zeros(lambdas.size), np.diag(1 / (2 * lambdas)), order)


def hermite_mehler(t, x, u, terms=80):
    # sum_k e^{-kt} h_k(x) h_k(u), h_k orthonormal Hermite polynomials for e^{-x^2}/sqrt(pi)
    total = 0.0
    for k in range(terms):
        unit = [0] * k + [1]
        norm = 2.0 ** k * math.factorial(k)
        total += math.exp(-k * t) * hermite.hermval(x, unit) * hermite.hermval(u, unit) / norm
    return total


class Test_kernel_1d(TestCase):

    def test_origin(self):
        lam, t = 0.7, 0.2
        expected = (1 - math.exp(-2 * lam * t)) ** -0.5
        self.assert_close(m.kernel_1d(lam, t, 0.0, 0.0), expected, rtol=1e-14)

    def test_long_time_limit(self):
        x, u = np.meshgrid(np.linspace(-3, 3, 13), np.linspace(-3, 3, 13))
        self.assert_close(m.kernel_1d(1.0, 100.0, x, u), 1.0, atol=1e-10)

    def test_value(self):
        expected = math.e * (3 / 4) ** -0.5 * math.exp(-4 / 3)
        self.assert_close(m.kernel_1d(1.0, math.log(2), 1.0, 0.0), expected, rtol=1e-14)

    def test_hermite_expansion(self):
        for x, u in [(1.0, 0.0), (0.3, -0.8), (-1.2, 0.5)]:
            self.assert_close(
                m.kernel_1d(1.0, math.log(2), x, u), hermite_mehler(math.log(2), x, u),
                rtol=1e-10)

    def test_nonpositive_time(self):
        with pytest.raises(InvalidTime):
            m.kernel_1d(1.0, 0.0, 0.0, 0.0)


class Test_kernel_diag(TestCase):

    def test_tensorization(self):
        rng = np.random.default_rng(1)
        for n in range(1, 7):
            params = SpectralParams(rng.uniform(0.2, 3, size=n))
            t = 10 ** rng.uniform(-3, 1, size=10 ** 4)
            x = rng.uniform(-3, 3, size=(10 ** 4, n))
            u = rng.uniform(-3, 3, size=(10 ** 4, n))
            total = m.log_kernel_diag(params, t, x, u)
            factors = sum(
                m.log_kernel_1d(lam, t, x[:, j], u[:, j]) for j, lam in enumerate(params.lambdas))
            assert np.abs(total - factors).max() <= 1e-13 * max(1.0, np.abs(total).max())

    def test_origin(self):
        params = SpectralParams([1, 2])
        expected = np.prod((-np.expm1(-2 * params.lambdas * 0.5)) ** -0.5)
        self.assert_close(m.kernel_diag(params, 0.5, [0, 0], [0, 0]), expected, rtol=1e-14)

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        params = SpectralParams([0.5, 1.5])
        t = 10 ** rng.uniform(-2, 1, size=10 ** 4)
        x, u = rng.uniform(-2, 2, size=(2, 10 ** 4, 2))
        self.assert_close(m.log_kernel_diag(params, t, x, u), m.log_kernel_diag(params, t, u, x),
                          atol=1e-9, rtol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            m.kernel_diag(SpectralParams([1, 2]), 1.0, [0, 0, 0], [0, 0])


@pytest.mark.parametrize('lambdas', [[1.0], [0.5, 2.0], [1.0, 1.5, 0.7]])
@pytest.mark.parametrize('t', [0.3, 1.0, 3.0])
def test_kernel_is_markov(lambdas, t):
    params = SpectralParams(lambdas)
    points, weights = gamma_rule(lambdas, order=64 if len(lambdas) < 3 else 32)
    for x in np.random.default_rng(3).uniform(-1.5, 1.5, size=(5, len(lambdas))):
        mass = weights @ m.kernel_diag(params, t, x, points)
        assert abs(mass - 1) <= 1e-8


def test_chapman_kolmogorov():
    params = SpectralParams([1.0])
    points, weights = gamma_rule([1.0], order=96)
    for s in (0.3, 0.7):
        for t in (0.4, 1.0):
            for x in (-1.0, 0.2, 1.3):
                for v in (-0.5, 0.8):
                    left = weights @ (
                        m.kernel_diag(params, s, [x], points)
                        * m.kernel_diag(params, t, points, [v]))
                    right = m.kernel_diag(params, s + t, [x], [v])
                    assert abs(left - right) <= 1e-6


class Test_kernel_block2d(TestCase):

    def test_full_turn(self):
        x, u = np.random.default_rng(4).normal(size=(2, 20, 2))
        block = m.kernel_block2d(1.0, 2 * math.pi, 1.0, x, u)
        self.assert_close(block, m.kernel_diag(SpectralParams([1, 1]), 1.0, x, u), rtol=1e-12)

    def test_small_rotation(self):
        x, u = np.random.default_rng(5).normal(size=(2, 20, 2))
        block = m.kernel_block2d(1.0, 1e-8, 0.5, x, u)
        self.assert_close(block, m.kernel_diag(SpectralParams([1, 1]), 0.5, x, u), rtol=1e-6)

    def test_origin(self):
        lam, t = 1.3, 0.4
        self.assert_close(m.kernel_block2d(lam, 5.0, t, [0, 0], [0, 0]),
                          1 / -math.expm1(-2 * lam * t), rtol=1e-14)

    def test_large_angle_is_reduced(self):
        x, u = np.array([0.3, -0.2]), np.array([1.0, 0.4])
        q, t = 3.0, 0.25
        turns = 1e6 * 2 * math.pi / t
        self.assert_close(m.kernel_block2d(1.0, q + turns, t, x, u),
                          m.kernel_block2d(1.0, q, t, x, u), rtol=1e-6)


class Test_bound_block2d(TestCase):

    def test_dominates_kernel(self):
        rng = np.random.default_rng(6)
        for lam in (0.3, 1.0, 2.5):
            for q in (-10, -1, -0.1, 0.1, 1, 10):
                t = np.logspace(-3, 1, 30)[:, None]
                x, u = rng.normal(size=(2, 30, 200, 2))
                bound = m.log_bound_block2d(lam, t, x, u)
                kernel = m.log_kernel_block2d(lam, q, t, x, u)
                margin = m.block_bound_margin(lam, q, t, x, u)
                assert np.all(margin >= 0)
                self.assert_close(bound - kernel, margin, atol=1e-8 * np.abs(bound).max())

    def test_equality_at_origin(self):
        zero = np.zeros(2)
        self.assert_close(m.bound_block2d(1.0, 0.3, zero, zero),
                          m.kernel_block2d(1.0, 7.0, 0.3, zero, zero), rtol=1e-14)

    def test_strict_without_rotation(self):
        x, u = np.array([1.0, 0.5]), np.array([0.2, -0.3])
        assert m.bound_block2d(1.0, 0.5, x, u) > m.kernel_block2d(1.0, 0.0, 0.5, x, u)


class Test_kernel_kappa(TestCase):

    def test_kappa_one_is_mehler(self):
        params = SpectralParams([0.5, 2.0])
        x, u = np.random.default_rng(7).normal(size=(2, 50, 2))
        np.testing.assert_array_equal(
            m.kernel_kappa(m.KernelSpec(params), 0.7, x, u), m.kernel_diag(params, 0.7, x, u))

    def test_decreasing_in_kappa(self):
        params = SpectralParams([0.5, 2.0])
        x, u = np.random.default_rng(8).normal(size=(2, 50, 2))
        half = m.kernel_kappa(m.KernelSpec(params, 0.5), 0.7, x, u)
        full = m.kernel_kappa(m.KernelSpec(params, 1.0), 0.7, x, u)
        assert np.all(half > full)

    def test_half_is_block_bound(self):
        x, u = np.random.default_rng(9).normal(size=(2, 50, 2))
        spec = m.KernelSpec(SpectralParams([1.2, 1.2]), 0.5)
        self.assert_close(m.kernel_kappa(spec, 0.4, x, u), m.bound_block2d(1.2, 0.4, x, u),
                          rtol=1e-12)

    def test_kappa_must_be_positive(self):
        with pytest.raises(ValueError):
            m.KernelSpec(SpectralParams([1.0]), 0.0)


class Test_kernel_general(TestCase):

    def test_no_blocks_is_diagonal(self):
        form = CanonicalForm.from_parameters(scalars=[2.0, 1.0])
        x, u = np.random.default_rng(10).normal(size=(2, 20, 2))
        self.assert_close(m.kernel_general(form, 0.3, x, u),
                          m.kernel_diag(SpectralParams([2.0, 1.0]), 0.3, x, u), rtol=1e-13)

    def test_origin(self):
        form = CanonicalForm.from_parameters(blocks=[(1.5, 2.0)], scalars=[0.5])
        t = 0.6
        expected = 1 / -math.expm1(-3 * t) / math.sqrt(-math.expm1(-t))
        self.assert_close(m.kernel_general(form, t, np.zeros(3), np.zeros(3)), expected,
                          rtol=1e-13)

    def test_bounded_by_half_kappa_kernel(self):
        form = CanonicalForm.from_parameters(blocks=[(1.0, 3.0), (0.5, -2.0)], scalars=[2.0])
        spec = m.KernelSpec(form, 0.5)
        rng = np.random.default_rng(11)
        t = 10 ** rng.uniform(-3, 1, size=10 ** 5)
        x, u = rng.normal(size=(2, 10 ** 5, 5))
        assert np.all(m.log_kernel_general(form, t, x, u) <= m.log_kernel_kappa(spec, t, x, u))


class Test_transition_kernels(TestCase):

    def test_block_transition_is_markov(self):
        points, weights = gamma_rule([1.3, 1.3])
        for x in np.random.default_rng(12).uniform(-1, 1, size=(5, 2)):
            mass = weights @ m.transition_kernel_block2d(1.3, 2.0, 0.5, x, points)
            assert abs(mass - 1) <= 1e-8

    def test_printed_block_kernel_loses_mass(self):
        points, weights = gamma_rule([1.0, 1.0])
        x = np.array([1.0, 0.5])
        mass = weights @ m.kernel_block2d(1.0, 2.0, 0.5, x, points)
        a, D = math.exp(-0.5), -math.expm1(-1.0)
        expected = math.exp(-a ** 2 * (1 - math.cos(1.0)) * (x @ x) / (2 * D))
        assert abs(mass - expected) <= 1e-8

    def test_diagonal_model(self):
        model = diagonal_model([0.5, 2.0])
        x, u = np.random.default_rng(13).normal(size=(2, 30, 2))
        self.assert_close(m.transition_kernel(model, 0.8, x, u),
                          m.kernel_diag(SpectralParams([0.5, 2.0]), 0.8, x, u), rtol=1e-10)

    def test_original_and_canonical_coordinates(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            model, _, _ = random_normal_model(rng, int(rng.integers(2, 5)))
            form = decompose(model)
            x, u = rng.normal(size=(2, 20, model.n))
            t = rng.uniform(0.1, 2)
            original = m.log_transition_kernel(model, t, x, u)
            canonical = m.log_transition_general(form, t, form.to_canonical(x),
                                                 form.to_canonical(u))
            assert np.abs(original - canonical).max() <= 1e-8


class Test_kappa_transition(TestCase):

    def test_kappa_one(self):
        log_mass, mean, var = m.kappa_transition([1.0, 2.0], 1.0, 0.5, [0.3, -1.0])
        a = np.exp(-np.array([1.0, 2.0]) * 0.5)
        assert abs(log_mass) <= 1e-15
        self.assert_close(mean, a * [0.3, -1.0], rtol=1e-14)
        self.assert_close(var, (1 - a ** 2) / (2 * np.array([1.0, 2.0])), rtol=1e-14)

    def test_matches_quadrature(self):
        lambdas, kappa, t = [0.8], 0.5, 0.6
        spec = m.KernelSpec(SpectralParams(lambdas), kappa)
        points, weights = gamma_rule(lambdas, order=96)
        for x in (-1.0, 0.4, 2.0):
            def f(u):
                return np.exp(-(u[..., 0] - 0.5) ** 2)
            direct = weights @ (m.kernel_kappa(spec, t, [x], points) * f(points))
            log_mass, mean, var = m.kappa_transition(lambdas, kappa, t, [x])
            inner = quadrature.expectation(f, mean, np.diag(var)).value
            assert abs(direct - math.exp(log_mass) * inner) <= 1e-8
