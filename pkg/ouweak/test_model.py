import math

import numpy as np
import pytest
from scipy import integrate, linalg

from .test import TestCase
from . import model as m
from .tech import quadrature
from .exceptions import (
    DimensionMismatch, InvalidTime, ModelFileError, NotHurwitz, NotPositiveDefinite,
    NotSymmetric)


def random_model(rng, n):
    M = rng.standard_normal((n, n))
    B = M - (linalg.eigvals(M).real.max() + 0.5) * np.eye(n)
    C = rng.standard_normal((n, n))
    return m.validate_model(C @ C.T + 0.5 * np.eye(n), B)


class Test_validate_model(TestCase):

    def test_symmetric_case(self):
        model = m.validate_model(np.eye(2), -np.eye(2))
        assert model.n == 2
        assert model.is_diagonal

    def test_rotating_drift(self):
        model = m.validate_model(np.eye(2), [[-1, 2], [-2, -1]])
        self.assert_close(model.eigenvalues, [-1 - 2j, -1 + 2j], atol=1e-12)
        assert not model.has_diagonal_drift

    def test_zero_eigenvalue_is_not_hurwitz(self):
        with pytest.raises(NotHurwitz):
            m.validate_model([[1]], [[0]])

    def test_asymmetric_covariance(self):
        with pytest.raises(NotSymmetric):
            m.validate_model([[1, 0.5], [0, 1]], -np.eye(2))

    def test_indefinite_covariance(self):
        with pytest.raises(NotPositiveDefinite):
            m.validate_model([[1, 2], [2, 1]], -np.eye(2))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            m.validate_model(np.eye(2), -np.eye(3))

    def test_arrays_are_read_only(self):
        model = m.diagonal_model([1, 2])
        with pytest.raises(ValueError):
            model.B[0, 0] = 3


class Test_covariance_qt(TestCase):

    def test_diagonal_closed_form(self):
        measure = m.covariance_qt(m.diagonal_model([1]), math.log(2))
        self.assert_close(measure.sigma, [[3 / 8]], rtol=1e-14)

    def test_diagonal_closed_form_matches_quadrature(self):
        value, _ = integrate.quad(lambda s: math.exp(-2 * s), 0, math.log(2))
        self.assert_close(m.covariance_matrix(m.diagonal_model([1]), math.log(2)), [[value]],
                          rtol=1e-12)

    def test_invariant_diagonal(self):
        sigma = m.covariance_matrix(m.diagonal_model([1, 2, 3]), m.INFINITE_TIME)
        self.assert_close(sigma, np.diag([1 / 2, 1 / 4, 1 / 6]), rtol=1e-15)

    def test_building_block_invariant(self):
        lam = 0.7
        model = m.validate_model(np.eye(2), lam * (np.array([[0, 1], [-1, 0]]) - np.eye(2)))
        sigma = m.covariance_matrix(model, m.INFINITE_TIME)
        self.assert_close(sigma, np.eye(2) / (2 * lam), atol=1e-14)
        assert m.lyapunov_residual(model, sigma) < 1e-12

    def test_non_normal_quadrature_matches_lyapunov_identity(self):
        model = random_model(np.random.default_rng(5), 3)
        t = 0.8
        E = model.drift_exp(t)
        Q_inf = model.stationary_covariance
        expected = Q_inf - E @ Q_inf @ E.T
        self.assert_close(m.covariance_matrix(model, t), expected, atol=1e-10)

    def test_nonpositive_time(self):
        model = m.diagonal_model([1])
        for t in (0, -1, float('nan')):
            with pytest.raises(InvalidTime):
                m.covariance_qt(model, t)

    def test_monotone_in_time(self):
        rng = np.random.default_rng(11)
        model = random_model(rng, 2)
        for _ in range(100):
            t1, t2 = np.sort(rng.uniform(0.01, 5, size=2))
            difference = m.covariance_matrix(model, t2) - m.covariance_matrix(model, t1)
            assert linalg.eigvalsh(difference).min() >= -1e-10

    def test_converges_to_invariant(self):
        model = m.diagonal_model([0.5, 1, 4])
        t = 40 / 0.5
        distance = np.linalg.norm(
            m.covariance_matrix(model, t) - m.covariance_matrix(model, m.INFINITE_TIME))
        assert distance <= 1e-8


@pytest.mark.parametrize('n', [1, 2, 3, 4, 5, 6])
def test_lyapunov_residual(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        model = random_model(rng, n)
        sigma = m.covariance_matrix(model, m.INFINITE_TIME)
        assert m.lyapunov_residual(model, sigma) <= 1e-10


class Test_gaussian_density(TestCase):

    def test_origin_in_one_dimension(self):
        measure = m.invariant_measure(m.diagonal_model([1]))
        self.assert_close(m.gaussian_density(measure, [0.0]), 1 / math.sqrt(math.pi),
                          rtol=1e-14)

    def test_two_dimensions(self):
        measure = m.invariant_measure(m.diagonal_model([1, 1]))
        self.assert_close(m.gaussian_density(measure, [1.0, 0.0]), math.exp(-1) / math.pi,
                          rtol=1e-14)

    def test_even(self):
        measure = m.invariant_measure(random_model(np.random.default_rng(1), 3))
        x = np.random.default_rng(2).standard_normal((50, 3))
        self.assert_close(measure.density(x), measure.density(-x), rtol=1e-13)

    def test_unit_mass(self):
        measure = m.invariant_measure(m.validate_model([[2, 0.5], [0.5, 1]], -np.eye(2)))
        proposal = m.GaussianMeasure.from_covariance(2 * measure.sigma)
        points, weights = quadrature.gaussian_rule(np.zeros(2), proposal.sigma, order=40)
        mass = weights @ (measure.density(points) / proposal.density(points))
        assert abs(mass - 1) <= 1e-8

    def test_dimension_mismatch(self):
        measure = m.invariant_measure(m.diagonal_model([1, 1]))
        with pytest.raises(DimensionMismatch):
            measure.density([1.0])


class Test_generator_apply(TestCase):

    def model(self):
        return m.diagonal_model([1.0, 2.5])

    def test_linear(self, model):
        x = np.array([0.3, -1.2])
        value = m.generator_apply(model, lambda p: p[:, 1], x)
        assert abs(value - (-2.5 * -1.2)) <= 1e-8

    def test_square(self, model):
        x = np.array([0.7, 1.3])
        value = m.generator_apply(model, lambda p: p[:, 0] ** 2, x)
        assert abs(value - (1 - 2 * 0.7 ** 2)) <= 1e-6

    def test_constant(self, model):
        assert abs(m.generator_apply(model, lambda p: np.full(len(p), 3.0), [1, 2])) <= 1e-9


def test_generator_on_cubic_polynomials():
    model = m.validate_model([[1.5, 0.3], [0.3, 0.8]], [[-1, 2], [-0.5, -1.5]])
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.uniform(-1, 1, size=6)
        x = rng.uniform(-2, 2, size=2)

        def f(p):
            return (a[0] * p[:, 0] ** 3 + a[1] * p[:, 0] ** 2 * p[:, 1]
                    + a[2] * p[:, 1] ** 2 + a[3] * p[:, 0] * p[:, 1] + a[4] * p[:, 1] + a[5])

        grad = np.array([
            3 * a[0] * x[0] ** 2 + 2 * a[1] * x[0] * x[1] + a[3] * x[1],
            a[1] * x[0] ** 2 + 2 * a[2] * x[1] + a[3] * x[0] + a[4]])
        hess = np.array([
            [6 * a[0] * x[0] + 2 * a[1] * x[1], 2 * a[1] * x[0] + a[3]],
            [2 * a[1] * x[0] + a[3], 2 * a[2]]])
        expected = 0.5 * np.sum(model.Q * hess) + (model.B @ x) @ grad
        assert abs(m.generator_apply(model, f, x) - expected) <= 1e-6


class Test_model_file(TestCase):

    def test_lambdas(self):
        model = m.model_from_text('# diagonal\n\nlambdas 1 2\n')
        self.assert_close(model.B, -np.diag([1, 2]))

    def test_matrices(self):
        model = m.model_from_text('n 2\nQ 1 0 0 1\nB -1 3 -3 -1\n')
        self.assert_close(model.B, [[-1, 3], [-3, -1]])

    def test_roundtrip(self):
        model = random_model(np.random.default_rng(4), 3)
        path = self.new_temp_dir() / 'model.txt'
        m.model_to_file(model, path)
        loaded = m.model_from_file(path)
        np.testing.assert_array_equal(loaded.Q, model.Q)
        np.testing.assert_array_equal(loaded.B, model.B)

    def test_error_has_line_number(self):
        with pytest.raises(ModelFileError, match='line 3'):
            m.model_from_text('n 2\nQ 1 0 0 1\nB -1 x 0 -1\n')

    def test_wrong_entry_count(self):
        with pytest.raises(ModelFileError, match='B needs 4 entries'):
            m.model_from_text('n 2\nQ 1 0 0 1\nB -1 0 -1\n')

    def test_invalid_model_is_model_error(self):
        with pytest.raises(NotHurwitz):
            m.model_from_text('lambdas 1 -2')


class Test_gaussian_sample(TestCase):

    def test_moments(self):
        model = m.validate_model([[2, 0.5], [0.5, 1]], -np.eye(2))
        measure = m.invariant_measure(model)
        sample = m.gaussian_sample(measure, 200_000, np.random.default_rng(3))
        assert sample.shape == (200_000, 2)
        assert np.abs(sample.mean(axis=0)).max() <= 0.02
        self.assert_close(np.cov(sample.T), measure.sigma, atol=0.03)

    def test_same_generator_state_same_sample(self):
        measure = m.invariant_measure(m.diagonal_model([1, 2]))
        first = m.gaussian_sample(measure, 10, np.random.default_rng(5))
        second = m.gaussian_sample(measure, 10, np.random.default_rng(5))
        np.testing.assert_array_equal(first, second)
