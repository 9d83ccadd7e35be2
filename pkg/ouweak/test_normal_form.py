import numpy as np
import pytest
from scipy import linalg

from .test import TestCase
from . import normal_form as m
from .exceptions import DegenerateBlockWarning, NotNormal
from .model import covariance_matrix, diagonal_model, validate_model, INFINITE_TIME


def canonical_pairs(blocks):
    return sorted((round(lam, 6), round(abs(q), 6)) for lam, q in blocks)


class Test_check_normal(TestCase):

    def test_diagonal(self):
        check = m.check_normal(diagonal_model([1, 2]))
        assert check.is_normal
        assert check.commutator_norm == 0

    def test_building_block(self):
        R = np.array([[0, 1], [-1, 0]])
        check = m.check_normal(validate_model(np.eye(2), 1.5 * (R - np.eye(2))))
        assert check
        assert check.commutator_norm < 1e-12

    def test_jordan_block(self):
        check = m.check_normal(validate_model(np.eye(2), [[-1, 1], [0, -1]]))
        assert not check
        assert check.commutator_norm > 0.1


class Test_decompose(TestCase):

    def test_diagonal_is_already_canonical(self):
        form = m.decompose(diagonal_model([1, 2]))
        assert len(form.blocks) == 0
        assert sorted(form.scalars) == [1, 2]
        # descending rates
        assert list(form.scalars) == [2, 1]
        self.assert_close(abs(form.basis), [[0, 1], [1, 0]])

    def test_single_block(self):
        form = m.decompose(validate_model(np.eye(2), [[-1, 3], [-3, -1]]))
        self.assert_close(form.blocks, [[1, 3]], atol=1e-12)
        assert len(form.scalars) == 0

    def test_negative_rotation_is_flipped(self):
        form = m.decompose(validate_model(np.eye(2), [[-1, -3], [3, -1]]))
        self.assert_close(form.blocks, [[1, 3]], atol=1e-12)
        self.assert_close(form.basis.T @ form.drift @ form.basis, [[-1, -3], [3, -1]],
                          atol=1e-12)

    def test_jordan_block_is_rejected(self):
        with pytest.raises(NotNormal):
            m.decompose(validate_model(np.eye(2), [[-1, 1], [0, -1]]))

    def test_recovers_rotated_canonical_data(self):
        rng = np.random.default_rng(17)
        for n in range(1, 7):
            model, blocks, scalars = m.random_normal_model(rng, n, whiten=False)
            form = m.decompose(model)
            assert canonical_pairs(form.blocks) == canonical_pairs(blocks)
            self.assert_close(sorted(form.scalars), sorted(scalars), atol=1e-8)

    def test_ordering(self):
        form = m.decompose(validate_model(
            np.eye(5), linalg.block_diag([[-1, 2], [-2, -1]], [[-3]], [[-2, 5], [-5, -2]])))
        self.assert_close(form.blocks, [[2, 5], [1, 2]], atol=1e-12)
        self.assert_close(form.scalars, [3], atol=1e-12)

    def test_eigenvalues_match(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            model, _, _ = m.random_normal_model(rng, 5)
            form = m.decompose(model)
            expected = np.sort_complex(linalg.eigvals(model.B))
            actual = np.sort_complex(linalg.eigvals(form.drift))
            self.assert_close(actual, expected, atol=1e-8)

    def test_canonical_invariant_covariance(self):
        model, _, _ = m.random_normal_model(np.random.default_rng(29), 4)
        form = m.decompose(model)
        canonical = validate_model(np.eye(form.n), form.drift)
        self.assert_close(covariance_matrix(canonical, INFINITE_TIME),
                          np.diag(1 / (2 * form.lambdas)), atol=1e-12)

    def test_deterministic(self):
        model, _, _ = m.random_normal_model(np.random.default_rng(31), 5)
        first, second = m.decompose(model), m.decompose(model)
        np.testing.assert_array_equal(first.blocks, second.blocks)
        np.testing.assert_array_equal(first.basis, second.basis)


class Test_reconstruct(TestCase):

    def test_scalar(self):
        model = m.reconstruct(m.CanonicalForm.from_parameters(scalars=[1]))
        self.assert_close(model.Q, [[1]])
        self.assert_close(model.B, [[-1]])

    def test_block(self):
        model = m.reconstruct(m.CanonicalForm.from_parameters(blocks=[(1, 2)]))
        self.assert_close(model.B, [[-1, 2], [-2, -1]])

    def test_roundtrip_on_random_models(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            model, _, _ = m.random_normal_model(rng, int(rng.integers(1, 7)))
            rebuilt = m.reconstruct(m.decompose(model))
            assert np.linalg.norm(rebuilt.B - model.B) <= 1e-8
            assert np.linalg.norm(rebuilt.Q - model.Q) <= 1e-8

    def test_decompose_of_reconstruct(self):
        form = m.CanonicalForm.from_parameters(blocks=[(2, 1), (1, 4)], scalars=[0.5])
        again = m.decompose(m.reconstruct(form))
        self.assert_close(again.blocks, form.blocks, atol=1e-10)
        self.assert_close(again.scalars, form.scalars, atol=1e-10)


def test_degenerate_block_is_split():
    T = np.array([[-1.0, 1e-12], [-1e-12, -1.0]])
    with pytest.warns(DegenerateBlockWarning):
        blocks, scalars, basis = m.canonical_blocks(T, np.eye(2))
    assert blocks == []
    assert scalars == [1.0, 1.0]


def test_canonical_coordinates_roundtrip():
    model, _, _ = m.random_normal_model(np.random.default_rng(41), 4)
    form = m.decompose(model)
    x = np.random.default_rng(43).standard_normal((10, 4))
    np.testing.assert_allclose(form.from_canonical(form.to_canonical(x)), x, atol=1e-12)


def test_building_blocks():
    form = m.CanonicalForm.from_parameters(blocks=[(2, 3)], scalars=[1])
    blocks = form.building_blocks()
    np.testing.assert_allclose(blocks[0].drift, [[-2, 3], [-3, -2]])
    np.testing.assert_allclose(blocks[1].drift, [[-1]])
    with pytest.raises(ValueError):
        m.BuildingBlock(1, [[0, 1], [1, 0]])
