import math

import numpy as np
import pytest

from . import rootfind as m
from ..exceptions import NoRoot


def test_solve_increasing():
    assert m.solve_increasing(math.exp, 10.0) == pytest.approx(math.log(10), abs=1e-11)


def test_solve_increasing_far_root():
    root = m.solve_increasing(lambda x: x, 1e6, step=0.25)
    assert root == pytest.approx(1e6, rel=1e-12)


def test_start_above_target():
    with pytest.raises(NoRoot):
        m.solve_increasing(math.exp, 0.5)


def test_root_at_start():
    assert m.solve_increasing(lambda x: x, 3.0, start=3.0) == 3.0


def test_no_root():
    with pytest.raises(NoRoot):
        m.solve_increasing(lambda x: 1 - math.exp(-x), 2.0)


def test_solve_decreasing():
    assert m.solve_decreasing(lambda x: math.exp(-x), 0.1) == pytest.approx(
        math.log(10), abs=1e-11)


def test_bisect_decreasing_elementwise():
    targets = np.array([0.5, 0.1, 0.01])
    roots = m.bisect_decreasing(
        lambda x: np.exp(-x) * np.array([1.0, 2.0, 3.0]), targets, np.zeros(3), np.full(3, 20.0))
    np.testing.assert_allclose(roots, np.log(np.array([1.0, 2.0, 3.0]) / targets), atol=1e-10)
