import itertools
import math

import attr
import numpy as np
import pytest

from .test import TestCase
from . import zones as m
from .exceptions import AlphaTooSmall, InvalidTime
from .functions import TestFunction
from .lemmas import verify_inequality
from .model import SpectralParams


PLANE = SpectralParams([1.0, 1.0])


def bump_instance(width=0.05):
    '''
        Narrow bump reached from xi = 2.5 at t = 1/2 with m1 = m2 = 0.
    '''
    center = [2.5 * math.exp(0.5), 0.0]
    return TestFunction.gaussian_bump([center], width, [1.0, 1.0], k=1)


class Test_epsilon(TestCase):

    def test_constant_solves_its_equation(self):
        params = SpectralParams([0.5, 2.0])
        c0 = m.epsilon_constant(params)
        growth = 2.0 * math.exp(2.0)
        assert 0 < c0 < 1
        assert math.sqrt(c0) + growth * c0 * (1 + math.sqrt(c0)) == pytest.approx(1, abs=1e-10)

    def test_scaling_in_xi(self):
        params = SpectralParams([1.0])
        near = m.epsilon_bound([10.0], 0, params)
        far = m.epsilon_bound([1000.0], 0, params)
        assert far / near == pytest.approx((11 / 1001) ** 2)

    def test_m1_divides_by_four(self):
        params = SpectralParams([1.0, 3.0])
        x = np.array([0.7, -1.2])
        for m1 in range(5):
            assert m.epsilon_bound(x, m1 + 1, params) == pytest.approx(
                m.epsilon_bound(x, m1, params) / 4, rel=1e-15)

    def test_uses_global_coordinates_only(self):
        params = SpectralParams([1.0, 2.0])
        assert m.epsilon_bound([1.0, 5.0], 1, params, k=1) == m.epsilon_bound(
            [1.0, -7.0], 1, params, k=1)

    def test_below_one_in_the_crown(self):
        params = SpectralParams([1.0, 2.0])
        alpha = m.large_alpha_threshold(params) * 1.01
        rng = np.random.default_rng(1)
        xi = rng.standard_normal((1000, 2))
        xi *= np.sqrt(math.log(alpha) / 2 / (params.lambdas * xi ** 2).sum(axis=1))[:, None]
        assert np.all(m.epsilon_bound(xi, 0, params) <= 1)

    def test_empirical_floor(self):
        # the sampled time window never goes below the analytic constant
        params = SpectralParams([1.0, 2.0])
        report = verify_inequality('stima-t', 20_000, params, seed=3)
        assert report.margin >= m.epsilon_constant(params)


class Test_large_alpha_threshold(TestCase):

    def test_value(self):
        params = SpectralParams([1.0, 2.0])
        assert m.large_alpha_threshold(params) == pytest.approx(math.exp(4))
        assert m.large_alpha_threshold(params, k=1) == pytest.approx(math.e)

    def test_refuses_small_alpha(self):
        params = SpectralParams([1.0, 2.0])
        m.check_large_alpha(math.exp(4.01), params)
        with pytest.raises(AlphaTooSmall):
            m.check_large_alpha(math.exp(3.9), params)
        with pytest.raises(AlphaTooSmall):
            m.check_large_alpha(0.5, params)


class Test_shells(TestCase):

    def test_origin_shell(self):
        assert m.in_shell(0.0, 0.25, 0)
        assert m.in_shell(0.5, 0.25, 0)
        assert not m.in_shell(0.50001, 0.25, 0)
        assert m.in_shell(0.50001, 0.25, 1)

    def test_index_matches_shell(self):
        rng = np.random.default_rng(2)
        t = rng.uniform(1e-3, 1, 5000)
        distance = np.sqrt(t) * np.exp(rng.uniform(-3, 4, 5000))
        distance[:8] = np.sqrt(t[:8]) * 2.0 ** np.arange(8)
        index = m.shell_index(distance, t)
        for d, tt, i in zip(distance, t, index):
            assert m.in_shell(d, tt, int(i))


class Test_smm_membership(TestCase):

    def params(self):
        return SpectralParams([1.0, 2.0])

    def test_edge_convention(self, params):
        t = 0.36
        u = np.array([0.5, 0.2])
        x = np.exp(-params.lambdas * t) * u
        x[1] = u[1]
        assert m.smm_membership(x, u, t, 0, 0, 1, [0], params)
        assert not m.smm_membership(x, u, t, 1, 0, 1, [0], params)
        assert not m.smm_membership(x, u, t, 0, 1, 1, [0], params)

    def test_outside_cell(self, params):
        t = 0.5
        x = np.array([0.0, 5.0])
        assert not any(
            m.smm_membership(x, x, t, m1, m2, 1, [0], params)
            for m1, m2 in itertools.product(range(6), repeat=2))

    def test_partition(self, params):
        rng = np.random.default_rng(4)
        grid = m.cell_grid(1, 2, [1])
        low, high = grid.cell([1])
        wide_low, wide_high = grid.cell([1], 3)
        count = 300
        x = np.column_stack([rng.uniform(-3, 3, count), rng.uniform(low, high, (count, 1))])
        u = np.column_stack([rng.uniform(-3, 3, count),
                             rng.uniform(wide_low, wide_high, (count, 1))])
        t = 1 - rng.uniform(size=count)
        for xx, uu, tt in zip(x, u, t):
            total = sum(
                int(m.smm_membership(xx, uu, tt, m1, m2, 1, [1], params, grid))
                for m1, m2 in itertools.product(range(14), repeat=2))
            assert total == 1

    def test_time_window(self, params):
        with pytest.raises(InvalidTime):
            m.smm_membership([0, 0], [0, 0], 1.5, 0, 0, 1, [0], params)
        with pytest.raises(InvalidTime):
            m.smm_membership([0, 0], [0, 0], 0.0, 0, 0, 1, [0], params)


class Test_smm_kernel(TestCase):

    def test_value(self):
        params = SpectralParams([1.0, 2.0])
        t = 0.25
        x = np.array([2.0, 0.1])
        u = np.array([math.exp(t) * 2.0 + 0.1, 0.1])
        c = m.smm_c(params)
        expected = math.exp(4.0) / t * math.exp(-2 * c)
        assert m.smm_kernel(x, u, t, 0, 0, 1, [0], params) == pytest.approx(expected)

    def test_zero_outside_mk(self):
        params = SpectralParams([1.0, 2.0])
        # global coordinate too close: the pair is not in M_1
        x = np.array([2.0, 0.1])
        u = np.array([2.01, 0.1])
        assert m.smm_kernel(x, u, 0.01, 0, 0, 1, [0], params) == 0
        assert m.smm_membership(x, u, 0.01, 0, 0, 1, [0], params)

    def test_domination(self):
        params = SpectralParams([1.0, 2.0])
        for nu in ([0], [2], [-1]):
            observed = m.domination_constant(params, 1, nu, 100_000, seed=5)
            assert observed <= m.domination_bound(params, 1)

    def test_domination_all_global(self):
        params = SpectralParams([0.5, 1.5])
        observed = m.domination_constant(params, 2, [], 50_000, seed=6)
        assert observed <= m.domination_bound(params, 2)


class Test_ellipsoids_disjoint(TestCase):

    def test_intervals(self):
        assert m.ellipsoids_disjoint([0.0], [1.0], [3.01], [2.0])
        assert not m.ellipsoids_disjoint([0.0], [1.0], [2.99], [2.0])

    def test_circles(self):
        assert m.ellipsoids_disjoint([0, 0], [1, 1], [2.01, 0], [1, 1])
        assert not m.ellipsoids_disjoint([0, 0], [1, 1], [1.99, 0], [1, 1])

    def test_anisotropic(self):
        # long thin ellipses crossing at the origin
        assert not m.ellipsoids_disjoint([0, 0], [3, 0.1], [0, 0.5], [0.1, 3])
        # side by side: thin along the separating direction
        assert m.ellipsoids_disjoint([0, 0], [0.1, 3], [0.3, 0], [0.1, 3])


class Test_forbidden_zone_recursion(TestCase):

    def recursion(self, f, **options):
        return m.forbidden_zone_recursion(
            PLANE, f, math.exp(4), 1, [0], 0, 0, **options)

    def test_zero_function(self):
        f = bump_instance().scaled(0.0)
        run = self.recursion(f)
        assert run.selections == 0
        assert run.level_set_size == 0
        assert run.holds

    def test_single_bump(self):
        f = bump_instance()
        run = self.recursion(f)
        assert run.selections >= 1
        first = run.steps[0]
        assert m.epsilon_bound(first.x, 0, PLANE, 1) <= first.t <= 1
        assert first.value >= run.alpha
        low, high = f.support_box()
        points, weights = f.quadrature_points()
        in_box = np.all((points >= low[0]) & (points <= high[0]), axis=1)
        assert np.any(first.ball.contains(points) & in_box & (weights > 0))
        assert first.mass > 0

    def test_verdicts(self):
        run = self.recursion(bump_instance())
        assert run.covered
        assert run.ratios_bounded
        betas = [step.beta for step in run.steps]
        assert betas == sorted(betas)
        for step in run.steps:
            assert step.ratio <= run.ratio_limit
            assert step.zone.contains(step.x[None, :])[0]

    def test_default_constants(self):
        run = self.recursion(bump_instance())
        assert run.M == 2
        assert run.A == pytest.approx(2 * math.e * math.sqrt(2))
        assert run.B == pytest.approx(2 * math.sqrt(2))

    def test_alpha_too_small(self):
        with pytest.raises(AlphaTooSmall):
            m.forbidden_zone_recursion(PLANE, bump_instance(), 2.0, 1, [0], 0, 0)


class Test_zone_ratio_limit(TestCase):

    def test_line(self):
        # k = n = 1: e^beta erfc(sqrt(beta)) decreases, the lower crown level wins
        line = SpectralParams([1.0])
        expected = (math.exp(2) * math.erfc(math.sqrt(2)) * (1 + math.sqrt(8))
                    / math.sqrt(m.epsilon_constant(line)))
        limit = m.zone_ratio_limit(line, 1, math.exp(4), 0, 0, B=123.0)
        assert limit == pytest.approx(expected, rel=1e-9)

    def test_local_factor(self):
        base = m.zone_ratio_limit(PLANE, 1, math.exp(4), 0, 0, B=1.0)
        assert m.zone_ratio_limit(PLANE, 1, math.exp(4), 0, 1, B=3.0) == pytest.approx(6 * base)
        assert m.zone_ratio_limit(PLANE, 1, math.exp(4), 1, 0, B=1.0) == pytest.approx(8 * base)

    def test_fixed_before_selection(self):
        instance = m.mirror_instance([0.6, 1.0], 5.5, 0.08)
        run = instance.run(M=8.0)
        assert run.ratio_limit == m.zone_ratio_limit(
            instance.params, 1, instance.alpha, 0, 0, run.B)
        assert run.ratios_bounded
        assert max(run.ratios) < run.ratio_limit

    def test_ratio_above_limit_fails(self):
        run = m.mirror_instance([0.6, 1.0], 5.5, 0.08).run(M=8.0)
        tight = attr.evolve(run, ratio_limit=min(run.ratios) / 2)
        assert not tight.ratios_bounded
        assert not tight.holds
        assert tight.verdicts['ratios_bounded'] is False


class Test_mirror_instance(TestCase):

    def instance(self):
        return m.mirror_instance([0.6, 1.0], 5.5, 0.08)

    def test_atoms(self, instance):
        atom, mirror = instance.f.centers
        assert mirror[0] == -atom[0]
        assert atom[1] == mirror[1] == 0
        assert instance.m1 == 0
        assert instance.nu == (0,)

    def test_selects_on_both_sides(self, instance):
        run = instance.run(M=8.0)
        assert run.selections >= 2
        assert {np.sign(step.x[0]) for step in run.steps} == {-1.0, 1.0}
        assert run.disjoint
        for first, second in itertools.combinations(run.steps, 2):
            assert first.ball.disjoint_from(second.ball)
        assert run.holds

    def test_ratios_within_a_run_are_close(self, instance):
        run = instance.run(M=8.0)
        assert max(run.ratios) / min(run.ratios) <= 20

    def test_small_constant_breaks_disjointness(self, instance):
        run = instance.run(M=1 / 8)
        assert run.selections >= 3
        assert not run.disjoint
        assert not run.holds

    def test_two_selections_per_side_overlap(self, instance):
        run = instance.run(M=1 / 8)
        for i, j in run.overlapping:
            assert np.sign(run.steps[i].x[0]) == np.sign(run.steps[j].x[0])

    def test_stable_under_refinement(self, instance):
        coarse = instance.run(M=8.0, resolution=200, local_resolution=20)
        fine = instance.run(M=8.0, resolution=400, local_resolution=40)
        assert coarse.selections >= 2
        assert fine.selections >= 2
        assert m.refinement_stable(coarse, fine)


class Test_random_instances(TestCase):

    def test_reproducible(self):
        first = m.random_instance(7, 3)
        second = m.random_instance(7, 3)
        np.testing.assert_array_equal(first.f.centers, second.f.centers)
        assert first.alpha == second.alpha
        assert (first.m1, first.m2, first.nu) == (second.m1, second.m2, second.nu)

    def test_tuned_constant_separates(self):
        instances = m.random_instances(11, 6)
        M, (runs,) = m.tune_zone_constant(instances)
        assert m.DEFAULT_M <= M <= 16
        for run in runs:
            assert run.selections >= 2
            assert run.disjoint
            assert run.covered
            assert run.ratios_bounded
            assert run.M == M
        ratios = [ratio for run in runs for ratio in run.ratios]
        assert max(ratios) / min(ratios) <= 20

    def test_tuning_over_two_grids(self):
        instances = m.random_instances(12, 2)
        M, runs = m.tune_zone_constant(instances, grids=[(200, 20), (400, 40)])
        assert [len(grid_runs) for grid_runs in runs] == [2, 2]
        for coarse, fine in zip(*runs):
            assert coarse.M == fine.M == M
            assert m.refinement_stable(coarse, fine)
