import math

import numpy as np
import pytest

import kernelteach as kt
from kernelteach.kernels import poly_features, truncated_gaussian_features
from kernelteach.teaching import (
    TAG_ANCHOR,
    TAG_BASIS,
    TAG_BOUNDARY_NEG,
    TAG_BOUNDARY_POS,
    TAG_OPPOSITE_SUM,
    TeachingSet,
)
from kernelteach.teacher import R_CONVENTION_APPENDIX
from conftest import poly_primal


class TestTeachingSetContainer:
    def test_boundary_pairs_enforced(self):
        z = np.array([[1.0, 0.0]])
        with pytest.raises(ValueError, match="pairs"):
            TeachingSet(z, np.array([1]), (TAG_BOUNDARY_POS,))

    def test_twin_must_share_point(self):
        pts = np.array([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="twin"):
            TeachingSet(pts, np.array([1, -1]),
                        (TAG_BOUNDARY_POS, TAG_BOUNDARY_NEG))

    def test_unknown_tag(self):
        with pytest.raises(ValueError, match="tags"):
            TeachingSet(np.array([[1.0]]), np.array([1]), ("mystery",))

    def test_centers_order(self):
        z1, z2, a = [0.0, 1.0], [1.0, 0.0], [2.0, 2.0]
        ts = TeachingSet(np.array([z1, z1, z2, z2, a]),
                         np.array([1, -1, 1, -1, 1]),
                         (TAG_BOUNDARY_POS, TAG_BOUNDARY_NEG,
                          TAG_BOUNDARY_POS, TAG_BOUNDARY_NEG, TAG_ANCHOR))
        np.testing.assert_array_equal(ts.centers(), np.array([z1, z2, a]))
        np.testing.assert_array_equal(ts.boundary_points(), np.array([z1, z2]))
        assert ts.anchor_index() == 4


class TestLinearTeachingSet:
    def test_paper_instance(self):
        theta = np.array([-3.0, 3.0, 5.0])
        ts = kt.linear_teaching_set(theta)
        assert len(ts) == 4
        assert np.all(ts.labels == 1)
        assert ts.tags == (TAG_BASIS, TAG_BASIS, TAG_OPPOSITE_SUM, TAG_ANCHOR)
        # first three orthogonal to the target, last strictly positive
        margins = ts.points @ theta
        assert np.max(np.abs(margins[:3])) <= 1e-10
        assert margins[3] == pytest.approx(float(theta @ theta))
        # the published set satisfies the same postconditions at 2 decimals,
        # with its last point a positive-margin substitute for the target
        published = np.array([[0.46, 0.86, -0.24], [0.76, -0.24, 0.6],
                              [-1.22, -0.62, -0.36], [-0.46, 0.46, 0.76]])
        pm = published @ theta
        assert np.max(np.abs(pm[:3])) < 5e-2
        assert pm[3] == pytest.approx(6.56, abs=1e-12)
        assert np.max(np.abs(published[2] + published[0] + published[1])) < 5e-3

    def test_opposite_sum_structure(self):
        ts = kt.linear_teaching_set([1.0, 2.0, -1.0, 0.5])
        basis_sum = ts.points[:3].sum(axis=0)
        np.testing.assert_allclose(ts.points[3], -basis_sum, atol=1e-12)

    def test_one_dimensional(self):
        ts = kt.linear_teaching_set([2.0])
        assert len(ts) == 1
        np.testing.assert_array_equal(ts.points, [[2.0]])
        assert ts.labels[0] == 1

    def test_random_five_dimensional(self):
        rng = np.random.default_rng(0)
        theta = rng.standard_normal(5)
        ts = kt.linear_teaching_set(theta)
        assert len(ts) == 6
        margins = ts.points @ theta
        assert np.max(np.abs(margins[:5])) <= 1e-10
        assert margins[5] > 0

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            kt.linear_teaching_set([0.0, 0.0])


class TestPolynomialBoundary:
    def test_known_root_validates(self):
        # x1^2 + 4 sqrt(2) x1 x2 + 4 x2^2 vanishes at (2 - 2 sqrt 2, 1)
        target = poly_primal([1.0, 4.0, 4.0], 2, 2)
        z = np.array([2 - 2 * math.sqrt(2), 1.0])
        value = target.decision_values(z[None, :])[0]
        assert abs(value) <= 1e-12

    def test_sampled_roots(self):
        target = poly_primal([1.0, 4.0, 4.0], 2, 2)
        pts = kt.polynomial_boundary_points(target, 2, 2, count=2, rng_seed=4)
        assert pts.shape == (2, 2)
        unit = target.theta.coords / np.linalg.norm(target.theta.coords)
        values = poly_features(2, 2, pts) @ unit
        assert np.max(np.abs(values)) <= 1e-9
        assert np.linalg.matrix_rank(poly_features(2, 2, pts)) == 2

    def test_count_zero(self):
        target = poly_primal([1.0, 4.0, 4.0], 2, 2)
        assert kt.polynomial_boundary_points(target, 2, 2, 0, 0).shape == (0, 2)

    def test_counterexample_has_no_roots(self):
        bad = kt.axis_power_sum_model(2, 2)
        with pytest.raises(kt.BoundarySampleError) as exc:
            kt.polynomial_boundary_points(bad, 2, 2, count=2, rng_seed=0)
        assert exc.value.achieved == 0
        assert exc.value.min_decision_value > 0
        assert exc.value.n_sampled >= 100_000

    def test_deterministic(self):
        target = poly_primal([1.0, 4.0, 4.0], 2, 2)
        a = kt.polynomial_boundary_points(target, 2, 2, 2, rng_seed=9)
        b = kt.polynomial_boundary_points(target, 2, 2, 2, rng_seed=9)
        np.testing.assert_array_equal(a, b)


class TestPolynomialTeachingSet:
    def test_paper_sizes_and_shape(self):
        target = poly_primal([1.0, 4.0, 4.0], 2, 2)
        ts, report = kt.polynomial_teaching_set(target, 2, 2, rng_seed=3)
        assert len(ts) == 5
        assert sorted(ts.tags) == sorted((TAG_BOUNDARY_POS, TAG_BOUNDARY_NEG) * 2
                                         + (TAG_ANCHOR,))
        assert report.achieved_rank == report.requested_rank == 2
        anchor = ts.points[ts.anchor_index()]
        assert target.decision_values(anchor[None, :])[0] > 0

    def test_boundary_items_duplicated(self):
        target = poly_primal([1.0, 4.0, 4.0], 2, 2)
        ts, _ = kt.polynomial_teaching_set(target, 2, 2, rng_seed=3)
        Z = ts.boundary_points()
        for z in Z:
            matches = [i for i in range(len(ts))
                       if np.array_equal(ts.points[i], z)]
            assert sorted(ts.labels[matches]) == [-1, 1]

    def test_counterexample_propagates(self):
        with pytest.raises(kt.BoundarySampleError):
            kt.polynomial_teaching_set(kt.axis_power_sum_model(2, 2), 2, 2, 0)


class TestAxisPowerSumModel:
    def test_positive_away_from_origin(self):
        rng = np.random.default_rng(1)
        for d, k in ((2, 2), (3, 2), (2, 4)):
            model = kt.axis_power_sum_model(d, k)
            X = rng.uniform(-2, 2, (500, d))
            values = model.decision_values(X)
            expected = (X ** k).sum(axis=1) / math.sqrt(d)
            np.testing.assert_allclose(values, expected, atol=1e-12)
            assert np.all(values > 0)


class TestGaussianTeachingSet:
    def test_structure_and_postconditions(self, checkerboard_target, gaussian_spec):
        ts, config, report = kt.gaussian_teaching_set(
            checkerboard_target, None, rng_seed=5, s=3)
        r = config.r
        assert len(ts) == 2 * (r - 1) + 1
        Z = ts.boundary_points()
        assert len(Z) == r - 1
        # boundary points vanish on the projected model
        feats = truncated_gaussian_features(2, 0.9, 3, Z)
        from kernelteach.teacher import _project_target
        theta = _project_target(checkerboard_target, 3).theta.coords
        assert np.max(np.abs(feats @ theta)) <= 1e-9
        # all teaching points inside the configured ball
        radius = config.teaching_ball_radius(0.9)
        assert np.max(np.linalg.norm(ts.points, axis=1)) <= radius
        # anchor leakage within Q epsilon
        assert report.anchor_leakage <= config.anchor_Q * config.epsilon + 1e-12
        assert report.anchor_margin > 0
        assert report.achieved_rank == report.requested_rank == r - 1

    def test_certificate_is_zero_loss_oracle(self, checkerboard_target):
        ts, _, _ = kt.gaussian_teaching_set(checkerboard_target, None,
                                            rng_seed=5, s=3)
        cert = kt.closed_form_dual(ts, 0.9)
        assert kt.training_loss(cert, ts) <= 1e-10
        assert kt.decision_value(cert, ts.points[ts.anchor_index()]) > 0

    def test_deterministic(self, checkerboard_target):
        a, _, _ = kt.gaussian_teaching_set(checkerboard_target, None,
                                           rng_seed=5, s=2)
        b, _, _ = kt.gaussian_teaching_set(checkerboard_target, None,
                                           rng_seed=5, s=2)
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.labels, b.labels)
        assert a.tags == b.tags

    def test_appendix_convention_adds_negative_anchor(self, checkerboard_target):
        ts, config, _ = kt.gaussian_teaching_set(
            checkerboard_target, None, rng_seed=5, s=2,
            r_convention=R_CONVENTION_APPENDIX)
        assert len(ts) == 2 * (config.r - 1) + 2
        anchors = [i for i, t in enumerate(ts.tags) if t == TAG_ANCHOR]
        assert sorted(ts.labels[anchors]) == [-1, 1]

    def test_epsilon_path_selects_truncation(self, checkerboard_target):
        ts, config, _ = kt.gaussian_teaching_set(
            checkerboard_target, 0.3, rng_seed=5,
            search=kt.SearchConfig.count_first())
        assert config.s == kt.choose_truncation(0.3, 2).s
        assert len(ts) == 2 * (config.r - 1) + 1

    def test_centers_outside_ball_rejected(self, gaussian_spec):
        far = kt.DualModel(gaussian_spec, [[50.0, 0.0]], [1.0])
        with pytest.raises(ValueError, match="ball"):
            kt.gaussian_teaching_set(far, None, rng_seed=0, s=2)

    def test_requires_gaussian_kernel(self):
        model = kt.DualModel(kt.KernelSpec.polynomial(2), [[1.0, 0.0]], [1.0])
        with pytest.raises(ValueError, match="Gaussian"):
            kt.gaussian_teaching_set(model, 0.3, rng_seed=0)


class TestClosedFormDual:
    def test_two_point_closed_form(self):
        sigma = 0.9
        z = np.array([0.0, 0.0])
        a = np.array([2.0, 0.0])
        c = kt.eval_kernel(kt.KernelSpec.gaussian(sigma), z, a)
        ts = TeachingSet(np.array([z, z, a]), np.array([1, -1, 1]),
                         (TAG_BOUNDARY_POS, TAG_BOUNDARY_NEG, TAG_ANCHOR))
        model = kt.closed_form_dual(ts, sigma)
        # direction proportional to (-c, 1); unnormalized values f(z) = 0,
        # f(a) = 1 - c^2 for the scaled form eta = (-c, 1)
        ratio = model.coefficients / np.array([-c, 1.0])
        assert ratio[0] == pytest.approx(ratio[1], rel=1e-9)
        scaled = kt.DualModel(model.spec, model.centers, np.array([-c, 1.0]))
        assert kt.decision_value(scaled, z) == pytest.approx(0.0, abs=1e-15)
        assert kt.decision_value(scaled, a) == pytest.approx(1 - c * c, rel=1e-12)
        assert kt.rkhs_norm(model) == pytest.approx(1.0, abs=1e-12)

    def test_anchor_only(self):
        a = np.array([0.3, -0.4])
        ts = TeachingSet(a[None, :], np.array([1]), (TAG_ANCHOR,))
        model = kt.closed_form_dual(ts, 1.0)
        np.testing.assert_allclose(model.coefficients, [1.0])
        assert kt.rkhs_norm(model) == pytest.approx(1.0)

    def test_rejects_two_anchor_sets(self, checkerboard_target):
        ts, _, _ = kt.gaussian_teaching_set(
            checkerboard_target, None, rng_seed=5, s=2,
            r_convention=R_CONVENTION_APPENDIX)
        with pytest.raises(ValueError):
            kt.closed_form_dual(ts, 0.9)


class TestCheckAssumptions:
    def test_linear_thm1_rank_and_coherence(self):
        theta = np.array([-3.0, 3.0, 5.0])
        ts = kt.linear_teaching_set(theta)
        from conftest import linear_primal
        report = kt.check_assumptions(ts, linear_primal(theta / np.linalg.norm(theta)))
        assert report.requested_rank == 2
        assert report.achieved_rank == 2
        assert report.max_coherence <= 1e-10
        assert report.assumption1_ok
        assert report.anchor_ok

    def test_counterexample_reports_failure(self):
        bad = kt.axis_power_sum_model(2, 2)
        # no boundary points could be found; build the partial set with just
        # a positive anchor and check the report diagnoses the rank deficit
        anchor = np.array([[1.0, 0.5]])
        ts = TeachingSet(anchor, np.array([1]), (TAG_ANCHOR,))
        report = kt.check_assumptions(ts, bad)
        assert report.achieved_rank == 0
        assert report.requested_rank == 2
        assert not report.assumption1_ok
        assert report.anchor_margin > 0

    def test_gaussian_rank_recheck(self, checkerboard_target):
        ts, config, report = kt.gaussian_teaching_set(
            checkerboard_target, None, rng_seed=5, s=3)
        assert report.achieved_rank == config.r - 1
        assert report.coherence_bound == pytest.approx(1 / (2 * (config.r - 1)))
