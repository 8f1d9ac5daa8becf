import math

import numpy as np
import pytest

from rigidlab import domain as dm
from rigidlab import kahler as kh
from rigidlab.errors import PositiveCurvatureUnsupported, RadiusOutOfRange, ZeroVector


PO = kh.poincare_kahler()
FLAT = kh.flat_kahler(1)
BERG = kh.bergman_kahler(2)


class TestHolomorphicSectional:
    def test_poincare_equals_gaussian(self):
        for x in ([0, 0], [0.3, -0.2], [0.7, 0.1]):
            assert kh.hol_sectional(PO, x, [1, 0.4]) == pytest.approx(-1.0, abs=1e-6)

    def test_bergman_constant(self):
        vals = [kh.hol_sectional(BERG, x, v) for x, v in (
            ([0, 0, 0, 0], [1, 0, 0, 0]),
            ([0.2, 0.1, -0.1, 0.3], [0.5, 0.2, -0.3, 0.1]),
            ([0.5, 0, 0, 0], [0, 0, 1, 0]))]
        assert max(vals) - min(vals) < 1e-5

    def test_flat_zero(self):
        assert kh.hol_sectional(FLAT, [0.1, 0.2], [1, 0]) == 0.0

    def test_complex_scaling_invariance(self):
        # H(cX) = H(X): the plane span(X, JX) is unchanged by complex scalars
        x = [0.2, 0.1, -0.1, 0.3]
        X = np.array([0.5, 0.2, -0.3, 0.1])
        base = kh.hol_sectional(BERG, x, X)
        for c in (2.0, -1.0):
            assert kh.hol_sectional(BERG, x, c * X) == pytest.approx(base, rel=1e-9)
        # multiplication by i acts as J on the real picture
        assert kh.hol_sectional(BERG, x, kh.apply_j(X)) == pytest.approx(base, rel=1e-9)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            kh.hol_sectional(PO, [0, 0], [0, 0])


class TestJInvariance:
    def test_models(self):
        assert PO.j_invariance_defect([[0, 0], [0.4, -0.3]]) < 1e-8
        assert BERG.j_invariance_defect([[0, 0, 0, 0], [0.2, 0.1, -0.1, 0.3]]) < 1e-8


class TestPropertyBG:
    def test_poincare_passes(self):
        rep = kh.property_bg_estimate(PO, dm.disk(), n_points=25)
        assert rep.passed and rep.complete
        # closed forms: sqrt(g(v,v)) delta / |v| = 2 (1 - |z|) / (1 - |z|^2) <= 2
        assert rep.A_est <= 2.0 + 1e-9
        assert rep.a_est >= 2.0 - 1e-9
        assert rep.kappa_est == pytest.approx(1.0, abs=1e-5)

    def test_flat_upper_bound_but_incomplete(self):
        rep = kh.property_bg_estimate(FLAT, dm.disk(), n_points=15)
        assert rep.passed           # the 1/delta upper bound holds trivially
        assert not rep.complete     # rays reach the boundary in finite length
        assert rep.A_est <= 1.0 + 1e-9

    def test_bergman_ball_passes(self):
        rep = kh.property_bg_estimate(BERG, dm.ball(2), n_points=25)
        assert rep.passed and rep.complete
        assert 0 < rep.a_est < rep.A_est < math.inf
        assert rep.kappa_est == pytest.approx(2.0 / 3.0, abs=1e-4)


class TestSqueezing:
    def test_ball_center(self):
        assert kh.squeezing_lower_bound(dm.ball(2), [0, 0]) == 1.0

    def test_disk_offset(self):
        assert kh.squeezing_lower_bound(dm.disk(), [0.5]) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_ellipsoid_center(self):
        # inradius 1; circumradius sqrt(5)/2 at |z2|^2 = 1/2 on the boundary
        val = kh.squeezing_lower_bound(dm.ellipsoid((1, 2)), [0, 0])
        assert val == pytest.approx(2.0 / math.sqrt(5.0), abs=1e-6)

    def test_range(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            z = rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.5, 0.5)
            s = kh.squeezing_lower_bound(dm.disk(), [z])
            assert 0 < s <= 1.0


class TestModelVolume:
    def test_flat_disk(self):
        assert kh.model_volume(2, 0.0, 1.0) == pytest.approx(math.pi, rel=1e-12)

    def test_hyperbolic_area(self):
        assert kh.model_volume(2, -1.0, 1.0) == pytest.approx(
            2 * math.pi * (math.cosh(1.0) - 1.0), abs=1e-10)

    def test_flat_four_ball(self):
        assert kh.model_volume(4, 0.0, 2.0) == pytest.approx(math.pi**2 / 2 * 16, rel=1e-12)

    def test_monotone(self):
        v = [kh.model_volume(2, lam, r) for lam, r in ((-1, 1), (-1, 2), (-2, 2))]
        assert v[0] < v[1] < v[2]
        assert kh.model_volume(2, 0.0, 1.0) < kh.model_volume(2, -1.0, 1.0)

    def test_positive_curvature_rejected(self):
        with pytest.raises(PositiveCurvatureUnsupported):
            kh.model_volume(2, 1.0, 1.0)


class TestCGTBound:
    def test_large_volume_limit(self):
        assert kh.cgt_inj_lower(1e15, 1.0, 0.5, 1) == pytest.approx(0.25, abs=1e-9)

    def test_equal_volume(self):
        vm = kh.model_volume(2, -1.0, 1.0)
        assert kh.cgt_inj_lower(vm, 1.0, 0.5, 1) == pytest.approx(0.125, rel=1e-14)

    def test_worked_example(self):
        expected = 0.25 / (1.0 + 2 * math.pi * (math.cosh(1.0) - 1.0))
        assert kh.cgt_inj_lower(1.0, 1.0, 0.5, 1) == pytest.approx(expected, rel=1e-10)

    def test_radius_guard(self):
        with pytest.raises(RadiusOutOfRange):
            kh.cgt_inj_lower(1.0, 1.0, 0.8, 1)  # pi/4 < 0.8


class TestThreshold:
    def test_reference_values(self):
        assert kh.rigidity_threshold(1, 1, 1, math.pi / 2, False) == 7.0
        assert kh.rigidity_threshold(1, 1, 1, math.pi / 2, True) == 3.0

    def test_scaling_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            lam = rng.uniform(0.01, 100.0)
            k, A, th = rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0), rng.uniform(0.1, math.pi / 2)
            a = kh.rigidity_threshold(2, lam * k, A / math.sqrt(lam), th)
            b = kh.rigidity_threshold(2, k, A, th)
            assert a == pytest.approx(b, rel=1e-12)

    def test_quarter_curvature_half_A(self):
        assert kh.rigidity_threshold(1, 4.0, 0.5, math.pi / 2) == pytest.approx(
            kh.rigidity_threshold(1, 1.0, 1.0, math.pi / 2), rel=1e-14)
