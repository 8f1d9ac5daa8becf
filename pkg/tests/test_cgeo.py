import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigidlab import cgeo
from rigidlab import domain as dm
from rigidlab import kobayashi as kb
from rigidlab.errors import CoincidentPoints, NoConstructiveInverse

DISK = dm.disk()
BALL2 = dm.ball(2)
BALL3 = dm.ball(3)
ELL12 = dm.ellipsoid((1, 2))


class TestMobiusFlow:
    def test_origin_moves_by_tanh(self):
        for t in (-1.3, 0.0, 0.4, 2.0):
            assert cgeo.mobius_flow(t, 0.0) == pytest.approx(math.tanh(t), abs=1e-15)

    def test_identity_at_zero(self):
        for z in (0.3, -0.5 + 0.2j, 0.9j):
            assert cgeo.mobius_flow(0.0, z) == pytest.approx(z, abs=1e-15)

    def test_group_law_roundtrip(self):
        z = cgeo.mobius_flow(1.0, cgeo.mobius_flow(-1.0, 0.3))
        assert z == pytest.approx(0.3, abs=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 0.9), st.floats(0, 2 * math.pi))
    def test_group_law(self, s, t, r, a):
        z = r * np.exp(1j * a)
        lhs = cgeo.mobius_flow(s + t, z)
        rhs = cgeo.mobius_flow(s, cgeo.mobius_flow(t, z))
        assert abs(lhs - rhs) < 1e-10

    def test_flow_orbit_is_invariant_geodesic(self):
        # t -> a_t(0) traverses (-1, 1) with unit invariant speed
        for t in (0.3, 1.0):
            z = cgeo.mobius_flow(t, 0.0)
            assert kb.disk_distance(0.0, z) == pytest.approx(abs(t), abs=1e-12)


class TestComplexGeodesics:
    def test_disk_through_origin(self):
        geo = cgeo.complex_geodesic(DISK, [0], [0.5])
        assert geo.tag == "DiskAuto"
        assert geo.defect < 1e-10
        assert np.allclose(geo(0), [0])
        assert np.allclose(geo(geo.params["t_w"]), [0.5])

    def test_ball_axis_slice(self):
        geo = cgeo.complex_geodesic(BALL2, [0, 0], [0.5, 0])
        assert geo.tag == "BallAffineSlice"
        assert geo.defect < 1e-10
        assert np.allclose(geo(0.3), [0.3, 0])

    def test_ball_generic_slice_isometry(self):
        geo = cgeo.complex_geodesic(BALL2, [0.2 + 0.1j, 0.3], [0.1, -0.2j])
        assert geo.defect < 1e-10
        rng = np.random.default_rng(2)
        for _ in range(40):
            a, b = 0.9 * np.sqrt(rng.uniform(size=2)) * np.exp(2j * math.pi * rng.uniform(size=2))
            assert kb.model_dist(BALL2, geo(a), geo(b)) == pytest.approx(
                kb.disk_distance(a, b), abs=1e-10)

    def test_polydisk_distinct_max(self):
        geo = cgeo.complex_geodesic(POLY2 := dm.polydisk(2), [0.1, 0.0], [0.6, 0.2])
        assert geo.defect < 1e-10

    def test_ellipsoid_axis_slice_has_zero_gap(self):
        geo = cgeo.complex_geodesic(ELL12, [0, 0], [0, 0.5])
        assert geo.tag == "ConvexNumeric"
        assert geo.params["radius"] == pytest.approx(1.0, abs=1e-6)
        assert geo.defect <= 1e-6  # slice distance equals disk distance

    def test_coincident_points_raise(self):
        with pytest.raises(CoincidentPoints):
            cgeo.complex_geodesic(DISK, [0.2], [0.2])

    def test_defect_below_tolerance_on_thousand_pairs(self):
        # 20 model geodesics x 50 sampled pairs = 10^3 isometry checks
        rng = np.random.default_rng(14)
        for k in range(20):
            dom = DISK if k % 2 == 0 else BALL2
            pts = []
            while len(pts) < 2:
                w = rng.standard_normal(dom.dimension) + 1j * rng.standard_normal(dom.dimension)
                p = 0.8 * rng.uniform() * w / np.linalg.norm(w)
                if dom.contains(p) and all(np.linalg.norm(p - q) > 1e-3 for q in pts):
                    pts.append(p)
            geo = cgeo.complex_geodesic(dom, *pts)
            assert geo.measure_defect(pairs=50, seed=k) <= 1e-10


class TestLeftInverse:
    def test_disk_identity_slice(self):
        geo = cgeo.complex_geodesic(DISK, [0], [0.5])
        inv = cgeo.left_inverse(geo)
        for zeta in (0.0, 0.3, -0.2 + 0.4j):
            assert abs(inv(geo(zeta)) - zeta) < 1e-10

    def test_ball_coordinate_projection(self):
        geo = cgeo.complex_geodesic(BALL2, [0, 0], [0.5, 0])
        inv = cgeo.left_inverse(geo)
        assert abs(inv(np.array([0.3, 0.1 + 0j])) - 0.3) < 1e-10

    def test_ball3_second_axis(self):
        geo = cgeo.complex_geodesic(BALL3, [0, 0, 0], [0, 0.5, 0])
        inv = cgeo.left_inverse(geo)
        assert abs(inv(np.array([0.1, 0.4, 0.2 + 0j])) - 0.4) < 1e-10

    def test_offcenter_slice_grid(self):
        geo = cgeo.complex_geodesic(BALL2, [0.2 + 0.1j, 0.3], [0.1, -0.2j])
        inv = cgeo.left_inverse(geo)
        # pi o phi = id on an 8x8 polar grid
        for r in np.linspace(0.1, 0.9, 8):
            for a in np.linspace(0, 2 * math.pi, 8, endpoint=False):
                zeta = r * np.exp(1j * a)
                assert abs(inv(geo(zeta)) - zeta) < 1e-10

    def test_fiber_points_project_to_parameter(self):
        geo = cgeo.complex_geodesic(BALL2, [0.2 + 0.1j, 0.3], [0.1, -0.2j])
        inv = cgeo.left_inverse(geo)
        for zeta in (0.0, 0.25, -0.3 + 0.1j):
            hp = inv.fiber(zeta)
            assert abs(inv(hp.anchor) - zeta) < 1e-9
            # walk inside the fiber hyperplane and re-project
            rng = np.random.default_rng(4)
            basis = [v for v in np.eye(2)]
            for _ in range(6):
                w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
                w = w - cgeo.herm(w, hp.normal) * hp.normal
                p = hp.anchor + 0.05 * w
                if BALL2.contains(p):
                    assert abs(inv(p) - zeta) < 1e-8

    def test_ellipsoid_axis_projection(self):
        geo = cgeo.complex_geodesic(ELL12, [0, 0], [0, 0.5])
        inv = cgeo.left_inverse(geo)
        for zeta in (0.1, -0.3 + 0.2j):
            assert abs(inv(geo(zeta)) - zeta) < 1e-8

    def test_no_constructive_inverse_for_chords(self):
        geo = cgeo.complex_geodesic(ELL12, [0.1, 0.2], [0.3, -0.1])
        with pytest.raises(NoConstructiveInverse):
            cgeo.left_inverse(geo)


class TestGromovProduct:
    def test_coincident_arguments(self):
        iv = cgeo.gromov_product(DISK, [0.5], [0.5], [0])
        assert iv.contains(kb.disk_distance(0.5, 0.0), slack=1e-9)

    def test_symmetric_closed_form(self):
        # (r | -r)_0 = (1/2)(2 atanh r - 2 atanh r) = 0
        for r in (0.3, 0.6, 0.9):
            iv = cgeo.gromov_product(DISK, [r], [-r], [0])
            assert iv.contains(0.0, slack=1e-9)
            assert iv.upper <= 0.05

    def test_same_boundary_point_diverges(self):
        vals = []
        for n in (4, 16, 64, 256):
            z = np.array([1 - 1.0 / n])
            w = np.array([1 - 1.0 / n**2])
            vals.append(cgeo.gromov_product(DISK, z, w, [0]).lower)
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert vals[-1] > 1.5

    def test_bounded_by_distances_to_basepoint(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            z, w, o = (np.array([0.9 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())])
                       for _ in range(3))
            iv = cgeo.gromov_product(DISK, z, w, o)
            assert iv.lower >= -1e-12
            cap = min(kb.dist_bounds(DISK, z, o).upper, kb.dist_bounds(DISK, o, w).upper)
            assert iv.upper <= cap + 1e-9


class TestBoundaryProbe:
    def test_ball_axis_probe(self):
        geo = cgeo.complex_geodesic(BALL2, [0, 0], [0.5, 0])
        probe = cgeo.boundary_hyperplane_probe(geo, zeta=1.0,
                                               radii=cgeo.default_radii_schedule(14))
        # the limit hyperplane is {z1 = 1}
        assert abs(abs(probe.hyperplane.normal[0]) - 1.0) < 1e-6
        assert probe.residuals[-1] < 1e-3
        assert probe.decay_ok

    def test_disk_probe_hits_boundary_point(self):
        geo = cgeo.complex_geodesic(DISK, [0], [0.5])
        probe = cgeo.boundary_hyperplane_probe(geo, zeta=1.0,
                                               radii=cgeo.default_radii_schedule(12))
        assert abs(probe.hyperplane.anchor[0] - 1.0) < 1e-3
        assert probe.residuals[-1] < 1e-3

    def test_ellipsoid_axis_probe(self):
        geo = cgeo.complex_geodesic(ELL12, [0, 0], [0, 0.5])
        probe = cgeo.boundary_hyperplane_probe(geo, zeta=1.0,
                                               radii=cgeo.default_radii_schedule(10))
        # limiting plane {z2 = 1}
        assert abs(abs(probe.hyperplane.normal[1]) - 1.0) < 1e-5
        assert probe.residuals[-1] <= probe.residuals[0]

    def test_fiber_hyperplanes_converge_to_probe_plane(self):
        # the fibers H_{r zeta} of a good left inverse approach the
        # hyperplane boundary extension as r -> 1
        geo = cgeo.complex_geodesic(BALL2, [0.1, 0.05], [0.5, 0.1])
        inv = cgeo.left_inverse(geo)
        probe = cgeo.boundary_hyperplane_probe(geo, zeta=1.0,
                                               radii=cgeo.default_radii_schedule(14))
        angles = [inv.fiber(r).angle_to(probe.hyperplane)
                  for r in (0.9, 0.99, 0.999, 0.9999)]
        assert angles[-1] < 1e-2
        assert angles[-1] <= angles[0] + 1e-9
