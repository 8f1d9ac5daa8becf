import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigidlab import schwarz as sw
from rigidlab.errors import CoincidentAnchors, NotSelfMap
from rigidlab.kobayashi import disk_distance
from rigidlab.report import FORCES_IDENTITY, INCONCLUSIVE


@pytest.fixture(scope="module")
def zoo():
    return sw.disk_zoo()


class TestCertification:
    def test_blaschke_maps_certify(self):
        for f in (sw.identity_map(), sw.power_map(2), sw.bk_extremal(),
                  sw.cubic_contact(0.25), sw.halfplane_contact(0.1, 1.0)):
            assert sw.certify_self_map(f).passed

    def test_large_quartic_fails(self):
        # no self-map has contact beyond cubic order at the boundary, so the
        # quartic family only certifies at coefficients inside the margin
        cert = sw.certify_self_map(sw.poly_contact(1e-3, 4))
        assert not cert.passed
        assert cert.max_excess > 1e-5

    def test_tiny_quartic_passes(self):
        cert = sw.certify_self_map(sw.poly_contact(1e-9, 4))
        assert cert.passed

    def test_require_self_map_raises(self):
        with pytest.raises(NotSelfMap):
            sw.require_self_map(sw.poly_contact(1e-3, 4))

    def test_trusted_bypass(self):
        f = sw.poly_contact(1e-3, 4)
        f.trusted = True
        sw.require_self_map(f)  # does not raise

    def test_cubic_contact_is_exact_self_map(self):
        # |z - c (z-1)^3| <= 1 on the circle for c <= 1/4 (explicit algebra)
        f = sw.cubic_contact(0.25)
        theta = np.linspace(0, 2 * math.pi, 2000)
        vals = np.abs([f.scalar(z) for z in np.exp(1j * theta)])
        assert vals.max() <= 1 + 1e-12


class TestCSBound:
    def test_identity_trivial(self):
        chk = sw.cs_bound_check(sw.identity_map(), 0.2, -0.3, 0.5)
        assert chk.lhs == 0.0 and chk.passed

    def test_constant_value(self):
        # a = 0, K(a, b) = 1, z = a gives C = e^4 / 2
        b = math.tanh(1.0)
        chk = sw.cs_bound_check(sw.power_map(2), 0.0, b, 0.0)
        assert chk.constant == pytest.approx(math.exp(4) / 2, rel=1e-12)

    def test_square_map_example(self):
        chk = sw.cs_bound_check(sw.power_map(2), 0.2, -0.3, 0.5)
        assert chk.passed

    def test_coincident_anchors(self):
        with pytest.raises(CoincidentAnchors):
            sw.cs_bound_check(sw.identity_map(), 0.2, 0.2, 0.0)

    def test_zoo_sweep(self, zoo):
        rng = np.random.default_rng(17)
        count = 0
        while count < 200:
            f = zoo[rng.integers(len(zoo))]
            a, b, z = (0.9 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
                       for _ in range(3))
            if disk_distance(a, b) < 1e-3:
                continue
            count += 1
            assert sw.cs_bound_check(f, a, b, z).passed


class TestErrorModulus:
    def test_identity_zero(self):
        em = sw.error_modulus(sw.identity_map(), 1.0, np.geomspace(1e-3, 0.3, 8))
        assert np.all(em.values == 0)

    def test_cubic_slope(self):
        em = sw.error_modulus(sw.poly_contact(1e-2, 3), 1.0, np.geomspace(1e-3, 0.3, 12))
        assert em.slope == pytest.approx(3.0, abs=0.1)

    def test_rotation_slope_flat(self):
        # |f(z) - z| = |e^{i theta} - 1||z| is nearly constant near the
        # boundary point, so the log-log slope vanishes
        em = sw.error_modulus(sw.rotation(math.pi / 100), 1.0, np.geomspace(1e-3, 0.3, 12))
        assert abs(em.slope) < 0.1
        assert em.values[-1] == pytest.approx(abs(np.exp(1j * math.pi / 100) - 1), rel=0.05)

    def test_monotone_envelope(self):
        em = sw.error_modulus(sw.bk_extremal(), 1.0, np.geomspace(1e-3, 0.5, 15))
        assert np.all(np.diff(em.values) >= 0)

    @settings(max_examples=10, deadline=None)
    @given(st.floats(0.01, 0.24))
    def test_envelope_monotone_for_cubics(self, c):
        em = sw.error_modulus(sw.cubic_contact(c), 1.0, np.geomspace(1e-2, 0.4, 6),
                              samples_per_radius=40)
        assert np.all(np.diff(em.values) >= 0)


class TestQuantIdTerm:
    def test_identity_exact_zero(self):
        assert sw.quantid_term(sw.identity_map(), 1 - 1e-2, 0.1) == 0.0

    def test_quartic_probe_decreases(self):
        # local probe: the map exits the disk far away but is inward near 1
        f = sw.poly_contact(1e-3, 4)
        vals = [sw.quantid_term(f, 1 - r, 0.1) for r in (1e-1, 1e-2, 1e-3)]
        assert vals[0] > vals[1] > vals[2]

    def test_rotation_diverges(self):
        f = sw.rotation(1e-2)
        vals = [sw.quantid_term(f, 1 - r, 0.1) for r in (1e-1, 1e-2, 1e-3)]
        assert vals[2] > vals[1] > vals[0]
        assert vals[2] > 1e2


class TestDiskPipeline:
    def test_identity_forces(self):
        rep = sw.disk_rigidity_pipeline(sw.identity_map())
        assert rep.verdict == FORCES_IDENTITY
        assert rep.all_checks_pass
        assert all(row["composite"] == 0 for row in rep.rows)

    def test_uniform_eps_floor(self):
        rep = sw.disk_rigidity_pipeline(sw.identity_map())
        assert rep.fitted["eps_uniform_floor"] == pytest.approx(0.1, rel=1e-9)

    def test_tiny_quartic_forces(self):
        rep = sw.disk_rigidity_pipeline(sw.poly_contact(1e-9, 4))
        assert rep.verdict == FORCES_IDENTITY
        assert sw.interior_displacement(sw.poly_contact(1e-9, 4)) < 1e-4

    def test_extremal_inconclusive(self):
        rep = sw.disk_rigidity_pipeline(sw.bk_extremal())
        assert rep.verdict == INCONCLUSIVE
        comp = rep.column("composite")
        assert min(comp) > 1e-2  # bounded away from the identification threshold

    def test_rows_satisfy_half_log_bound(self):
        rep = sw.disk_rigidity_pipeline(sw.cubic_contact(0.05))
        for row in rep.rows:
            assert row["K_z0_pn"] <= row["K_bound_halflog"] + 1e-12

    def test_uncertified_map_rejected(self):
        with pytest.raises(NotSelfMap):
            sw.disk_rigidity_pipeline(sw.poly_contact(1e-3, 4))

    def test_trusted_probe_runs(self):
        # declared containment lets the near-self-map quartic run the cascade;
        # its composite decays like the certified variant would
        f = sw.poly_contact(1e-6, 4)
        f.trusted = True
        rep = sw.disk_rigidity_pipeline(f, schedule=sw.geometric_schedule(3, 10))
        assert rep.verdict == FORCES_IDENTITY

    def test_zoo_displacements(self, zoo):
        # every non-identity zoo map moves some interior grid point visibly
        for f in zoo:
            disp = sw.interior_displacement(f, samples=200)
            if f.name in ("id", "poly_contact(1e-09,4)"):
                assert disp <= 1e-4
            else:
                assert disp > 1e-4
