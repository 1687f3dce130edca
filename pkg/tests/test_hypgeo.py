import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from innerlab.errors import (DomainError, NumericalError, PoleError,
                             PreconditionError)
from innerlab.hypgeo import (DISK_AUT, DiskPoint, HalfPlanePoint, Moebius,
                             disk_distance, geodesic_curvature,
                             geodesic_curvature_of,
                             hyp_distance, moebius_apply, origin_distance,
                             straight_moebius)

interior = st.complex_numbers(max_magnitude=0.95, allow_nan=False,
                              allow_infinity=False)


def random_disk_aut(rng):
    a = 0.8 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    return Moebius.rotation(rng.uniform(0, 2 * np.pi)) @ Moebius.disk_translation(a)


class TestPoints:
    def test_disk_point_rejects_boundary(self):
        DiskPoint(0.5 + 0.2j)
        with pytest.raises(DomainError):
            DiskPoint(1.0 + 0j)
        with pytest.raises(DomainError):
            DiskPoint(1.0 - 1e-16 + 0j)

    def test_halfplane_point(self):
        HalfPlanePoint(1j)
        with pytest.raises(DomainError):
            HalfPlanePoint(1.0 + 0j)


class TestDistance:
    def test_identity_case(self):
        assert hyp_distance(DiskPoint(0), DiskPoint(0)) == 0.0

    def test_radial_value(self):
        assert hyp_distance(0, 0.5) == pytest.approx(np.log(3.0), abs=1e-14)

    def test_halfplane_vertical(self):
        d = hyp_distance(HalfPlanePoint(1j), HalfPlanePoint(2j))
        assert d == pytest.approx(np.log(2.0), abs=1e-12)

    def test_mixed_models_rejected(self):
        with pytest.raises(PreconditionError):
            hyp_distance(DiskPoint(0.1), HalfPlanePoint(1j))

    def test_origin_distance_consistency(self):
        r = 0.77
        assert origin_distance(r) == pytest.approx(disk_distance(0, r), rel=1e-14)

    @given(z=interior, w=interior)
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, z, w):
        assert disk_distance(z, w) == pytest.approx(disk_distance(w, z), abs=1e-10)

    @given(z=interior, w=interior, v=interior)
    @settings(max_examples=200, deadline=None)
    def test_triangle_inequality(self, z, w, v):
        assert disk_distance(z, w) <= (disk_distance(z, v)
                                       + disk_distance(v, w) + 1e-10)

    def test_moebius_invariance(self, rng):
        for _ in range(50):
            m = random_disk_aut(rng)
            z = 0.9 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
            w = 0.9 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
            lhs = disk_distance(m._raw(z), m._raw(w))
            assert lhs == pytest.approx(disk_distance(z, w), abs=1e-10)


class TestMoebius:
    def test_identity_apply(self):
        m = Moebius.identity()
        assert moebius_apply(m, 0.3 + 0.1j) == pytest.approx(0.3 + 0.1j)

    def test_canonical_to_disk_sends_i_to_p(self):
        m = Moebius.to_disk(0.5)
        assert m._raw(1j) == pytest.approx(0.5, abs=1e-14)
        assert m.tag == "halfplane-to-disk"

    def test_disk_translation(self):
        m = Moebius.disk_translation(0.5)
        assert moebius_apply(m, DiskPoint(0.5)).value == pytest.approx(0.0, abs=1e-15)

    def test_tag_validation_rejects_non_automorphism(self):
        with pytest.raises(PreconditionError):
            Moebius(1, 0, 0, 2, tag=DISK_AUT)

    def test_pole(self):
        m = Moebius.disk_translation(0.5)
        with pytest.raises(PoleError):
            m._raw(2.0 + 0j)

    def test_wrong_model_rejected(self):
        m = Moebius.disk_translation(0.5)
        with pytest.raises(PreconditionError):
            moebius_apply(m, HalfPlanePoint(1j))

    def test_compose_tags(self):
        cayley = Moebius.cayley()
        back = cayley.inverse()
        assert (back @ cayley).tag == DISK_AUT
        with pytest.raises(PreconditionError):
            cayley @ cayley

    def test_compose_matches_sequential_apply(self, rng):
        for _ in range(20):
            m1, m2 = random_disk_aut(rng), random_disk_aut(rng)
            z = 0.7 * np.exp(2j * np.pi * rng.uniform())
            assert (m2 @ m1)._raw(z) == pytest.approx(m2._raw(m1._raw(z)), abs=1e-12)


def _three_point_moebius(src, dst):
    """Independent oracle: the Moebius map matching three correspondences,
    via the classic map-to-(0, 1, inf) construction."""
    def to_01inf(z1, z2, z3):
        return np.array([[z2 - z3, -z1 * (z2 - z3)],
                         [z2 - z1, -z3 * (z2 - z1)]], dtype=complex)

    A = to_01inf(*src)
    B = to_01inf(*dst)
    return np.linalg.inv(B) @ A


class TestStraightMoebius:
    def test_fixed_data_is_identity(self):
        m = straight_moebius(0.5, 0.5)
        for z in (0.5, 0.2 + 0.3j, -0.8j):
            assert m._raw(z) == pytest.approx(z, abs=1e-13)

    @pytest.mark.parametrize("a,b", [(0.5, 0.25), (0.5j, 0.25j),
                                     (0.3 + 0.4j, -0.2 + 0.1j)])
    def test_matches_three_point_oracle(self, a, b):
        a, b = complex(a), complex(b)
        m = straight_moebius(a, b)
        mat = _three_point_moebius([a, a / abs(a), -a / abs(a)],
                                   [b, b / abs(b), -b / abs(b)])
        for z in (0.1 + 0.2j, -0.4 + 0.1j, 0.6):
            expect = (mat[0, 0] * z + mat[0, 1]) / (mat[1, 0] * z + mat[1, 1])
            assert m._raw(z) == pytest.approx(expect, abs=1e-12)

    def test_zero_rejected(self):
        with pytest.raises(PreconditionError):
            straight_moebius(0.0, 0.5)


class TestGeodesicCurvature:
    def test_diameter_is_geodesic(self):
        pts = np.linspace(-0.5, 0.5, 11) + 0j
        assert geodesic_curvature(pts, 5) == pytest.approx(0.0, abs=1e-10)

    def test_horocycle_curvature_one(self):
        # Horocycle through 0: circle of radius 1/2 tangent at 1; the point
        # at angle pi on it is the origin.
        h = 1e-3
        ts = np.pi + h * np.arange(-2.0, 3.0)
        pts = 0.5 + 0.5 * np.exp(1j * ts)
        k = geodesic_curvature(pts, 2, params=ts)
        assert k == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("r", [0.3, 0.6, 0.9])
    def test_centered_circle_formula(self, r):
        # Moebius-normalizing a centered circle gives kappa = (1+r^2)/(2r).
        h = 1e-3
        ts = 0.7 + h * np.arange(-2.0, 3.0)
        pts = r * np.exp(1j * ts)
        k = geodesic_curvature(pts, 2, params=ts)
        assert k == pytest.approx((1 + r * r) / (2 * r), abs=1e-3)

    def test_moebius_invariance(self, rng):
        h = 5e-4
        ts = h * np.arange(-2.0, 3.0)
        pts = 0.5 * np.exp(1j * (0.3 + ts))
        base = geodesic_curvature(pts, 2, params=ts)
        for _ in range(10):
            m = random_disk_aut(rng)
            moved = np.array([m._raw(p) for p in pts])
            assert geodesic_curvature(moved, 2, params=ts) == pytest.approx(
                base, abs=2e-3)

    def test_degenerate_stencil(self):
        pts = np.zeros(5, dtype=complex)
        with pytest.raises(NumericalError):
            geodesic_curvature(pts, 2)

    def test_needs_interior_index(self):
        pts = np.linspace(-0.5, 0.5, 5) + 0j
        with pytest.raises(PreconditionError):
            geodesic_curvature(pts, 1)

    def test_adaptive_callable(self):
        k = geodesic_curvature_of(lambda t: 0.6 * np.exp(1j * t), 0.2)
        assert k == pytest.approx((1 + 0.36) / 1.2, abs=1e-4)
