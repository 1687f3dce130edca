import numpy as np
import pytest

from innerlab.errors import PreconditionError
from innerlab.parabolic import (HalfPlaneInner, chi_ell, enumerate_strip,
                                height_classify, hp_eval_deriv, hp_preimages,
                                hp_preimages_batch, strip_counting_report,
                                write_strip_csv, write_strip_points_csv)


@pytest.fixture(scope="module")
def zminus():
    """z - 1/z: the doubly-parabolic reference model."""
    return HalfPlaneInner(beta=0.0, atoms=((0.0, 1.0),))


class TestModel:
    def test_rejects_bad_atoms(self):
        with pytest.raises(PreconditionError):
            HalfPlaneInner(atoms=((0.0, -1.0),))
        with pytest.raises(PreconditionError):
            HalfPlaneInner(atoms=((0.0, 1.0), (0.0, 2.0)))

    def test_serialization_roundtrip(self):
        F = HalfPlaneInner(beta=0.125, atoms=((0.3, 1.7), (-2.0, 0.4)))
        G = HalfPlaneInner.from_text(F.to_text())
        assert G.beta == F.beta and G.atoms == F.atoms

    def test_drift_and_jump_scale(self, zminus):
        assert zminus.drift == 0.0
        assert zminus.jump_scale == 1.0
        assert HalfPlaneInner(beta=3.0, atoms=((0.0, 1.0),)).drift == 3.0


class TestEvalDeriv:
    def test_critical_point_at_i(self, zminus):
        val, der = hp_eval_deriv(zminus, 1j)
        assert val == pytest.approx(2j)
        assert der == pytest.approx(0.0)

    def test_at_2i(self, zminus):
        val, der = hp_eval_deriv(zminus, 2j)
        assert val == pytest.approx(2.5j)
        assert der == pytest.approx(0.75)

    def test_pure_translation(self):
        F = HalfPlaneInner(beta=1.5)
        val, der = hp_eval_deriv(F, 0.3 + 0.7j)
        assert val == pytest.approx(1.8 + 0.7j)
        assert der == pytest.approx(1.0)

    def test_derivative_vs_finite_differences(self, zminus):
        rng = np.random.default_rng(5)
        F = HalfPlaneInner(beta=0.25, atoms=((0.5, 1.2), (-1.5, 0.7)))
        for _ in range(10):
            z = rng.uniform(-3, 3) + 1j * rng.uniform(0.2, 3)
            h = 1e-6
            fd = (F.eval(z + h) - F.eval(z - h)) / (2 * h)
            assert abs(fd - F.deriv(z)) / abs(F.deriv(z)) < 1e-8

    def test_julia_monotonicity(self, zminus):
        rng = np.random.default_rng(6)
        z = rng.uniform(-5, 5, 200) + 1j * rng.uniform(0.01, 4, 200)
        assert np.all(zminus.eval(z).imag >= z.imag - 1e-12)

    def test_real_line_expansion_lemma(self, zminus):
        # F' > c_J > 1 on bounded intervals, stable under refinement.
        for n in (2001, 4001):
            x = np.linspace(-5, 5, n)
            vals = zminus.deriv(x + 0j).real
            cj = np.min(vals)
            assert cj > 1.0
        c1 = np.min(zminus.deriv(np.linspace(-5, 5, 2001) + 0j).real)
        c2 = np.min(zminus.deriv(np.linspace(-5, 5, 8001) + 0j).real)
        assert abs(c1 - c2) < 1e-3

    def test_boundary_dominates_interior_modulus(self, zminus):
        rng = np.random.default_rng(7)
        for _ in range(100):
            x = rng.uniform(-4, 4)
            y = rng.uniform(0.01, 3)
            assert abs(zminus.deriv(x + 1j * y)) <= abs(zminus.deriv(x + 0j)) + 1e-12


class TestPreimages:
    def test_quadratic_values(self, zminus):
        got = hp_preimages(zminus, 2.5j)
        assert np.allclose(np.sort_complex(got), [0.5j, 2j], atol=1e-12)

    def test_half_imaginary(self, zminus):
        got = hp_preimages(zminus, 0.5j)
        expect = np.array([-0.96824584 + 0.25j, 0.96824584 + 0.25j])
        assert np.allclose(got, expect, atol=1e-8)
        assert np.sum(got.imag) == pytest.approx(0.5, abs=1e-12)

    def test_translation_single_branch(self):
        F = HalfPlaneInner(beta=2.0)
        got = hp_preimages(F, 1 + 1j)
        assert np.allclose(got, [-1 + 1j])

    def test_height_identity_generations(self, zminus):
        pts = np.array([0.5j])
        for _ in range(4):
            pts = hp_preimages_batch(zminus, pts).reshape(-1)
            assert abs(np.sum(pts.imag) - 0.5) < 1e-9
        assert np.all(pts.imag > 0)

    def test_lower_halfplane_rejected(self, zminus):
        with pytest.raises(PreconditionError):
            hp_preimages(zminus, -1j)


class TestChiEll:
    def test_reference_value_2pi(self, zminus):
        assert chi_ell(zminus, tol=1e-9) == pytest.approx(2 * np.pi, abs=1e-6)

    def test_translation_is_zero(self):
        assert chi_ell(HalfPlaneInner(beta=1.0)) == 0.0

    def test_scaling_oracle_4pi(self):
        # atom (0, 4): substitute x = 2u to reuse the 2 pi identity.
        F = HalfPlaneInner(atoms=((0.0, 4.0),))
        assert chi_ell(F, tol=1e-9) == pytest.approx(4 * np.pi, abs=1e-6)

    def test_off_center_atom(self):
        # F' = 1 + c (1+x^2)/(x-u)^2 on the line, so the closed form
        # int log(1 + a^2/u^2) du = 2 pi a gives 2 pi sqrt(c (1+x^2)).
        F = HalfPlaneInner(atoms=((2.5, 1.0),))
        assert chi_ell(F, tol=1e-9) == pytest.approx(
            2 * np.pi * np.sqrt(1.0 + 2.5 ** 2), abs=1e-6)


class TestHeightClassify:
    def test_doubly_parabolic(self, zminus):
        cls = height_classify(zminus, 0.7j)
        assert cls.kind == "infinite-height"
        assert cls.confidence == "analytic"

    def test_singly_parabolic(self):
        cls = height_classify(HalfPlaneInner(beta=3.0, atoms=((0.0, 1.0),)), 0.7j)
        assert cls.kind == "finite-height"
        assert cls.confidence == "analytic"

    def test_pure_translation_finite(self):
        cls = height_classify(HalfPlaneInner(beta=1.0), 0.7j)
        assert cls.kind == "finite-height"

    def test_asymmetric_uses_iterates(self):
        # Asymmetric atoms with zero drift: still doubly parabolic, but
        # classified by the iterate heuristic.
        F = HalfPlaneInner(beta=0.5, atoms=((0.5, 1.0),))  # drift = 0
        cls = height_classify(F, 0.7j, n_iters=5000)
        assert cls.confidence == "heuristic"
        assert cls.kind == "infinite-height"

    def test_min_iterations(self, zminus):
        with pytest.raises(PreconditionError):
            height_classify(zminus, 0.7j, n_iters=10)


class TestEnumerateStrip:
    def test_R_zero_counts_nothing(self, zminus):
        profile = enumerate_strip(zminus, 0.5j, (-1.0, 1.0), 0.0)
        assert profile.count(0.0) == 0

    def test_base_point_counted(self, zminus):
        profile = enumerate_strip(zminus, 0.5j, (-1.0, 1.0), 2.0)
        assert profile.count(2.0) >= 1
        assert np.any(np.isclose(profile.counted_points, 0.5j))
        # Base height -log(0.5) = 0.693 <= 2.
        assert profile.count(0.5) == 0

    def test_empty_interval(self, zminus):
        profile = enumerate_strip(zminus, 0.5j, (2.0, 2.0), 3.0)
        assert len(profile.counted_points) == 0
        assert profile.explored > 1

    def test_finite_height_rejected(self):
        F = HalfPlaneInner(beta=3.0, atoms=((0.0, 1.0),))
        with pytest.raises(PreconditionError):
            enumerate_strip(F, 0.5j, (-1, 1), 2.0)

    def test_farfield_prune_sound(self, zminus):
        a = enumerate_strip(zminus, 0.5j, (-1, 1), 5.0, farfield_prune=True)
        b = enumerate_strip(zminus, 0.5j, (-1, 1), 5.0, farfield_prune=False)
        assert len(a.counted_points) == len(b.counted_points)
        assert np.allclose(np.sort_complex(a.counted_points),
                           np.sort_complex(b.counted_points), atol=1e-12)
        assert a.explored < b.explored

    def test_pruning_audit_monotone_heights(self, zminus):
        profile = enumerate_strip(zminus, 0.5j, (-1, 1), 6.0)
        assert np.all(profile.counted_points.imag <= 0.5 + 1e-12)
        assert len(profile.enumerated_heights) >= profile.explored * 0 + 1

    def test_determinism(self, zminus):
        a = enumerate_strip(zminus, 0.5j, (-1, 1), 6.0)
        b = enumerate_strip(zminus, 0.5j, (-1, 1), 6.0)
        assert np.array_equal(a.counted_points, b.counted_points)


class TestStripReport:
    def test_target_arithmetic(self, zminus):
        profile = enumerate_strip(zminus, 0.5j, (-1.0, 1.0), 4.0)
        rows = strip_counting_report(profile, 2 * np.pi, [4.0])
        assert rows[0].target == pytest.approx(1 / np.pi)

    def test_cesaro_exactness_vs_quadrature(self, zminus):
        from scipy.integrate import quad
        profile = enumerate_strip(zminus, 0.5j, (-1.0, 1.0), 6.0)
        h = profile.counted_heights
        R = 5.5

        def integrand(S):
            return np.searchsorted(h, S, "right") * np.exp(-S)

        val, _ = quad(integrand, 0, R, points=list(h[h <= R][:40]), limit=300)
        assert profile.cesaro(R) == pytest.approx(val / R, abs=1e-9)

    def test_pointwise_ratio_with_mass_factor(self, zminus):
        # N_I(z, R) e^{-R} approaches Im(z) |I| / chi_ell (the printed
        # theorem omits the Im(z) transverse-mass factor).
        profile = enumerate_strip(zminus, 0.5j, (-1.0, 1.0), 9.0)
        rows = strip_counting_report(profile, 2 * np.pi, [9.0])
        corrected = rows[0].count_over_eR / (0.5 * rows[0].target)
        assert 0.9 <= corrected <= 1.1

    def test_csv_writers(self, zminus, tmp_path):
        profile = enumerate_strip(zminus, 0.5j, (-1.0, 1.0), 3.0)
        rows = strip_counting_report(profile, 2 * np.pi, [2.0, 3.0])
        write_strip_csv(rows, tmp_path / "rows.csv", ["hello"])
        lines = (tmp_path / "rows.csv").read_text().splitlines()
        assert lines[0] == "# hello"
        assert lines[1] == "R,count,count_over_eR,cesaro,target,ratio"
        write_strip_points_csv(profile, tmp_path / "pts.csv")
        lines = (tmp_path / "pts.csv").read_text().splitlines()
        assert "generation,re,im,Im_height" in lines
