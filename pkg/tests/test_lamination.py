import numpy as np
import pytest

from innerlab.errors import BudgetError, DomainError, PreconditionError
from innerlab.hypgeo import origin_distance
from innerlab.innerfn import InnerModel
from innerlab.lamination import (AnnularBox, SolenoidSampler, bad_times_pow2,
                                 box_thinness_reference, branch_orbit,
                                 exponential_map, fixedpoint_orbit_point,
                                 geodesic_intertwining_check,
                                 gh_commutation_discrepancy, h_action_limit,
                                 radial_shadowing_stat, sample_backward_orbit,
                                 sample_interior_orbit, shadowing_simulation,
                                 total_mass_check, transverse_weights,
                                 xi_box_mass)
from innerlab.lyapunov import chi_jensen_oracle


class TestInverseOrbit:
    def test_residual_invariant(self, deg2):
        orb = sample_interior_orbit(deg2, 0.3 + 0.2j, 60, seed=3)
        assert orb.residual() < 1e-10

    def test_schwarz_monotonicity(self, deg2):
        orb = sample_interior_orbit(deg2, 0.3, 80, seed=4)
        mods = np.abs(orb.coordinates(80))
        started = False
        for n in range(80):
            if origin_distance(min(mods[n], 1 - 1e-17)) >= 1.0:
                started = True
            if started:
                assert mods[n + 1] >= mods[n] - 1e-12

    def test_zero_base_rejected(self, deg2):
        with pytest.raises(PreconditionError):
            sample_interior_orbit(deg2, 0.0, 5)

    def test_reproducible_from_seed(self, deg2):
        a = sample_interior_orbit(deg2, 0.3, 30, seed=11).coordinates(30)
        b = sample_interior_orbit(deg2, 0.3, 30, seed=11).coordinates(30)
        assert np.array_equal(a, b)

    def test_log_boundary_gaps(self, deg2):
        orb = sample_interior_orbit(deg2, 0.3, 120, seed=5)
        lh = orb.log_boundary_gaps(120)
        # Strictly decreasing (backward orbits approach the circle) and
        # consistent with the representable prefix.
        pts = orb.coordinates(120)
        for n in range(0, 20):
            assert lh[n] == pytest.approx(np.log(1 - abs(pts[n])), rel=1e-9)
        assert lh[-1] < -60


class TestSolenoidSampler:
    def test_weights_sum_to_one(self, deg2):
        sampler = SolenoidSampler(deg2, seed=1)
        orb = sampler.orbit(5)
        roots = np.exp(1j * np.linspace(0.1, 5.9, 7))
        for u in roots:
            from innerlab.preimage import preimages_of
            pre = preimages_of(deg2, u / abs(u))
            w = np.array([1 / deg2.boundary_deriv_modulus(r) for r in pre])
            assert np.sum(w) == pytest.approx(1.0, abs=1e-10)

    def test_power_map_weights_uniform(self, square):
        from innerlab.preimage import preimages_of
        pre = preimages_of(square, np.exp(0.7j))
        w = [1 / square.boundary_deriv_modulus(r) for r in pre]
        assert w == pytest.approx([0.5, 0.5])

    def test_orbit_stays_on_circle(self, deg2):
        orb = SolenoidSampler(deg2, seed=2).orbit(40)
        assert np.max(np.abs(np.abs(orb.coordinates(40)) - 1)) < 1e-14

    def test_zero_length_orbit(self, deg2):
        orb = SolenoidSampler(deg2, seed=3).orbit(0)
        assert len(orb) == 1

    def test_marginal_uniformity_ks(self, deg2):
        n = 2 * 10 ** 4
        u = SolenoidSampler(deg2, seed=11).marginal_sample(n, depth=6)
        ang = np.sort(np.angle(u) % (2 * np.pi)) / (2 * np.pi)
        ks = np.max(np.maximum(np.arange(1, n + 1) / n - ang,
                               ang - np.arange(0, n) / n))
        assert ks < 1.63 / np.sqrt(n)

    def test_rotation_rejected(self):
        with pytest.raises(PreconditionError):
            SolenoidSampler(InnerModel(zeros=(0j,)))


class TestTransverseWeights:
    def test_power_map_equal_split(self, square):
        z = 0.4 + 0.1j
        tree = transverse_weights(square, z, 1)
        w = tree.weights(1)
        assert w == pytest.approx(np.full(2, np.log(1 / abs(z)) / 2), abs=1e-12)

    def test_kolmogorov_consistency(self, deg2):
        z = 0.3
        tree = transverse_weights(deg2, z, 3)
        assert len(tree.levels[3]) == 8
        for level in range(3):
            w_parent = tree.weights(level)
            w_child = tree.weights(level + 1).reshape(len(w_parent), -1)
            assert np.max(np.abs(w_child.sum(axis=1) - w_parent)) < 1e-8
        assert np.sum(tree.weights(3)) == pytest.approx(np.log(1 / 0.3), abs=1e-9)

    def test_normalized_node(self, deg2):
        tree = transverse_weights(deg2, 0.3, 2)
        node = tree.node(1, 0)
        assert node.normalized == pytest.approx(
            node.weight / np.log(1 / 0.3), rel=1e-12)

    def test_depth_budget(self, deg2):
        with pytest.raises(BudgetError):
            transverse_weights(deg2, 0.3, 40)


class TestExponentialMap:
    def test_zeroth_approximant_exact(self, square):
        const = np.ones(5, dtype=complex)
        r = exponential_map(const, 0.25, 0, model=square)
        assert r.point == pytest.approx(0.75)

    def test_fixed_point_closed_form(self, square):
        const = np.ones(40, dtype=complex)
        r = exponential_map(const, 0.5, 30, model=square)
        assert abs(r.point - np.exp(-0.5)) < 1e-6

    def test_small_t_slope(self, square):
        orb = SolenoidSampler(square, seed=5).orbit(35)
        u0 = orb.point(0)
        errs = []
        for t in (1e-2, 1e-3):
            r = exponential_map(orb, t, 30)
            errs.append(abs(r.point - (1 - t) * u0) / t)
        # |E - (1-t) u0| = o(t): the normalized error drops with t.
        assert errs[1] < errs[0] / 2

    def test_cap_enforced(self, square):
        const = np.ones(5, dtype=complex)
        with pytest.raises(DomainError):
            exponential_map(const, 1.5, 3, model=square)

    def test_cauchy_decay_before_roundoff(self, deg2):
        orb = SolenoidSampler(deg2, seed=8).orbit(30)
        vals = [exponential_map(orb, 0.5, n).point for n in range(10, 24)]
        incs = np.abs(np.diff(vals))
        # Geometric decay in the truncation-dominated range: per-step
        # ratios fluctuate with |F'| along the orbit, so the pilot pins a
        # 2x-slack 0.9^k envelope plus the mean ratio (the roundoff floor
        # takes over near n ~ 25).
        envelope = 2.0 * incs[0] * 0.9 ** np.arange(len(incs))
        assert np.all(incs <= envelope)
        mean_ratio = (incs[-1] / incs[0]) ** (1.0 / (len(incs) - 1))
        assert mean_ratio < 0.9


class TestIntertwining:
    def test_zero_time_exact(self, square):
        orb = SolenoidSampler(square, seed=5).orbit(40)
        assert geodesic_intertwining_check(orb, 0.3, 0.0, 30) == 0.0

    def test_square_random_orbits(self, square):
        for seed in (1, 2):
            orb = SolenoidSampler(square, seed=seed).orbit(45)
            assert geodesic_intertwining_check(orb, 0.3, -0.5, 30) < 1e-3

    def test_fixed_point_both_sides_closed_form(self, square):
        # On the constant orbit both sides equal e^{-e^s t}.
        const = np.ones(45, dtype=complex)
        t, s = 0.3, -0.5
        d = geodesic_intertwining_check(const, t, s, 30, model=square)
        direct = exponential_map(const, np.exp(s) * t, 30, model=square).point
        assert abs(direct - np.exp(-np.exp(s) * t)) < 1e-6
        assert d < 1e-9

    def test_cap_check(self, square):
        const = np.ones(45, dtype=complex)
        with pytest.raises(DomainError):
            geodesic_intertwining_check(const, 0.5, 1.0, 30, model=square)


class TestGHCommutation:
    def test_h_action_matches_leaf_algebra(self):
        # L(z_tau, w) lands at parameter Re(tau) Im(w) + i (Im tau
        # - Re(tau) Re(w)) on the z^d fixed-point leaf.
        d, tau, w = 2, 0.4 + 0.1j, 0.7 + 1.2j
        F = InnerModel.power_map(d)
        coords = np.array([fixedpoint_orbit_point(tau, d, j) for j in range(30)])
        got = h_action_limit(coords, w, 24, F)
        expect_param = tau.real * w.imag + 1j * (tau.imag - tau.real * w.real)
        assert abs(got - np.exp(-expect_param)) < 1e-7

    @pytest.mark.parametrize("d", [2, 3])
    def test_commutation_relation(self, d):
        disc = gh_commutation_discrepancy(d, 0.4 + 0.1j, s=0.3, t=0.25)
        assert disc < 1e-6


class TestXiBoxMass:
    def test_depth_zero_analytic(self, deg2):
        from scipy.integrate import quad
        box = AnnularBox(0.5, 0.7, 0.3, 1.1)
        est = xi_box_mass(deg2, box, 0, grid=(16, 16))
        val, _ = quad(lambda r: np.log(1 / r) * 4 * r / (1 - r * r) ** 2,
                      0.5, 0.7)
        expect = (1.1 - 0.3) * val / (2 * np.pi)
        assert est.value == pytest.approx(expect, rel=1e-10)

    def test_monotone_in_depth(self, deg2):
        box = AnnularBox(0.5, 0.7, 0.3, 1.1)
        masses = [xi_box_mass(deg2, box, n, grid=(16, 16)) for n in range(5)]
        for lo, hi in zip(masses[:-1], masses[1:]):
            assert hi.value >= lo.value - 10 * (lo.error + hi.error) - 1e-12

    def test_thin_box_comparability(self, deg2):
        box = AnnularBox(0.985, 0.995, 0.2, 0.9)
        est = xi_box_mass(deg2, box, 6, grid=(12, 12))
        ref = box_thinness_reference(box)
        assert 0.5 <= est.value / ref <= 2.0

    def test_box_validation(self):
        with pytest.raises(PreconditionError):
            AnnularBox(0.0, 0.5, 0.0, 1.0)
        with pytest.raises(PreconditionError):
            AnnularBox(0.5, 0.4, 0.0, 1.0)


class TestTotalMass:
    def test_power_map_close_to_log2(self, square):
        res = total_mass_check(square, 0.99, samples=2 * 10 ** 5, seed=1)
        assert abs(res.mass - np.log(2)) / np.log(2) < 0.05
        assert res.chi_ref == pytest.approx(np.log(2), abs=1e-10)

    def test_deg2_close_to_chi(self, deg2):
        res = total_mass_check(deg2, 0.99, samples=2 * 10 ** 5, seed=2)
        chi = chi_jensen_oracle(deg2).value
        assert abs(res.mass - chi) / chi < 0.05

    def test_r0_trend(self, deg2):
        chi = chi_jensen_oracle(deg2).value
        errs = [abs(total_mass_check(deg2, r0, samples=2 * 10 ** 5, seed=3).mass
                    - chi) for r0 in (0.9, 0.99)]
        assert errs[1] <= errs[0] + 3e-3

    def test_deterministic_given_seed(self, square):
        a = total_mass_check(square, 0.95, samples=10 ** 4, seed=7)
        b = total_mass_check(square, 0.95, samples=10 ** 4, seed=7)
        assert a.mass == b.mass

    def test_target_se_budget(self, square):
        with pytest.raises(BudgetError):
            total_mass_check(square, 0.9, samples=10 ** 4, seed=1,
                             target_se=1e-12, max_samples=2 * 10 ** 4)


class TestRadialShadowing:
    def test_positive_axis_orbit_is_the_ray(self, square):
        orb = branch_orbit(square, 0.4, 60,
                           lambda roots: int(np.argmax(roots.real)))
        st = radial_shadowing_stat(orb)
        assert st.value < 1e-6
        assert st.conclusive
        assert st.limit_angle == pytest.approx(0.0, abs=1e-12)

    def test_random_orbit_trend(self, deg2):
        stats = {}
        for N in (100, 400):
            orb = sample_interior_orbit(deg2, 0.3, N, seed=17)
            stats[N] = radial_shadowing_stat(orb).value
        assert stats[400] <= stats[100] + 0.02

    def test_constant_zero_orbit_rejected(self, square):
        orb = branch_orbit(square, 0.2, 0, None)
        orb.points = [0j, 0j, 0j]
        with pytest.raises(PreconditionError):
            radial_shadowing_stat(orb, n_points=2)


class TestShadowingSimulation:
    def test_no_bad_times_exact(self):
        run = shadowing_simulation([], 100.0, start=2 + 1j)
        assert run.zeta == 2.0
        assert run.final_avg == 0.0

    def test_density_zero_bad_times(self):
        run = shadowing_simulation(bad_times_pow2(10 ** 4), 10 ** 4,
                                   start=2 + 1j)
        assert run.final_avg < 0.05

    def test_density_one_negative_control(self):
        run = shadowing_simulation([(0.0, 10 ** 4)], 10 ** 4,
                                   adversary="right", start=2 + 1j)
        assert run.final_avg > 0.5

    def test_pow2_intervals_have_vanishing_density(self):
        T = 10 ** 4
        bad = bad_times_pow2(T)
        total = sum(b - a for a, b in bad)
        assert total / T < 0.02

    def test_unknown_adversary(self):
        with pytest.raises(PreconditionError):
            shadowing_simulation([], 10.0, adversary="spiral")


def test_sample_backward_orbit_helper(deg2):
    sampler = SolenoidSampler(deg2, seed=4)
    orb = sample_backward_orbit(sampler, 12)
    assert orb.depth == 12
    assert orb.on_boundary
