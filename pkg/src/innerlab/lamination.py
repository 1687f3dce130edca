"""Backward-orbit machinery over the solenoid and the disk.

Solenoid sampling with transfer-operator weights, transverse weight
trees, the exponential map to geodesic-flow coordinates and its
intertwining, box masses of the natural measure, the total-mass check
against the Lyapunov exponent, radial shadowing statistics, and the
good/bad-times shadowing simulation in the upper half-plane.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, DomainError, NumericalError, PreconditionError
from .hypgeo import disk_distance, origin_distance
from .innerfn import InnerModel, _coerce_point
from .lyapunov import chi_jensen_oracle
from .preimage import preimages_of_batch

log = logging.getLogger("innerlab.lamination")

EXP_MAP_CAP = 1.0
TREE_BUDGET = 2 * 10 ** 6


# ---------------------------------------------------------------------------
# Inverse orbits


@dataclass
class InverseOrbit:
    """A backward orbit (z_0, z_{-1}, ...) of `model`, realized lazily by a
    branch-choice sequence plus cached coordinates.

    `points[n]` is z_{-n}.  Extension solves the preimage equation at the
    deepest cached coordinate and picks the branch returned by `chooser`,
    which receives the sorted root array and must return an index
    deterministically (any randomness lives in the chooser's own rng).
    """

    model: InnerModel
    points: list
    branches: list = field(default_factory=list)
    chooser: object = None
    on_boundary: bool = False

    def __len__(self):
        return len(self.points)

    @property
    def depth(self) -> int:
        return len(self.points) - 1

    def point(self, n: int) -> complex:
        """The coordinate z_{-n}, extending the cache as needed."""
        if n < 0:
            raise PreconditionError("only backward coordinates exist")
        self.extend_to(n)
        return self.points[n]

    def coordinates(self, upto: int) -> np.ndarray:
        self.extend_to(upto)
        return np.asarray(self.points[: upto + 1], dtype=complex)

    def extend_to(self, depth: int):
        while self.depth < depth:
            if self.chooser is None:
                raise PreconditionError(
                    f"orbit has no chooser and only {self.depth} cached steps")
            roots = preimages_of_batch(self.model, [self.points[-1]])[0]
            if self.on_boundary:
                roots = roots / np.abs(roots)
            k = int(self.chooser(roots))
            self.branches.append(k)
            self.points.append(complex(roots[k]))

    def residual(self) -> float:
        """max |F(z_{-n-1}) - z_{-n}| over the cached coordinates."""
        if self.depth == 0:
            return 0.0
        pts = np.asarray(self.points, dtype=complex)
        return float(np.max(np.abs(self.model.eval(pts[1:]) - pts[:-1])))

    def log_boundary_gaps(self, upto: int) -> np.ndarray:
        """log(1 - |z_{-n}|) for n = 0..upto, stable at any depth.

        While the gap is representable it is computed directly; once the
        coordinates collapse onto the circle in double precision the gaps
        continue via the derivative recurrence h_{n+1} = h_n / |F'(z_{-n-1})|
        (exact to first order near the boundary, where it is used).
        """
        pts = self.coordinates(upto)
        gaps = 1.0 - np.abs(pts)
        out = np.empty(upto + 1)
        switched = False
        for n in range(upto + 1):
            if not switched and gaps[n] > 1e-10:
                out[n] = math.log(gaps[n])
            else:
                if not switched and n == 0:
                    raise PreconditionError("base point is on the circle")
                switched = True
                dmod = self.model.boundary_deriv_modulus(
                    float(np.angle(pts[n])))
                out[n] = out[n - 1] - math.log(dmod)
        return out


def branch_orbit(F: InnerModel, z0, n: int, policy) -> InverseOrbit:
    """Backward orbit with a deterministic branch policy
    (roots array -> index)."""
    z0, _ = _coerce_point(z0)
    orbit = InverseOrbit(F, [complex(z0)], chooser=policy)
    orbit.extend_to(n)
    return orbit


def sample_interior_orbit(F: InnerModel, z0, n: int, seed: int = 0) -> InverseOrbit:
    """Backward orbit from an interior point with branches drawn from the
    normalized transverse weights log(1/|w|)/log(1/|z|)."""
    z0, _ = _coerce_point(z0)
    z0 = complex(z0)
    if z0 == 0:
        raise PreconditionError("the constant orbit at 0 is excluded")
    rng = np.random.default_rng(seed)

    def chooser(roots):
        w = np.log(1.0 / np.abs(roots))
        total = np.sum(w)
        if total < 1e-12:
            # Deep coordinates collapse onto the circle in doubles; the
            # normalized heights tend to the transfer weights 1/|F'|.
            w = 1.0 / np.array([F.boundary_deriv_modulus(r) for r in roots])
            total = np.sum(w)
        return rng.choice(len(roots), p=w / total)

    orbit = InverseOrbit(F, [z0], chooser=chooser)
    orbit.extend_to(n)
    return orbit


# ---------------------------------------------------------------------------
# Solenoid sampling


@dataclass
class SolenoidSampler:
    """Backward sampling of the natural extension of Lebesgue measure.

    A backward step from u picks the preimage u' with probability
    1/|F'(u')| (the transfer-operator weights); their sum over the
    preimages is 1 up to 1e-10, which is exactly invariance of m.
    """

    model: InnerModel
    seed: int = 0

    def __post_init__(self):
        if self.model.atoms or not self.model.centered or self.model.is_rotation:
            raise PreconditionError("solenoid sampling needs a centered "
                                    "non-rotation finite Blaschke product")
        self._rng = np.random.default_rng(self.seed)

    def _weights(self, roots: np.ndarray) -> np.ndarray:
        w = 1.0 / np.array([self.model.boundary_deriv_modulus(r) for r in roots])
        total = float(np.sum(w))
        if abs(total - 1.0) > 1e-10:
            raise NumericalError(
                f"transfer weights sum to {total}, not 1", context=self.model)
        return w / total

    def orbit(self, n: int, start_angle: float | None = None) -> InverseOrbit:
        """A boundary inverse orbit of length n, reproducible from the seed."""
        if start_angle is None:
            start_angle = self._rng.uniform(0.0, 2.0 * np.pi)
        rng = self._rng

        def chooser(roots):
            return rng.choice(len(roots), p=self._weights(roots))

        orbit = InverseOrbit(self.model, [complex(np.exp(1j * start_angle))],
                             chooser=chooser, on_boundary=True)
        orbit.extend_to(n)
        return orbit

    def marginal_sample(self, n_orbits: int, depth: int) -> np.ndarray:
        """Vectorized u_{-depth} marginal over independent orbits; the
        pushforward of the sampled measure under any coordinate is m."""
        rng = self._rng
        u = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n_orbits))
        F = self.model
        for _ in range(depth):
            roots = preimages_of_batch(F, u)
            roots = roots / np.abs(roots)
            w = np.empty(roots.shape)
            for j in range(roots.shape[1]):
                w[:, j] = [F.boundary_deriv_modulus(r) for r in roots[:, j]]
            w = 1.0 / w
            w = w / np.sum(w, axis=1, keepdims=True)
            picks = (np.cumsum(w, axis=1) < rng.uniform(size=(n_orbits, 1))).sum(axis=1)
            u = roots[np.arange(n_orbits), picks]
        return u


def sample_backward_orbit(sampler: SolenoidSampler, n: int) -> InverseOrbit:
    """Boundary inverse orbit of length n from the sampler's stream."""
    return sampler.orbit(n)


# ---------------------------------------------------------------------------
# Transverse weights


@dataclass(frozen=True)
class TransverseWeight:
    """Nevanlinna weight of the cylinder through a repeated preimage."""

    base: complex
    point: complex
    weight: float
    normalized: float


@dataclass
class TransverseTree:
    """Full d-ary preimage tree of depth n with cylinder weights.

    Children of node i at level g occupy indices i*d .. (i+1)*d - 1 at
    level g+1 (preimages are emitted in sorted order per parent).
    """

    base: complex
    degree: int
    levels: list

    def weights(self, level: int) -> np.ndarray:
        return np.log(1.0 / np.abs(self.levels[level]))

    def node(self, level: int, index: int) -> TransverseWeight:
        w = float(np.log(1.0 / abs(self.levels[level][index])))
        return TransverseWeight(self.base, complex(self.levels[level][index]),
                                w, w / math.log(1.0 / abs(self.base)))


def transverse_weights(F: InnerModel, z, depth: int) -> TransverseTree:
    """Cylinder weight tree of depth `depth` below z (no pruning)."""
    z, _ = _coerce_point(z)
    z = complex(z)
    if z == 0:
        raise PreconditionError("base point must be nonzero")
    if F.degree ** depth > TREE_BUDGET:
        raise BudgetError(f"depth {depth} exceeds the tree budget")
    levels = [np.array([z], dtype=complex)]
    for _ in range(depth):
        roots = preimages_of_batch(F, levels[-1])
        levels.append(roots.reshape(-1))
    return TransverseTree(z, F.degree, levels)


# ---------------------------------------------------------------------------
# Exponential map and geodesic flow


@dataclass(frozen=True)
class ExpMapResult:
    point: complex
    increment: float
    n_approx: int


def _orbit_coordinates(u_orbit, upto: int) -> np.ndarray:
    if isinstance(u_orbit, InverseOrbit):
        if not u_orbit.on_boundary:
            raise PreconditionError("exponential map needs a boundary orbit")
        return u_orbit.coordinates(upto)
    arr = np.asarray(u_orbit, dtype=complex)
    if len(arr) < upto + 1:
        raise PreconditionError(f"orbit too short: need {upto + 1} coordinates")
    return arr[: upto + 1]


def _chain_derivs(F: InnerModel, coords: np.ndarray) -> np.ndarray:
    """D[n] = |(F^n)'(u_{-n})| along a boundary orbit, D[0] = 1."""
    mods = np.array([F.boundary_deriv_modulus(u) for u in coords])
    return np.concatenate(([1.0], np.cumprod(mods[1:])))


def exponential_map(u_orbit, t: float, n_approx: int,
                    model: InnerModel | None = None,
                    cap: float = EXP_MAP_CAP) -> ExpMapResult:
    """E(u, t) ~ F^n(u_{-n} + v_{-n}) with v_{-n} = -t u_{-n}/|(F^n)'(u_{-n})|.

    Returns the n_approx-th approximant of the 0-coordinate together with
    the Cauchy increment from the previous approximant as error proxy.
    `t` must stay below `cap` so the perturbed points remain in the disk.
    """
    if not 0 < t < cap:
        raise DomainError(f"flow parameter t = {t} outside (0, {cap})")
    if n_approx < 0:
        raise PreconditionError("n_approx must be nonnegative")
    F = model if model is not None else u_orbit.model
    coords = _orbit_coordinates(u_orbit, n_approx)
    D = _chain_derivs(F, coords)

    def approximant(n: int) -> complex:
        start = coords[n] * (1.0 - t / D[n])
        if abs(start) >= 1.0:
            raise DomainError("perturbed start left the disk; reduce t")
        return complex(F.iterate(start, n))

    value = approximant(n_approx)
    inc = abs(value - approximant(n_approx - 1)) if n_approx >= 1 else math.nan
    return ExpMapResult(value, inc, n_approx)


def geodesic_intertwining_check(u_orbit, t: float, s: float, n_approx: int,
                                rebase_depth: int | None = None,
                                model: InnerModel | None = None,
                                cap: float = EXP_MAP_CAP) -> float:
    """Hyperbolic discrepancy between the geodesic flow of E(u, t) by time s
    realized two ways: directly as E(u, e^s t), and by re-basing the
    approximation k indices deeper and applying F^k.

    Exactly 0 at s = 0 (both sides collapse to the same approximant).
    """
    if not (0 < t < cap and 0 < math.exp(s) * t < cap):
        raise DomainError("both t and e^s t must lie in (0, cap)")
    F = model if model is not None else u_orbit.model
    if s == 0:
        return 0.0
    k = rebase_depth if rebase_depth is not None else max(1, math.ceil(abs(s)))
    coords = _orbit_coordinates(u_orbit, n_approx + k)
    D = _chain_derivs(F, coords)

    side_a = exponential_map(coords, math.exp(s) * t, n_approx, model=F).point
    # E(u, e^s t)_{-k} = E(shifted orbit, e^s t / |(F^k)'(u_{-k})|)_0.
    t_shift = math.exp(s) * t / D[k]
    deep = exponential_map(coords[k:], t_shift, n_approx, model=F).point
    side_b = complex(F.iterate(deep, k))
    return float(disk_distance(side_a, side_b))


def h_action_limit(orbit_coords, w: complex, n_approx: int,
                   model: InnerModel) -> complex:
    """The 0-coordinate of L(z, w) = lim F^n(Z_{-n}(w)) for an interior
    backward orbit, where Z_j(w) = z_j/|z_j| + (z_j - z_j/|z_j|) (w/i)."""
    z = complex(orbit_coords[n_approx])
    u = z / abs(z)
    start = u + (z - u) * (w / 1j)
    if abs(start) >= 1.0:
        raise DomainError("half-plane parameter maps outside the disk")
    return complex(model.iterate(start, n_approx))


def fixedpoint_orbit_point(tau: complex, d: int, j: int) -> complex:
    """z_{-j} = exp(-tau d^{-j}) on the leaf of z^d through the boundary
    fixed point 1; Re tau > 0."""
    return complex(np.exp(-tau * float(d) ** (-j)))


def leaf_depth_for(d: int) -> int:
    """Approximation depth balancing the d^-n truncation error of the
    H-action limit against its d^n roundoff amplification."""
    return max(8, int(round(18.0 / math.log(d))))


def gh_commutation_discrepancy(d: int, tau: complex, s: float, t: float,
                               n_approx: int | None = None) -> float:
    """Numeric realization of g_{-t} h_s = h_{e^t s} g_{-t} on the z^d
    fixed-point leaf.

    Orbits on this leaf have coordinates exp(-tau' d^j); the flows act on
    the parameter by g_t: Re tau -> e^t Re tau and h_s: Im tau -> Im tau
    - s Re tau.  Each side is realized through the H-action limit applied
    to numerically computed orbits, and the 0-coordinates are compared.
    """
    if tau.real <= 0:
        raise PreconditionError("leaf parameter needs Re tau > 0")
    if n_approx is None:
        n_approx = leaf_depth_for(d)
    F = InnerModel.power_map(d)

    def orbit_array(tau_val: complex, upto: int) -> np.ndarray:
        return np.array([fixedpoint_orbit_point(tau_val, d, j)
                         for j in range(upto + 1)])

    def apply_h(tau_val: complex, sigma: float) -> complex:
        """h_sigma via the H-action limit; returns the measured parameter."""
        coords = orbit_array(tau_val, n_approx)
        out = h_action_limit(coords, 1j + sigma, n_approx, F)
        # Invert z_0 = exp(-tau): the measured parameter of the new orbit.
        return -complex(np.log(out))

    def apply_g(tau_val: complex, time: float) -> complex:
        return complex(tau_val.real * math.exp(time), tau_val.imag)

    lhs = apply_g(apply_h(tau, s), -t)
    rhs = apply_h(apply_g(tau, -t), math.exp(t) * s)
    z_lhs = fixedpoint_orbit_point(lhs, d, 0)
    z_rhs = fixedpoint_orbit_point(rhs, d, 0)
    return float(disk_distance(z_lhs, z_rhs))


# ---------------------------------------------------------------------------
# Box masses of the natural measure


@dataclass(frozen=True)
class AnnularBox:
    """r_lo <= |z| <= r_hi, theta_lo <= arg z <= theta_hi."""

    r_lo: float
    r_hi: float
    theta_lo: float
    theta_hi: float

    def __post_init__(self):
        if not 0.0 < self.r_lo < self.r_hi < 1.0:
            raise PreconditionError("box must sit strictly between 0 and the circle")
        if not self.theta_lo < self.theta_hi:
            raise PreconditionError("empty angular range")


@dataclass(frozen=True)
class BoxMassEstimate:
    region: AnnularBox
    depth: int
    value: float
    error: float


def _xi_integrand(F: InnerModel, z: np.ndarray, depth: int) -> np.ndarray:
    """sum over F^n(w) = z of log(1/|w|) ||(F^n)'(w)||_hyp^{-2}."""
    if depth == 0:
        return np.log(1.0 / np.abs(z))
    pts = z.reshape(-1)
    chain = np.ones(len(pts))
    for _ in range(depth):
        roots = preimages_of_batch(F, pts)
        dmod = np.abs(F.deriv(roots))
        chain = (chain[:, None] * dmod).reshape(-1)
        pts = roots.reshape(-1)
    m = len(z.reshape(-1))
    per = len(pts) // m
    base = np.repeat(z.reshape(-1), per)
    hyp_norm = chain * (1.0 - np.abs(pts) ** 2) / (1.0 - np.abs(base) ** 2)
    terms = np.log(1.0 / np.abs(pts)) / hyp_norm ** 2
    return terms.reshape(m, per).sum(axis=1).reshape(z.shape)


def xi_box_mass(F: InnerModel, region: AnnularBox, depth: int,
                grid: tuple = (24, 24)) -> BoxMassEstimate:
    """(1/2pi) int_{F^{-n}(A)} log(1/|z|) dA_hyp by change of variables:
    a tensor Gauss-Legendre grid over A of the preimage sum, with the error
    estimated by grid refinement."""
    if F.degree ** depth * grid[0] * grid[1] > 64 * TREE_BUDGET:
        raise BudgetError(f"depth {depth} exceeds the quadrature budget")

    def value_at(nr: int, nt: int) -> float:
        xr, wr = np.polynomial.legendre.leggauss(nr)
        xt, wt = np.polynomial.legendre.leggauss(nt)
        r = 0.5 * (region.r_hi - region.r_lo) * (xr + 1.0) + region.r_lo
        th = 0.5 * (region.theta_hi - region.theta_lo) * (xt + 1.0) + region.theta_lo
        jac = 0.25 * (region.r_hi - region.r_lo) * (region.theta_hi - region.theta_lo)
        R, TH = np.meshgrid(r, th, indexing="ij")
        Z = R * np.exp(1j * TH)
        vals = _xi_integrand(F, Z, depth) * 4.0 * R / (1.0 - R ** 2) ** 2
        return jac * float(np.einsum("i,j,ij->", wr, wt, vals)) / (2.0 * np.pi)

    coarse = value_at(grid[0], grid[1])
    fine = value_at(grid[0] + grid[0] // 2 + 1, grid[1] + grid[1] // 2 + 1)
    return BoxMassEstimate(region, depth, fine, abs(fine - coarse))


def box_thinness_reference(region: AnnularBox) -> float:
    """(1/2pi) int_A dA(z)/(1 - |z|), the comparability reference for thin
    boxes near the circle."""
    from scipy.integrate import quad

    val, _ = quad(lambda r: r / (1.0 - r), region.r_lo, region.r_hi)
    return (region.theta_hi - region.theta_lo) * val / (2.0 * np.pi)


# ---------------------------------------------------------------------------
# Total mass vs the Lyapunov exponent


@dataclass(frozen=True)
class TotalMassResult:
    mass: float
    stderr: float
    chi_ref: float
    r0: float
    samples: int


def _fundamental_outer_radius(F: InnerModel, r0: float) -> float:
    """Smallest radius that provably contains E* = F^{-1}(B(0,r0)) \\ B(0,r0):
    bisect the sharp factorwise lower bound on |F| along hyperbolic radii."""
    D_i = [origin_distance(abs(a)) for a in F.zeros]
    d_target = origin_distance(r0)

    def lower_bound(D: float) -> float:
        out = 1.0
        for Di in D_i:
            if D <= Di:
                return 0.0
            out *= math.tanh((D - Di) / 2.0)
        return out

    lo, hi = d_target, d_target + sum(D_i) + 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lower_bound(mid) >= r0:
            hi = mid
        else:
            lo = mid
    return min(math.tanh(hi / 2.0), 1.0 - 1e-15)


def total_mass_check(F: InnerModel, r0: float, samples: int = 10 ** 6,
                     seed: int = 0, strata: tuple = (16, 16),
                     target_se: float | None = None,
                     max_samples: int = 10 ** 8) -> TotalMassResult:
    """(1/2pi) int_{E*} log(1/|z|) dA_hyp over the fundamental annulus
    E* = F^{-1}(B(0,r0)) \\ B(0,r0), by stratified Monte Carlo with the
    membership test |z| >= r0, |F(z)| < r0; approaches chi as r0 -> 1.

    Sampling is uniform in (log(1-r), theta) over a fixed grid of strata
    with per-stratum substreams spawned from `seed`, so results are
    bit-identical for a given stratum grid regardless of worker count.
    """
    if F.atoms or not F.centered or F.is_rotation:
        raise PreconditionError("total mass check needs a centered "
                                "non-rotation finite Blaschke product")
    if not 0 < r0 < 1:
        raise PreconditionError("need r0 in (0, 1)")
    r1 = _fundamental_outer_radius(F, r0)
    u_lo, u_hi = math.log(1.0 - r1), math.log(1.0 - r0)
    L = u_hi - u_lo
    su, st = strata
    chi_ref = chi_jensen_oracle(F).value if F.degree >= 2 else math.log(F.degree)

    n = samples
    while True:
        seeds = np.random.SeedSequence(seed).spawn(su * st)
        per = max(n // (su * st), 16)
        means = np.empty(su * st)
        variances = np.empty(su * st)
        cell = 0
        for iu in range(su):
            for it in range(st):
                rng = np.random.default_rng(seeds[cell])
                u = u_lo + L * (iu + rng.uniform(size=per)) / su
                th = 2.0 * np.pi * (it + rng.uniform(size=per)) / st
                r = 1.0 - np.exp(u)
                z = r * np.exp(1j * th)
                inside = np.abs(F.eval(z)) < r0
                f = np.where(
                    inside,
                    L * np.log(1.0 / r) * 4.0 * r / ((1.0 - r) * (1.0 + r) ** 2),
                    0.0)
                means[cell] = np.mean(f)
                variances[cell] = np.var(f, ddof=1) / per
                cell += 1
        mass = float(np.mean(means))
        se = float(np.sqrt(np.sum(variances))) / (su * st)
        if target_se is None or se <= target_se:
            return TotalMassResult(mass, se, chi_ref, r0, per * su * st)
        n *= 4
        if n > max_samples:
            raise BudgetError(
                f"needed more than {max_samples} samples for se <= {target_se}",
                partial=TotalMassResult(mass, se, chi_ref, r0, per * su * st))


# ---------------------------------------------------------------------------
# Radial shadowing of interior backward orbits


@dataclass(frozen=True)
class RadialShadowingStat:
    value: float
    conclusive: bool
    limit_angle: float


def _near_boundary_distance(dtheta, lh1, lh2):
    """Hyperbolic distance between (theta_i, log gap_i) points near the
    circle: arccosh(1 + (dtheta^2 + dh^2)/(2 h1 h2)), all in log space."""
    log_dth2 = 2.0 * np.log(np.maximum(np.abs(dtheta), 1e-300))
    with np.errstate(divide="ignore"):
        log_dh2 = 2.0 * (np.maximum(lh1, lh2)
                         + np.log1p(-np.exp(-np.abs(lh1 - lh2))))
    log_e = np.logaddexp(log_dth2, log_dh2) - math.log(2.0) - lh1 - lh2
    out = np.where(log_e > 1.0, np.inf, 0.0)
    small = log_e <= 1.0
    out = np.array(out, dtype=float)
    out[small] = np.arccosh(1.0 + np.exp(log_e[small]))
    return out


def radial_shadowing_stat(orbit: InverseOrbit, n_points: int | None = None,
                          offset_window: float = 4.0,
                          offset_step: float = 0.01) -> RadialShadowingStat:
    """Best-offset time average of min(1, d(z_{-n}, radial ray)) along an
    interior backward orbit, with time parameter -log(1 - |z_{-n}|).

    The ray points at the empirical limit angle (circular mean of the last
    quarter); if that quarter has angular spread above 0.1 rad the result
    is flagged inconclusive.  Boundary gaps are tracked in log space so the
    statistic stays meaningful beyond the depth where the coordinates
    collapse onto the circle in double precision.
    """
    n_points = n_points if n_points is not None else orbit.depth
    pts = orbit.coordinates(n_points)
    if np.any(pts == 0):
        raise PreconditionError("the constant orbit at 0 is excluded")
    angles_tail = np.angle(pts[3 * len(pts) // 4:])
    mean_dir = np.mean(np.exp(1j * angles_tail))
    theta = float(np.angle(mean_dir))
    spread = float(np.max(np.abs(np.angle(np.exp(1j * (angles_tail - theta))))))
    conclusive = spread <= 0.1

    lh = orbit.log_boundary_gaps(n_points)
    times = -lh
    order = np.argsort(times)
    times, pts, lh = times[order], pts[order], lh[order]
    dtheta = np.angle(pts * np.exp(-1j * theta))
    near = lh < math.log(1e-6)

    best = math.inf
    span = times[-1] - times[0]
    for t0 in np.arange(-offset_window, offset_window + offset_step, offset_step):
        ray_lh = -(times + t0)
        dist = np.empty(len(pts))
        if np.any(~near):
            ray_r = np.clip(1.0 - np.exp(ray_lh[~near]), 0.0, 1.0 - 1e-16)
            dist[~near] = disk_distance(pts[~near], ray_r * np.exp(1j * theta))
        if np.any(near):
            dist[near] = _near_boundary_distance(dtheta[near], lh[near],
                                                 np.minimum(ray_lh[near], -1e-300))
        dist = np.minimum(1.0, dist)
        avg = float(np.trapezoid(dist, times) / span) if span > 0 else float(dist[0])
        best = min(best, avg)
    return RadialShadowingStat(best, conclusive, theta)


# ---------------------------------------------------------------------------
# Shadowing simulation in the upper half-plane


@dataclass(frozen=True)
class ShadowingRun:
    zeta: float
    times: np.ndarray
    avg_curve: np.ndarray
    final_avg: float


def bad_times_pow2(T: float) -> list:
    """The vanishing-upper-density family union of [2^k, 2^k + k]."""
    out = []
    k = 1
    while 2.0 ** k <= T:
        out.append((2.0 ** k, min(2.0 ** k + k, T)))
        k += 1
    return out


ADVERSARIES = {
    # Unit-speed up-and-right: "worse than the worst case".
    "up_right": (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)),
    # Pure horizontal drift.
    "right": (1.0, 0.0),
}


_U_CAP = 1e12


def shadowing_simulation(bad_times, T: float, adversary: str = "up_right",
                         start: complex = 1j, step: float = 0.02) -> ShadowingRun:
    """Integrate a driver that steers gamma' = v_down at good times while an
    adversary policy (unit hyperbolic speed) takes over on the bad set.

    The path is integrated by RK4 in (x, log y) with a fixed hyperbolic
    step split exactly at regime boundaries.  The horizontal hyperbolic
    distance to the vertical line at the landing estimate is obtained from
    the backward-integrated ratio u = (zeta - x)/y (du/dt = u at good
    times, -a_x - a_y u at bad times, u(T) = 0), which stays well scaled
    where x - zeta and y separately underflow; the returned curve is the
    running average of min(1, |u|).
    """
    if adversary not in ADVERSARIES:
        raise PreconditionError(f"unknown adversary {adversary!r}")
    ax, ay = ADVERSARIES[adversary]
    if callable(bad_times):
        raise PreconditionError("pass bad times as a sorted interval list")
    intervals = [(float(a), float(b)) for a, b in bad_times if a < b]

    # Regime breakpoints across [0, T].
    cuts = [0.0, T]
    for a, b in intervals:
        cuts.extend((min(max(a, 0.0), T), min(max(b, 0.0), T)))
    cuts = sorted(set(cuts))
    segments = []
    for seg_a, seg_b in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (seg_a + seg_b)
        segments.append((seg_a, seg_b,
                         any(a <= mid < b for a, b in intervals)))

    # Forward pass: landing estimate zeta = x(T); x freezes once y
    # underflows, which loses nothing representable.
    x, ly = start.real, math.log(start.imag)
    ts_list = [0.0]
    regime = []
    for seg_a, seg_b, bad in segments:
        n_steps = max(1, int(math.ceil((seg_b - seg_a) / step)))
        h = (seg_b - seg_a) / n_steps
        if h < 1e-12:
            raise NumericalError("step size underflow in shadowing integration")
        t = seg_a
        for _ in range(n_steps):
            if bad:
                # dx/dt = a_x e^ly, d(ly)/dt = a_y: ly is linear in t, so
                # the x-update integrates exactly over the step.
                if ay != 0.0:
                    x += ax / ay * (math.exp(min(ly + ay * h, 700.0))
                                    - math.exp(min(ly, 700.0)))
                else:
                    x += ax * math.exp(min(ly, 700.0)) * h
                ly += ay * h
            else:
                ly -= h
            t += h
            ts_list.append(t)
            regime.append(bad)
    ts = np.asarray(ts_list)
    zeta = float(x)

    # Backward pass for u(t); RK4 on the piecewise-linear field.
    n = len(ts)
    u = np.empty(n)
    u[-1] = 0.0
    uc = 0.0
    for i in range(n - 1, 0, -1):
        h = ts[i] - ts[i - 1]
        if regime[i - 1]:
            def f(v):
                return ax + ay * v
        else:
            def f(v):
                return -v
        # du/ds = -du/dt integrated backward in s = -t.
        k1 = -f(uc)
        k2 = -f(uc - 0.5 * h * k1)
        k3 = -f(uc - 0.5 * h * k2)
        k4 = -f(uc - h * k3)
        uc = uc - h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        uc = max(min(uc, _U_CAP), -_U_CAP)
        u[i - 1] = uc
    dist = np.minimum(1.0, np.abs(u))
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (dist[1:] + dist[:-1])
                                           * np.diff(ts))))
    with np.errstate(invalid="ignore", divide="ignore"):
        avg_curve = np.where(ts > 0, cum / np.maximum(ts, 1e-300), 0.0)
    return ShadowingRun(zeta, ts, avg_curve, float(avg_curve[-1]))
