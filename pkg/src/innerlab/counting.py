"""Counting functionals over preimage trees.

The step-counting function N(z, S), its exact Cesaro average
(1/R) sum (e^{-d_w} - e^{-R}), the asymptotic target constant
(1/2) log(1/|z|) / chi, the empirical a-priori constant, and the
empirical Schwarz gap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .hypgeo import origin_distance
from .innerfn import InnerModel, _coerce_point
from .preimage import PreimageTree

log = logging.getLogger("innerlab.counting")


@dataclass(frozen=True)
class CountingProfile:
    """Sorted retained radii of the repeated preimages of `base`, up to the
    enumeration cutoff; the counting step function is right-continuous."""

    base: complex
    radii: np.ndarray
    cutoff: float
    chi: float | None = None

    def __post_init__(self):
        r = np.sort(np.asarray(self.radii, dtype=float))
        if len(r) and r[-1] > self.cutoff + 1e-12:
            raise PreconditionError("profile contains radii beyond the cutoff")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "base", complex(self.base))

    @staticmethod
    def from_tree(tree: PreimageTree, chi=None) -> "CountingProfile":
        return CountingProfile(tree.base, tree.radii(), tree.cutoff, chi)


def count(profile: CountingProfile, S: float) -> int:
    """N(z, S) = #{retained radii <= S}; S beyond the cutoff is an error
    because that data was pruned away."""
    if S < 0:
        raise PreconditionError("negative radius")
    if S > profile.cutoff + 1e-12:
        raise PreconditionError(
            f"S = {S} exceeds the enumeration cutoff {profile.cutoff}")
    return int(np.searchsorted(profile.radii, S, side="right"))


def cesaro(profile: CountingProfile, R: float) -> float:
    """(1/R) integral_0^R N(z, S) e^-S dS, evaluated exactly as
    (1/R) sum_{d_w <= R} (e^{-d_w} - e^{-R})."""
    if not 0 < R <= profile.cutoff + 1e-12:
        raise PreconditionError(f"need 0 < R <= cutoff, got R = {R}")
    r = profile.radii[profile.radii <= R]
    if len(r) == 0:
        return 0.0
    return float(np.sum(np.exp(-r) - np.exp(-R))) / R


def target_constant(z, chi: float) -> float:
    """The limit constant (1/2) log(1/|z|) / chi of the counting theorems."""
    z, _ = _coerce_point(z)
    if not chi > 0:
        raise DomainError("Lyapunov exponent must be positive")
    if z == 0:
        raise DomainError("base point must be nonzero")
    return 0.5 * float(np.log(1.0 / abs(z))) / chi


def apriori_constant(profile: CountingProfile, r_step: float = 0.25) -> float:
    """Empirical constant C for N(z, R') <= C e^{R' - d(0,z)}: the max of
    N(z, R') e^{-(R' - d(0,z))} over a grid of R' in (0, R]."""
    if len(profile.radii) == 0:
        return 0.0
    d0 = origin_distance(abs(profile.base))
    grid = np.arange(r_step, profile.cutoff + 1e-9, r_step)
    if len(grid) == 0 or grid[-1] < profile.cutoff - 1e-9:
        grid = np.append(grid, profile.cutoff)
    counts = np.searchsorted(profile.radii, grid, side="right")
    return float(np.max(counts * np.exp(-(grid - d0))))


def estimate_schwarz_gap(F: InnerModel, samples: int = 20000, seed: int = 0,
                         d_min: float = 1.0, d_max: float = 12.0) -> float:
    """Empirical gamma of the minimal-translation lemma: one quarter of the
    smallest observed drop d(0,z) - d(0,F(z)) over a quasi-uniform
    hyperbolic grid on d_min <= d(0,z) <= d_max, refined near the minimizer.

    Rotations are degenerate (gap 0) and flagged with a log warning.
    """
    if not F.centered:
        raise PreconditionError("Schwarz gap needs a centered model")
    if F.is_rotation:
        log.warning("Schwarz gap of a rotation is degenerate (0)")
        return 0.0
    rng = np.random.default_rng(seed)

    def min_drop(dvals, thetas):
        r = np.tanh(dvals / 2.0)
        z = r * np.exp(1j * thetas)
        drop = dvals - origin_distance(np.abs(F.eval(z)))
        k = int(np.argmin(drop))
        return float(drop[k]), complex(z[k])

    n_rings = max(24, int(np.sqrt(samples)))
    per_ring = max(16, samples // n_rings)
    dvals = np.repeat(np.linspace(d_min, d_max, n_rings), per_ring)
    thetas = rng.uniform(0.0, 2.0 * np.pi, size=len(dvals))
    best, z_best = min_drop(dvals, thetas)
    # Local refinement around the minimizer.
    d0 = origin_distance(abs(z_best))
    th0 = float(np.angle(z_best))
    for width in (0.3, 0.05, 0.01):
        dloc = np.clip(d0 + rng.uniform(-width, width, size=2000),
                       d_min, d_max)
        thloc = th0 + rng.uniform(-width, width, size=2000)
        cand, z_cand = min_drop(dloc, thloc)
        if cand < best:
            best, z_best = cand, z_cand
            d0, th0 = origin_distance(abs(z_best)), float(np.angle(z_best))
    return max(best, 0.0) / 4.0


@dataclass(frozen=True)
class CountingRow:
    R: float
    count: int
    count_over_eR: float
    cesaro: float
    target: float
    ratio: float


def counting_report(profile: CountingProfile, R_values, chi: float) -> list:
    """Rows (R, count, count/e^R, cesaro, target, ratio) per requested R;
    ratio is the pointwise one, N(z,R) e^{-R} / target."""
    tgt = target_constant(profile.base, chi)
    rows = []
    for R in R_values:
        n = count(profile, R)
        over = n * float(np.exp(-R))
        rows.append(CountingRow(float(R), n, over, cesaro(profile, R),
                                tgt, over / tgt))
    return rows


def write_counting_csv(rows, path, header_lines=()):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("R,count,count_over_eR,cesaro,target,ratio\n")
        for row in rows:
            fh.write(f"{row.R:.17g},{row.count},{row.count_over_eR:.17g},"
                     f"{row.cesaro:.17g},{row.target:.17g},{row.ratio:.17g}\n")
