"""Distortion calculus for holomorphic self-maps.

The comparison quotient p of the pushforward of the radial (disk) or
downward (half-plane) unit field against the field at the image point,
and the derived quantities: Moebius distortion mu = 1 - |p|, linear
distortion delta = |1 - p|, vertical inefficiency eta = Re(1 - p), and
vertical inclination alpha = |arg p|.  Also radial distortion integrals,
cumulative distortion along backward orbits, and the angular-derivative
criterion scan.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, PreconditionError
from .innerfn import InnerModel, _boundary_value, _coerce_point
from .hypgeo import HalfPlanePoint

log = logging.getLogger("innerlab.distortion")

PUNCTURE = 1e-8
QUANTITIES = ("mu", "delta", "eta", "alpha")


@dataclass(frozen=True)
class HoloMap:
    """A holomorphic map given by callables for value and derivative."""

    fn: object
    dfn: object

    def eval(self, z):
        return self.fn(z)

    def __call__(self, z):
        return self.eval(z)

    def deriv(self, z):
        return self.dfn(z)


@dataclass(frozen=True)
class DistortionSample:
    """Distortion quantities of a map at one point.

    mu = 1 - |p|, delta = |1 - p|, eta = Re(1 - p), alpha = |arg p|,
    kept consistent with p to 1e-14 by construction.
    """

    z: complex
    p: complex
    mu: float
    delta: float
    eta: float
    alpha: float

    @staticmethod
    def from_p(z, p: complex) -> "DistortionSample":
        mod = abs(p)
        if mod > 1.0 + 1e-12:
            raise DomainError(f"Schwarz violation: |p| = {mod}")
        if mod > 1.0:
            p = p / mod  # rounding overshoot; the map is an isometry here
        return DistortionSample(
            z=complex(z), p=complex(p),
            mu=max(0.0, 1.0 - abs(p)), delta=abs(1.0 - p),
            eta=1.0 - p.real, alpha=abs(np.angle(p)))


def _gap_ratio(F, z):
    """(1-|z|^2)/(1-|F(z)|^2): the map's stable implementation when it has
    one (inner models and their compositions), else the naive quotient."""
    if hasattr(F, "gap_ratio"):
        return F.gap_ratio(z)
    z = np.asarray(z, dtype=complex)
    w = np.asarray(F.eval(z), dtype=complex)
    return (1.0 - np.abs(z) ** 2) / (1.0 - np.abs(w) ** 2)


def p_disk(F, z):
    """The radial comparison quotient in the disk, vectorized.

    p(z) = F'(z) (1-|z|^2)/(1-|F(z)|^2) * (z/|z|) * (|F(z)|/F(z)); undefined
    where z = 0 or F(z) = 0.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(F.eval(z), dtype=complex)
    if np.any(np.abs(z) == 0) or np.any(np.abs(w) == 0):
        raise PreconditionError("radial direction undefined at z = 0 or F(z) = 0")
    return np.asarray(F.deriv(z), dtype=complex) * _gap_ratio(F, z) \
        * (z / np.abs(z)) * (np.abs(w) / w)


def modulus_p_disk(F, z):
    """|p| = |F'(z)| (1-|z|^2)/(1-|F(z)|^2): defined even where the radial
    direction is not (used by the angular-derivative criterion)."""
    z = np.asarray(z, dtype=complex)
    return np.abs(F.deriv(z)) * _gap_ratio(F, z)


BOUNDARY_SNAP = 1e-8


def distortion_at_disk(F, z) -> DistortionSample:
    """Distortion sample of a disk self-map at z (z, F(z) nonzero).

    Maps exposing a stable `gap_ratio` (inner models, Frostman shifts,
    compositions) are evaluated with it and stay accurate up to the circle.
    For generic maps within 1e-8 of the circle the naive quotient is pure
    cancellation, so the boundary limit p = 1 is returned instead."""
    z, _ = _coerce_point(z)
    z = complex(z)
    if z == 0:
        raise PreconditionError("radial direction undefined at z = 0")
    w = complex(F.eval(z))
    if w == 0:
        raise PreconditionError("radial direction undefined: F(z) = 0")
    if not hasattr(F, "gap_ratio") and (1.0 - abs(z) < BOUNDARY_SNAP
                                        or 1.0 - abs(w) < BOUNDARY_SNAP):
        return DistortionSample.from_p(z, 1.0 + 0j)
    return DistortionSample.from_p(z, complex(p_disk(F, z)))


def distortion_at_halfplane(F, z) -> DistortionSample:
    """Distortion sample of a half-plane self-map, via the downward field:
    p(z) = F'(z) Im(z)/Im(F(z))."""
    if isinstance(z, HalfPlanePoint):
        z = z.value
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("point must lie in the upper half-plane")
    w = complex(F.eval(z))
    if w.imag <= 0:
        raise DomainError(f"image {w!r} not in the upper half-plane")
    p = complex(F.deriv(z)) * (z.imag / w.imag)
    return DistortionSample.from_p(z, p)


def _ray_punctures(F, zeta: complex):
    """Radii in (0,1) where F vanishes on the ray r*zeta (plus the origin)."""
    rs = []
    if isinstance(F, InnerModel):
        for a in F.zeros:
            if a != 0 and abs(a / abs(a) - zeta) < 1e-9:
                rs.append(abs(a))
    return sorted(set(rs))


def _quantity_on_ray(F, zeta: complex, quantity: str):
    if quantity not in QUANTITIES:
        raise PreconditionError(f"unknown quantity {quantity!r}")

    def q(r: float) -> float:
        z = r * zeta
        sample = distortion_at_disk(F, z)
        return getattr(sample, quantity)

    return q


def radial_distortion_integral(F, zeta, quantity: str, r_max: float,
                               tol: float = 1e-9) -> float:
    """int_0^{r_max} quantity(r zeta) d rho along the radius, with the
    hyperbolic line element d rho = 2 dr/(1 - r^2).

    Parameter punctures of width 1e-8 are excised around r = 0 and around
    any zero of F on the ray (the integrand is bounded, so the omitted mass
    is o(1)).  Monotone nondecreasing in r_max for nonnegative quantities.
    """
    if not 0 < r_max < 1:
        raise PreconditionError("need 0 < r_max < 1")
    zeta = _boundary_value(zeta)
    qfun = _quantity_on_ray(F, zeta, quantity)

    def integrand(r):
        return qfun(r) * 2.0 / (1.0 - r * r)

    cuts = [PUNCTURE]
    for r0 in _ray_punctures(F, zeta):
        if PUNCTURE < r0 < r_max:
            cuts.extend((r0 - PUNCTURE, r0 + PUNCTURE))
    cuts.append(r_max)
    total = 0.0
    for a, b in zip(cuts[::2], cuts[1::2]):
        if b <= a:
            continue
        val, err = quad(integrand, a, b, epsabs=tol, epsrel=1e-11, limit=300)
        if err > 10 * max(tol, 1e-13):
            log.info("radial integral on [%g, %g] achieved err %.2e", a, b, err)
        total += val
    return total


def cumulative_orbit_distortion(orbit, N: int) -> float:
    """Partial sum sum_{n=1}^N delta_F(z_{-n}) along a backward orbit.

    `orbit` is anything with a `model` attribute and `point(n)` returning
    the coordinate z_{-n}.  Coordinates where the radial direction is
    undefined contribute their two-sided limit via a 1e-8 radial
    perturbation (logged).
    """
    if N < 0:
        raise PreconditionError("need N >= 0")
    F = orbit.model
    total = 0.0
    for n in range(1, N + 1):
        z = complex(orbit.point(n))
        try:
            total += distortion_at_disk(F, z).delta
        except PreconditionError:
            log.info("undefined direction at orbit index -%d; perturbing", n)
            if z == 0:
                z = PUNCTURE + 0j
            lo = distortion_at_disk(F, z * (1.0 - PUNCTURE)).delta
            hi = distortion_at_disk(F, z * (1.0 + PUNCTURE)).delta
            total += 0.5 * (lo + hi)
    return total


def subadditivity_gap(F, G, a) -> float:
    """delta_{F o G}(a) - delta_F(G(a)) - delta_G(a); <= 0 up to rounding
    (the composition law in the form its proof establishes)."""
    a, _ = _coerce_point(a)
    b = complex(G.eval(a))
    pg = complex(p_disk(G, a))
    pf = complex(p_disk(F, b))
    return abs(1.0 - pf * pg) - abs(1.0 - pf) - abs(1.0 - pg)


@dataclass(frozen=True)
class ScanRow:
    model_id: str
    r_max: float
    integral_mu: float
    integral_eta: float
    integral_delta: float
    integral_alpha: float
    log_angular_derivative: float


def angular_derivative_criterion_scan(family, zeta, r_grid,
                                      tol: float = 1e-9) -> list:
    """For each model of a truncation family, the four radial distortion
    integrals at each r_max together with log of the angular derivative.

    Supports the angular-derivative dichotomy: the mu-integral stabilizes
    in r_max exactly when the angular derivative stays finite along the
    family.
    """
    zeta = _boundary_value(zeta)
    rows = []
    for k, F in enumerate(family):
        ad = F.boundary_deriv_modulus(zeta)
        for r_max in r_grid:
            if F.is_rotation:
                rows.append(ScanRow(f"model{k}", float(r_max),
                                    0.0, 0.0, 0.0, 0.0, math.log(ad)))
                continue
            vals = {q: radial_distortion_integral(F, zeta, q, r_max, tol)
                    for q in QUANTITIES}
            rows.append(ScanRow(f"model{k}", float(r_max), vals["mu"],
                                vals["eta"], vals["delta"], vals["alpha"],
                                math.log(ad) if np.isfinite(ad) else math.inf))
    return rows


def write_scan_csv(rows, path, header_lines=()):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("model_id,r_max,integral_mu,integral_eta,integral_delta,"
                 "integral_alpha,log_angular_derivative\n")
        for r in rows:
            fh.write(f"{r.model_id},{r.r_max:.17g},{r.integral_mu:.17g},"
                     f"{r.integral_eta:.17g},{r.integral_delta:.17g},"
                     f"{r.integral_alpha:.17g},{r.log_angular_derivative:.17g}\n")
