"""Half-plane dynamics of parabolic inner functions with finite atom
measures.

Models F(z) = z + beta + sum c_k (1 + z x_k)/(x_k - z) (alpha = 1, so the
fixed point at infinity is parabolic), their preimages, strip counting
N_I(z, R) with Im-threshold pruning, the boundary Lyapunov exponent
chi_ell, and height classification.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from ._roots import aberth_batch
from .errors import BudgetError, NumericalError, PreconditionError
from .hypgeo import HalfPlanePoint

log = logging.getLogger("innerlab.parabolic")

RESIDUAL_TOL = 1e-12
IM_SUM_TOL = 1e-9
DEFAULT_NODE_BUDGET = 5 * 10 ** 7


def _unwrap_hp(z):
    if isinstance(z, HalfPlanePoint):
        return z.value
    return complex(z)


@dataclass(frozen=True)
class HalfPlaneInner:
    """Finite-atom Herglotz self-map of the upper half-plane with a
    parabolic fixed point at infinity."""

    beta: float = 0.0
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "beta", float(self.beta))
        ats = tuple((float(x), float(c)) for x, c in self.atoms)
        for _, c in ats:
            if c <= 0:
                raise PreconditionError("atom masses must be positive")
        xs = [x for x, _ in ats]
        if len(set(xs)) != len(xs):
            raise PreconditionError("atom base points must be distinct")
        object.__setattr__(self, "atoms", ats)

    @property
    def degree(self) -> int:
        return len(self.atoms) + 1

    @property
    def drift(self) -> float:
        """beta - sum c_k x_k: the quadratic Taylor coefficient at infinity
        (0 exactly for doubly-parabolic maps)."""
        return self.beta - sum(c * x for x, c in self.atoms)

    @property
    def jump_scale(self) -> float:
        """sum c_k (1 + x_k^2): the cubic coefficient at infinity; controls
        the size of non-drift preimage branches far out."""
        return sum(c * (1.0 + x * x) for x, c in self.atoms)

    def eval(self, z):
        z = np.asarray(_unwrap_hp(z) if np.ndim(z) == 0 else z, dtype=complex)
        out = z + self.beta
        with np.errstate(divide="ignore", invalid="ignore"):
            for x, c in self.atoms:
                out = out + c * (1.0 + z * x) / (x - z)
        return complex(out) if out.ndim == 0 else out

    def __call__(self, z):
        return self.eval(z)

    def deriv(self, z):
        z = np.asarray(_unwrap_hp(z) if np.ndim(z) == 0 else z, dtype=complex)
        out = np.ones_like(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            for x, c in self.atoms:
                out = out + c * (x * x + 1.0) / (x - z) ** 2
        return complex(out) if out.ndim == 0 else out

    def to_text(self) -> str:
        lines = [f"beta={format(self.beta, '.17g')}"]
        for x, c in self.atoms:
            lines.append(f"atom={format(x, '.17g')},{format(c, '.17g')}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "HalfPlaneInner":
        beta = 0.0
        atoms = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                key, payload = line.split("=", 1)
            except ValueError as exc:
                raise PreconditionError(f"bad model line {lineno}: {raw!r}") from exc
            key = key.strip()
            if key == "beta":
                beta = float(payload)
            elif key == "atom":
                x, c = (float(p) for p in payload.split(","))
                atoms.append((x, c))
            else:
                raise PreconditionError(f"unknown model key {key!r} on line {lineno}")
        return HalfPlaneInner(beta=beta, atoms=tuple(atoms))


def hp_eval_deriv(F: HalfPlaneInner, z):
    """(F(z), F'(z)) from the Herglotz formulas."""
    z = _unwrap_hp(z)
    return F.eval(z), F.deriv(z)


def hp_preimages_batch(F: HalfPlaneInner, zs, warm=None) -> np.ndarray:
    """The degree-many preimages of each z in the open upper half-plane.

    Clears denominators to a degree-(k+1) polynomial; all roots must lie in
    H and satisfy the height identity sum Im w = Im z to 1e-9, else a
    consistency error is raised.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    k = len(F.atoms)
    # P(w) = (w + beta - z) prod (x_l - w) + sum_k c_k (1 + w x_k) prod_{l != k}.
    prod_all = np.array([1.0 + 0j])
    for x, _ in F.atoms:
        prod_all = np.convolve(prod_all, [x, -1.0])
    base = np.convolve([F.beta, 1.0], prod_all)          # (w + beta) prod
    corr = np.zeros(k + 2, dtype=complex)
    for x, c in F.atoms:
        others = np.array([1.0 + 0j])
        for x2, _ in F.atoms:
            if x2 != x:
                others = np.convolve(others, [x2, -1.0])
        term = c * np.convolve([1.0, x], others)
        corr[: len(term)] += term
    coeffs = np.zeros((len(zs), k + 2), dtype=complex)
    coeffs[:, : len(base)] = base
    coeffs[:, : len(corr)] += corr
    coeffs[:, : len(prod_all)] -= zs[:, None] * prod_all
    roots = aberth_batch(coeffs, warm=warm)
    # Newton polish on F(w) - z.
    for _ in range(3):
        fw = F.eval(roots) - zs[:, None]
        dfw = F.deriv(roots)
        with np.errstate(all="ignore"):
            step = fw / dfw
        ok = np.isfinite(step) & (np.abs(step) < 1.0)
        roots = np.where(ok, roots - step, roots)
    resid = np.max(np.abs(F.eval(roots) - zs[:, None]))
    if resid > RESIDUAL_TOL * np.maximum(1.0, np.max(np.abs(zs))):
        raise NumericalError(f"preimage polish stalled at residual {resid:.3e}",
                             context={"model": F})
    im_sum = np.abs(np.sum(roots.imag, axis=1) - zs.imag)
    if np.any(roots.imag <= 0) or np.any(im_sum > IM_SUM_TOL):
        raise NumericalError(
            "preimage set inconsistent with the height identity",
            context={"model": F, "imbalance": float(np.max(im_sum))})
    order = np.lexsort((np.round(roots.imag, 12), np.round(roots.real, 12)),
                       axis=1)
    return np.take_along_axis(roots, order, axis=1)


def hp_preimages(F: HalfPlaneInner, z) -> np.ndarray:
    """All solutions of F(w) = z in H, sorted by (Re, Im)."""
    z = _unwrap_hp(z)
    if z.imag <= 0:
        raise PreconditionError("base point must lie in the upper half-plane")
    return hp_preimages_batch(F, [z])[0]


@dataclass(frozen=True)
class HeightClass:
    kind: str            # "finite-height" | "infinite-height"
    confidence: str      # "analytic" | "heuristic"
    detail: str


def height_classify(F: HalfPlaneInner, z0=0.7j, n_iters: int = 2000) -> HeightClass:
    """Classify F as finite or infinite height.

    For symmetric atom measures the Taylor expansion at infinity (via the
    w = -1/z conjugation) decides exactly: the quadratic coefficient is
    beta - sum c_k x_k, zero iff doubly parabolic iff infinite height.
    Otherwise the orbit of z0 is iterated and the classification is the
    heuristic doubling test on Im F^n(z0).
    """
    if n_iters < 1000:
        raise PreconditionError("need n_iters >= 1000 for the iterate test")
    pairs = sorted((x, c) for x, c in F.atoms)
    mirrored = sorted((-x, c) for x, c in F.atoms)
    symmetric = len(pairs) == len(mirrored) and all(
        abs(a - b) < 1e-12 and abs(ca - cb) < 1e-12
        for (a, ca), (b, cb) in zip(pairs, mirrored))
    if symmetric:
        b = F.drift
        if abs(b) < 1e-12:
            return HeightClass("infinite-height", "analytic",
                               "doubly parabolic: quadratic coefficient 0 at infinity")
        return HeightClass("finite-height", "analytic",
                           f"singly parabolic: quadratic coefficient {b:g}")
    z = _unwrap_hp(z0)
    y0 = z.imag
    for _ in range(n_iters):
        z = F.eval(z)
    if z.imag >= 2.0 * y0:
        return HeightClass("infinite-height", "heuristic",
                           f"Im grew {z.imag / y0:.2f}x over {n_iters} iterates")
    return HeightClass("finite-height", "heuristic",
                       f"Im grew only {z.imag / y0:.2f}x over {n_iters} iterates")


def chi_ell(F: HalfPlaneInner, tol: float = 1e-8) -> float:
    """int_R log |F'(x)| dx by adaptive quadrature under x = tan(phi).

    On the real line F' = 1 + sum c_k (x_k^2+1)/(x_k - x)^2 > 1, and the
    substitution makes the integrand bounded at the endpoints since
    log F' ~ jump_scale / x^2 in the tails.
    """
    if not F.atoms:
        return 0.0

    def integrand(phi):
        x = math.tan(phi)
        sec2 = 1.0 + x * x
        fp = 1.0
        for xk, c in F.atoms:
            fp += c * (xk * xk + 1.0) / (xk - x) ** 2
        return math.log(fp) * sec2

    half = math.pi / 2.0
    singular = sorted(math.atan(x) for x, _ in F.atoms)
    val, err = quad(integrand, -half, half, points=singular,
                    epsabs=tol, epsrel=1e-12, limit=500)
    if err > tol:
        log.info("chi_ell achieved error %.2e beyond requested %.2e", err, tol)
    return val


# ---------------------------------------------------------------------------
# Strip enumeration


@dataclass
class StripProfile:
    """Counted preimages in I x [e^{-R}, 1] plus the pruning audit trail."""

    model: HalfPlaneInner
    base: complex
    interval: tuple
    cutoff: float
    counted_points: np.ndarray = field(default_factory=lambda: np.empty(0, complex))
    counted_generations: np.ndarray = field(default_factory=lambda: np.empty(0, int))
    enumerated_heights: np.ndarray = field(default_factory=lambda: np.empty(0))
    farfield_pruned: int = 0
    explored: int = 0

    @property
    def counted_heights(self) -> np.ndarray:
        return np.sort(-np.log(self.counted_points.imag))

    def count(self, R: float) -> int:
        """N_I(z, R): counted points with Im >= e^{-R} (heights <= R)."""
        if R > self.cutoff + 1e-12:
            raise PreconditionError(f"R = {R} beyond the enumeration cutoff")
        return int(np.searchsorted(self.counted_heights, R, side="right"))

    def cesaro(self, R: float) -> float:
        """(1/R) int_0^R N_I(z, S) e^{-S} dS, exactly."""
        if not 0 < R <= self.cutoff + 1e-12:
            raise PreconditionError(f"need 0 < R <= cutoff, got {R}")
        h = self.counted_heights
        h = h[h <= R]
        if len(h) == 0:
            return 0.0
        return float(np.sum(np.exp(-h) - math.exp(-R))) / R


def enumerate_strip(F: HalfPlaneInner, z, interval, R: float,
                    node_budget: int = DEFAULT_NODE_BUDGET,
                    farfield_prune: bool = True,
                    farfield_safety: float = 4.0) -> StripProfile:
    """Backward tree of repeated preimages with Im >= e^{-R}; a point is
    counted iff additionally Re in `interval` and Im <= 1.

    Pruning by the Im threshold alone is sound (preimage heights only
    decrease).  `farfield_prune` additionally drops drift nodes far outside
    the interval/pole hull whose descendants provably stay below the
    threshold on any path re-entering bounded territory: a jump branch off
    a drift node at w has height about jump_scale * Im(w)/|w - poles|^2,
    and the outward drift only shrinks that bound.  Without it the drift
    chains cost order e^{2R} nodes.
    """
    z = _unwrap_hp(z)
    if z.imag <= 0:
        raise PreconditionError("base point must lie in the upper half-plane")
    if not F.atoms:
        raise PreconditionError("strip enumeration needs at least one atom")
    if not R >= 0:
        raise PreconditionError("cutoff must be nonnegative")
    cls = height_classify(F)
    if cls.kind != "infinite-height":
        raise PreconditionError(f"model is not infinite height ({cls.detail})")
    x_lo, x_hi = (float(interval[0]), float(interval[1]))

    eps = math.exp(-R)
    poles = np.array([x for x, _ in F.atoms])
    re_safe = max(abs(x_lo), abs(x_hi), float(np.max(np.abs(poles)))) + 5.0
    jump = F.jump_scale

    profile = StripProfile(F, z, (x_lo, x_hi), float(R))
    counted_pts, counted_gen = [], []
    heights_log = []

    def window_mask(pts):
        return ((pts.real >= x_lo) & (pts.real <= x_hi)
                & (pts.imag >= eps) & (pts.imag <= 1.0 + 1e-15))

    current = np.array([z], dtype=complex)
    heights_log.append(-np.log(current.imag))
    if window_mask(current)[0]:
        counted_pts.append(z)
        counted_gen.append(0)
    profile.explored = 1

    gen = 0
    warm = None
    while len(current) > 0:
        gen += 1
        profile.explored += len(current) * F.degree
        if profile.explored > node_budget:
            raise BudgetError(f"node budget {node_budget} exceeded at "
                              f"generation {gen}", partial=profile)
        roots = hp_preimages_batch(F, current, warm=warm).reshape(-1)
        heights_log.append(-np.log(roots.imag))
        keep = roots.imag >= eps
        if farfield_prune:
            far = np.abs(roots.real) >= re_safe
            gap = np.abs(roots.real) - float(np.max(np.abs(poles)))
            with np.errstate(divide="ignore"):
                reentry = farfield_safety * jump * roots.imag / np.maximum(gap, 1.0) ** 2
            hopeless = far & (reentry < eps) \
                & ((roots.real < x_lo) | (roots.real > x_hi))
            profile.farfield_pruned += int(np.sum(keep & hopeless))
            keep &= ~hopeless
        kept = roots[keep]
        inwin = window_mask(kept)
        counted_pts.extend(kept[inwin].tolist())
        counted_gen.extend([gen] * int(np.sum(inwin)))
        current = kept
        warm = None
    profile.counted_points = np.asarray(counted_pts, dtype=complex)
    profile.counted_generations = np.asarray(counted_gen, dtype=int)
    profile.enumerated_heights = (np.concatenate(heights_log)
                                  if heights_log else np.empty(0))
    return profile


@dataclass(frozen=True)
class StripRow:
    R: float
    count: int
    count_over_eR: float
    cesaro: float
    target: float
    ratio: float


def strip_counting_report(profile: StripProfile, chi: float, R_values=None) -> list:
    """Rows (R, N_I, N_I e^{-R}, cesaro, target = |I|/chi, ratio) for each
    requested R; ratio is the Cesaro one, cesaro/target."""
    if not chi > 0:
        raise PreconditionError("chi_ell must be positive")
    x_lo, x_hi = profile.interval
    target = (x_hi - x_lo) / chi
    if R_values is None:
        R_values = [profile.cutoff]
    rows = []
    for R in R_values:
        n = profile.count(R)
        ces = profile.cesaro(R)
        rows.append(StripRow(float(R), n, n * math.exp(-R), ces, target,
                             ces / target))
    return rows


def write_strip_csv(rows, path, header_lines=()):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("R,count,count_over_eR,cesaro,target,ratio\n")
        for r in rows:
            fh.write(f"{r.R:.17g},{r.count},{r.count_over_eR:.17g},"
                     f"{r.cesaro:.17g},{r.target:.17g},{r.ratio:.17g}\n")


def write_strip_points_csv(profile: StripProfile, path):
    """Counted points with the Im_height = -log Im column."""
    with open(path, "w", newline="") as fh:
        for line in profile.model.to_text().splitlines():
            fh.write(f"# {line}\n")
        fh.write(f"# z={profile.base.real:.17g},{profile.base.imag:.17g}\n")
        fh.write(f"# I=[{profile.interval[0]:.17g},{profile.interval[1]:.17g}]"
                 f" R={profile.cutoff:.17g}\n")
        fh.write("generation,re,im,Im_height\n")
        for g, p in zip(profile.counted_generations, profile.counted_points):
            fh.write(f"{g},{p.real:.17g},{p.imag:.17g},"
                     f"{-math.log(p.imag):.17g}\n")
