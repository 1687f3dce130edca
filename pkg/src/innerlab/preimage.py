"""Exact preimages of finite Blaschke products and preimage trees.

Solves F(w) = z by clearing denominators to a degree-d polynomial
(Aberth-Ehrlich with warm starts, Newton polish on F(w) - z), and
enumerates the tree of repeated preimages inside hyperbolic balls with
Schwarz-lemma pruning.  Enumeration is breadth-first, batched per
generation, and deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._roots import aberth_batch
from .errors import BudgetError, NumericalError, PreconditionError
from .hypgeo import origin_distance
from .innerfn import InnerModel, _coerce_point

log = logging.getLogger("innerlab.preimage")

RESIDUAL_TOL = 1e-12
DEDUP_TOL = 1e-9
DEFAULT_NODE_BUDGET = 5 * 10 ** 7


def _require_blaschke(F: InnerModel, centered=True, reject_rotation=False):
    if F.atoms:
        raise PreconditionError("preimage enumeration needs a finite Blaschke product")
    if F.degree < 1:
        raise PreconditionError("model has no zeros to pull back through")
    if centered and not F.centered:
        raise PreconditionError("model must be centered (a zero at the origin)")
    if reject_rotation and F.is_rotation:
        raise PreconditionError("rotations have a trivial preimage tree")


def _sort_roots(roots):
    """Deterministic (argument, modulus) order, rowwise."""
    roots = np.atleast_2d(roots)
    keys_arg = np.round(np.angle(roots), 12)
    keys_mod = np.round(np.abs(roots), 12)
    order = np.lexsort((keys_mod, keys_arg), axis=1)
    return np.take_along_axis(roots, order, axis=1)


def preimages_of_batch(F: InnerModel, zs, warm=None):
    """The d preimages of each point of `zs` (with multiplicity), as an
    (m, d) array sorted rowwise by (argument, modulus)."""
    _require_blaschke(F, centered=False)
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    P, Q = F.rational_coeffs()
    d = F.degree
    coeffs = np.zeros((len(zs), d + 1), dtype=complex)
    coeffs[:, : len(P)] = P
    coeffs[:, : len(Q)] -= zs[:, None] * Q
    roots = aberth_batch(coeffs, warm=warm)
    roots = _newton_polish(F, roots, zs)
    resid = np.abs(F.eval(roots) - zs[:, None])
    worst = float(np.max(resid))
    if worst > RESIDUAL_TOL:
        i, j = np.unravel_index(np.argmax(resid), resid.shape)
        raise NumericalError(
            f"root polish stalled at residual {worst:.3e}",
            context={"model": F, "z": complex(zs[i]), "root": complex(roots[i, j])})
    # Preimages of interior points are interior; clip rounding overshoot.
    mods = np.abs(roots)
    overshoot = mods >= 1.0
    if np.any(overshoot):
        interior = np.abs(zs[:, None]) < 1.0
        fix = overshoot & np.broadcast_to(interior, roots.shape)
        roots[fix] *= (1.0 - 1e-16) / mods[fix]
    return _sort_roots(roots)


def _newton_polish(F: InnerModel, roots, zs, sweeps=3):
    zz = zs[:, None]
    for _ in range(sweeps):
        fw = F.eval(roots) - zz
        dfw = F.deriv(roots)
        with np.errstate(all="ignore"):
            step = fw / dfw
        # Multiple roots have dfw ~ 0; leave those to the residual check.
        ok = np.isfinite(step) & (np.abs(step) < 0.1)
        roots = np.where(ok, roots - step, roots)
    return roots


def preimages_of(F: InnerModel, z):
    """All solutions of F(w) = z for a finite Blaschke product, sorted by
    (argument, modulus), polished to |F(w) - z| < 1e-12."""
    z, _ = _coerce_point(z)
    return preimages_of_batch(F, [z])[0]


def expand_frostman(F: InnerModel, a) -> InnerModel:
    """Re-expand the Frostman shift F_a of a centered finite Blaschke
    product into Blaschke form, by solving F = a for the zero set."""
    _require_blaschke(F)
    a, _ = _coerce_point(a)
    zeros = preimages_of(F, a)
    lead = np.prod(np.abs(zeros[np.abs(zeros) > 0]))
    value0 = (F.eval(0.0) - a) / (1.0 - np.conj(a) * F.eval(0.0))
    if abs(lead) < 1e-300:
        raise NumericalError("degenerate Frostman expansion")
    rotation = value0 / lead
    model = InnerModel(rotation=rotation / abs(rotation), zeros=tuple(zeros))
    probe = np.array([0.3 + 0.1j, -0.2 + 0.45j, 0.05 - 0.6j])
    shift = (F.eval(probe) - a) / (1.0 - np.conj(a) * F.eval(probe))
    if np.max(np.abs(model.eval(probe) - shift)) > 1e-10:
        raise NumericalError("Frostman expansion failed verification")
    return model


@dataclass(frozen=True)
class PreimageNode:
    """One retained repeated preimage."""

    point: complex
    generation: int
    parent_index: int
    branch: int

    def __post_init__(self):
        object.__setattr__(self, "point", complex(self.point))

    @property
    def height(self) -> float:
        return float(np.log(1.0 / abs(self.point)))

    @property
    def radius(self) -> float:
        return float(origin_distance(abs(self.point)))


@dataclass
class PreimageTree:
    """Repeated preimages of `base` under `model` with hyperbolic radius
    <= cutoff, grouped by generation.

    `points[g]` holds generation g, `parents[g]` the index of each node's
    parent within generation g-1, and `branches[g]` the branch number of
    the preimage solve.  `pruned_from` is the first generation at which any
    child was discarded (radius cutoff or dedup), or None.
    """

    model: InnerModel
    base: complex
    cutoff: float
    points: list = field(default_factory=list)
    parents: list = field(default_factory=list)
    branches: list = field(default_factory=list)
    pruned_from: int | None = None
    collisions: int = 0
    explored: int = 0

    @property
    def generations(self) -> int:
        return len(self.points)

    def size(self) -> int:
        return sum(len(p) for p in self.points)

    def radii(self) -> np.ndarray:
        """Sorted hyperbolic radii of all retained nodes."""
        if self.size() == 0:
            return np.empty(0)
        mods = np.concatenate([np.abs(p) for p in self.points])
        return np.sort(origin_distance(mods))

    def heights(self, generation: int) -> np.ndarray:
        return np.log(1.0 / np.abs(self.points[generation]))

    def nodes(self):
        for g, pts in enumerate(self.points):
            for i, p in enumerate(pts):
                yield PreimageNode(p, g, int(self.parents[g][i]),
                                   int(self.branches[g][i]))

    def max_residual(self) -> float:
        """max |F(w) - parent(w)| over all non-root retained nodes."""
        worst = 0.0
        for g in range(1, self.generations):
            w = self.points[g]
            target = self.points[g - 1][self.parents[g]]
            worst = max(worst, float(np.max(np.abs(self.model.eval(w) - target))))
        return worst

    def to_csv(self, path):
        """Dump: header comments with the model serialization and R, then
        rows generation, re, im, height, radius, parent_index."""
        with open(path, "w", newline="") as fh:
            for line in self.model.to_text().splitlines():
                fh.write(f"# {line}\n")
            fh.write(f"# R={self.cutoff:.17g}\n")
            fh.write("generation,re,im,height,radius,parent_index\n")
            for g, pts in enumerate(self.points):
                h = self.heights(g)
                r = origin_distance(np.abs(pts))
                for i, p in enumerate(pts):
                    fh.write(f"{g},{p.real:.17g},{p.imag:.17g},"
                             f"{h[i]:.17g},{r[i]:.17g},{self.parents[g][i]}\n")


class _DedupGrid:
    """Hash-grid membership test at tolerance `tol` (euclidean)."""

    def __init__(self, tol):
        self.tol = tol
        self.cells = {}

    def add_or_find(self, z: complex) -> bool:
        """True if a previously added point lies within tol of z."""
        cx, cy = round(z.real / self.tol), round(z.imag / self.tol)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for other in self.cells.get((cx + dx, cy + dy), ()):
                    if abs(other - z) <= self.tol:
                        return True
        self.cells.setdefault((cx, cy), []).append(z)
        return False


def enumerate_ball(F: InnerModel, z, R: float, node_budget=DEFAULT_NODE_BUDGET,
                   max_generation=None, dedup_tol=DEDUP_TOL) -> PreimageTree:
    """Breadth-first tree of repeated preimages of z with d(0, w) <= R.

    A node is retained iff its hyperbolic radius is <= R; only retained
    nodes are expanded, which is sound pruning because d(0, w) >= d(0, F(w))
    for centered F.  Points coinciding within `dedup_tol` across the whole
    tree are merged (set semantics; collisions are logged).  The base point
    itself is generation 0.  Exceeding `node_budget` explored nodes raises
    BudgetError carrying the partial tree.
    """
    _require_blaschke(F, reject_rotation=True)
    z, _ = _coerce_point(z)
    z = complex(z)
    if z == 0:
        raise PreconditionError("base point must be nonzero")
    if not R > 0:
        raise PreconditionError("cutoff radius must be positive")

    tree = PreimageTree(model=F, base=z, cutoff=float(R))
    seen = _DedupGrid(dedup_tol)
    seen.add_or_find(z)
    base_radius = origin_distance(abs(z))
    tree.explored = 1
    if base_radius > R:
        tree.pruned_from = 0
        return tree
    tree.points.append(np.array([z], dtype=complex))
    tree.parents.append(np.array([-1], dtype=np.int64))
    tree.branches.append(np.array([0], dtype=np.int64))

    d = F.degree
    warm = None
    gen = 0
    while len(tree.points[gen]) > 0:
        if max_generation is not None and gen >= max_generation:
            break
        parents = tree.points[gen]
        m = len(parents)
        tree.explored += m * d
        if tree.explored > node_budget:
            raise BudgetError(
                f"node budget {node_budget} exceeded at generation {gen + 1}",
                partial=tree)
        roots = preimages_of_batch(F, parents, warm=warm)
        # Children sit farther out; push the sibling constellation outward
        # to warm-start the next generation.
        mods = np.abs(roots)
        warm = np.where(mods > 0, roots * mods ** (1.0 / d - 1.0), roots)

        radii = origin_distance(np.minimum(np.abs(roots), 1.0 - 1e-17))
        keep_pts, keep_par, keep_br = [], [], []
        pruned = False
        for i in range(m):
            for j in range(d):
                w = complex(roots[i, j])
                if radii[i, j] > R:
                    pruned = True
                    continue
                if seen.add_or_find(w):
                    tree.collisions += 1
                    pruned = True
                    log.info("merged coincident preimage %r at generation %d",
                             w, gen + 1)
                    continue
                keep_pts.append(w)
                keep_par.append(i)
                keep_br.append(j)
        if pruned and tree.pruned_from is None:
            tree.pruned_from = gen + 1
        if not keep_pts:
            break
        tree.points.append(np.array(keep_pts, dtype=complex))
        tree.parents.append(np.array(keep_par, dtype=np.int64))
        tree.branches.append(np.array(keep_br, dtype=np.int64))
        # Each kept child inherits its own sibling constellation as the
        # warm start for expanding it.
        warm = warm[np.array(keep_par, dtype=np.int64)]
        gen += 1
    return tree


def verify_sum_of_heights(tree: PreimageTree, generation: int) -> float:
    """|sum of heights over a fully expanded generation - log(1/|z|)|.

    Requires that no ancestor of the generation was pruned (build the tree
    with R = inf and a max_generation cap).
    """
    if generation < 0 or generation >= tree.generations:
        raise PreconditionError(f"generation {generation} not present in tree")
    if tree.pruned_from is not None and tree.pruned_from <= generation:
        raise PreconditionError(
            f"generation {generation} was pruned (from {tree.pruned_from}); "
            "re-enumerate with an infinite radius cutoff")
    total = float(np.sum(tree.heights(generation)))
    return abs(total - float(np.log(1.0 / abs(tree.base))))
