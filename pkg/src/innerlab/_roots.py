"""Batched polynomial root finding for preimage solves.

Aberth-Ehrlich simultaneous iteration, vectorized across many polynomials
of the same degree, with optional warm starts; rows that fail to converge
fall back to companion-matrix eigenvalues.  Coefficients are lowest-degree
first.  Deterministic: fixed starting configuration, fixed iteration
policy, no randomness.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError


def _default_start(m: int, d: int) -> np.ndarray:
    """A fixed, symmetry-breaking ring of starting points."""
    k = np.arange(d)
    ring = 0.85 * np.exp(2j * np.pi * (k + 0.354) / d + 0.41j)
    return np.broadcast_to(ring, (m, d)).copy()


def _polyval_batch(coeffs, w):
    """Evaluate rows of lowest-first `coeffs` (m, n+1) at points (m, d)."""
    out = np.zeros_like(w)
    for c in coeffs[:, ::-1].T:
        out = out * w + c[:, None]
    return out


def aberth_batch(coeffs, warm=None, tol=5e-14, max_iter=60):
    """All roots of each row of `coeffs` (lowest-degree first).

    Returns an (m, d) complex array, d = degree.  `warm` optionally seeds
    the iteration (same shape).  Rows where Aberth stalls are re-solved by
    companion-matrix eigenvalues; a residual floor is enforced by the
    caller's Newton polish, not here.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    m, n1 = coeffs.shape
    d = n1 - 1
    if d < 1:
        raise NumericalError("cannot root a constant polynomial")
    lead = coeffs[:, -1]
    if np.any(np.abs(lead) < 1e-300):
        raise NumericalError("vanishing leading coefficient in batch")
    monic = coeffs / lead[:, None]
    dcoef = monic[:, 1:] * np.arange(1, d + 1)

    if d == 1:
        return (-monic[:, :1]).copy()

    if warm is not None and np.shape(warm) == (m, d) and np.all(np.isfinite(warm)):
        w = np.array(warm, dtype=complex)
    else:
        w = _default_start(m, d)

    scale = np.maximum(np.max(np.abs(monic), axis=1), 1.0)
    active = np.ones(m, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            wa = w[active]
            pa = _polyval_batch(monic[active], wa)
            dpa = _polyval_batch(dcoef[active], wa)
            newton = pa / dpa
            diff = wa[:, :, None] - wa[:, None, :]
            np.einsum("ijj->ij", diff)[:] = 1.0
            s = np.sum(1.0 / diff, axis=2) - 1.0
            step = newton / (1.0 - newton * s)
            bad = ~np.isfinite(step)
            if np.any(bad):
                step[bad] = newton[bad]
                step[~np.isfinite(step)] = 0.1
            wa = wa - step
            w[active] = wa
            res = np.max(np.abs(pa), axis=1) / scale[active]
            moved = np.max(np.abs(step), axis=1)
            done = (res < tol) | (moved < 1e-15)
            idx = np.flatnonzero(active)
            active[idx[done]] = False
            if not active.any():
                break

    if active.any():
        for i in np.flatnonzero(active):
            w[i] = np.sort_complex(np.roots(monic[i, ::-1]))
    return w
