"""Derivative-free coordinate ascent over complex coefficient vectors.

Used by the adversarial certificate searches (usd ratios, RIP constants,
incoherence and unconditionality constants). One coordinate at a time, the
coefficient c_i = rho * e^{i theta} is optimized by a 16-point phase sweep,
each phase carrying its own golden-section search on the modulus.
"""

from __future__ import annotations

import numpy as np

N_PHASES = 16
GOLDEN_STEPS = 24
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def coordinate_ascent(coef, maps, score, cycles=3, active=None):
    """Maximize ``score`` by cycling over coordinates of ``coef``.

    Parameters
    ----------
    coef : complex array (n,)
        Starting point; not modified.
    maps : list of complex arrays (rows_k, n)
        Linear images L_k c that ``score`` needs. They are updated
        incrementally when a coordinate changes.
    score : callable
        ``score(coefs, images)`` with ``coefs`` of shape (B, n) and ``images``
        a list of (B, rows_k) arrays; returns (B,) real values.
    cycles : int
        Number of passes over the coordinates.
    active : sequence of int, optional
        Coordinates to optimize (default: all).

    Returns
    -------
    (coef, value) with the best point found. The value never decreases
    relative to the starting point.
    """
    c = np.array(coef, dtype=complex)
    n = c.size
    images = [m @ c for m in maps]
    best = float(score(c[None, :], [im[None, :] for im in images])[0])
    coords = range(n) if active is None else list(active)
    phases = np.exp(2j * np.pi * np.arange(N_PHASES) / N_PHASES)
    for _ in range(cycles):
        for i in coords:
            cols = [m[:, i] for m in maps]
            hi = 2.0 * max(np.abs(c).max(), 1e-300)
            cur = c[i]

            def evaluate(z):
                coefs = np.repeat(c[None, :], z.size, axis=0)
                coefs[:, i] = z
                delta = z - cur
                ims = [im[None, :] + delta[:, None] * col[None, :] for im, col in zip(images, cols)]
                return score(coefs, ims)

            a = np.zeros(N_PHASES)
            b = np.full(N_PHASES, hi)
            x1 = b - _INVPHI * (b - a)
            x2 = a + _INVPHI * (b - a)
            f1 = evaluate(x1 * phases)
            f2 = evaluate(x2 * phases)
            for _ in range(GOLDEN_STEPS):
                left = f1 >= f2
                b = np.where(left, x2, b)
                a = np.where(left, a, x1)
                nx1 = b - _INVPHI * (b - a)
                nx2 = a + _INVPHI * (b - a)
                # reuse the surviving interior point, evaluate only the new one
                x1_new = np.where(left, nx1, x2)
                x2_new = np.where(left, x1, nx2)
                f1_old, f2_old = f1, f2
                fresh = evaluate(np.where(left, x1_new, x2_new) * phases)
                f1 = np.where(left, fresh, f2_old)
                f2 = np.where(left, f1_old, fresh)
                x1, x2 = x1_new, x2_new
            cands = np.concatenate([x1 * phases, x2 * phases, [0.0 + 0j]])
            vals = np.concatenate([f1, f2, evaluate(np.array([0j]))])
            j = int(np.argmax(vals))
            if vals[j] > best:
                trial = c.copy()
                trial[i] = cands[j]
                # recompute exactly; incremental images drift when terms cancel
                trial_images = [m @ trial for m in maps]
                exact = float(score(trial[None, :], [im[None, :] for im in trial_images])[0])
                if exact > best:
                    c, images, best = trial, trial_images, exact
    return c, best
