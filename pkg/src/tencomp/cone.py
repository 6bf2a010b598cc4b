"""Projections onto the monotone nonnegative cone of sorted vectors
``{v : v_1 >= v_2 >= ... >= v_d >= 0}``.

``approx_project`` is the fast left-to-right sweep.  It is not the exact
Euclidean projection, but it satisfies the contract that makes projected
subgradient steps sound: ``|approx_project(v) - z| <= |v - z|`` for every
``z`` already in the cone.  ``exact_project`` (pooled-averages isotonic
regression plus clamping) is the exact projection, kept as an independent
oracle for tests and verification.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "in_cone",
    "project_nonneg",
    "approx_project",
    "exact_project",
    "verify_approx_contract",
]


def in_cone(v) -> bool:
    """True iff ``v`` is non-increasing with nonnegative entries (exact
    comparisons, no tolerance)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        return True
    return bool(np.all(v[:-1] >= v[1:]) and v[-1] >= 0.0)


def project_nonneg(v) -> np.ndarray:
    """Componentwise clamp at zero (exact projection onto the orthant)."""
    return np.maximum(np.asarray(v, dtype=np.float64), 0.0)


@njit(cache=True)
def _sweep(v):
    # Left-to-right pass: entering step a, v[0..a] is sorted; repair the
    # possible violation v[a] < v[a+1] by pooling or by raising the tied
    # block to its left neighbor and pushing the excess into v[a+1].
    d = v.shape[0]
    for a in range(d - 1):
        while v[a] < v[a + 1]:
            # size of the tied block ending at a (ties are exact: they are
            # created by this function's own assignments)
            j = 1
            while j <= a and v[a - j] == v[a]:
                j += 1
            pooled = v[a] + (v[a + 1] - v[a]) / (j + 1)
            if j > a or v[a - j] >= pooled:
                # no left neighbor, or the neighbor clears the pooled value:
                # average the block with the violator
                for i in range(a - j + 1, a + 2):
                    v[i] = pooled
            else:
                # raise the block to the neighbor, conserve the total by
                # draining the excess from v[a+1], then re-examine
                v[a + 1] -= (v[a - j] - v[a]) * j
                for i in range(a - j + 1, a + 1):
                    v[i] = v[a - j]
    return v


def approx_project(v) -> np.ndarray:
    """Approximate projection onto the cone: clamp negatives, then sweep.

    The output is always in the cone and never farther than ``v`` from any
    cone point.
    """
    w = project_nonneg(v)
    _sweep(w)
    return w


def exact_project(v) -> np.ndarray:
    """Exact Euclidean projection onto the cone.

    Non-increasing isotonic regression by pool-adjacent-violators, then
    clamping at zero (clamping the monotone fit is the exact projection
    onto the intersection with the orthant).
    """
    v = np.asarray(v, dtype=np.float64)
    means = []
    counts = []
    for x in v:
        means.append(x)
        counts.append(1)
        while len(means) > 1 and means[-2] < means[-1]:
            m2, c2 = means.pop(), counts.pop()
            m1, c1 = means.pop(), counts.pop()
            means.append((m1 * c1 + m2 * c2) / (c1 + c2))
            counts.append(c1 + c2)
    out = np.repeat(means, counts)
    return np.maximum(out, 0.0)


def verify_approx_contract(v, samples: int, seed: int = 0) -> bool:
    """Check ``|approx_project(v) - z| <= |v - z|`` (tolerance 1e-10) on
    ``samples`` random cone points plus ``exact_project(v)`` and zero."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    v = np.asarray(v, dtype=np.float64)
    p = approx_project(v)
    rng = np.random.default_rng(seed)
    z = np.abs(rng.standard_normal((samples, v.size)))
    z.sort(axis=1)
    z = z[:, ::-1]
    z = np.vstack([z, exact_project(v), np.zeros(v.size)])
    lhs = np.linalg.norm(p - z, axis=1)
    rhs = np.linalg.norm(v - z, axis=1)
    return bool(np.all(lhs <= rhs + 1e-10))
