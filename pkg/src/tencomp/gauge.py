"""Gauge-level penalty machinery for spectral regularization.

Two gauges drive the solver: the l1 norm of the spectrum (whose prox is
soft thresholding and whose tensor-level sum is the trace norm) and the
convex envelope of cardinality on the l2 ball of radius ``alpha``.  The
envelope itself has no closed form, but its prox is reachable through its
conjugate:

* ``omega_star(s, alpha) = max_r (alpha * |s_1:r (sorted)| - r)`` is the
  conjugate of cardinality restricted to the ball;
* ``prox_conjugate`` minimizes ``h(w) = 0.5*|w - y|^2 + beta *
  omega_star(w, alpha)`` over the monotone nonnegative cone by projected
  subgradient with step ``tau0/sqrt(t)``, keeping the best iterate;
* ``prox_envelope`` recovers the envelope prox by Moreau decomposition:
  ``prox(x) = x - prox_conjugate(beta * x) / beta``.

``envelope_lower_bound`` evaluates the certified lower bound
``k*<x, x> - omega_star(k*x, alpha)`` on the envelope at ``x``; on the
sphere of radius ``alpha`` it converges to the cardinality of ``x`` as
``k`` grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cone import _sweep

__all__ = [
    "GaugeSpec",
    "SubgradConfig",
    "omega_star",
    "argmax_k",
    "subgradient_h",
    "prox_objective",
    "prox_conjugate",
    "prox_envelope",
    "soft_threshold",
    "envelope_lower_bound",
]

L1 = "l1"
ENVELOPE = "envelope"


@dataclass(frozen=True)
class GaugeSpec:
    """Which gauge drives the spectral penalty.

    ``kind`` is ``"l1"`` (spectrum l1 norm, i.e. trace-norm regularization)
    or ``"envelope"`` (cardinality envelope on the ball of radius
    ``alpha``); ``alpha`` is required for the envelope.
    """

    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in (L1, ENVELOPE):
            raise ValueError(f"unknown gauge kind {self.kind!r}")
        if self.kind == ENVELOPE:
            if self.alpha is None or not self.alpha > 0:
                raise ValueError("envelope gauge requires alpha > 0")

    @classmethod
    def l1(cls) -> "GaugeSpec":
        return cls(kind=L1)

    @classmethod
    def envelope(cls, alpha: float) -> "GaugeSpec":
        return cls(kind=ENVELOPE, alpha=float(alpha))


@dataclass(frozen=True)
class SubgradConfig:
    """Projected-subgradient settings: initial step ``tau0`` (decayed as
    ``tau0/sqrt(t)``), stop after ``stall_limit`` iterations without
    improving the best iterate, hard cap ``max_iters``."""

    tau0: float = 0.5
    stall_limit: int = 1000
    max_iters: int = 50_000

    def __post_init__(self):
        if not self.tau0 > 0:
            raise ValueError("tau0 must be positive")
        if not 1 <= self.stall_limit <= self.max_iters:
            raise ValueError("need 1 <= stall_limit <= max_iters")


def omega_star(s, alpha: float) -> float:
    """Conjugate of cardinality on the l2 ball of radius ``alpha``:
    ``max_r (alpha * |s_1:r| - r)`` with entries reordered non-increasing
    in absolute value; the r = 0 term makes the result nonnegative."""
    s = np.asarray(s, dtype=np.float64).ravel()
    if s.size == 0:
        return 0.0
    a = np.sort(np.abs(s))[::-1]
    prefix = np.sqrt(np.cumsum(a * a))
    vals = alpha * prefix - np.arange(1, s.size + 1)
    return float(max(0.0, vals.max()))


@njit(cache=True)
def _best_prefix(w, alpha):
    # smallest maximizer of alpha*||w_1:r|| - r over r in 0..d, and the
    # prefix norm at the maximizer
    best_val = 0.0
    best_r = 0
    best_norm = 0.0
    acc = 0.0
    for r in range(1, w.shape[0] + 1):
        acc += w[r - 1] * w[r - 1]
        val = alpha * math.sqrt(acc) - r
        if val > best_val:
            best_val = val
            best_r = r
            best_norm = math.sqrt(acc)
    return best_r, best_norm


@njit(cache=True)
def _h_value(w, y, alpha, beta):
    d = w.shape[0]
    q = 0.0
    for i in range(d):
        diff = w[i] - y[i]
        q += diff * diff
    best = 0.0
    acc = 0.0
    for r in range(1, d + 1):
        acc += w[r - 1] * w[r - 1]
        val = alpha * math.sqrt(acc) - r
        if val > best:
            best = val
    return 0.5 * q + beta * best


@njit(cache=True)
def _prox_conjugate_loop(y, alpha, beta, tau0, stall_limit, max_iters):
    d = y.shape[0]
    w = np.maximum(y, 0.0)
    _sweep(w)
    w_hat = w.copy()
    h_hat = _h_value(w, y, alpha, beta)
    stall = 0
    t = 0
    g = np.empty(d)
    while t < max_iters:
        t += 1
        tau = tau0 / math.sqrt(t)
        k, nk = _best_prefix(w, alpha)
        for i in range(d):
            g[i] = w[i] - y[i]
        if k > 0 and nk > 0.0:
            scale = alpha * beta / nk
            for i in range(k):
                g[i] += scale * w[i]
        nxt = np.empty(d)
        for i in range(d):
            step = w[i] - tau * g[i]
            nxt[i] = step if step > 0.0 else 0.0
        _sweep(nxt)
        w = nxt
        h_w = _h_value(w, y, alpha, beta)
        if h_w < h_hat:
            h_hat = h_w
            w_hat[:] = w
            stall = 0
        else:
            stall += 1
            if stall >= stall_limit:
                break
    return w_hat, t


def argmax_k(w, alpha: float) -> int:
    """Smallest maximizer of ``alpha * |w_1:r| - r`` over r in 0..d for a
    sorted nonnegative ``w``."""
    w = np.asarray(w, dtype=np.float64).ravel()
    k, _ = _best_prefix(w, alpha)
    return int(k)


def subgradient_h(w, y, alpha: float, beta: float) -> np.ndarray:
    """A subgradient of ``h(w) = 0.5*|w - y|^2 + beta * max_r(alpha *
    |w_1:r| - r)`` at a cone point ``w``.

    Entries up to the maximizing prefix k pick up the extra term
    ``alpha*beta*w_i / |w_1:k|``; if the prefix norm vanishes the k = 0
    branch applies and the subgradient is plain ``w - y``.
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if w.shape != y.shape:
        raise ValueError(f"shape mismatch {w.shape} vs {y.shape}")
    k, nk = _best_prefix(w, alpha)
    g = w - y
    if k > 0 and nk > 0.0:
        g[:k] += (alpha * beta / nk) * w[:k]
    return g


def prox_objective(w, y, alpha: float, beta: float) -> float:
    """Value of the prox subproblem objective ``h`` at ``w``."""
    w = np.asarray(w, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    d = w - y
    return 0.5 * float(np.dot(d, d)) + beta * omega_star(w, alpha)


def prox_conjugate(
    y,
    alpha: float,
    beta: float,
    cfg: SubgradConfig | None = None,
    return_iterations: bool = False,
):
    """Prox of ``beta * omega_star(., alpha)`` at ``y`` by projected
    subgradient over the monotone nonnegative cone.

    Starts from the approximate projection of ``y``, tracks the best
    iterate by objective value, and stops once the best has not improved
    for ``cfg.stall_limit`` iterations (or at ``cfg.max_iters``).  With
    ``return_iterations`` the number of iterations run is also returned.
    """
    if cfg is None:
        cfg = SubgradConfig()
    y = np.asarray(y, dtype=np.float64).ravel()
    w, iters = _prox_conjugate_loop(
        y, float(alpha), float(beta), cfg.tau0, cfg.stall_limit, cfg.max_iters
    )
    if return_iterations:
        return w, int(iters)
    return w


def prox_envelope(x, alpha: float, beta: float, cfg: SubgradConfig | None = None) -> np.ndarray:
    """Prox of the scaled cardinality envelope, weight ``1/beta``, at a
    sorted nonnegative ``x`` (a spectrum), via Moreau decomposition:
    ``x - prox_conjugate(beta * x, alpha, beta) / beta``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    w = prox_conjugate(beta * x, alpha, beta, cfg)
    return x - w / beta


def soft_threshold(sigma, threshold: float) -> np.ndarray:
    """Prox of the l1 norm on a nonnegative vector: positive part of
    ``sigma - threshold``."""
    return np.maximum(np.asarray(sigma, dtype=np.float64) - threshold, 0.0)


def envelope_lower_bound(x, alpha: float, k: float) -> float:
    """Certified lower bound ``k*<x, x> - omega_star(k*x, alpha)`` on the
    cardinality envelope at ``x``; tight on the radius-``alpha`` sphere for
    large ``k``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    return float(k * np.dot(x, x) - omega_star(k * x, alpha))
