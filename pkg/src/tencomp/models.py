"""Reference quantities and data generators: trace norm and multilinear
rank of a tensor, the ball-radius estimate used by the envelope gauge, a
seeded low-multilinear-rank synthetic generator, and the constructor of
tensors on which the envelope regularizer strictly dominates the trace
norm."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .admm import ObservationSet, apply_sampling
from .spectral import svd_thin
from .tensor import fold, frobenius_norm, unfold

__all__ = [
    "tensor_trace_norm",
    "tensor_rank",
    "estimate_alpha",
    "TuckerSpec",
    "generate_tucker",
    "CounterexampleSpec",
    "build_counterexample",
    "rmse",
    "observation_rmse",
]


def tensor_trace_norm(t) -> float:
    """Average over modes of the nuclear norm of each matricization."""
    t = np.asarray(t, dtype=np.float64)
    total = 0.0
    for n in range(1, t.ndim + 1):
        total += float(svd_thin(unfold(t, n)).sigma.sum())
    return total / t.ndim


def tensor_rank(t, rank_tol: float = 1e-8) -> Fraction:
    """Average over modes of the numerical rank of each matricization.

    Singular values above ``rank_tol`` times the mode's largest singular
    value count toward the rank.  Returned as an exact fraction.
    """
    t = np.asarray(t, dtype=np.float64)
    total = 0
    for n in range(1, t.ndim + 1):
        sigma = svd_thin(unfold(t, n)).sigma
        if sigma.size and sigma[0] > 0:
            total += int(np.count_nonzero(sigma > rank_tol * sigma[0]))
    return Fraction(total, t.ndim)


def estimate_alpha(obs: ObservationSet) -> float:
    """Estimate of the Frobenius norm of the underlying tensor from the
    observed entries alone.

    Treats each unobserved entry as a draw from a Gaussian with the
    observed sample's mean and (population) variance:
    ``sqrt(|w|^2 + (mean(w)^2 + var(w)) * (prod(p) - m))``.
    Coincides with the exact norm when every entry is observed.
    """
    w = obs.values
    total = int(np.prod(obs.shape))
    fill = (float(np.mean(w)) ** 2 + float(np.var(w))) * (total - obs.m)
    return float(np.sqrt(np.dot(w, w) + fill))


@dataclass(frozen=True)
class TuckerSpec:
    """Synthetic instance: a random core of size ``core_ranks`` contracted
    with per-mode Gaussian factors, standardized, plus entrywise Gaussian
    noise of variance ``noise_variance``."""

    shape: tuple[int, ...]
    core_ranks: tuple[int, ...]
    noise_variance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(p) for p in self.shape))
        object.__setattr__(self, "core_ranks", tuple(int(r) for r in self.core_ranks))
        if len(self.core_ranks) != len(self.shape):
            raise ValueError("one core rank per mode is required")
        if any(r < 1 or r > p for r, p in zip(self.core_ranks, self.shape)):
            raise ValueError(f"core ranks {self.core_ranks} must satisfy 1 <= r_n <= p_n")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")


def generate_tucker(spec: TuckerSpec) -> tuple[np.ndarray, np.ndarray]:
    """Draw the synthetic instance described by ``spec``.

    Returns ``(ground_truth, noiseless)``: the noiseless tensor is the
    standardized (zero mean, unit std over all entries) contraction of the
    seeded core and factors; the ground truth adds the noise.
    """
    rng = np.random.default_rng(spec.seed)
    t = rng.standard_normal(spec.core_ranks)
    for n, (p, r) in enumerate(zip(spec.shape, spec.core_ranks), start=1):
        factor = rng.standard_normal((p, r))
        new_shape = t.shape[: n - 1] + (p,) + t.shape[n:]
        t = fold(factor @ unfold(t, n), n, new_shape)
    noiseless = (t - t.mean()) / t.std()
    noise = rng.normal(0.0, np.sqrt(spec.noise_variance), spec.shape)
    return noiseless + noise, noiseless


@dataclass(frozen=True)
class CounterexampleSpec:
    """Shape and seed for the strict-gap construction; needs order >= 3 and
    at least two distinct dimensions."""

    shape: tuple[int, ...]
    seed: int = 0

    def __post_init__(self):
        shape = tuple(int(p) for p in self.shape)
        object.__setattr__(self, "shape", shape)
        if len(shape) < 3:
            raise ValueError("the construction requires an order-3 or higher tensor")
        if any(p < 2 for p in shape):
            raise ValueError("all dimensions must be >= 2")
        if min(shape) == max(shape):
            raise ValueError("the construction requires dimensions that are not all equal")


def _diag_vectors(q: int, n_modes: int) -> np.ndarray:
    # right singular vectors of the last-mode matricization, as the columns
    # of a (q^(n_modes-1) x q+1) matrix over the remaining multi-indices in
    # mode-1-fastest order: q+1 sparse mutually orthonormal vectors
    rest = (q,) * (n_modes - 1)
    v = np.zeros((int(np.prod(rest)), q + 1))
    for k in range(1, q + 1):
        pos = np.ravel_multi_index(tuple([k - 1] * (n_modes - 1)), dims=rest, order="F")
        v[pos, k - 1] = 1.0
    for i1 in range(1, q + 1):
        t = (i1 % q) + 1
        pos = np.ravel_multi_index(tuple([i1 - 1] + [t - 1] * (n_modes - 2)), dims=rest, order="F")
        v[pos, q] = 1.0 / np.sqrt(q)
    return v


def build_counterexample(spec: CounterexampleSpec) -> np.ndarray:
    """A tensor with Euclidean norm ``sqrt(p_min)``, every matricization of
    spectral norm at most one, and unequal mode ranks.

    On such tensors the envelope regularizer at ``alpha = sqrt(p_min)``
    equals the rank average and strictly exceeds the trace norm.  The core
    construction lives on the shape ``(q, ..., q, q+1)`` with
    ``q = p_min``: the last-mode matricization is assembled from ``q+1``
    equal singular values ``sqrt(q/(q+1))``, seeded random orthonormal left
    factors, and fixed sparse right factors.  Other shapes embed it with
    zero padding.
    """
    dims = np.asarray(spec.shape)
    order = np.argsort(dims, kind="stable")
    sorted_dims = tuple(int(p) for p in dims[order])
    n_modes = len(sorted_dims)
    q = sorted_dims[0]

    rng = np.random.default_rng(spec.seed)
    u, _ = np.linalg.qr(rng.standard_normal((q + 1, q + 1)))
    sigma = np.sqrt(q / (q + 1.0))
    v = _diag_vectors(q, n_modes)
    core_shape = (q,) * (n_modes - 1) + (q + 1,)
    core = fold(sigma * (u @ v.T), n_modes, core_shape)

    t = np.zeros(sorted_dims)
    t[tuple(slice(0, s) for s in core_shape)] = core
    inverse = np.empty(n_modes, dtype=np.int64)
    inverse[order] = np.arange(n_modes)
    return np.transpose(t, axes=inverse)


def rmse(pred, truth, mask: ObservationSet) -> float:
    """Root mean squared difference between two tensors over the indices
    of ``mask``."""
    return float(
        np.sqrt(np.mean((apply_sampling(pred, mask) - apply_sampling(truth, mask)) ** 2))
    )


def observation_rmse(t, obs: ObservationSet) -> float:
    """Root mean squared difference between a tensor and observed values."""
    return float(np.sqrt(np.mean((apply_sampling(t, obs) - obs.values) ** 2)))
