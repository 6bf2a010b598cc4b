"""Thin SVD of dense matrices and lifting of vector proximity operators to
matrix (spectral) proximity operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NumericFailure", "SvdFactors", "svd_thin", "spectral_prox", "spectral_norm"]


class NumericFailure(RuntimeError):
    """A numerical routine failed to converge or produced non-finite values."""


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``X = u @ diag(sigma) @ v.T``.

    ``u`` is p x r and ``v`` is q x r with orthonormal columns,
    r = min(p, q); ``sigma`` is nonnegative and sorted non-increasing.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def svd_thin(x) -> SvdFactors:
    """Thin singular value decomposition of a dense matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={x.ndim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("SVD input contains non-finite entries")
    try:
        u, s, vt = np.linalg.svd(x, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(
            f"SVD did not converge on a {x.shape[0]}x{x.shape[1]} matrix: {exc}"
        ) from exc
    return SvdFactors(u=u, sigma=s, v=vt.T)


def spectral_prox(x, vector_prox) -> np.ndarray:
    """Apply a vector proximity operator to the spectrum of ``x``.

    Returns ``u @ diag(vector_prox(sigma)) @ v.T`` where ``(u, sigma, v)``
    is the thin SVD of ``x``.  ``vector_prox`` receives the sorted
    nonnegative spectrum and must return a vector of the same length.
    A zero matrix maps to the zero matrix without factorization.
    """
    x = np.asarray(x, dtype=np.float64)
    if not x.any():
        return np.zeros_like(x)
    f = svd_thin(x)
    v = np.asarray(vector_prox(f.sigma), dtype=np.float64)
    if v.shape != f.sigma.shape:
        raise ValueError(
            f"vector_prox returned {v.shape[0] if v.ndim == 1 else v.shape} values "
            f"for a spectrum of length {f.sigma.size}"
        )
    return (f.u * v) @ f.v.T


def spectral_norm(x) -> float:
    """Largest singular value of ``x``."""
    s = svd_thin(x).sigma
    return float(s[0]) if s.size else 0.0
