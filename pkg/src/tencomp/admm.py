"""ADMM solver for entry-sampling tensor completion with a per-mode
spectral penalty.

Solves ``min_W |y - I(W)|^2 + gamma * sum_n Psi(W_(n))`` where ``I``
samples entries and ``Psi`` applies the configured gauge to the spectrum
of each matricization.  The tensor is split into one auxiliary tensor per
mode; each outer iteration takes a closed-form data step in ``W``, a
spectral prox step per mode, and a multiplier step.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .gauge import ENVELOPE, L1, GaugeSpec, SubgradConfig, prox_envelope, soft_threshold
from .spectral import NumericFailure, spectral_prox, svd_thin
from .tensor import fold, frobenius_norm, inner, unfold

__all__ = [
    "ObservationSet",
    "AdmmConfig",
    "AdmmState",
    "SolverReport",
    "apply_sampling",
    "scatter",
    "update_w",
    "update_b",
    "update_a",
    "w_objective",
    "solve",
]


@dataclass(frozen=True)
class ObservationSet:
    """Sampled entries of a tensor: 1-based multi-indices and their values.

    Duplicate indices are rejected; the closed-form data step assumes at
    most one measurement per entry.
    """

    indices: np.ndarray  # (m, N) int64, 1-based
    values: np.ndarray  # (m,)
    shape: tuple[int, ...]

    def __post_init__(self):
        idx = np.atleast_2d(np.asarray(self.indices, dtype=np.int64))
        vals = np.asarray(self.values, dtype=np.float64).ravel()
        shape = tuple(int(p) for p in self.shape)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "shape", shape)
        if idx.shape[0] != vals.size:
            raise ValueError(f"{idx.shape[0]} indices but {vals.size} values")
        if vals.size < 1:
            raise ValueError("at least one observation is required")
        if idx.shape[1] != len(shape):
            raise ValueError(f"indices have {idx.shape[1]} coordinates, shape has {len(shape)}")
        if np.any(idx < 1) or np.any(idx > np.asarray(shape)):
            raise ValueError("observation index out of bounds")
        flat = np.ravel_multi_index(tuple((idx - 1).T), dims=shape, order="F")
        if np.unique(flat).size != flat.size:
            raise ValueError("duplicate observation indices")
        object.__setattr__(self, "_axis_indices", tuple((idx - 1).T))

    @property
    def m(self) -> int:
        return self.values.size

    @classmethod
    def from_tensor(cls, t: np.ndarray, indices) -> "ObservationSet":
        """Observations at ``indices`` (1-based) with values read off ``t``."""
        t = np.asarray(t, dtype=np.float64)
        idx = np.atleast_2d(np.asarray(indices, dtype=np.int64))
        values = t[tuple((idx - 1).T)]
        return cls(indices=idx, values=values, shape=t.shape)


def apply_sampling(t, obs: ObservationSet) -> np.ndarray:
    """Entries of ``t`` at the observed indices, in observation order."""
    t = np.asarray(t, dtype=np.float64)
    if t.shape != obs.shape:
        raise ValueError(f"shape mismatch {t.shape} vs {obs.shape}")
    return t[obs._axis_indices]


def scatter(values, obs: ObservationSet) -> np.ndarray:
    """Adjoint of :func:`apply_sampling`: place ``values`` at the observed
    indices of an otherwise-zero tensor."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size != obs.m:
        raise ValueError(f"{values.size} values for {obs.m} observations")
    out = np.zeros(obs.shape)
    out[obs._axis_indices] = values
    return out


@dataclass(frozen=True)
class AdmmConfig:
    """Solver settings: regularization weight ``gamma``, penalty parameter
    ``beta`` (fixed, no adaptive scheme), iteration cap and relative primal
    tolerance, plus the gauge and the inner subgradient settings."""

    gamma: float
    gauge: GaugeSpec
    beta: float = 1.0
    max_outer_iters: int = 500
    primal_tol: float = 1e-5
    subgrad: SubgradConfig = field(default_factory=SubgradConfig)

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if not self.primal_tol > 0:
            raise ValueError("primal_tol must be positive")


@dataclass
class AdmmState:
    """One solver iterate: the tensor ``w``, per-mode auxiliaries ``b`` and
    multipliers ``a``, iteration counter and current relative primal
    residual ``max_n |w - b_n| / max(1, |w|)``."""

    w: np.ndarray
    b: list[np.ndarray]
    a: list[np.ndarray]
    iteration: int = 0
    primal_residual: float = float("inf")

    @classmethod
    def zeros(cls, shape) -> "AdmmState":
        shape = tuple(int(p) for p in shape)
        n = len(shape)
        return cls(
            w=np.zeros(shape),
            b=[np.zeros(shape) for _ in range(n)],
            a=[np.zeros(shape) for _ in range(n)],
        )


@dataclass
class SolverReport:
    """Per-iteration residuals and objective surrogate, timing, and the
    hyperparameters of the run.  ``metrics`` collects whatever final
    evaluation the caller attaches (e.g. RMSE values)."""

    gamma: float
    beta: float
    gauge_kind: str
    alpha: float | None
    iterations: int = 0
    converged: bool = False
    wall_time_s: float = 0.0
    primal_residuals: list[float] = field(default_factory=list)
    dual_residuals: list[float] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)
    elapsed_s: list[float] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)


def _vector_prox(cfg: AdmmConfig):
    if cfg.gauge.kind == L1:
        thr = 1.0 / cfg.beta
        return lambda s: soft_threshold(s, thr)
    alpha = cfg.gauge.alpha
    return lambda s: prox_envelope(s, alpha, cfg.beta, cfg.subgrad)


def update_w(state: AdmmState, obs: ObservationSet, cfg: AdmmConfig) -> np.ndarray:
    """Closed-form minimizer of the augmented Lagrangian in ``w``.

    Entry sampling makes the data term diagonal: every entry is the
    average ``sum_n (beta*b_n + a_n) / (N*beta)``, with observed entries
    additionally pulled toward their measurement by weight ``2/gamma``.
    """
    n_modes = len(obs.shape)
    s = np.zeros(obs.shape)
    for b_n, a_n in zip(state.b, state.a):
        s += cfg.beta * b_n + a_n
    w = s / (n_modes * cfg.beta)
    pull = 2.0 / cfg.gamma
    w[obs._axis_indices] = (s[obs._axis_indices] + pull * obs.values) / (
        n_modes * cfg.beta + pull
    )
    return w


def update_b(state: AdmmState, cfg: AdmmConfig) -> list[np.ndarray]:
    """Per-mode spectral prox step: for each mode ``n``, apply the gauge
    prox at weight ``1/beta`` to the spectrum of ``unfold(w - a_n/beta, n)``
    and fold back."""
    shape = state.w.shape
    vector_prox = _vector_prox(cfg)
    out = []
    for n in range(1, len(shape) + 1):
        x = unfold(state.w, n) - unfold(state.a[n - 1], n) / cfg.beta
        try:
            m = spectral_prox(x, vector_prox)
        except NumericFailure as exc:
            raise NumericFailure(f"mode {n}: {exc}") from exc
        out.append(fold(m, n, shape))
    return out


def update_a(state: AdmmState, cfg: AdmmConfig) -> list[np.ndarray]:
    """Multiplier step ``a_n <- a_n - beta * (w - b_n)``."""
    return [a_n - cfg.beta * (state.w - b_n) for a_n, b_n in zip(state.a, state.b)]


def w_objective(w, b, a, obs: ObservationSet, cfg: AdmmConfig) -> float:
    """The terms of the augmented Lagrangian that depend on ``w``:
    ``|y - I(w)|^2 / gamma + sum_n (-<a_n, w - b_n> + beta/2 * |w - b_n|^2)``.

    The spectral penalty terms are constant in ``w`` and omitted, so this
    is the function the data step minimizes.
    """
    r = apply_sampling(w, obs) - obs.values
    val = float(np.dot(r, r)) / cfg.gamma
    for b_n, a_n in zip(b, a):
        d = w - b_n
        val += -inner(a_n, d) + 0.5 * cfg.beta * inner(d, d)
    return val


def _objective_surrogate(w, obs: ObservationSet, cfg: AdmmConfig) -> float:
    # data fit, plus the exact trace-norm penalty when it is computable
    r = apply_sampling(w, obs) - obs.values
    val = float(np.dot(r, r))
    if cfg.gauge.kind == L1:
        for n in range(1, len(obs.shape) + 1):
            val += cfg.gamma * float(svd_thin(unfold(w, n)).sigma.sum())
    return val


def solve(obs: ObservationSet, cfg: AdmmConfig) -> tuple[np.ndarray, SolverReport]:
    """Run ADMM from zero initialization until the relative primal residual
    drops below ``cfg.primal_tol`` or the iteration cap is reached.

    Returns the completed tensor and a report with per-iteration primal and
    dual residuals, the objective surrogate, and timing.  Non-finite
    iterates raise :class:`NumericFailure` with the report so far attached
    as a ``report`` attribute.
    """
    state = AdmmState.zeros(obs.shape)
    report = SolverReport(
        gamma=cfg.gamma,
        beta=cfg.beta,
        gauge_kind=cfg.gauge.kind,
        alpha=cfg.gauge.alpha,
    )
    start = time.perf_counter()
    for it in range(1, cfg.max_outer_iters + 1):
        state.w = update_w(state, obs, cfg)
        b_new = update_b(state, cfg)
        dual = cfg.beta * max(
            frobenius_norm(bn - bo) for bn, bo in zip(b_new, state.b)
        )
        state.b = b_new
        state.a = update_a(state, cfg)
        primal = max(frobenius_norm(state.w - b_n) for b_n in state.b)
        primal /= max(1.0, frobenius_norm(state.w))
        state.iteration = it
        state.primal_residual = primal
        if not np.isfinite(primal):
            report.iterations = it
            report.wall_time_s = time.perf_counter() - start
            err = NumericFailure(f"non-finite iterate at iteration {it}")
            err.report = report
            raise err
        report.primal_residuals.append(primal)
        report.dual_residuals.append(dual)
        report.objectives.append(_objective_surrogate(state.w, obs, cfg))
        report.elapsed_s.append(time.perf_counter() - start)
        if primal <= cfg.primal_tol:
            report.converged = True
            break
    report.iterations = state.iteration
    report.wall_time_s = time.perf_counter() - start
    return state.w, report
