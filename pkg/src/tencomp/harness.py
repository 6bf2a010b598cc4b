"""Experiment plumbing shared by the CLI and the scripts: observation file
I/O, deterministic train/validation/test splits, gamma sweeps with
validation-based selection, and the cube timing benchmark."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .admm import AdmmConfig, ObservationSet, SolverReport, solve
from .gauge import ENVELOPE, GaugeSpec, SubgradConfig
from .models import TuckerSpec, estimate_alpha, generate_tucker, observation_rmse

__all__ = [
    "DEFAULT_GAMMA_GRID",
    "read_observations",
    "write_observations",
    "SplitAssignment",
    "split_indices",
    "resolve_alpha",
    "make_config",
    "SweepResult",
    "run_sweep",
    "BenchRow",
    "run_bench",
]

# gamma grid 10^-7 .. 10^0
DEFAULT_GAMMA_GRID = tuple(10.0**j for j in range(-7, 1))


def write_observations(path, obs: ObservationSet) -> None:
    """Write an observation file: header ``N p_1 ... p_N``, then one CSV row
    ``i_1,...,i_N,value`` per observation (indices 1-based)."""
    with open(path, "w") as fh:
        fh.write(f"{len(obs.shape)} " + " ".join(str(p) for p in obs.shape) + "\n")
        for row, val in zip(obs.indices, obs.values):
            fh.write(",".join(str(int(i)) for i in row) + f",{val!r}\n")


def read_observations(path) -> ObservationSet:
    """Read an observation file written by :func:`write_observations`."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty observation file")
    head = lines[0].split()
    try:
        order = int(head[0])
        shape = tuple(int(p) for p in head[1:])
    except ValueError as exc:
        raise ValueError(f"{path}: line 1: malformed header: {exc}") from exc
    if len(shape) != order:
        raise ValueError(f"{path}: line 1: header declares order {order}, got dims {shape}")
    indices = np.empty((len(lines) - 1, order), dtype=np.int64)
    values = np.empty(len(lines) - 1)
    for i, ln in enumerate(lines[1:]):
        parts = ln.split(",")
        if len(parts) != order + 1:
            raise ValueError(f"{path}: line {i + 2}: expected {order + 1} fields")
        try:
            indices[i] = [int(p) for p in parts[:-1]]
            values[i] = float(parts[-1])
        except ValueError as exc:
            raise ValueError(f"{path}: line {i + 2}: {exc}") from exc
    return ObservationSet(indices=indices, values=values, shape=shape)


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint 1-based index sets over a tensor's entries."""

    train: np.ndarray  # (m_tr, N)
    validation: np.ndarray
    test: np.ndarray


def split_indices(shape, fractions, seed: int) -> SplitAssignment:
    """Split the entry positions of a tensor of ``shape`` into disjoint
    train/validation/test sets of the requested fractions (each within one
    entry), by a seeded permutation."""
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(not 0 < f < 1 for f in fractions):
        raise ValueError("three split fractions in (0, 1) are required")
    if sum(fractions) > 1 + 1e-12:
        raise ValueError("split fractions must sum to at most 1")
    shape = tuple(int(p) for p in shape)
    total = int(np.prod(shape))
    counts = [round(f * total) for f in fractions]
    while sum(counts) > total:
        counts[int(np.argmax(counts))] -= 1
    perm = np.random.default_rng(seed).permutation(total)
    pieces = []
    start = 0
    for c in counts:
        flat = perm[start : start + c]
        pieces.append(np.column_stack(np.unravel_index(flat, shape, order="F")) + 1)
        start += c
    return SplitAssignment(train=pieces[0], validation=pieces[1], test=pieces[2])


def resolve_alpha(policy, train_obs: ObservationSet) -> float:
    """Turn the alpha policy (``"estimate"`` or a number) into a value."""
    if isinstance(policy, str):
        if policy == "estimate":
            return estimate_alpha(train_obs)
        try:
            return float(policy)
        except ValueError as exc:
            raise ValueError(f"alpha must be 'estimate' or a number, got {policy!r}") from exc
    return float(policy)


def make_config(
    gauge_kind: str,
    train_obs: ObservationSet,
    gamma: float,
    alpha="estimate",
    beta: float = 1.0,
    max_outer_iters: int = 500,
    primal_tol: float = 1e-5,
    subgrad: SubgradConfig | None = None,
) -> AdmmConfig:
    """Build a solver config, resolving the envelope radius from the
    training observations when asked to estimate it."""
    if gauge_kind == ENVELOPE:
        gauge = GaugeSpec.envelope(resolve_alpha(alpha, train_obs))
    else:
        gauge = GaugeSpec.l1()
    return AdmmConfig(
        gamma=gamma,
        gauge=gauge,
        beta=beta,
        max_outer_iters=max_outer_iters,
        primal_tol=primal_tol,
        subgrad=subgrad or SubgradConfig(),
    )


@dataclass
class SweepResult:
    """Outcome of a gamma sweep: one row per grid point (gamma, validation
    RMSE, iterations, seconds), the winning gamma, and the winning model
    (reused as-is, not refit)."""

    rows: list[tuple[float, float, int, float]]
    best_gamma: float
    best_model: np.ndarray
    best_report: SolverReport
    alpha: float | None = None


def run_sweep(
    train_obs: ObservationSet,
    val_obs: ObservationSet,
    gauge_kind: str,
    gammas=DEFAULT_GAMMA_GRID,
    alpha="estimate",
    beta: float = 1.0,
    max_outer_iters: int = 500,
    primal_tol: float = 1e-5,
    subgrad: SubgradConfig | None = None,
) -> SweepResult:
    """Solve on the training set for every gamma in the grid and keep the
    model with the smallest validation RMSE (ties go to the smaller
    gamma)."""
    rows = []
    best = None
    alpha_used = None
    for gamma in gammas:
        cfg = make_config(
            gauge_kind, train_obs, gamma, alpha, beta, max_outer_iters, primal_tol, subgrad
        )
        alpha_used = cfg.gauge.alpha
        w, report = solve(train_obs, cfg)
        val_rmse = observation_rmse(w, val_obs)
        report.metrics["validation_rmse"] = val_rmse
        rows.append((gamma, val_rmse, report.iterations, report.wall_time_s))
        if best is None or val_rmse < best[0]:
            best = (val_rmse, gamma, w, report)
    _, best_gamma, best_model, best_report = best
    return SweepResult(
        rows=rows,
        best_gamma=best_gamma,
        best_model=best_model,
        best_report=best_report,
        alpha=alpha_used,
    )


@dataclass(frozen=True)
class BenchRow:
    size: int
    gauge_kind: str
    seed: int
    seconds: float
    iterations: int


def run_bench(
    sizes,
    seeds_per_size: int = 1,
    gamma: float = 1e-3,
    beta: float = 1.0,
    noise_variance: float = 1e-3,
    train_fraction: float = 0.1,
    core_ranks=(12, 6, 3),
    max_outer_iters: int = 500,
    primal_tol: float = 1e-5,
    gauges=("l1", ENVELOPE),
) -> list[BenchRow]:
    """Time complete solves of both gauges on cube instances of each size
    under identical data and gamma."""
    rows = []
    for p in sizes:
        p = int(p)
        ranks = tuple(min(r, p) for r in core_ranks)
        for seed in range(seeds_per_size):
            truth, _ = generate_tucker(
                TuckerSpec(shape=(p, p, p), core_ranks=ranks, noise_variance=noise_variance, seed=seed)
            )
            total = p**3
            m = max(1, round(train_fraction * total))
            flat = np.random.default_rng(seed).permutation(total)[:m]
            idx = np.column_stack(np.unravel_index(flat, (p, p, p), order="F")) + 1
            obs = ObservationSet.from_tensor(truth, idx)
            for gauge_kind in gauges:
                cfg = make_config(
                    gauge_kind,
                    obs,
                    gamma,
                    alpha="estimate",
                    beta=beta,
                    max_outer_iters=max_outer_iters,
                    primal_tol=primal_tol,
                )
                start = time.perf_counter()
                _, report = solve(obs, cfg)
                rows.append(
                    BenchRow(
                        size=p,
                        gauge_kind=gauge_kind,
                        seed=seed,
                        seconds=time.perf_counter() - start,
                        iterations=report.iterations,
                    )
                )
    return rows
