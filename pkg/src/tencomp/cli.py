"""Command-line experiment harness.

Subcommands: ``gen-synthetic`` (seeded low-rank instance plus splits),
``make-counterexample`` (strict-gap tensor with a printed certificate),
``complete`` (single solve), ``sweep`` (gamma grid with validation
selection), ``eval`` (test RMSE of a saved model), ``bench`` (timing of
both gauges over cube sizes).

Exit codes: 0 success, 1 usage error, 2 I/O or parse error, 3 numeric
failure, 4 certificate failure.  Every emitted CSV carries a header row.
A ``--config`` file of ``key=value`` lines supplies defaults for any long
flag of the chosen subcommand; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from fractions import Fraction

import numpy as np

from .admm import ObservationSet, solve
from .gauge import ENVELOPE, L1
from .harness import (
    DEFAULT_GAMMA_GRID,
    make_config,
    read_observations,
    run_bench,
    run_sweep,
    split_indices,
    write_observations,
)
from .models import (
    CounterexampleSpec,
    TuckerSpec,
    build_counterexample,
    generate_tucker,
    observation_rmse,
    tensor_rank,
    tensor_trace_norm,
)
from .spectral import NumericFailure, spectral_norm, svd_thin
from .tensor import frobenius_norm, read_tensor, unfold, write_tensor

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3
EXIT_CERTIFICATE = 4

GAUGE_KINDS = {"trace": L1, "envelope": ENVELOPE}


class _ExitError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ExitError(EXIT_USAGE, f"{self.prog}: error: {message}")


def _load(reader, path):
    try:
        return reader(path)
    except (OSError, ValueError) as exc:
        raise _ExitError(EXIT_IO, str(exc)) from exc


def _write_csv(path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise _ExitError(EXIT_IO, str(exc)) from exc


def _ensure_out_dir(args) -> str:
    out = args.out_dir
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise _ExitError(EXIT_IO, str(exc)) from exc
    return out


def _report_rows(report):
    return [
        (it + 1, pr, dr, ob, 1000.0 * el)
        for it, (pr, dr, ob, el) in enumerate(
            zip(
                report.primal_residuals,
                report.dual_residuals,
                report.objectives,
                report.elapsed_s,
            )
        )
    ]


REPORT_HEADER = ("iteration", "primal_residual", "dual_residual", "objective", "elapsed_ms")


def cmd_gen_synthetic(args) -> int:
    out = _ensure_out_dir(args)
    spec = TuckerSpec(
        shape=tuple(args.shape),
        core_ranks=tuple(args.ranks),
        noise_variance=args.noise_var,
        seed=args.seed,
    )
    truth, noiseless = generate_tucker(spec)
    splits = split_indices(spec.shape, args.split, args.seed)
    try:
        write_tensor(os.path.join(out, "ground_truth.txt"), truth)
        write_tensor(os.path.join(out, "noiseless.txt"), noiseless)
        for name, idx in (
            ("train", splits.train),
            ("validation", splits.validation),
            ("test", splits.test),
        ):
            obs = ObservationSet.from_tensor(truth, idx)
            write_observations(os.path.join(out, f"{name}.obs"), obs)
            print(f"{name}: {obs.m} observations")
    except OSError as exc:
        raise _ExitError(EXIT_IO, str(exc)) from exc
    print(f"wrote tensors and splits to {out}")
    return EXIT_OK


def cmd_make_counterexample(args) -> int:
    try:
        spec = CounterexampleSpec(shape=tuple(args.shape), seed=args.seed)
    except ValueError as exc:
        raise _ExitError(EXIT_USAGE, str(exc)) from exc
    w = build_counterexample(spec)
    n_modes = len(spec.shape)
    p_min = min(spec.shape)

    frob = frobenius_norm(w)
    norms = [spectral_norm(unfold(w, n)) for n in range(1, n_modes + 1)]
    ranks = [
        int(np.count_nonzero(s > 1e-8 * s[0]))
        for s in (svd_thin(unfold(w, n)).sigma for n in range(1, n_modes + 1))
    ]
    trace = tensor_trace_norm(w)
    rank_avg = tensor_rank(w, rank_tol=1e-8)
    trace_formula = (p_min * (n_modes - 1) + np.sqrt(p_min**2 + p_min)) / n_modes
    rank_formula = Fraction(p_min * (n_modes - 1) + p_min + 1, n_modes)

    print(f"shape: {spec.shape}  seed: {args.seed}")
    print(f"frobenius_norm: {frob!r}  (expected sqrt({p_min}) = {np.sqrt(p_min)!r})")
    print("spectral_norms: " + " ".join(f"{v!r}" for v in norms))
    print("mode_ranks: " + " ".join(str(r) for r in ranks))
    print(f"trace_norm: {trace!r}  (formula {trace_formula!r})")
    print(f"rank_average: {rank_avg}  (formula {rank_formula})")

    checks = {
        "frobenius equals sqrt(p_min)": abs(frob - np.sqrt(p_min)) <= 1e-10,
        "all spectral norms <= 1": all(v <= 1 + 1e-8 for v in norms),
        "mode ranks differ": min(ranks) < max(ranks),
        "trace norm matches formula": abs(trace - trace_formula) <= 1e-6,
        "rank average matches formula": rank_avg == rank_formula,
        "trace norm < rank average": trace < rank_avg,
    }
    failed = [name for name, ok in checks.items() if not ok]
    for name, ok in checks.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    if args.out_dir is not None:
        out = _ensure_out_dir(args)
        try:
            write_tensor(os.path.join(out, "counterexample.txt"), w)
        except OSError as exc:
            raise _ExitError(EXIT_IO, str(exc)) from exc
        print(f"wrote tensor to {os.path.join(out, 'counterexample.txt')}")
    if failed:
        print("certificate FAILED: " + "; ".join(failed), file=sys.stderr)
        return EXIT_CERTIFICATE
    print("certificate passed")
    return EXIT_OK


def _solver_config(args, obs):
    return make_config(
        GAUGE_KINDS[args.gauge],
        obs,
        gamma=args.gamma,
        alpha=args.alpha,
        beta=args.beta,
        max_outer_iters=args.max_iters,
        primal_tol=args.tol,
    )


def cmd_complete(args) -> int:
    out = _ensure_out_dir(args)
    obs = _load(read_observations, args.obs)
    cfg = _solver_config(args, obs)
    report_path = os.path.join(out, "report.csv")
    try:
        w, report = solve(obs, cfg)
    except NumericFailure as exc:
        if getattr(exc, "report", None) is not None:
            _write_csv(report_path, REPORT_HEADER, _report_rows(exc.report))
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        write_tensor(os.path.join(out, "completed.txt"), w)
    except OSError as exc:
        raise _ExitError(EXIT_IO, str(exc)) from exc
    _write_csv(report_path, REPORT_HEADER, _report_rows(report))
    if cfg.gauge.kind == ENVELOPE:
        print(f"alpha: {cfg.gauge.alpha!r}")
    print(
        f"gauge: {args.gauge}  gamma: {cfg.gamma!r}  iterations: {report.iterations}"
        f"  converged: {report.converged}  train_rmse: {observation_rmse(w, obs)!r}"
    )
    print(f"wrote {os.path.join(out, 'completed.txt')} and {report_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    out = _ensure_out_dir(args)
    train = _load(read_observations, args.train)
    val = _load(read_observations, args.validation)
    try:
        result = run_sweep(
            train,
            val,
            GAUGE_KINDS[args.gauge],
            gammas=tuple(args.gamma_grid),
            alpha=args.alpha,
            beta=args.beta,
            max_outer_iters=args.max_iters,
            primal_tol=args.tol,
        )
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_csv(
        os.path.join(out, "sweep.csv"),
        ("gamma", "validation_rmse", "iterations", "seconds"),
        result.rows,
    )
    try:
        write_tensor(os.path.join(out, "model.txt"), result.best_model)
    except OSError as exc:
        raise _ExitError(EXIT_IO, str(exc)) from exc
    if result.alpha is not None:
        print(f"alpha: {result.alpha!r}")
    best_rmse = min(r[1] for r in result.rows)
    print(f"best gamma: {result.best_gamma!r}  validation_rmse: {best_rmse!r}")
    print(f"wrote {os.path.join(out, 'sweep.csv')} and {os.path.join(out, 'model.txt')}")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = _load(read_tensor, args.model)
    test = _load(read_observations, args.test)
    try:
        value = observation_rmse(model, test)
    except ValueError as exc:
        raise _ExitError(EXIT_IO, str(exc)) from exc
    print(f"test_rmse: {value!r}")
    append = args.append
    if append is None:
        append = os.path.join(os.path.dirname(os.path.abspath(args.model)), "eval.csv")
    try:
        new = not os.path.exists(append)
        with open(append, "a", newline="") as fh:
            writer = csv.writer(fh)
            if new:
                writer.writerow(("model", "test", "m", "rmse"))
            writer.writerow((args.model, args.test, test.m, value))
    except OSError as exc:
        raise _ExitError(EXIT_IO, str(exc)) from exc
    print(f"appended to {append}")
    return EXIT_OK


def cmd_bench(args) -> int:
    out = _ensure_out_dir(args)
    try:
        rows = run_bench(
            sizes=args.sizes,
            seeds_per_size=args.seeds_per_size,
            gamma=args.gamma,
            beta=args.beta,
            noise_variance=args.noise_var,
            max_outer_iters=args.max_iters,
            primal_tol=args.tol,
        )
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    label = {L1: "trace", ENVELOPE: "envelope"}
    _write_csv(
        os.path.join(out, "bench.csv"),
        ("p", "gauge", "seed", "seconds", "iterations"),
        [(r.size, label[r.gauge_kind], r.seed, r.seconds, r.iterations) for r in rows],
    )
    for p in sorted({r.size for r in rows}):
        env = np.median([r.seconds for r in rows if r.size == p and r.gauge_kind == ENVELOPE])
        tr = np.median([r.seconds for r in rows if r.size == p and r.gauge_kind == L1])
        print(f"p={p}  trace: {tr:.3f}s  envelope: {env:.3f}s  ratio: {env / tr:.3f}")
    print(f"wrote {os.path.join(out, 'bench.csv')}")
    return EXIT_OK


def _add_solver_flags(p: _Parser) -> None:
    p.add_argument("--gauge", choices=sorted(GAUGE_KINDS), default="trace")
    p.add_argument("--alpha", default="estimate", help="'estimate' or a positive number")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-5)


def build_parser() -> _Parser:
    parser = _Parser(prog="tencomp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="generate a synthetic instance and splits")
    p.add_argument("--shape", type=int, nargs="+", default=[40, 20, 10])
    p.add_argument("--ranks", type=int, nargs="+", default=[12, 6, 3])
    p.add_argument("--noise-var", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, nargs=3, default=[0.10, 0.45, 0.45])
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("make-counterexample", help="build and certify a strict-gap tensor")
    p.add_argument("--shape", type=int, nargs="+", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_make_counterexample)

    p = sub.add_parser("complete", help="solve one completion problem")
    p.add_argument("--obs", required=True)
    p.add_argument("--gamma", type=float, default=1e-3)
    _add_solver_flags(p)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("sweep", help="tune gamma on a validation split")
    p.add_argument("--train", required=True)
    p.add_argument("--validation", required=True)
    p.add_argument("--gamma-grid", type=float, nargs="+", default=list(DEFAULT_GAMMA_GRID))
    _add_solver_flags(p)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="test RMSE of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--append", default=None, help="CSV to append to (default: eval.csv beside the model)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time both gauges on cube instances")
    p.add_argument("--sizes", type=int, nargs="+", default=[20, 40, 60])
    p.add_argument("--seeds-per-size", type=int, default=1)
    p.add_argument("--gamma", type=float, default=1e-3)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--noise-var", type=float, default=1e-3)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_bench)

    return parser


def _apply_config_file(argv: list[str]) -> list[str]:
    """Splice ``key=value`` pairs from a ``--config`` file in as flags,
    right after the subcommand so explicit flags take precedence."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        raise _ExitError(EXIT_USAGE, "--config requires a path")
    path = argv[at + 1]
    rest = argv[:at] + argv[at + 2 :]
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise _ExitError(EXIT_IO, str(exc)) from exc
    flags: list[str] = []
    for ln_no, ln in enumerate(lines, start=1):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise _ExitError(EXIT_IO, f"{path}: line {ln_no}: expected key=value")
        key, value = ln.split("=", 1)
        flags.append("--" + key.strip().replace("_", "-"))
        flags.extend(value.split())
    if not rest:
        raise _ExitError(EXIT_USAGE, "a subcommand is required")
    return rest[:1] + flags + rest[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        argv = _apply_config_file(argv)
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except _ExitError as exc:
        print(exc.message, file=sys.stderr)
        return exc.code
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
