"""Tensor completion with trace-norm or cardinality-envelope spectral
regularization, solved by ADMM with a projected-subgradient proximity
subroutine."""

from .admm import (
    AdmmConfig,
    AdmmState,
    ObservationSet,
    SolverReport,
    apply_sampling,
    scatter,
    solve,
)
from .cone import approx_project, exact_project, in_cone, project_nonneg, verify_approx_contract
from .gauge import (
    GaugeSpec,
    SubgradConfig,
    envelope_lower_bound,
    omega_star,
    prox_conjugate,
    prox_envelope,
    soft_threshold,
)
from .models import (
    CounterexampleSpec,
    TuckerSpec,
    build_counterexample,
    estimate_alpha,
    generate_tucker,
    rmse,
    tensor_rank,
    tensor_trace_norm,
)
from .spectral import NumericFailure, SvdFactors, spectral_norm, spectral_prox, svd_thin
from .tensor import fold, frobenius_norm, inner, read_tensor, unfold, write_tensor

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "ObservationSet",
    "SolverReport",
    "apply_sampling",
    "scatter",
    "solve",
    "approx_project",
    "exact_project",
    "in_cone",
    "project_nonneg",
    "verify_approx_contract",
    "GaugeSpec",
    "SubgradConfig",
    "envelope_lower_bound",
    "omega_star",
    "prox_conjugate",
    "prox_envelope",
    "soft_threshold",
    "CounterexampleSpec",
    "TuckerSpec",
    "build_counterexample",
    "estimate_alpha",
    "generate_tucker",
    "rmse",
    "tensor_rank",
    "tensor_trace_norm",
    "NumericFailure",
    "SvdFactors",
    "spectral_norm",
    "spectral_prox",
    "svd_thin",
    "fold",
    "frobenius_norm",
    "inner",
    "read_tensor",
    "unfold",
    "write_tensor",
    "__version__",
]
