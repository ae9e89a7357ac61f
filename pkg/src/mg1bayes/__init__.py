"""Simulation and Bayesian nonparametric inference for the marked departure
process of a stable M/G/1 queue."""

from .delta_matrix import (
    DeltaDirichletPosterior,
    FinitePmfModel,
    GeometricBase,
    PoissonBase,
    PosteriorMeanPmf,
    increments_of,
    matrix_entry,
    parse_base,
    path_likelihood,
    pi_pgf,
    posterior_mean_pmf,
    predictive_next_state,
    sample_posterior_pmf,
    update_with_marks,
)
from .errors import CorruptDataError, FixedPointError, PgfDomainError, StabilityError
from .marks import (
    TauSummary,
    TransitionCounts,
    is_down_skip_free,
    tau,
    tau_equiv,
    tau_tilde_equiv,
    transition_counts,
)
from .rate import (
    GammaPosterior,
    posterior_mean,
    posterior_var,
    predictive_density,
    predictive_mean,
    update,
)
from .service import (
    Deterministic,
    Erlang,
    Exponential,
    HyperExponential,
    ServiceDist,
    TrueArrivalPmf,
    parse_service,
)
from .simulate import (
    DeparturePath,
    MarkedDeparture,
    SimConfig,
    read_departures,
    simulate_path,
    write_departures,
)
from .snapshot import PosteriorSnapshot
from .transforms import (
    EstimatorContext,
    TransformEstimate,
    busy_b,
    evaluate_transform,
    g_hat,
    gamma_n,
    m_hat,
    pi_hat,
    q_hat,
    rho_hat,
    served_mb,
    w_hat,
)

__version__ = "0.1.0"

__all__ = [
    "CorruptDataError",
    "DeltaDirichletPosterior",
    "DeparturePath",
    "Deterministic",
    "Erlang",
    "EstimatorContext",
    "Exponential",
    "FinitePmfModel",
    "FixedPointError",
    "GammaPosterior",
    "GeometricBase",
    "HyperExponential",
    "MarkedDeparture",
    "PgfDomainError",
    "PoissonBase",
    "PosteriorMeanPmf",
    "PosteriorSnapshot",
    "ServiceDist",
    "SimConfig",
    "StabilityError",
    "TauSummary",
    "TransformEstimate",
    "TransitionCounts",
    "TrueArrivalPmf",
    "busy_b",
    "evaluate_transform",
    "g_hat",
    "gamma_n",
    "increments_of",
    "is_down_skip_free",
    "m_hat",
    "matrix_entry",
    "parse_base",
    "parse_service",
    "path_likelihood",
    "pi_hat",
    "pi_pgf",
    "posterior_mean",
    "posterior_mean_pmf",
    "posterior_var",
    "predictive_density",
    "predictive_mean",
    "predictive_next_state",
    "q_hat",
    "read_departures",
    "rho_hat",
    "sample_posterior_pmf",
    "served_mb",
    "simulate_path",
    "tau",
    "tau_equiv",
    "tau_tilde_equiv",
    "transition_counts",
    "update",
    "update_with_marks",
    "w_hat",
    "write_departures",
]
