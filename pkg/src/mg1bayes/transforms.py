"""Plug-in estimators for the queueing transforms.

Every estimator is built from two posterior summaries: the expected departure
rate and the expected arrivals-per-service pmf.  The service-time LST
estimate is ``g(z) = pgf(1 - z/rate)``; queue-length, waiting-time and
stationary transforms follow from it by the classical single-server
relations, and the busy-period quantities solve their fixed-point equations
by plain iteration (a contraction whenever the utilization is below one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .delta_matrix import DeltaDirichletPosterior, PosteriorMeanPmf
from .errors import FixedPointError, StabilityError
from .rate import GammaPosterior, posterior_mean
from .service import ServiceDist, TrueArrivalPmf

# switch to the analytic limit inside this distance of a removable singularity
_SINGULARITY_WINDOW = 1e-6

TRANSFORM_KINDS = ("g", "w", "q", "m", "pi", "b", "mb", "rho")


@dataclass(frozen=True)
class EstimatorContext:
    """Inputs every transform estimator needs.

    pmf is a generating-function model (pmf/pgf/pgf_prime/mean/check_arg);
    its mean is the estimated utilization.
    """

    lambda_bar: float
    pmf: object

    def __post_init__(self):
        if self.lambda_bar <= 0:
            raise ValueError(f"rate estimate must be > 0, got {self.lambda_bar}")

    @classmethod
    def from_posteriors(
        cls, gamma_post: GammaPosterior, dp_post: DeltaDirichletPosterior
    ) -> "EstimatorContext":
        return cls(posterior_mean(gamma_post), PosteriorMeanPmf(dp_post))

    @classmethod
    def exact(cls, lam: float, service: ServiceDist) -> "EstimatorContext":
        """Noise-free context with the true arrival law; used by oracles."""
        return cls(lam, TrueArrivalPmf(service, lam))

    def require_stable(self) -> float:
        r = self.pmf.mean()
        if r >= 1.0:
            raise StabilityError(f"estimated utilization {r} >= 1")
        return r


def gamma_n(ctx: EstimatorContext, z: float) -> float:
    """Estimated arrivals pmf generating function."""
    return ctx.pmf.pgf(z)


def g_hat(ctx: EstimatorContext, z: float) -> float:
    """Estimated service-time LST at z >= 0."""
    if z < 0:
        raise ValueError(f"LST argument must be >= 0, got {z}")
    return gamma_n(ctx, 1.0 - z / ctx.lambda_bar)


def rho_hat(ctx: EstimatorContext) -> float:
    """Estimated utilization: the mean of the arrivals pmf."""
    return ctx.pmf.mean()


def rho_hat_via_lst(ctx: EstimatorContext) -> float:
    """Utilization as rate times mean service time, via the LST slope at 0."""
    g_slope_at_zero = -ctx.pmf.pgf_prime(1.0) / ctx.lambda_bar
    mean_service = -g_slope_at_zero
    return ctx.lambda_bar * mean_service


def q_hat(ctx: EstimatorContext, z: float) -> float:
    """Estimated generating function of the number waiting in queue."""
    r = ctx.require_stable()
    if abs(1.0 - z) < _SINGULARITY_WINDOW:
        return 1.0
    denom = g_hat(ctx, ctx.lambda_bar * (1.0 - z)) - z
    if abs(denom) < 1e-14:
        raise ArithmeticError(f"queue transform denominator vanished at z={z}")
    return (1.0 - r) * (1.0 - z) / denom


def m_hat(ctx: EstimatorContext, z: float) -> float:
    """Estimated generating function of the number in system."""
    if abs(1.0 - z) < _SINGULARITY_WINDOW:
        return 1.0
    return g_hat(ctx, ctx.lambda_bar * (1.0 - z)) * q_hat(ctx, z)


def w_hat(ctx: EstimatorContext, s: float) -> float:
    """Estimated LST of the waiting time in queue."""
    r = ctx.require_stable()
    if s < 0:
        raise ValueError(f"LST argument must be >= 0, got {s}")
    if s < _SINGULARITY_WINDOW:
        return 1.0
    denom = s - ctx.lambda_bar + ctx.lambda_bar * g_hat(ctx, s)
    if abs(denom) < 1e-14:
        raise ArithmeticError(f"waiting-time denominator vanished at s={s}")
    return s * (1.0 - r) / denom


def pi_hat(ctx: EstimatorContext, z: float) -> float:
    """Estimated generating function of the stationary queue length."""
    r = ctx.require_stable()
    if abs(1.0 - z) < _SINGULARITY_WINDOW:
        return 1.0
    a = gamma_n(ctx, z)
    return a * (1.0 - z) * (1.0 - r) / (a - z)


def busy_b(
    ctx: EstimatorContext, s: float, tol: float = 1e-10, max_iter: int = 10_000
) -> float:
    """Minimal solution of b = g(s + rate*(1 - b)), the busy-period LST."""
    ctx.require_stable()
    if s <= 0:
        raise ValueError(f"busy-period LST needs s > 0, got {s}")
    x = 0.0
    for _ in range(max_iter):
        nxt = g_hat(ctx, s + ctx.lambda_bar * (1.0 - x))
        if abs(nxt - x) < tol:
            return nxt
        x = nxt
    residual = abs(g_hat(ctx, s + ctx.lambda_bar * (1.0 - x)) - x)
    raise FixedPointError(f"busy-period iteration did not converge at s={s}", residual)


def served_mb(
    ctx: EstimatorContext, z: float, tol: float = 1e-10, max_iter: int = 10_000
) -> float:
    """Minimal solution of m = z*g(rate*(1 - m)): customers served per busy period."""
    ctx.require_stable()
    if not 0.0 <= z < 1.0:
        raise ValueError(f"argument must lie in [0, 1), got {z}")
    x = 0.0
    for _ in range(max_iter):
        nxt = z * g_hat(ctx, ctx.lambda_bar * (1.0 - x))
        if abs(nxt - x) < tol:
            return nxt
        x = nxt
    residual = abs(z * g_hat(ctx, ctx.lambda_bar * (1.0 - x)) - x)
    raise FixedPointError(f"served-count iteration did not converge at z={z}", residual)


@dataclass(frozen=True)
class TransformEstimate:
    """A transform evaluated over a grid; failed points carry NaN."""

    kind: str
    grid: tuple[float, ...]
    values: tuple[float, ...]
    domain_note: str


def evaluate_transform(
    ctx: EstimatorContext, kind: str, grid: "np.ndarray | list[float]"
) -> TransformEstimate:
    """Evaluate one named transform pointwise, recording domain failures as NaN."""
    if kind not in TRANSFORM_KINDS:
        raise ValueError(f"unknown transform {kind!r}; expected one of {TRANSFORM_KINDS}")
    if kind == "rho":
        return TransformEstimate("rho", (), (rho_hat(ctx),), ctx.pmf.domain_note())
    fn = {
        "g": g_hat,
        "w": w_hat,
        "q": q_hat,
        "m": m_hat,
        "pi": pi_hat,
        "b": busy_b,
        "mb": served_mb,
    }[kind]
    values = []
    for arg in grid:
        try:
            values.append(fn(ctx, float(arg)))
        except (ValueError, ArithmeticError, FixedPointError):
            values.append(math.nan)
    return TransformEstimate(
        kind, tuple(float(a) for a in grid), tuple(values), ctx.pmf.domain_note()
    )
