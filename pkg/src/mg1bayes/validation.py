"""Independent oracles and desk-scale experiments.

The experiments simulate a queue with known parameters, run the posterior
updates, and measure how the estimators behave against closed forms: rate
and transform consistency across growing sample sizes, posterior normality
of the rescaled arrival pgf and rate (with their limiting covariances), and
agreement of the stationary-law estimate with the observed marks.  Pass
thresholds are configuration, never constants inside the logic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .delta_matrix import (
    DeltaDirichletPosterior,
    PoissonBase,
    PosteriorMeanPmf,
    pmf_pgf,
    sample_posterior_pmf,
    update_with_marks,
)
from .rate import GammaPosterior, posterior_mean, sample as rate_sample, update
from .service import Deterministic, ServiceDist, TrueArrivalPmf
from .simulate import DeparturePath, SimConfig, simulate_path
from .transforms import EstimatorContext, g_hat, gamma_n, pi_hat


# ---------------------------------------------------------------------------
# Quadrature oracle for the arrivals-per-service pmf

_QUAD_SD_MULTIPLE = 40.0
_QUAD_UPPER_CAP = 1e6


def oracle_a_pmf(
    service: ServiceDist, lam: float, k: int, abs_tol: float = 1e-12
) -> float:
    """P(k arrivals during one service) by adaptive quadrature of
    the mixed-Poisson integral; independent of the closed forms."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if lam <= 0:
        raise ValueError("lam must be > 0")
    if isinstance(service, Deterministic):
        # point-mass mixing distribution: the integral is one evaluation
        m = lam * service.d
        return math.exp(-m + k * math.log(m) - math.lgamma(k + 1))
    upper = min(service.mean() + _QUAD_SD_MULTIPLE * math.sqrt(service.var()), _QUAD_UPPER_CAP)
    if service.sf(upper) > abs_tol:
        raise ValueError("service tail too heavy for the configured quadrature window")

    lgk = math.lgamma(k + 1)

    def integrand(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return math.exp(-lam * t + k * math.log(lam * t) - lgk) * service.pdf(t)

    peak = min(k / lam if k else 0.0, upper)
    value, _ = quad(
        integrand, 0.0, upper, epsabs=abs_tol, epsrel=1e-12, limit=200,
        points=[peak] if 0.0 < peak < upper else None,
    )
    return value


def oracle_a_pgf_table(
    service: ServiceDist, lam: float, mass_tol: float = 1e-12, k_cap: int = 400
) -> np.ndarray:
    """pmf table from the quadrature oracle, long enough to hold all but
    mass_tol of the probability mass."""
    values = []
    total = 0.0
    for k in range(k_cap + 1):
        values.append(oracle_a_pmf(service, lam, k))
        total += values[-1]
        if total > 1.0 - mass_tol:
            break
    return np.asarray(values)


# ---------------------------------------------------------------------------
# Limiting covariance structures


def covariance_H(a0_pgf, u: float, v: float) -> float:
    """Covariance of the limiting pgf process: a0(uv) - a0(u) a0(v)."""
    return a0_pgf(u * v) - a0_pgf(u) * a0_pgf(v)


def covariance_K(a0_pgf, a0_pgf_prime, lambda0: float, u: float, v: float) -> float:
    """Covariance of the limiting service-LST process.

    Evaluated exactly as displayed (including the lambda0^-6 factor on the
    derivative term); the alternate series implementation below exists only
    to guard against coding mistakes, not to second-guess the formula.
    """
    wu = 1.0 - u / lambda0
    wv = 1.0 - v / lambda0
    return covariance_H(a0_pgf, wu, wv) + u * v * lambda0**-6 * a0_pgf_prime(
        wu
    ) * a0_pgf_prime(wv)


def covariance_K_series(
    pmf_table: np.ndarray, lambda0: float, u: float, v: float, h: float = 1e-6
) -> float:
    """Independent re-evaluation of covariance_K from a pmf table, with
    series pgfs and finite-difference derivatives."""
    ks = np.arange(len(pmf_table))

    def pgf(z: float) -> float:
        return float(np.sum(pmf_table * z**ks))

    def pgf_prime(z: float) -> float:
        return (pgf(z + h) - pgf(z - h)) / (2.0 * h)

    wu = 1.0 - u / lambda0
    wv = 1.0 - v / lambda0
    h_term = pgf(wu * wv) - pgf(wu) * pgf(wv)
    return h_term + u * v * lambda0**-6 * pgf_prime(wu) * pgf_prime(wv)


# ---------------------------------------------------------------------------
# Experiment report plumbing


@dataclass
class ExperimentReport:
    """Outcome of one named experiment; pass/fail is a pure function of the
    metrics and the configured thresholds."""

    name: str
    parameters: dict[str, object]
    metrics: dict[str, float]
    passed: bool
    seed: int
    extras: dict[str, object] = field(default_factory=dict, repr=False)

    def lines(self) -> list[str]:
        out = [f"report.name={self.name}", f"seed={self.seed}"]
        for key in sorted(self.parameters):
            out.append(f"param.{key}={self.parameters[key]}")
        for key in sorted(self.metrics):
            out.append(f"metric.{key}={float(self.metrics[key])!r}")
        out.append(f"pass={'true' if self.passed else 'false'}")
        return out

    def table(self) -> str:
        width = max(len(k) for k in self.metrics) if self.metrics else 8
        rows = [f"experiment: {self.name}   pass: {self.passed}   seed: {self.seed}"]
        rows += [f"  {k.ljust(width)}  {v:.6g}" for k, v in sorted(self.metrics.items())]
        return "\n".join(rows)


def _fit_posteriors(
    path: DeparturePath,
    n: int,
    gamma_prior: GammaPosterior,
    dp_prior: DeltaDirichletPosterior,
) -> tuple[GammaPosterior, DeltaDirichletPosterior]:
    durations = np.diff(path.times[:n])
    gamma_post = update(gamma_prior, durations)
    dp_post = update_with_marks(dp_prior, [int(x) for x in path.marks[:n]])
    return gamma_post, dp_post


# ---------------------------------------------------------------------------
# Experiments


@dataclass(frozen=True)
class ConsistencyThresholds:
    final_g_sup: float = 0.02
    final_lambda_err: float = 0.05
    require_monotone: bool = True


def consistency_experiment(
    true_config: SimConfig,
    n_list: tuple[int, ...],
    gamma_prior: GammaPosterior | None = None,
    dp_prior: DeltaDirichletPosterior | None = None,
    g_grid_max: float = 5.0,
    grid_points: int = 51,
    thresholds: ConsistencyThresholds = ConsistencyThresholds(),
) -> ExperimentReport:
    """Posterior errors of the rate and the transform estimates across
    growing prefixes of one simulated path.

    Reports, per n: the rate error, the sup gap of the arrivals pgf estimate
    against the quadrature-oracle pgf on [0, 1], and sup gaps of the
    service-LST estimate against the true LST on [0, R] for R in {1, 2,
    g_grid_max}.  n = 0 rows give the prior-to-truth baseline.
    """
    gamma_prior = gamma_prior or GammaPosterior(1.0, 1.0)
    dp_prior = dp_prior or DeltaDirichletPosterior(1.0, PoissonBase(1.0))
    if max(n_list) > true_config.n:
        raise ValueError("n_list exceeds the simulated path length")

    path = simulate_path(true_config)
    lam0 = true_config.lam
    service = true_config.service
    a0_table = oracle_a_pgf_table(service, lam0)
    ks = np.arange(len(a0_table))
    z01 = np.linspace(0.0, 1.0, grid_points)
    r_grids = {f"{r:g}": np.linspace(0.0, r, grid_points) for r in (1.0, 2.0, g_grid_max)}

    metrics: dict[str, float] = {}
    sup_g_by_n: list[float] = []
    series: dict[str, list[float]] = {"n": [], "lambda_err": [], "gamma_sup": [], "g_sup": []}
    for n in (0, *n_list):
        if n == 0:
            gamma_post, dp_post = gamma_prior, dp_prior
        else:
            gamma_post, dp_post = _fit_posteriors(path, n, gamma_prior, dp_prior)
        ctx = EstimatorContext.from_posteriors(gamma_post, dp_post)
        lam_err = abs(ctx.lambda_bar - lam0)
        gamma_sup = max(
            abs(gamma_n(ctx, z) - float(np.sum(a0_table * z**ks))) for z in z01
        )
        metrics[f"lambda_err.{n}"] = lam_err
        metrics[f"gamma_sup.{n}"] = gamma_sup
        for label, grid in r_grids.items():
            sup = max(abs(g_hat(ctx, z) - service.lst(z)) for z in grid)
            metrics[f"g_sup_r{label}.{n}"] = sup
        if n > 0:
            sup_g_by_n.append(metrics[f"g_sup_r{g_grid_max:g}.{n}"])
            series["n"].append(n)
            series["lambda_err"].append(lam_err)
            series["gamma_sup"].append(gamma_sup)
            series["g_sup"].append(sup_g_by_n[-1])

    monotone = all(b <= a for a, b in zip(sup_g_by_n, sup_g_by_n[1:]))
    final_ok = sup_g_by_n[-1] <= thresholds.final_g_sup
    lam_ok = metrics[f"lambda_err.{max(n_list)}"] <= thresholds.final_lambda_err
    metrics["g_sup_monotone"] = float(monotone)
    passed = bool(lam_ok and final_ok and (monotone or not thresholds.require_monotone))
    return ExperimentReport(
        name="consistency",
        parameters={
            "lambda0": lam0,
            "service": service.spec(),
            "n_list": ",".join(str(n) for n in n_list),
            "g_grid_max": g_grid_max,
            "dp_base": dp_prior.base.spec(),
            "final_g_sup_tol": thresholds.final_g_sup,
            "final_lambda_tol": thresholds.final_lambda_err,
        },
        metrics=metrics,
        passed=passed,
        seed=true_config.seed,
        extras={"series": series},
    )


@dataclass(frozen=True)
class BvmThresholds:
    cov_rel_err: float = 0.15
    rate_var_rel_err: float = 0.15
    normal_ks: float = 0.05


def ks_to_standard_normal(values: np.ndarray) -> float:
    """Kolmogorov distance between standardized values and the normal cdf."""
    x = np.sort((values - values.mean()) / values.std())
    n = len(x)
    cdf = norm.cdf(x)
    steps = np.arange(1, n + 1) / n
    return float(np.max(np.maximum(np.abs(steps - cdf), np.abs(steps - 1.0 / n - cdf))))


def bvm_experiment(
    true_config: SimConfig,
    n: int | None = None,
    draws: int = 2000,
    z_grid: tuple[float, ...] = (0.2, 0.5, 0.8),
    truncation: int = 200,
    gamma_prior: GammaPosterior | None = None,
    dp_prior: DeltaDirichletPosterior | None = None,
    thresholds: BvmThresholds = BvmThresholds(),
) -> ExperimentReport:
    """Posterior-normality check on one fixed dataset.

    Samples the posterior over the arrivals pmf and the rate, rescales the
    centered draws by sqrt(n), and compares the empirical covariance of the
    pgf coordinates with its limit, the rate variance with lambda0^-2 as
    displayed, and each coordinate's law with a Gaussian.  Draw i uses an
    RNG stream keyed by (seed, i), so results are schedule-independent.
    """
    gamma_prior = gamma_prior or GammaPosterior(1.0, 1.0)
    dp_prior = dp_prior or DeltaDirichletPosterior(1.0, PoissonBase(1.0))
    n = n or true_config.n
    path = simulate_path(true_config)
    gamma_post, dp_post = _fit_posteriors(path, n, gamma_prior, dp_prior)
    model = PosteriorMeanPmf(dp_post)
    lam0 = true_config.lam
    a0 = TrueArrivalPmf(true_config.service, lam0)

    coords = np.empty((draws, len(z_grid)))
    rate_draws = np.empty(draws)
    root_n = math.sqrt(n)
    center = np.array([model.pgf(z) for z in z_grid])
    for i in range(draws):
        rng = np.random.default_rng(np.random.SeedSequence((true_config.seed, i)))
        pmf = sample_posterior_pmf(dp_post, truncation, rng)
        coords[i] = [pmf_pgf(pmf, z) for z in z_grid]
        rate_draws[i] = rate_sample(gamma_post, rng, 1)[0]
    scaled = root_n * (coords - center)
    emp_cov = np.cov(scaled.T)
    h_cov = np.array([[covariance_H(a0.pgf, u, v) for v in z_grid] for u in z_grid])
    cov_rel = float(np.max(np.abs(emp_cov - h_cov) / np.abs(h_cov)))

    rate_scaled = root_n * (rate_draws - posterior_mean(gamma_post))
    rate_var = float(np.var(rate_scaled))
    rate_target = lam0**-2
    rate_rel = abs(rate_var - rate_target) / rate_target

    ks_stats = [ks_to_standard_normal(scaled[:, j]) for j in range(len(z_grid))]

    # truncation sensitivity: total variation between mean pmfs at L and 2L
    stability_draws = min(200, draws)
    tv = _truncation_tv(dp_post, truncation, stability_draws, true_config.seed)

    metrics: dict[str, float] = {
        "cov_rel_err": cov_rel,
        "rate_var": rate_var,
        "rate_var_rel_err": rate_rel,
        "rate_ks": ks_to_standard_normal(rate_scaled),
        "truncation_tv": tv,
    }
    for z, ks_val in zip(z_grid, ks_stats):
        metrics[f"ks.{z:g}"] = ks_val
    passed = bool(
        cov_rel <= thresholds.cov_rel_err
        and rate_rel <= thresholds.rate_var_rel_err
        and max(ks_stats) <= thresholds.normal_ks
    )
    return ExperimentReport(
        name="bvm",
        parameters={
            "lambda0": lam0,
            "service": true_config.service.spec(),
            "n": n,
            "draws": draws,
            "truncation": truncation,
            "z_grid": ",".join(f"{z:g}" for z in z_grid),
            "cov_rel_tol": thresholds.cov_rel_err,
            "rate_var_tol": thresholds.rate_var_rel_err,
            "normal_ks_tol": thresholds.normal_ks,
        },
        metrics=metrics,
        passed=passed,
        seed=true_config.seed,
        extras={
            "scaled": scaled,
            "emp_cov": emp_cov,
            "h_cov": h_cov,
            "rate_scaled": rate_scaled,
            "z_grid": z_grid,
        },
    )


def _truncation_tv(
    dp_post: DeltaDirichletPosterior, truncation: int, draws: int, seed: int
) -> float:
    means: list[dict[int, float]] = []
    for level_idx, level in enumerate((truncation, 2 * truncation)):
        acc: dict[int, float] = {}
        for i in range(draws):
            rng = np.random.default_rng(np.random.SeedSequence((seed, 0x7F, level_idx, i)))
            for k, w in sample_posterior_pmf(dp_post, level, rng).items():
                acc[k] = acc.get(k, 0.0) + w / draws
        means.append(acc)
    keys = set(means[0]) | set(means[1])
    return 0.5 * sum(abs(means[0].get(k, 0.0) - means[1].get(k, 0.0)) for k in keys)


@dataclass(frozen=True)
class PiCheckThresholds:
    sup_gap: float = 0.02
    idle_gap: float = 0.01


def pi_empirical_check(
    true_config: SimConfig,
    gamma_prior: GammaPosterior | None = None,
    dp_prior: DeltaDirichletPosterior | None = None,
    grid_points: int = 51,
    thresholds: PiCheckThresholds = PiCheckThresholds(),
) -> ExperimentReport:
    """Stationary-law estimate against the empirical pgf of the marks."""
    gamma_prior = gamma_prior or GammaPosterior(1.0, 1.0)
    dp_prior = dp_prior or DeltaDirichletPosterior(1.0, PoissonBase(1.0))
    path = simulate_path(true_config)
    gamma_post, dp_post = _fit_posteriors(path, len(path), gamma_prior, dp_prior)
    ctx = EstimatorContext.from_posteriors(gamma_post, dp_post)
    m = np.asarray(path.marks)
    zs = np.linspace(0.0, 1.0, grid_points)
    estimate = np.array([pi_hat(ctx, z) for z in zs])
    empirical = np.array([float(np.mean(z**m)) for z in zs])
    sup_gap = float(np.max(np.abs(estimate - empirical)))
    idle_gap = abs(pi_hat(ctx, 0.0) - float(np.mean(m == 0)))
    passed = bool(sup_gap <= thresholds.sup_gap and idle_gap <= thresholds.idle_gap)
    return ExperimentReport(
        name="pi-check",
        parameters={
            "lambda0": true_config.lam,
            "service": true_config.service.spec(),
            "n": len(path),
            "sup_tol": thresholds.sup_gap,
            "idle_tol": thresholds.idle_gap,
        },
        metrics={"sup_gap": sup_gap, "idle_gap": idle_gap},
        passed=passed,
        seed=true_config.seed,
        extras={"z": zs, "estimate": estimate, "empirical": empirical},
    )


def tau_exhaustive_experiment(max_len: int, max_state: int) -> ExperimentReport:
    """The four combinatorial sweeps, wrapped as a reportable experiment."""
    from .marks import tau_exhaustive_report

    rows = tau_exhaustive_report(max_len, max_state)
    metrics: dict[str, float] = {}
    for row in rows:
        metrics[f"checked.{row.property}"] = float(row.checked)
        metrics[f"violations.{row.property}"] = float(row.violations)
    return ExperimentReport(
        name="tau-exhaustive",
        parameters={"max_len": max_len, "max_state": max_state},
        metrics=metrics,
        passed=all(row.violations == 0 for row in rows),
        seed=0,
        extras={"rows": rows},
    )


def oracle_agreement(
    lam: float = 1.0, k_max: int = 20, tol: float = 1e-10
) -> ExperimentReport:
    """Quadrature oracle against the closed-form arrival pmfs."""
    from .service import Erlang, Exponential  # local to keep module surface small

    cases = {
        "exp": Exponential(2.0),
        "det": Deterministic(0.5),
        "erlang": Erlang(2, 4.0),
    }
    metrics: dict[str, float] = {}
    for label, service in cases.items():
        worst = max(
            abs(oracle_a_pmf(service, lam, k) - service.arrival_pmf(lam, k))
            for k in range(k_max + 1)
        )
        metrics[f"max_abs_err.{label}"] = worst
        metrics[f"mass_200.{label}"] = sum(
            oracle_a_pmf(service, lam, k) for k in range(201)
        )
    passed = all(metrics[f"max_abs_err.{c}"] <= tol for c in cases) and all(
        abs(metrics[f"mass_200.{c}"] - 1.0) <= 1e-8 for c in cases
    )
    return ExperimentReport(
        name="oracles",
        parameters={"lambda": lam, "k_max": k_max, "tol": tol},
        metrics=metrics,
        passed=passed,
        seed=0,
        extras={"cases": {label: svc.spec() for label, svc in cases.items()}},
    )
