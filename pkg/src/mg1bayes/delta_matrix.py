"""Dirichlet-process law over skip-free transition matrices.

The embedded chain of the queue is governed by an infinite stochastic matrix
whose every row is the arrivals-per-service pmf, shifted right once per row
below the first (rows 0 and 1 coincide).  A Dirichlet process with
concentration ``alpha`` and discrete base pmf ``c0`` over that single pmf
therefore induces a prior over whole matrices.  Observed mark strings update
it through their zero-adjusted increments: after n marks the process has base
``alpha*c0 + increment counts`` with total mass ``alpha + n - 1``.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import PgfDomainError, StabilityError
from .marks import require_dss, zero_adjusted_increments


# ---------------------------------------------------------------------------
# Base pmf families


@dataclass(frozen=True)
class GeometricBase:
    """pmf (1-p) p^k on k >= 0; pgf has convergence radius 1/p."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"geometric parameter must be in (0, 1), got {self.p}")

    def pmf(self, k: int) -> float:
        return (1.0 - self.p) * self.p**k if k >= 0 else 0.0

    def pgf(self, z: float) -> float:
        return (1.0 - self.p) / (1.0 - self.p * z)

    def pgf_prime(self, z: float) -> float:
        return self.p * (1.0 - self.p) / (1.0 - self.p * z) ** 2

    def mean(self) -> float:
        return self.p / (1.0 - self.p)

    def radius(self) -> float:
        return 1.0 / self.p

    def tail_mass(self, kmax: int) -> float:
        """P(X > kmax)."""
        return self.p ** (kmax + 1)

    def tail_mean(self, kmax: int) -> float:
        """Sum of k*pmf(k) over k > kmax."""
        m = kmax + 1
        return self.p**m * (m - (m - 1) * self.p) / (1.0 - self.p)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # numpy's geometric counts trials until success; failures match our pmf
        return rng.geometric(1.0 - self.p, size) - 1

    def spec(self) -> str:
        return f"geom:{self.p!r}"


@dataclass(frozen=True)
class PoissonBase:
    """Poisson(theta) pmf; pgf is entire."""

    theta: float

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError(f"poisson parameter must be > 0, got {self.theta}")

    def pmf(self, k: int) -> float:
        if k < 0:
            return 0.0
        return math.exp(-self.theta + k * math.log(self.theta) - math.lgamma(k + 1))

    def pgf(self, z: float) -> float:
        return math.exp(self.theta * (z - 1.0))

    def pgf_prime(self, z: float) -> float:
        return self.theta * math.exp(self.theta * (z - 1.0))

    def mean(self) -> float:
        return self.theta

    def radius(self) -> float:
        return math.inf

    def tail_mass(self, kmax: int) -> float:
        acc, term = 0.0, self.pmf(0)
        for k in range(kmax + 1):
            acc += term
            term *= self.theta / (k + 1)
        return max(1.0 - acc, 0.0)

    def tail_mean(self, kmax: int) -> float:
        # sum_{k>K} k pmf(k) = theta * P(X >= K)
        return self.theta * (self.tail_mass(kmax - 1) if kmax >= 1 else 1.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.poisson(self.theta, size)

    def spec(self) -> str:
        return f"pois:{self.theta!r}"


BasePmf = GeometricBase | PoissonBase


def parse_base(text: str) -> BasePmf:
    """Parse a base pmf spec: geom:<p> | pois:<theta>."""
    family, _, body = text.partition(":")
    if family == "geom":
        return GeometricBase(float(body))
    if family == "pois":
        return PoissonBase(float(body))
    raise ValueError(f"unknown base pmf family {family!r} in {text!r}")


# ---------------------------------------------------------------------------
# Posterior state


@dataclass(frozen=True)
class DeltaDirichletPosterior:
    """Dirichlet-process state over the arrivals-per-service pmf.

    counts holds the observed zero-adjusted increments; n_obs is the number
    of marks consumed (one fewer increments than marks).
    """

    alpha: float
    base: BasePmf
    counts: tuple[tuple[int, int], ...] = field(default=())
    n_obs: int = 0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"concentration must be > 0, got {self.alpha}")
        if sum(c for _, c in self.counts) != max(self.n_obs - 1, 0):
            raise ValueError("increment counts inconsistent with n_obs")

    def count_map(self) -> dict[int, int]:
        return dict(self.counts)

    def total_mass(self) -> float:
        return self.alpha + max(self.n_obs - 1, 0)


def increments_of(marks: Sequence[int]) -> list[int]:
    """Zero-adjusted increments of a mark string (validates skip-freeness)."""
    require_dss(marks)
    return zero_adjusted_increments(marks)


def update_with_marks(
    post: DeltaDirichletPosterior, marks: Sequence[int]
) -> DeltaDirichletPosterior:
    """Fold a mark string into the posterior.

    Streaming note: chunks after the first must re-supply the previously seen
    final mark as their first symbol; the cross-boundary increment is
    recovered from the overlap and the overlap mark is not counted twice.
    """
    if len(marks) == 0:
        return post
    incs = increments_of(marks)
    counts = post.count_map()
    for r in incs:
        counts[r] = counts.get(r, 0) + 1
    consumed = len(marks) if post.n_obs == 0 else len(marks) - 1
    return DeltaDirichletPosterior(
        alpha=post.alpha,
        base=post.base,
        counts=tuple(sorted(counts.items())),
        n_obs=post.n_obs + consumed,
    )


def posterior_mean_pmf(post: DeltaDirichletPosterior, k: int) -> float:
    """Posterior expected probability of k arrivals during one service."""
    if k < 0:
        return 0.0
    if post.n_obs <= 1:
        return post.base.pmf(k)
    denom = post.total_mass()
    return (post.alpha * post.base.pmf(k) + post.count_map().get(k, 0)) / denom


class PosteriorMeanPmf:
    """Generating-function view of the posterior mean pmf.

    Implements the model interface shared with TrueArrivalPmf: pmf, pgf,
    pgf_prime, mean, check_arg.  The base contribution uses closed forms; the
    count contribution is an exact finite sum.  Geometric bases restrict pgf
    arguments to the series radius, Poisson bases do not.
    """

    def __init__(self, post: DeltaDirichletPosterior):
        self.post = post
        self._counts = post.count_map()

    def pmf(self, k: int) -> float:
        return posterior_mean_pmf(self.post, k)

    def max_arg(self) -> float:
        return self.post.base.radius()

    def check_arg(self, z: float) -> None:
        bound = self.max_arg()
        if not abs(z) <= bound - 1e-9:
            raise PgfDomainError(z, bound)

    def pgf(self, z: float) -> float:
        self.check_arg(z)
        base_val = self.post.base.pgf(z)
        if self.post.n_obs <= 1:
            return base_val
        counts_val = sum(c * z**k for k, c in self._counts.items())
        return (self.post.alpha * base_val + counts_val) / self.post.total_mass()

    def pgf_prime(self, z: float) -> float:
        self.check_arg(z)
        base_val = self.post.base.pgf_prime(z)
        if self.post.n_obs <= 1:
            return base_val
        counts_val = sum(
            c * k * z ** (k - 1) for k, c in self._counts.items() if k >= 1
        )
        return (self.post.alpha * base_val + counts_val) / self.post.total_mass()

    def mean(self) -> float:
        if self.post.n_obs <= 1:
            return self.post.base.mean()
        counts_val = sum(c * k for k, c in self._counts.items())
        return (
            self.post.alpha * self.post.base.mean() + counts_val
        ) / self.post.total_mass()

    def mean_by_series(self, kmax: int = 256) -> float:
        """Mean via per-k pmf evaluation plus the analytic base tail."""
        head = sum(k * self.pmf(k) for k in range(kmax + 1))
        if self.post.n_obs <= 1:
            return head + self.post.base.tail_mean(kmax)
        return head + self.post.alpha * self.post.base.tail_mean(kmax) / self.post.total_mass()

    def total_mass_to(self, kmax: int) -> float:
        """Sum of pmf over 0..kmax plus the analytic base tail (should be 1)."""
        head = sum(self.pmf(k) for k in range(kmax + 1))
        if self.post.n_obs <= 1:
            return head + self.post.base.tail_mass(kmax)
        return head + self.post.alpha * self.post.base.tail_mass(kmax) / self.post.total_mass()

    def domain_note(self) -> str:
        bound = self.max_arg()
        return "pgf argument unrestricted" if math.isinf(bound) else f"|pgf argument| <= {bound!r}"


# ---------------------------------------------------------------------------
# Matrix view and predictive law


def matrix_entry(post: DeltaDirichletPosterior, i: int, j: int) -> float:
    """Posterior mean transition probability from state i to state j."""
    if i < 0 or j < 0:
        raise ValueError("states are non-negative")
    if i <= 1:
        return posterior_mean_pmf(post, j)
    if j >= i - 1:
        return posterior_mean_pmf(post, j - i + 1)
    return 0.0


def transition_prob(row_pmf: Mapping[int, float], i: int, j: int) -> float:
    """Transition probability i -> j for a given arrivals pmf row."""
    if i <= 1:
        return row_pmf.get(j, 0.0)
    if j >= i - 1:
        return row_pmf.get(j - i + 1, 0.0)
    return 0.0


@dataclass(frozen=True)
class PredictivePmf:
    """Predictive law of the next mark given the current one."""

    post: DeltaDirichletPosterior
    current: int

    def prob(self, x: int) -> float:
        shift = 1 if self.current != 0 else 0
        return posterior_mean_pmf(self.post, x - self.current + shift)

    def support_start(self) -> int:
        return max(self.current - 1, 0)


def predictive_next_state(post: DeltaDirichletPosterior, current: int) -> PredictivePmf:
    if current < 0:
        raise ValueError("states are non-negative")
    return PredictivePmf(post, current)


def sample_posterior_pmf(
    post: DeltaDirichletPosterior,
    truncation: int,
    rng: np.random.Generator,
    method: str = "cells",
) -> dict[int, float]:
    """One realization of the random arrivals pmf from the Dirichlet process.

    method="cells" breaks the unit stick over the integer cells 0..truncation-1
    in order (Beta(mass_k, remaining mass) sticks), which is an exact draw of
    the process restricted to those cells; the leftover tail mass is folded
    into the last cell.  method="atoms" is the classical construction with
    `truncation` independent Beta(1, total_mass) sticks and atoms drawn from
    the normalized base; it needs truncation >> total_mass to approximate
    functionals and is kept for small-sample use.
    """
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    total = post.total_mass()
    counts = post.count_map()
    if method == "cells":
        masses = np.array(
            [post.alpha * post.base.pmf(k) + counts.get(k, 0) for k in range(truncation)]
        )
        tail = max(total - masses.sum(), 1e-300)
        weights = rng.dirichlet(np.append(np.maximum(masses, 1e-300), tail))
        pmf = {k: float(w) for k, w in enumerate(weights[:-1]) if w > 0.0}
        # tail cell folded into the last tracked atom
        last = truncation - 1
        pmf[last] = pmf.get(last, 0.0) + float(weights[-1])
        return pmf
    if method == "atoms":
        sticks = rng.beta(1.0, total, truncation)
        remain = np.cumprod(1.0 - sticks)
        weights = sticks * np.concatenate(([1.0], remain[:-1]))
        weights = weights / weights.sum()
        atoms = _sample_base_atoms(post, truncation, rng)
        pmf: dict[int, float] = {}
        for atom, w in zip(atoms, weights):
            pmf[int(atom)] = pmf.get(int(atom), 0.0) + float(w)
        return pmf
    raise ValueError(f"unknown sampling method {method!r}")


def _sample_base_atoms(
    post: DeltaDirichletPosterior, size: int, rng: np.random.Generator
) -> np.ndarray:
    """iid draws from the normalized posterior base measure."""
    total = post.total_mass()
    from_base = rng.random(size) < post.alpha / total
    atoms = post.base.sample(rng, size)
    observed = [k for k, c in post.counts for _ in range(c)]
    if observed:
        picks = rng.integers(0, len(observed), size)
        emp = np.asarray(observed)[picks]
        atoms = np.where(from_base, atoms, emp)
    return atoms


def pmf_pgf(pmf: Mapping[int, float], z: float) -> float:
    """Generating function of a finite pmf at z."""
    return sum(w * z**k for k, w in pmf.items())


class FinitePmfModel:
    """Generating-function model over an explicit finite pmf."""

    def __init__(self, pmf: Mapping[int, float]):
        if any(k < 0 or w < 0 for k, w in pmf.items()):
            raise ValueError("pmf must live on non-negative integers with weights >= 0")
        total = sum(pmf.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"pmf weights must sum to 1, got {total}")
        self._pmf = dict(pmf)

    def pmf(self, k: int) -> float:
        return self._pmf.get(k, 0.0)

    def pgf(self, z: float) -> float:
        return pmf_pgf(self._pmf, z)

    def pgf_prime(self, z: float) -> float:
        return sum(w * k * z ** (k - 1) for k, w in self._pmf.items() if k >= 1)

    def mean(self) -> float:
        return sum(k * w for k, w in self._pmf.items())

    def check_arg(self, z: float) -> None:
        pass  # polynomial: entire

    def domain_note(self) -> str:
        return "pgf argument unrestricted"


# ---------------------------------------------------------------------------
# Stationary transform and path likelihood


def pi_pgf(model, z: float) -> float:
    """Generating function of the stationary queue-length law.

    model must expose pgf(z) and mean() for the arrivals pmf; its mean is the
    utilization and must be < 1.  The removable singularity at z = 1 is
    handled by its analytic limit.
    """
    rho = model.mean()
    if rho >= 1.0:
        raise StabilityError(f"utilization {rho} >= 1; no stationary law")
    if abs(1.0 - z) < 1e-6:
        return 1.0
    a = model.pgf(z)
    return a * (1.0 - z) * (1.0 - rho) / (a - z)


def path_likelihood(row_pmf: Mapping[int, float], marks: Sequence[int]) -> float:
    """Log-probability of a mark string given its first symbol, under the
    homogeneous skip-free matrix built from the supplied arrivals pmf row."""
    require_dss(marks)
    total = 0.0
    for i, j in zip(marks, marks[1:]):
        p = transition_prob(row_pmf, i, j)
        if p <= 0.0:
            return -math.inf
        total += math.log(p)
    return total
