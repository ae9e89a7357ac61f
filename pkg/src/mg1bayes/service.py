"""Service-time distribution families and the arrival law they induce.

Supported families: Exponential, Erlang, Deterministic, HyperExponential.
Each provides moments, sampling, the Laplace-Stieltjes transform (LST)
``lst(s) = E[exp(-s*S)]`` and the closed-form law of the number of Poisson
arrivals falling inside one service time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PgfDomainError


class ServiceDist:
    """Base class for service-time distributions."""

    def mean(self) -> float:
        raise NotImplementedError

    def var(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def lst(self, s: float) -> float:
        """Laplace-Stieltjes transform at s (valid for s > -lst_pole())."""
        raise NotImplementedError

    def lst_prime(self, s: float) -> float:
        """Derivative of the LST at s."""
        raise NotImplementedError

    def lst_pole(self) -> float:
        """The LST is finite for arguments s > -lst_pole()."""
        raise NotImplementedError

    def pdf(self, t: float) -> float:
        """Density at t; only defined for absolutely continuous families."""
        raise NotImplementedError

    def has_density(self) -> bool:
        return True

    def sf(self, t: float) -> float:
        """Survival function P(S > t)."""
        raise NotImplementedError

    def arrival_pmf(self, lam: float, k: int) -> float:
        """P(k Poisson(lam) arrivals during one service), closed form."""
        raise NotImplementedError

    def spec(self) -> str:
        """Round-trippable text form (see parse_service)."""
        raise NotImplementedError


def _geometric_arrival_pmf(lam: float, mu: float, k: int) -> float:
    # arrivals during an Exponential(mu) service are geometric
    q = lam / (lam + mu)
    return (1.0 - q) * q**k


@dataclass(frozen=True)
class Exponential(ServiceDist):
    mu: float

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError(f"exponential rate must be > 0, got {self.mu}")

    def mean(self) -> float:
        return 1.0 / self.mu

    def var(self) -> float:
        return 1.0 / self.mu**2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.exponential(1.0 / self.mu, size)

    def lst(self, s: float) -> float:
        return self.mu / (self.mu + s)

    def lst_prime(self, s: float) -> float:
        return -self.mu / (self.mu + s) ** 2

    def lst_pole(self) -> float:
        return self.mu

    def pdf(self, t: float) -> float:
        return self.mu * math.exp(-self.mu * t) if t >= 0 else 0.0

    def sf(self, t: float) -> float:
        return math.exp(-self.mu * t) if t >= 0 else 1.0

    def arrival_pmf(self, lam: float, k: int) -> float:
        return _geometric_arrival_pmf(lam, self.mu, k)

    def spec(self) -> str:
        return f"exp:{self.mu!r}"


@dataclass(frozen=True)
class Erlang(ServiceDist):
    k: int
    mu: float

    def __post_init__(self):
        if self.k < 1 or self.k != int(self.k):
            raise ValueError(f"erlang shape must be a positive integer, got {self.k}")
        if self.mu <= 0:
            raise ValueError(f"erlang rate must be > 0, got {self.mu}")

    def mean(self) -> float:
        return self.k / self.mu

    def var(self) -> float:
        return self.k / self.mu**2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.gamma(self.k, 1.0 / self.mu, size)

    def lst(self, s: float) -> float:
        return (self.mu / (self.mu + s)) ** self.k

    def lst_prime(self, s: float) -> float:
        return -self.k * self.mu**self.k / (self.mu + s) ** (self.k + 1)

    def lst_pole(self) -> float:
        return self.mu

    def pdf(self, t: float) -> float:
        if t < 0:
            return 0.0
        return math.exp(
            self.k * math.log(self.mu)
            + (self.k - 1) * math.log(t if t > 0 else 1e-300)
            - self.mu * t
            - math.lgamma(self.k)
        )

    def sf(self, t: float) -> float:
        if t <= 0:
            return 1.0
        # Poisson tail identity for integer shape
        acc = 0.0
        term = math.exp(-self.mu * t)
        for j in range(self.k):
            acc += term
            term *= self.mu * t / (j + 1)
        return acc

    def arrival_pmf(self, lam: float, k: int) -> float:
        # negative binomial: k failures (arrivals) before the k-th stage completes
        q = lam / (lam + self.mu)
        return math.comb(k + self.k - 1, k) * (1.0 - q) ** self.k * q**k

    def spec(self) -> str:
        return f"erlang:{self.k},{self.mu!r}"


@dataclass(frozen=True)
class Deterministic(ServiceDist):
    d: float

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError(f"deterministic service time must be > 0, got {self.d}")

    def mean(self) -> float:
        return self.d

    def var(self) -> float:
        return 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.d)

    def lst(self, s: float) -> float:
        return math.exp(-s * self.d)

    def lst_prime(self, s: float) -> float:
        return -self.d * math.exp(-s * self.d)

    def lst_pole(self) -> float:
        return math.inf

    def has_density(self) -> bool:
        return False

    def sf(self, t: float) -> float:
        return 1.0 if t < self.d else 0.0

    def arrival_pmf(self, lam: float, k: int) -> float:
        m = lam * self.d
        return math.exp(-m + k * math.log(m) - math.lgamma(k + 1)) if k else math.exp(-m)

    def spec(self) -> str:
        return f"det:{self.d!r}"


@dataclass(frozen=True)
class HyperExponential(ServiceDist):
    weights: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.rates) or not self.weights:
            raise ValueError("hyperexponential needs matching, non-empty weights and rates")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"weights must be >= 0 and sum to 1, got {self.weights}")
        if any(mu <= 0 for mu in self.rates):
            raise ValueError(f"rates must be > 0, got {self.rates}")

    def mean(self) -> float:
        return sum(w / mu for w, mu in zip(self.weights, self.rates))

    def var(self) -> float:
        second = sum(2.0 * w / mu**2 for w, mu in zip(self.weights, self.rates))
        return second - self.mean() ** 2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        comp = rng.choice(len(self.weights), p=self.weights, size=size)
        raw = rng.exponential(1.0, size)
        return raw / np.asarray(self.rates)[comp]

    def lst(self, s: float) -> float:
        return sum(w * mu / (mu + s) for w, mu in zip(self.weights, self.rates))

    def lst_prime(self, s: float) -> float:
        return sum(-w * mu / (mu + s) ** 2 for w, mu in zip(self.weights, self.rates))

    def lst_pole(self) -> float:
        return min(self.rates)

    def pdf(self, t: float) -> float:
        if t < 0:
            return 0.0
        return sum(w * mu * math.exp(-mu * t) for w, mu in zip(self.weights, self.rates))

    def sf(self, t: float) -> float:
        if t <= 0:
            return 1.0
        return sum(w * math.exp(-mu * t) for w, mu in zip(self.weights, self.rates))

    def arrival_pmf(self, lam: float, k: int) -> float:
        return sum(
            w * _geometric_arrival_pmf(lam, mu, k)
            for w, mu in zip(self.weights, self.rates)
        )

    def spec(self) -> str:
        parts = ";".join(f"{w!r},{mu!r}" for w, mu in zip(self.weights, self.rates))
        return f"hyper:{parts}"


def parse_service(text: str) -> ServiceDist:
    """Parse a service spec: exp:<mu> | erlang:<k>,<mu> | det:<d> | hyper:<w,mu>[;<w,mu>...]."""
    family, _, body = text.partition(":")
    try:
        if family == "exp":
            return Exponential(float(body))
        if family == "erlang":
            k_str, mu_str = body.split(",")
            return Erlang(int(k_str), float(mu_str))
        if family == "det":
            return Deterministic(float(body))
        if family == "hyper":
            weights, rates = [], []
            for part in body.split(";"):
                w_str, mu_str = part.split(",")
                weights.append(float(w_str))
                rates.append(float(mu_str))
            return HyperExponential(tuple(weights), tuple(rates))
    except ValueError:
        raise
    except Exception as exc:
        raise ValueError(f"malformed service spec {text!r}") from exc
    raise ValueError(f"unknown service family {family!r} in {text!r}")


class TrueArrivalPmf:
    """Exact arrivals-per-service law for a known service distribution.

    Implements the generating-function model interface used by the transform
    estimators (pmf, pgf, pgf_prime, mean, check_arg), with the pgf obtained
    from the service LST: pgf(w) = lst(lam*(1-w)).
    """

    def __init__(self, service: ServiceDist, lam: float):
        if lam <= 0:
            raise ValueError(f"arrival rate must be > 0, got {lam}")
        self.service = service
        self.lam = lam

    def pmf(self, k: int) -> float:
        return self.service.arrival_pmf(self.lam, k) if k >= 0 else 0.0

    def mean(self) -> float:
        return self.lam * self.service.mean()

    def max_arg(self) -> float:
        return 1.0 + self.service.lst_pole() / self.lam

    def check_arg(self, w: float) -> None:
        bound = self.max_arg()
        if w >= bound - 1e-12:
            raise PgfDomainError(w, bound)

    def pgf(self, w: float) -> float:
        self.check_arg(w)
        return self.service.lst(self.lam * (1.0 - w))

    def pgf_prime(self, w: float) -> float:
        self.check_arg(w)
        return -self.lam * self.service.lst_prime(self.lam * (1.0 - w))

    def domain_note(self) -> str:
        return f"pgf argument < {self.max_arg()!r}"
