"""Conjugate Gamma-Exponential inference for the departure rate.

The interdeparture times of a stable queue are exponential with the arrival
rate, so a Gamma(shape, rate) prior on that rate updates in closed form.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GammaPosterior:
    """Gamma law in (shape, rate) convention: density ~ x^(a-1) exp(-b x)."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError(f"gamma parameters must be > 0, got ({self.a}, {self.b})")


def update(prior: GammaPosterior, durations: Sequence[float]) -> GammaPosterior:
    """Absorb interdeparture times: (a, b) -> (a + n, b + sum d_i).

    Associative over data splits; rejects non-positive durations.
    """
    total = 0.0
    count = 0
    for d in durations:
        if d <= 0:
            raise ValueError(f"interdeparture times must be > 0, got {d}")
        total += float(d)
        count += 1
    if count == 0:
        return prior
    return GammaPosterior(prior.a + count, prior.b + total)


def posterior_mean(p: GammaPosterior) -> float:
    return p.a / p.b


def posterior_var(p: GammaPosterior) -> float:
    return p.a / p.b**2


def predictive_density(p: GammaPosterior, x: float) -> float:
    """Density of the next interdeparture time at x >= 0 (Lomax form)."""
    if x < 0:
        raise ValueError(f"durations are non-negative, got {x}")
    return p.a * p.b**p.a / (p.b + x) ** (p.a + 1.0)


def predictive_mean(p: GammaPosterior) -> float:
    """Mean of the next interdeparture time; needs shape > 1 to exist."""
    if p.a <= 1:
        raise ValueError(f"predictive mean undefined for shape {p.a} <= 1")
    return p.b / (p.a - 1.0)


def sample(p: GammaPosterior, rng: np.random.Generator, size: int) -> np.ndarray:
    """Posterior draws of the rate."""
    return rng.gamma(shape=p.a, scale=1.0 / p.b, size=size)
