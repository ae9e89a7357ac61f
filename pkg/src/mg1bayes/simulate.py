"""Discrete-event generation of the marked departure process.

The queue is advanced at departure instants only: from a state (n, t) one
service time S is drawn, the Poisson arrivals A during S are drawn, and the
chain moves to (n + A - 1, t + S) when the system was busy or to
(A, t + I + S) with an extra exponential idle remainder I when it was empty.

Reproducibility: one seed spawns three independent substreams (service,
arrivals, idle).  Each step consumes exactly one variate from each stream
whether or not the idle draw is used, so paths are bit-stable under
refactoring of the consumption logic.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import CorruptDataError, StabilityError
from .service import ServiceDist

_BLOCK = 1 << 15

DEPARTURE_HEADER = "t,n"


@dataclass(frozen=True)
class SimConfig:
    lam: float
    service: ServiceDist
    n: int
    warmup: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"arrival rate must be > 0, got {self.lam}")
        if self.n < 1:
            raise ValueError(f"need at least one departure, got n={self.n}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")

    def rho(self) -> float:
        return self.lam * self.service.mean()


@dataclass(frozen=True)
class MarkedDeparture:
    """One observation: departure epoch and queue length left behind."""

    t: float
    n: int


@dataclass(frozen=True)
class DeparturePath:
    """A simulated run; times and marks are parallel arrays."""

    times: np.ndarray
    marks: np.ndarray
    config: SimConfig

    def __len__(self) -> int:
        return len(self.times)

    def record(self, i: int) -> MarkedDeparture:
        return MarkedDeparture(float(self.times[i]), int(self.marks[i]))

    def __iter__(self):
        return (self.record(i) for i in range(len(self)))

    def interdeparture_times(self) -> np.ndarray:
        return np.diff(self.times)


def sample_arrivals_during_service(
    service_time: float, lam: float, rng: np.random.Generator
) -> int:
    """Number of Poisson(lam) arrivals within one realized service time."""
    if service_time <= 0 or lam <= 0:
        raise ValueError("service_time and lam must be > 0")
    return int(rng.poisson(lam * service_time))


def embedded_step(
    state: tuple[int, float], config: SimConfig, rng: np.random.Generator
) -> tuple[int, float]:
    """Advance the chain one departure.

    Draw order: service time, arrivals, then (only from an empty system) the
    idle remainder.
    """
    n, t = state
    s = float(config.service.sample(rng, 1)[0])
    a = sample_arrivals_during_service(s, config.lam, rng)
    if n == 0:
        idle = rng.exponential(1.0 / config.lam)
        return a, t + idle + s
    return n + a - 1, t + s


def simulate_path(config: SimConfig) -> DeparturePath:
    """Simulate `config.n` departures after discarding `config.warmup`.

    Rejects unstable parameter sets; deterministic given the seed.
    """
    rho = config.rho()
    if rho >= 1.0:
        raise StabilityError(
            f"utilization rho = {rho!r} >= 1; the system has no steady state"
        )
    svc_ss, arr_ss, idle_ss = np.random.SeedSequence(config.seed).spawn(3)
    svc_rng = np.random.default_rng(svc_ss)
    arr_rng = np.random.default_rng(arr_ss)
    idle_rng = np.random.default_rng(idle_ss)

    total = config.warmup + config.n
    times = np.empty(config.n)
    marks = np.empty(config.n, dtype=np.int64)
    n, t = 0, 0.0
    done = 0
    while done < total:
        block = min(_BLOCK, total - done)
        service = config.service.sample(svc_rng, block)
        arrivals = arr_rng.poisson(config.lam * service)
        idles = idle_rng.exponential(1.0 / config.lam, block)
        for j in range(block):
            if n == 0:
                t += idles[j] + service[j]
                n = int(arrivals[j])
            else:
                t += service[j]
                n = n + int(arrivals[j]) - 1
            k = done + j
            if k >= config.warmup:
                times[k - config.warmup] = t
                marks[k - config.warmup] = n
        done += block
    path = DeparturePath(times, marks, config)
    _check_path(path)
    return path


def _check_path(path: DeparturePath) -> None:
    if np.any(np.diff(path.times) <= 0):
        raise AssertionError("departure times must be strictly increasing")
    if np.any(np.diff(path.marks) < -1):
        raise AssertionError("marks must be down-skip-free")


def write_departures(path: DeparturePath, stream: io.TextIOBase) -> None:
    """Emit the departure file: header then one 't,n' record per line,
    with times in full round-trip decimal precision."""
    stream.write(DEPARTURE_HEADER + "\n")
    for i in range(len(path)):
        stream.write(f"{float(path.times[i])!r},{int(path.marks[i])}\n")


def read_departures(stream: io.TextIOBase) -> tuple[np.ndarray, np.ndarray]:
    """Parse a departure file back into (times, marks) arrays.

    Raises CorruptDataError on format violations, non-increasing times, or a
    mark sequence that is not down-skip-free.
    """
    header = stream.readline().strip()
    if header != DEPARTURE_HEADER:
        raise CorruptDataError(f"expected header {DEPARTURE_HEADER!r}, got {header!r}")
    times: list[float] = []
    marks: list[int] = []
    for lineno, line in enumerate(stream, start=2):
        line = line.strip()
        if not line:
            continue
        try:
            t_str, n_str = line.split(",")
            times.append(float(t_str))
            marks.append(int(n_str))
        except ValueError as exc:
            raise CorruptDataError(f"malformed record on line {lineno}: {line!r}") from exc
        if marks[-1] < 0:
            raise CorruptDataError(f"negative mark on line {lineno}")
    t_arr = np.asarray(times)
    n_arr = np.asarray(marks, dtype=np.int64)
    if len(t_arr) > 1:
        if np.any(np.diff(t_arr) <= 0):
            raise CorruptDataError("departure times are not strictly increasing")
        if np.any(np.diff(n_arr) < -1):
            raise CorruptDataError("mark sequence is not down-skip-free")
    return t_arr, n_arr
