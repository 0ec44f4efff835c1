"""
Monte Carlo discovery experiments.

Every trial draws its phases from its own counter-based generator keyed by
(master_seed, trial), so a trial's outcome does not depend on how trials are
split across workers or in which order they run.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat

import numpy as np
import numpy.typing as npt

from ..error import ParameterError
from ..multiint import bc_mean_beacon_rate
from ..timebase import HardwareProfile, PiParams, TimeNs, seconds_to_ns
from .detect import count_in_open, first_reception
from .oracle import FAILURE_FACTOR, analytic_dm
from .schedule import Clock, DeviceSchedule, IdealClock, Role, apply_bc, gen_schedule, horizon_for

__all__ = [
    "CollisionEstimate",
    "Mode",
    "MonteCarloResult",
    "ScenarioConfig",
    "SimOutcome",
    "cdf",
    "collision_monte_carlo",
    "collision_prob",
    "monte_carlo",
    "percentiles",
    "run_trial",
    "trial_rng",
]

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT: TimeNs = seconds_to_ns(35.0)
DEFAULT_CHUNK = 1000


class Mode(str, enum.Enum):
    # device 1 advertises, device 0 scans
    ONE_WAY = "oneway"
    # both devices advertise and scan; the slower direction counts
    TWO_WAY = "twoway"


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, trial])))


@dataclass(frozen=True)
class ScenarioConfig:
    params: PiParams
    hw: HardwareProfile = field(default_factory=HardwareProfile)
    mode: Mode = Mode.ONE_WAY
    n_devices: int = 2
    # per-device parameters; empty means every device runs `params`
    device_params: tuple[PiParams, ...] = ()
    timeout: TimeNs = DEFAULT_TIMEOUT
    trials: int = 1000
    master_seed: int = 0
    ble_random_delay: TimeNs | None = None
    clock: Clock = field(default_factory=IdealClock)
    dm_predicted: TimeNs | None = None

    def __post_init__(self) -> None:
        if self.n_devices < 2:
            raise ParameterError(f"need at least 2 devices, got {self.n_devices}")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.device_params and len(self.device_params) != self.n_devices:
            raise ParameterError(
                f"{len(self.device_params)} device parameter sets for {self.n_devices} devices"
            )
        if self.ble_random_delay is not None and self.ble_random_delay < 0:
            raise ParameterError("ble_random_delay must be non-negative")
        if not self.timeout > self.predicted_dm():
            raise ParameterError(
                f"timeout {self.timeout} ns must exceed the predicted latency {self.predicted_dm()} ns"
            )

    def params_of(self, device: int) -> PiParams:
        return self.device_params[device] if self.device_params else self.params

    def predicted_dm(self) -> TimeNs:
        return self.dm_predicted if self.dm_predicted is not None else analytic_dm(self.params)

    def horizon(self) -> TimeNs:
        return horizon_for(self.predicted_dm(), self.params.to_ns().ts, self.timeout)

    def role_of(self, device: int) -> Role:
        if self.mode is Mode.TWO_WAY:
            return Role.BOTH
        return Role.SCANNER if device == 0 else Role.ADVERTISER


@dataclass(frozen=True)
class SimOutcome:
    trial: int
    trial_seed: int
    latency_ab: TimeNs | None
    latency_ba: TimeNs | None
    failed: bool

    @property
    def latency(self) -> TimeNs | None:
        """One-way latency, or the slower direction in two-way runs."""
        if self.latency_ba is None:
            return self.latency_ab
        if self.latency_ab is None:
            return None
        return max(self.latency_ab, self.latency_ba)


def _schedules(cfg: ScenarioConfig, rng: np.random.Generator, horizon: TimeNs) -> list[DeviceSchedule]:
    out = []
    for device in range(cfg.n_devices):
        params = cfg.params_of(device)
        p = params.to_ns()
        role = cfg.role_of(device)
        # phases are drawn for every device so the draw order never depends on roles
        phases = (int(rng.integers(0, p.ts)), int(rng.integers(0, p.ta)))
        sched = gen_schedule(
            params,
            cfg.hw,
            cfg.clock,
            phases,
            horizon,
            role=role,
            rng=rng,
            random_delay_max=cfg.ble_random_delay if role.advertises else None,
        )
        if params.bc_enabled and role is Role.BOTH:
            sched = apply_bc(sched, params, cfg.hw)
        out.append(sched)
    return out


def run_trial(cfg: ScenarioConfig, trial: int) -> SimOutcome:
    seq = np.random.SeedSequence([cfg.master_seed, trial])
    rng = np.random.Generator(np.random.Philox(seq))
    scheds = _schedules(cfg, rng, cfg.horizon())
    a, b, rest = scheds[0], scheds[1], scheds[2:]
    ab = first_reception(a, b, cfg.hw, rest)
    ba = first_reception(b, a, cfg.hw, rest) if cfg.mode is Mode.TWO_WAY else None
    limit = FAILURE_FACTOR * cfg.predicted_dm()
    if cfg.mode is Mode.TWO_WAY:
        failed = ab is None or ba is None or max(ab, ba) > limit
    else:
        failed = ab is None or ab > limit
    return SimOutcome(
        trial=trial,
        trial_seed=int(seq.generate_state(1, np.uint64)[0]),
        latency_ab=ab,
        latency_ba=ba,
        failed=failed,
    )


def _run_chunk(cfg: ScenarioConfig, start: int, stop: int) -> list[SimOutcome]:
    return [run_trial(cfg, t) for t in range(start, stop)]


# ─── Aggregation ─────────────────────────────────────────────────────────────


def cdf(latencies: Sequence[TimeNs] | npt.NDArray[np.int64]) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.float64]]:
    """Empirical CDF as (sorted latencies, cumulative fractions)."""
    x = np.sort(np.asarray(latencies, dtype=np.int64))
    return x, np.arange(1, x.size + 1, dtype=np.float64) / max(x.size, 1)


def percentiles(latencies: Sequence[TimeNs] | npt.NDArray[np.int64], qs: Sequence[float] = (50, 95, 99)) -> dict[str, float]:
    x = np.asarray(latencies, dtype=np.float64)
    if x.size == 0:
        return {f"p{q:g}": math.nan for q in qs}
    return {f"p{q:g}": float(v) for q, v in zip(qs, np.percentile(x, qs), strict=True)}


@dataclass(frozen=True)
class MonteCarloResult:
    config: ScenarioConfig
    outcomes: list[SimOutcome]
    dm_predicted: TimeNs

    @property
    def failures(self) -> int:
        return sum(o.failed for o in self.outcomes)

    @property
    def failure_rate(self) -> float:
        return self.failures / len(self.outcomes)

    def latencies(self) -> npt.NDArray[np.int64]:
        """Latencies of all trials that found their partner."""
        return np.array([o.latency for o in self.outcomes if o.latency is not None], dtype=np.int64)

    @property
    def mean_latency(self) -> float:
        lat = self.latencies()
        return float(lat.mean()) if lat.size else math.nan

    def cdf(self) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.float64]]:
        return cdf(self.latencies())

    def percentiles(self) -> dict[str, float]:
        return percentiles(self.latencies())

    def binomial_sigma(self, p: float) -> float:
        """Standard deviation of the failure rate for a true rate `p`."""
        return math.sqrt(p * (1.0 - p) / len(self.outcomes))


def monte_carlo(
    cfg: ScenarioConfig, *, workers: int = 1, chunk_size: int = DEFAULT_CHUNK
) -> MonteCarloResult:
    """Run `cfg.trials` trials, in parallel when `workers` > 1.

    Outcomes are returned in trial order whatever the worker count.
    """
    bounds = [(s, min(s + chunk_size, cfg.trials)) for s in range(0, cfg.trials, chunk_size)]
    outcomes: list[SimOutcome] = []
    if workers <= 1 or len(bounds) == 1:
        for start, stop in bounds:
            outcomes.extend(_run_chunk(cfg, start, stop))
            logger.debug("monte_carlo: trials %d..%d done", start, stop)
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            starts, stops = zip(*bounds, strict=True)
            for part in executor.map(_run_chunk, repeat(cfg), starts, stops):
                outcomes.extend(part)
    result = MonteCarloResult(config=cfg, outcomes=outcomes, dm_predicted=cfg.predicted_dm())
    logger.info(
        "monte_carlo: %s n=%d trials=%d failures=%d (%.4f%%) mean=%.6f s",
        cfg.mode.value, cfg.n_devices, cfg.trials, result.failures,
        100 * result.failure_rate, result.mean_latency / 1e9,
    )
    return result


# ─── Collisions ──────────────────────────────────────────────────────────────


def collision_prob(n_devices: int, params: PiParams, hw: HardwareProfile) -> float:
    """Probability that a beacon overlaps one of n − 1 other devices' beacons.

    Other devices run at independent random phases, so each sends beacons at
    its phase-averaged rate: 1/Ta, or with blocking compensation the
    regular beacons that survive plus the compensation beacons. An overlap
    happens when two beacons start less than d_a apart.
    """
    if n_devices < 3:
        raise ParameterError(f"collisions need at least 3 devices, got {n_devices}")
    rate = bc_mean_beacon_rate(params, hw) if params.bc_enabled else 1.0 / params.ta
    return 1.0 - math.exp(-2 * (n_devices - 1) * params.da * rate)


@dataclass(frozen=True)
class CollisionEstimate:
    n_devices: int
    trials: int
    hits: int
    p_formula: float

    @property
    def p_hat(self) -> float:
        return self.hits / self.trials

    @property
    def sigma(self) -> float:
        return math.sqrt(self.p_formula * (1.0 - self.p_formula) / self.trials)


def _collision_chunk(
    n_devices: int, params: PiParams, hw: HardwareProfile, master_seed: int, start: int, stop: int
) -> int:
    p = params.to_ns()
    warmup = p.ts
    horizon = 3 * p.ts + 2 * p.ta
    hits = 0
    for trial in range(start, stop):
        rng = trial_rng(master_seed, trial)
        scheds = []
        for _ in range(n_devices):
            phases = (int(rng.integers(0, p.ts)), int(rng.integers(0, p.ta)))
            s = gen_schedule(params, hw, None, phases, horizon)
            scheds.append(apply_bc(s, params, hw) if params.bc_enabled else s)
        own = scheds[0].beacons
        t = own[np.searchsorted(own, warmup)]
        sent = np.array([t], dtype=np.int64)
        hit = any(
            count_in_open(s.beacons, sent - p.da, sent + p.da)[0] > 0 for s in scheds[1:]
        )
        hits += hit
    return hits


def collision_monte_carlo(
    n_devices: int,
    params: PiParams,
    hw: HardwareProfile,
    trials: int,
    *,
    master_seed: int = 0,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> CollisionEstimate:
    """Fraction of trials in which a beacon of device 0 overlaps another device's beacon."""
    p_formula = collision_prob(n_devices, params, hw)
    bounds = [(s, min(s + chunk_size, trials)) for s in range(0, trials, chunk_size)]
    if workers <= 1 or len(bounds) == 1:
        hits = sum(_collision_chunk(n_devices, params, hw, master_seed, a, b) for a, b in bounds)
    else:
        starts, stops = zip(*bounds, strict=True)
        with ProcessPoolExecutor(max_workers=workers) as executor:
            hits = sum(
                executor.map(
                    _collision_chunk,
                    repeat(n_devices), repeat(params), repeat(hw), repeat(master_seed), starts, stops,
                )
            )
    est = CollisionEstimate(n_devices=n_devices, trials=trials, hits=hits, p_formula=p_formula)
    logger.info(
        "collisions: n=%d trials=%d p_hat=%.4f formula=%.4f", n_devices, trials, est.p_hat, p_formula
    )
    return est
