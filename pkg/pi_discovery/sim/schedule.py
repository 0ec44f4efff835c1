"""
Beacon and scan-window schedules in integer nanoseconds.

A schedule is generated either on an ideal clock (exact multiples of the
intervals) or on a quantized sleep clock, where every interval is a whole
number of ticks and the accumulated error against the nominal interval is
kept below half a tick by stretching or shortening single intervals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
import numpy.typing as npt

from ..error import ParameterError
from ..timebase import HardwareProfile, PiParams, PiParamsNs, TimeNs, ceil_div, seconds_to_ns

__all__ = [
    "BLE_DELAY_STEP",
    "Clock",
    "DeviceSchedule",
    "IdealClock",
    "QuantizedClock",
    "Role",
    "apply_bc",
    "gen_schedule",
    "horizon_for",
    "quantized_steps",
]

# BLE random delays are drawn in 625 µs steps
BLE_DELAY_STEP: TimeNs = 625_000

Times = npt.NDArray[np.int64]


class Role(str, enum.Enum):
    ADVERTISER = "advertiser"
    SCANNER = "scanner"
    BOTH = "both"

    @property
    def advertises(self) -> bool:
        return self is not Role.SCANNER

    @property
    def scans(self) -> bool:
        return self is not Role.ADVERTISER


@dataclass(frozen=True)
class IdealClock:
    pass


@dataclass(frozen=True)
class QuantizedClock:
    f_clk: float = 32768.0
    q_correction: bool = True
    ds_extension_ticks: int = 5

    def __post_init__(self) -> None:
        if not self.f_clk > 0:
            raise ParameterError(f"f_clk must be positive, got {self.f_clk!r}")
        if self.ds_extension_ticks < 0:
            raise ParameterError("ds_extension_ticks must be non-negative")


Clock = IdealClock | QuantizedClock


@dataclass(eq=False)
class DeviceSchedule:
    """Transmissions and reception windows of one device.

    `beacons` are start times, strictly increasing. `windows` has one
    (start, length) row per scan window, non-overlapping and increasing.
    """

    beacons: Times
    windows: npt.NDArray[np.int64]
    da: TimeNs
    phase_scan: TimeNs = 0
    phase_adv: TimeNs = 0
    clock: Clock = field(default_factory=IdealClock)
    role: Role = Role.BOTH
    horizon: TimeNs = 0

    @property
    def window_starts(self) -> Times:
        return self.windows[:, 0]

    @property
    def window_ends(self) -> Times:
        return self.windows[:, 0] + self.windows[:, 1]


# ─── Quantized clock ─────────────────────────────────────────────────────────


def quantized_steps(interval: TimeNs, f_clk: float, count: int, q_correction: bool = True) -> list[int]:
    """Tick counts of `count` consecutive realizations of a nominal interval.

    With correction the accumulated error Q (in ticks) stays within ±½:
    an interval is shortened by one tick when Q would exceed ½ and
    lengthened when it would drop below −½. Without correction every
    interval is the nearest tick count, and the error piles up.
    """
    f = Fraction(f_clk)
    # exact tick ratio r = interval·f/1e9 as num/den
    num = interval * f.numerator
    den = 1_000_000_000 * f.denominator
    base = (2 * num + den) // (2 * den)
    if not q_correction:
        return [base] * count
    steps = []
    q = 0  # Q·den
    for _ in range(count):
        q += base * den - num
        step = base
        if 2 * q > den:
            step, q = base - 1, q - den
        elif 2 * q < -den:
            step, q = base + 1, q + den
        steps.append(step)
    return steps


def _ticks_to_ns(ticks: npt.NDArray[np.int64], f_clk: float) -> Times:
    f = Fraction(f_clk)
    a, b = f.numerator, f.denominator
    return (2 * ticks * 1_000_000_000 * b + a) // (2 * a)


def _ns_to_ticks(t: TimeNs, f_clk: float) -> int:
    f = Fraction(f_clk)
    return int((2 * t * f.numerator + 1_000_000_000 * f.denominator) // (2_000_000_000 * f.denominator))


# ─── Generation ──────────────────────────────────────────────────────────────


def _ideal_train(
    phase: TimeNs,
    interval: TimeNs,
    first: int,
    horizon: TimeNs,
    rng: np.random.Generator | None = None,
    random_delay_max: TimeNs | None = None,
) -> Times:
    count = max(0, (horizon - phase) // interval + 1 - first)
    if not random_delay_max:
        t = phase + np.arange(first, first + count, dtype=np.int64) * interval
        return t[t < horizon]
    assert rng is not None
    steps = rng.integers(0, random_delay_max // BLE_DELAY_STEP + 1, size=count) * BLE_DELAY_STEP
    gaps = interval + steps[:-1]
    t = phase + np.concatenate(([first * interval], first * interval + np.cumsum(gaps))).astype(np.int64)
    return t[t < horizon]


def _quantized_train(
    phase: TimeNs, interval: TimeNs, first: int, horizon: TimeNs, clock: QuantizedClock
) -> Times:
    count = max(0, (horizon - phase) // interval + 2 - first)
    steps = quantized_steps(interval, clock.f_clk, count, clock.q_correction)
    start = _ns_to_ticks(phase, clock.f_clk) + first * (steps[0] if steps else 0)
    ticks = start + np.concatenate(([0], np.cumsum(steps[:-1], dtype=np.int64))).astype(np.int64)
    t = _ticks_to_ns(ticks, clock.f_clk)
    return t[t < horizon]


def gen_schedule(
    params: PiParams | PiParamsNs,
    hw: HardwareProfile,
    clock: Clock | None = None,
    phases: tuple[TimeNs, TimeNs] = (0, 0),
    horizon: TimeNs | None = None,
    *,
    role: Role = Role.BOTH,
    rng: np.random.Generator | None = None,
    random_delay_max: TimeNs | None = None,
) -> DeviceSchedule:
    """Schedule of one device from time 0 up to `horizon`.

    `phases` is (phase_scan, phase_adv). Windows start at
    phase_scan + j·Ts for j ≥ −1, so a window already open at time 0 is
    included. When ds ≥ Ts the device scans continuously. Beacons start
    at phase_adv + i·Ta, i ≥ 0; with `random_delay_max` every interval is
    lengthened by a uniform multiple of 625 µs drawn from `rng`.

    Blocking compensation is not applied here, see `apply_bc`.
    """
    clock = clock or IdealClock()
    p = params.to_ns() if isinstance(params, PiParams) else params
    phase_scan, phase_adv = phases
    if horizon is None:
        horizon = seconds_to_ns(35.0)
    if random_delay_max and rng is None:
        raise ParameterError("a random delay needs an rng")

    if role.advertises:
        if isinstance(clock, QuantizedClock):
            beacons = _quantized_train(phase_adv, p.ta, 0, horizon, clock)
        else:
            beacons = _ideal_train(phase_adv, p.ta, 0, horizon, rng, random_delay_max)
    else:
        beacons = np.empty(0, dtype=np.int64)

    if not role.scans:
        windows = np.empty((0, 2), dtype=np.int64)
    elif p.ds >= p.ts:
        windows = np.array([[phase_scan - p.ts, horizon + 2 * p.ts]], dtype=np.int64)
    else:
        if isinstance(clock, QuantizedClock):
            starts = _quantized_train(phase_scan, p.ts, -1, horizon, clock)
            length = _ns_to_ticks(p.ds, clock.f_clk) + clock.ds_extension_ticks
            length_ns = int(_ticks_to_ns(np.array([length], dtype=np.int64), clock.f_clk)[0])
        else:
            starts = _ideal_train(phase_scan, p.ts, -1, horizon)
            length_ns = p.ds
        starts = starts[starts + length_ns > 0]
        windows = np.column_stack((starts, np.full(starts.shape, length_ns, dtype=np.int64)))

    return DeviceSchedule(
        beacons=beacons,
        windows=windows,
        da=p.da,
        phase_scan=phase_scan,
        phase_adv=phase_adv,
        clock=clock,
        role=role,
        horizon=horizon,
    )


def apply_bc(schedule: DeviceSchedule, params: PiParams | PiParamsNs, hw: HardwareProfile) -> DeviceSchedule:
    """Blocking compensation: no beacons inside own scan windows.

    A regular beacon starting in (w − d_tr − d_a, w + ds + d_rt) of a window
    [w, w + ds) is suppressed. Compensation beacons are sent at w − d_tr − d_a
    and w + ds + d_rt unless a surviving beacon overlaps them.
    """
    if schedule.windows.shape[0] == 0 or not schedule.role.advertises:
        return schedule
    p = params.to_ns() if isinstance(params, PiParams) else params
    da = p.da
    drt, dtr = seconds_to_ns(hw.d_rt), seconds_to_ns(hw.d_tr)
    lo = schedule.window_starts - dtr - da
    hi = schedule.window_ends + drt

    b = schedule.beacons
    # latest blocked range starting before each beacon
    idx = np.searchsorted(lo, b, side="left") - 1
    blocked = (idx >= 0) & (b < hi[np.maximum(idx, 0)])
    kept = b[~blocked]

    comp = np.concatenate((lo, hi))
    comp.sort()
    comp = comp[(comp >= 0) & (comp < schedule.horizon)]
    # drop compensation beacons overlapping a surviving regular beacon
    left = np.searchsorted(kept, comp - da, side="right")
    right = np.searchsorted(kept, comp + da, side="left")
    comp = comp[right == left]

    return replace(schedule, beacons=np.unique(np.concatenate((kept, comp))).astype(np.int64))


def horizon_for(dm_predicted: TimeNs, ts: TimeNs, timeout: TimeNs) -> TimeNs:
    """min(timeout, 1.2·dm + Ts)."""
    return min(timeout, ceil_div(12 * dm_predicted, 10) + ts)
