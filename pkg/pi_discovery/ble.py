"""
SingleInt-BLE: SingleInt parameters for BLE radios.

BLE adds a random delay of up to 10 ms to every advertising interval, sends
each beacon on three channels and, for connectable advertising, listens for
a response after every beacon. The scan window is extended by the largest
delay plus the three-channel burst so that consecutive packets still fall
into one effective window.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import brentq

from .error import InfeasibleError, ParameterError
from .multiint import MultiIntSolution, multiint_solve
from .singleint import singleint_m_opt
from .timebase import DutyCycle, HardwareProfile, PiParams, Scheme, check_eta

__all__ = [
    "BLE_UNIT",
    "BleMode",
    "BleOverheads",
    "BleSolution",
    "MultiIntBleReport",
    "ble_air_time",
    "ble_compliance",
    "ble_config_json",
    "ble_duty_cycle",
    "ble_solve",
    "ble_vs_ideal_ratio",
    "burst_span",
    "multiint_ble_report",
]

logger = logging.getLogger(__name__)

# advertising and scan settings are multiples of 0.625 ms
BLE_UNIT = 625e-6

ETA_JOINT_RANGE = (0.0215, 0.10)
TA_RANGE = (20e-3, 10.24)
TS_DS_RANGE = (2.5e-3, 10.24)

_ROOT_BRACKET = (1e-9, 1e3)

# measured nRF51822 overheads
MEASURED_O_A = 619e-6
MEASURED_O_A2 = 143e-6
MEASURED_D_E = 1e-3
# gap between the packets of one three-channel burst
CHANNEL_GAP = 150e-6


class BleMode(str, enum.Enum):
    # non-connectable advertiser, pure scanner
    UNIDIR = "unidir"
    # connectable advertiser listening for a response after every beacon; the
    # connection that follows makes the discovery mutual
    BIDIR = "bidir"


@dataclass(frozen=True)
class BleOverheads:
    """Time-equivalent BLE overheads in seconds.

    Defaults are measured on an nRF51822; `air_time` (payload plus PHY
    framing) is the beacon length d_a. Without an explicit `d_e` the
    measured burst span goes with the measured o_a and o_a2; once either is
    overridden, d_e is three beacons plus the two inter-channel gaps.
    """

    random_delay_max: float = 10e-3
    d_e: float | None = None
    o_a: float = MEASURED_O_A
    o_a2: float = MEASURED_O_A2
    payload_bytes: int = 30
    bitrate: float = 1e6
    framing: float = 80e-6

    def __post_init__(self) -> None:
        if self.payload_bytes < 0:
            raise ParameterError(f"payload_bytes must be non-negative, got {self.payload_bytes}")
        if not self.bitrate > 0:
            raise ParameterError(f"bitrate must be positive, got {self.bitrate!r}")
        if not self.air_time > 0:
            raise ParameterError("beacon air time must be positive")
        for name in ("random_delay_max", "d_e", "o_a", "o_a2", "framing"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ParameterError(f"{name} must be non-negative, got {value!r}")

    @classmethod
    def zero(cls, payload_bytes: int = 30, bitrate: float = 1e6) -> BleOverheads:
        """No random delay, no burst, no overheads: an ideal PI protocol."""
        return cls(
            random_delay_max=0.0,
            d_e=0.0,
            o_a=0.0,
            o_a2=0.0,
            payload_bytes=payload_bytes,
            bitrate=bitrate,
            framing=0.0,
        )

    @property
    def burst(self) -> float:
        """d_e: the explicit value, the measured one, or the span derived from the air time."""
        if self.d_e is not None:
            return self.d_e
        if self.o_a == MEASURED_O_A and self.o_a2 == MEASURED_O_A2:
            return MEASURED_D_E
        return burst_span(self.air_time)

    @property
    def o_s(self) -> float:
        """Scan-window extension: largest random delay plus the burst span."""
        return self.random_delay_max + self.burst

    @property
    def air_time(self) -> float:
        return ble_air_time(self)


def ble_air_time(overheads: BleOverheads) -> float:
    """payload·8/bitrate + framing."""
    return overheads.payload_bytes * 8 / overheads.bitrate + overheads.framing


def burst_span(air_time: float) -> float:
    """Three packets on channels 37, 38 and 39 with a gap between each."""
    return 3 * air_time + 2 * CHANNEL_GAP


def _beacon_overhead(overheads: BleOverheads, mode: BleMode) -> float:
    if mode is BleMode.BIDIR:
        return overheads.o_a + overheads.o_a2
    return overheads.o_a


def ble_duty_cycle(
    params: PiParams,
    overheads: BleOverheads,
    mode: BleMode = BleMode.UNIDIR,
    *,
    alpha: float = 1.0,
    mean_delay_shift: bool = False,
) -> DutyCycle:
    """Overhead-inclusive joint duty-cycle of advertiser plus scanner.

    `params.ds` is the unextended window. In bidirectional mode the
    advertiser pays o_a2 per beacon on top of o_a.
    """
    ta = params.ta + (overheads.random_delay_max / 2 if mean_delay_shift else 0.0)
    return (params.ds + overheads.o_s) / params.ts + alpha * (
        params.da + _beacon_overhead(overheads, mode)
    ) / ta


@dataclass(frozen=True)
class BleSolution:
    # ds is the configured (extended) window
    params: PiParams
    # ds is the unextended window d_s,core
    core_params: PiParams
    m: int
    mode: BleMode
    dm: float
    eta_joint: float
    # advertiser and scanner shares, summing to eta_joint
    eta_advertiser: float
    eta_scanner: float
    overheads: BleOverheads


def _solve_gap(
    m: int, eta: float, overheads: BleOverheads, mode: BleMode, alpha: float, shift: bool
) -> float | None:
    da = overheads.air_time
    n = m + 1
    ta_shift = overheads.random_delay_max / 2 if shift else 0.0
    beacon = da + _beacon_overhead(overheads, mode)

    def excess(g: float) -> float:
        return (g + da + overheads.o_s) / (n * g) + alpha * beacon / (g + ta_shift) - eta

    lo, hi = _ROOT_BRACKET
    # the excess falls monotonically towards 1/(M+1) − η
    if excess(hi) >= 0:
        return None
    return float(brentq(excess, lo, hi, xtol=1e-15, rtol=1e-13, maxiter=200))


def ble_solve(
    eta_joint: DutyCycle,
    overheads: BleOverheads | None = None,
    mode: BleMode = BleMode.UNIDIR,
    hw: HardwareProfile | None = None,
    *,
    allow_out_of_range: bool = False,
    mean_delay_shift: bool = False,
) -> BleSolution:
    """SingleInt-BLE parameters for joint duty-cycle `eta_joint`.

    Candidate values of M around the overhead-free optimum are each solved
    for the advertising interval by root finding on the overhead-inclusive
    duty-cycle; the M with the lowest worst-case latency wins, the smaller M
    on ties.

    Raises:
        ParameterError: `eta_joint` lies outside [2.15 %, 10 %] and
            `allow_out_of_range` is not set.
        InfeasibleError: no M yields a core scan window of at least d_s_min.
    """
    overheads = overheads or BleOverheads()
    hw = hw or HardwareProfile()
    eta_joint = check_eta(eta_joint, "eta_joint")
    lo_eta, hi_eta = ETA_JOINT_RANGE
    if not allow_out_of_range and not lo_eta - 1e-12 <= eta_joint <= hi_eta + 1e-12:
        raise ParameterError(
            f"eta_joint={eta_joint} outside the supported range [{lo_eta}, {hi_eta}]"
        )
    eta = eta_joint
    da = overheads.air_time

    guess = singleint_m_opt(eta)
    first = max(math.ceil(guess / 2), math.floor(1.0 / eta))
    last = 2 * math.ceil(guess) + 2

    best: tuple[float, int, float] | None = None
    for m in range(max(first, 1), last + 1):
        if not (m + 1) * eta > 1.0:
            continue
        g = _solve_gap(m, eta, overheads, mode, hw.alpha, mean_delay_shift)
        if g is None or g + da < hw.d_s_min:
            continue
        dm = (m + 1) * g + da + overheads.random_delay_max
        if best is None or dm < best[0]:
            best = (dm, m, g)
    if best is None:
        raise InfeasibleError(
            f"no M yields a scan window of at least {hw.d_s_min * 1e3:g} ms at eta_joint={eta_joint}",
            constraint="ds_min",
        )

    dm, m, g = best
    core = PiParams(ta=g, ts=(m + 1) * g, ds=g + da, da=da, scheme=Scheme.SINGLE_INT, m=m)
    params = core.replace(ds=core.ds + overheads.o_s)
    logger.debug(
        "ble_solve: %s eta_j=%g M=%d Ta=%.6f Ts=%.6f ds=%.6f dm=%.6f",
        mode.value, eta_joint, m, params.ta, params.ts, params.ds, dm,
    )
    return BleSolution(
        params=params,
        core_params=core,
        m=m,
        mode=mode,
        dm=dm,
        eta_joint=eta_joint,
        eta_advertiser=eta_joint - (core.ds + overheads.o_s) / core.ts,
        eta_scanner=(core.ds + overheads.o_s) / core.ts,
        overheads=overheads,
    )


def ble_vs_ideal_ratio(
    eta_grid: Iterable[float],
    overheads: BleOverheads | None = None,
    mode: BleMode = BleMode.UNIDIR,
    hw: HardwareProfile | None = None,
) -> float:
    """Mean over the grid of dm(BLE) / dm(overhead-free SingleInt).

    The reference spends the same joint duty-cycle. For bidirectional
    discovery it is the symmetric protocol, so each device gets half of it.
    """
    overheads = overheads or BleOverheads()
    ideal = BleOverheads.zero(overheads.payload_bytes, overheads.bitrate)
    share = 0.5 if mode is BleMode.BIDIR else 1.0
    ratios = [
        ble_solve(e, overheads, mode, hw, allow_out_of_range=True).dm
        / ble_solve(share * e, ideal, BleMode.UNIDIR, hw, allow_out_of_range=True).dm
        for e in eta_grid
    ]
    if not ratios:
        raise ParameterError("empty duty-cycle grid")
    return float(np.mean(ratios))


# ─── Emitted configuration ───────────────────────────────────────────────────


def _units(t: float, up: bool) -> float:
    x = t / BLE_UNIT
    n = math.ceil(x - 1e-9) if up else math.floor(x + 1e-9)
    return n * BLE_UNIT


def _emitted(solution: BleSolution, rounding: bool) -> tuple[float, float, float]:
    p = solution.params
    if not rounding:
        return p.ta, p.ts, p.ds
    # shorter intervals and a longer window only tighten the latency guarantee
    return _units(p.ta, up=False), _units(p.ts, up=False), _units(p.ds, up=True)


def ble_config_json(solution: BleSolution, rounding: bool = True) -> dict[str, Any]:
    """The configuration a BLE stack is given, times in ms.

    With `rounding` the values sit on the 0.625 ms grid; `eta_joint_emitted`
    then reports the duty-cycle the rounded values actually cost.
    """
    ta, ts, ds = _emitted(solution, rounding)
    o = solution.overheads
    emitted = PiParams(ta=ta, ts=ts, ds=ds - o.o_s, da=solution.params.da)
    return {
        "advInterval_ms": ta * 1e3,
        "scanInterval_ms": ts * 1e3,
        "scanWindow_ms": ds * 1e3,
        "mode": solution.mode.value,
        "predicted_dm_ms": solution.dm * 1e3,
        "eta_joint": solution.eta_joint,
        "eta_joint_emitted": ble_duty_cycle(emitted, o, solution.mode),
        "eta_advertiser": solution.eta_advertiser,
        "eta_scanner": solution.eta_scanner,
        "M": solution.m,
        "rounded": rounding,
    }


def ble_compliance(solution: BleSolution, rounding: bool = True) -> list[str]:
    """Values outside the ranges the S110 SoftDevice accepts.

    Ta must lie in [20 ms, 10.24 s], Ts and ds in [2.5 ms, 10.24 s].
    """
    violations = _range_violations(*_emitted(solution, rounding))
    for v in violations:
        logger.warning("ble: eta_joint=%g %s: %s", solution.eta_joint, solution.mode.value, v)
    return violations


def _range_violations(ta: float, ts: float, ds: float) -> list[str]:
    violations = []
    for name, value, (lo, hi) in (
        ("advInterval", ta, TA_RANGE),
        ("scanInterval", ts, TS_DS_RANGE),
        ("scanWindow", ds, TS_DS_RANGE),
    ):
        if not lo - 1e-12 <= value <= hi + 1e-12:
            violations.append(f"{name}={value * 1e3:.3f} ms outside [{lo * 1e3:g} ms, {hi * 1e3:g} ms]")
    return violations


# ─── MultiInt on BLE ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class MultiIntBleReport:
    solution: MultiIntSolution
    n: int
    random_delay_cap: float
    ds_extended: float
    # overhead-inclusive duty-cycle of the configuration
    eta_ble: float
    violations: list[str] = field(default_factory=list)

    @property
    def standard_compliant(self) -> bool:
        return not self.violations


def multiint_ble_report(
    eta_joint: DutyCycle,
    overheads: BleOverheads | None = None,
    hw: HardwareProfile | None = None,
    *,
    m: int = 2,
) -> MultiIntBleReport:
    """What a MultiInt configuration needs from a BLE stack.

    The offset shrinks once per n = ⌈Ts/Ta⌉ advertising intervals, so the
    random delays of n intervals add up. The per-interval delay is capped at
    10 ms/n and the window is extended by the summed delay plus d_e. The
    report is standard-compliant only if that cap leaves the stock 0-10 ms
    delay range intact and the intervals lie within the accepted ranges,
    which for n > 1 never holds.
    """
    overheads = overheads or BleOverheads()
    hw = (hw or HardwareProfile()).replace(d_a=overheads.air_time)
    sol = multiint_solve(check_eta(eta_joint, "eta_joint"), m, hw)
    p = sol.params
    n = math.ceil(p.ts / p.ta - 1e-12)
    cap = overheads.random_delay_max / n
    ds_extended = p.ds + n * cap + overheads.burst
    # n·cap is the full delay budget again, so the window extension equals o_s
    eta_ble = ble_duty_cycle(p, overheads, BleMode.BIDIR)
    violations = _range_violations(p.ta, p.ts, ds_extended)
    if cap < overheads.random_delay_max:
        violations.insert(
            0,
            f"random delay capped at {cap * 1e3:.3f} ms per interval, "
            f"below the stock {overheads.random_delay_max * 1e3:g} ms range",
        )
    for v in violations:
        logger.warning("ble: multiint%d eta_joint=%g: %s", m, eta_joint, v)
    return MultiIntBleReport(
        solution=sol,
        n=n,
        random_delay_cap=cap,
        ds_extended=ds_extended,
        eta_ble=eta_ble,
        violations=violations,
    )
