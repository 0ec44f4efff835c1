"""
SingleInt parametrization: one beacon per effective scan window length.

Every scan interval holds M+1 advertising intervals and the advertising
interval equals the effective scan window (Ta = ds − da), so discovery is
guaranteed within one scan interval.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

from .error import InfeasibleError, ParameterError
from .timebase import (
    DutyCycle,
    HardwareProfile,
    PiParams,
    Scheme,
    TimeNs,
    ceil_div,
    check_eta,
    round_half_up,
)

__all__ = [
    "SingleIntSolution",
    "SolveMode",
    "eta_max_singleint",
    "singleint_blocking",
    "singleint_dm",
    "singleint_dm_star",
    "singleint_ds",
    "singleint_m_bounds",
    "singleint_m_opt",
    "singleint_params",
    "singleint_relaxed_dm",
    "singleint_solve",
]

logger = logging.getLogger(__name__)


class SolveMode(str, enum.Enum):
    ROUNDED_OPT = "rounded-opt"
    BOUND_OPTIMAL = "bound-optimal"


@dataclass(frozen=True)
class SingleIntSolution:
    params: PiParams
    m: int
    dm: float
    dm_star: float
    clamped: bool
    mode: SolveMode = SolveMode.ROUNDED_OPT
    # latency with da left out of the latency but kept in the duty-cycle
    dm_relaxed: float | None = None


def singleint_m_opt(eta: DutyCycle) -> float:
    """Continuous latency minimum (√(1+η) + 1)/η − 1."""
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta!r}")
    return (math.sqrt(1.0 + eta) + 1.0) / eta - 1.0


def singleint_m_bounds(eta: DutyCycle, hw: HardwareProfile) -> tuple[float, float]:
    """(M_min, M_max) with M > M_min strictly and M ≤ M_max.

    M_max is infinite when η ≤ da/(d_sm − da): then the scan window never
    drops below the hardware minimum.
    """
    eta = check_eta(eta)
    da, dsm = hw.d_a, hw.d_s_min
    m_min = 1.0 / eta - 1.0
    if eta <= da / (dsm - da):
        return m_min, math.inf
    m_max = (dsm * (eta - 1.0) - da * (eta + 1.0)) / (da * (eta + 1.0) - eta * dsm)
    return m_min, m_max


def eta_max_singleint(hw: HardwareProfile) -> DutyCycle:
    """Conservative maximum duty-cycle, from M_min + 1 ≤ M_max − 1."""
    da, dsm = hw.d_a, hw.d_s_min
    return (3.0 * da + math.sqrt(da * (da + 8.0 * dsm))) / (4.0 * (dsm - da))


def singleint_ds(m: int, eta: DutyCycle, da: float) -> float:
    """Scan window realizing `eta` for scheme order `m`."""
    n = m + 1
    den = eta * n - 1.0
    if not den > 0:
        raise InfeasibleError(
            f"M={m} is not above M_min for eta={eta}: scan window would be non-positive",
            constraint="m_min",
        )
    return n * (eta + 1.0) * da / den


def singleint_dm(m: int, eta: DutyCycle, da: float) -> float:
    """Worst-case latency (M+1)·Ta + da with ds eliminated."""
    return (m + 1) * (singleint_ds(m, eta, da) - da) + da


def singleint_relaxed_dm(m: int, eta: DutyCycle, da: float) -> float:
    """da(M+1)²/(η(M+1) − 1): latency without da, duty-cycle with da."""
    n = m + 1
    return da * n * n / (eta * n - 1.0)


def singleint_params(m: int, eta: DutyCycle, hw: HardwareProfile) -> PiParams:
    """Structural parametrization for a given integer M (no optimization)."""
    ds = singleint_ds(m, eta, hw.d_a)
    ta = ds - hw.d_a
    return PiParams(
        ta=ta, ts=(m + 1) * ta, ds=ds, da=hw.d_a, scheme=Scheme.SINGLE_INT, m=m
    )


def _choose_m(eta: DutyCycle, hw: HardwareProfile, mode: SolveMode) -> tuple[int, bool]:
    m_min, m_max = singleint_m_bounds(eta, hw)
    lo = math.floor(m_min) + 1
    hi = math.floor(m_max) if math.isfinite(m_max) else None
    if hi is not None and lo > hi:
        raise InfeasibleError(
            f"no integer M in ({m_min:.4f}, {m_max:.4f}] for eta={eta}: "
            "the minimum scan window cannot be met",
            constraint="m_range",
        )

    if mode is SolveMode.BOUND_OPTIMAL:
        two = 2.0 / eta
        candidates = sorted({math.floor(two) - 1, math.ceil(two) - 1})
        wanted = min(candidates, key=lambda m: singleint_relaxed_dm(m, eta, hw.d_a))
    else:
        wanted = round_half_up(singleint_m_opt(eta))

    m = max(wanted, lo)
    if hi is not None:
        m = min(m, hi)
    if m != wanted:
        logger.debug("singleint: M=%d clamped to %d (range %d..%s)", wanted, m, lo, hi)
    return m, m != wanted


def singleint_solve(
    eta: DutyCycle,
    hw: HardwareProfile,
    mode: SolveMode = SolveMode.ROUNDED_OPT,
    *,
    safety_margin: bool = False,
    force: bool = False,
) -> SingleIntSolution:
    """Closed-form SingleInt parameters for duty-cycle `eta`.

    Args:
        eta: target duty-cycle in (0, 1).
        hw: hardware profile; only d_a, d_s_min and f_clk are used.
        mode: `ROUNDED_OPT` rounds the continuous optimum; `BOUND_OPTIMAL`
            picks M+1 ∈ {⌊2/η⌋, ⌈2/η⌉}, the choice that attains the symmetric
            latency bound.
        safety_margin: shorten the emitted Ts by one sleep-clock tick. The
            reported latency still uses the unreduced Ts.
        force: skip the conservative maximum duty-cycle check and rely on the
            exact integer range test alone.

    Raises:
        InfeasibleError: eta exceeds the maximum duty-cycle for the minimum
            scan window, or no integer M fits the constraints.
    """
    eta = check_eta(eta)
    limit = eta_max_singleint(hw)
    if eta > limit and not force:
        raise InfeasibleError(
            f"eta={eta} exceeds the maximum duty-cycle {limit:.6f} reachable "
            f"with a minimum scan window of {hw.d_s_min * 1e3:g} ms",
            constraint="eta_max",
        )
    m, clamped = _choose_m(eta, hw, mode)
    params = singleint_params(m, eta, hw)
    dm = (m + 1) * params.ta + params.da
    relaxed = singleint_relaxed_dm(m, eta, hw.d_a) if mode is SolveMode.BOUND_OPTIMAL else None
    if safety_margin:
        params = params.replace(ts=params.ts - hw.t_clk)
    logger.debug("singleint: eta=%g M=%d Ta=%.6f Ts=%.6f dm=%.6f", eta, m, params.ta, params.ts, dm)
    return SingleIntSolution(
        params=params,
        m=m,
        dm=dm,
        dm_star=dm - params.ta,
        clamped=clamped,
        mode=mode,
        dm_relaxed=relaxed,
    )


def singleint_dm_star(params: PiParams) -> TimeNs:
    """Packet-to-packet worst case ⌈(Ts − (ds − da))/Ta⌉·Ta + da, in ns."""
    p = params.to_ns()
    gap = p.ds - p.da
    if p.ta > gap:
        raise ParameterError(
            f"Ta ({p.ta} ns) exceeds the effective scan window ({gap} ns): not a SingleInt configuration"
        )
    return ceil_div(p.ts - gap, p.ta) * p.ta + p.da


def singleint_blocking(params: PiParams, hw: HardwareProfile) -> float:
    """Mean blocking probability (d_rt + d_a + d_tr)/(ds − da) in symmetric use."""
    return (hw.d_rt + params.da + hw.d_tr) / (params.ds - params.da)
