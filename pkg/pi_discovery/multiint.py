"""
MultiInt parametrization and its blocking-compensated variant (MultiInt-BC).

The offset between a scan window and its neighbouring beacon shrinks by
γ = k_c·Ta − Ts = ds − da per scan interval, so discovery is guaranteed
within M+1 scan intervals.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .error import InfeasibleError, NoConvergenceError, ParameterError
from .timebase import (
    NS_PER_S,
    DutyCycle,
    HardwareProfile,
    PiParams,
    Scheme,
    TimeNs,
    ceil_div,
    check_eta,
    eta_of,
    ns_to_seconds,
    round_half_up,
    seconds_to_ns,
    to_ticks,
)

__all__ = [
    "BcAccounting",
    "MultiIntSolution",
    "bc_adjust",
    "bc_beacon_rate",
    "bc_duty_cycle",
    "bc_failure_prob",
    "bc_mean_beacon_rate",
    "eta_max_multiint",
    "multiint_dm",
    "multiint_dm_caseb",
    "multiint_dm_casec",
    "multiint_ds",
    "multiint_k_bounds",
    "multiint_k_opt",
    "multiint_params",
    "multiint_solve",
]

logger = logging.getLogger(__name__)

BC_TOLERANCE = 1e-6
BC_MAX_ITERATIONS = 32
# windows averaged per hyperperiod before the average is cut off
HYPERPERIOD_WINDOW_CAP = 10_000


class BcAccounting(str, enum.Enum):
    # suppressed and compensation beacons counted over one tick-quantized hyperperiod
    EXACT = "exact"
    # the same count in expectation over a uniformly random beacon phase
    PHASE_AVERAGE = "phase_average"
    # flat two extra beacons per scan interval
    SURCHARGE = "surcharge"


@dataclass(frozen=True)
class MultiIntSolution:
    params: PiParams
    m: int
    k_c: int
    gamma: float
    dm: float
    p_blk: float
    clamped: bool
    # set by bc_adjust only
    dm_uncompensated: float | None = None
    eta_nominal: float | None = None
    iterations: int = 0
    accounting: BcAccounting | None = None

    @property
    def dm_increase(self) -> float | None:
        """Relative latency cost of blocking compensation."""
        if self.dm_uncompensated is None:
            return None
        return self.dm / self.dm_uncompensated - 1.0


def multiint_k_opt(eta: DutyCycle, m: int) -> float:
    if m < 1:
        raise ParameterError(f"M must be >= 1, got {m}")
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta!r}")
    n = m + 1
    return 1.0 / n + (math.sqrt(eta * n + 1.0) + 1.0) / (eta * n)


def eta_max_multiint(m: int, hw: HardwareProfile) -> DutyCycle:
    """Conservative duty-cycle limit from k_min + 1 ≤ k_max − 1."""
    da, dsm = hw.d_a, hw.d_s_min
    return (3.0 * da + math.sqrt(da * (da + 8.0 * dsm))) / (4.0 * (m + 1) * (dsm - da))


def multiint_k_bounds(eta: DutyCycle, m: int, hw: HardwareProfile) -> tuple[float, float]:
    """Admissible (k_min, k_max) for k_c, with k_c > k_min strictly.

    k_max comes from ds ≥ d_sm. Its direction flips at η = da/((M+1)(d_sm − da)):
    below that point the constraint always holds and k_max is infinite.
    """
    eta = check_eta(eta)
    if m < 1:
        raise ParameterError(f"M must be >= 1, got {m}")
    da, dsm = hw.d_a, hw.d_s_min
    n = m + 1
    u = n * eta
    k_min = (1.0 + eta) / u
    c = u * dsm - da * (1.0 + u)
    if c <= 1e-12 * (u * dsm + da):
        return k_min, math.inf
    return k_min, dsm / c + 1.0 / n


def multiint_ds(k: int, m: int, eta: DutyCycle, da: float) -> float:
    n = m + 1
    x = k * n - 1
    den = (eta * x - 1.0) * n
    if not den > 0:
        raise InfeasibleError(
            f"k_c={k} is not above k_min for eta={eta}, M={m}: scan window would be non-positive",
            constraint="k_min",
        )
    return da * (eta * n + 1.0) * x / den


def multiint_dm(m: int, k: int, ds: float, da: float) -> float:
    """Worst-case latency of a '+'-branch MultiInt configuration."""
    g = ds - da
    if k == 1:
        return m * (m + 1) * g + da
    return (m + 1) * g * (k * (m + 1) - 1) + da


def multiint_params(
    m: int, k: int, eta: DutyCycle, hw: HardwareProfile, *, bc_enabled: bool = False
) -> PiParams:
    ds = multiint_ds(k, m, eta, hw.d_a)
    g = ds - hw.d_a
    ts = (k * (m + 1) - 1) * g
    return PiParams(
        ta=(ts + g) / k,
        ts=ts,
        ds=ds,
        da=hw.d_a,
        scheme=Scheme.MULTI_INT,
        m=m,
        k_c=k,
        bc_enabled=bc_enabled,
    )


def multiint_solve(
    eta: DutyCycle, m: int, hw: HardwareProfile, *, force: bool = False
) -> MultiIntSolution:
    """MultiInt parameters for duty-cycle `eta` and scheme order `m`.

    Raises:
        InfeasibleError: eta is above the duty-cycle limit for the minimum
            scan window, or the k_c range is empty.
    """
    eta = check_eta(eta)
    if m < 1:
        raise ParameterError(f"M must be >= 1, got {m}")
    limit = eta_max_multiint(m, hw)
    if eta > limit and not force:
        raise InfeasibleError(
            f"eta={eta} exceeds the maximum duty-cycle {limit:.6f} for M={m} "
            f"with a minimum scan window of {hw.d_s_min * 1e3:g} ms",
            constraint="eta_max",
        )
    k_min, k_max = multiint_k_bounds(eta, m, hw)
    lo = math.floor(k_min) + 1
    hi = math.floor(k_max) if math.isfinite(k_max) else None
    if hi is not None and lo > hi:
        raise InfeasibleError(
            f"no integer k_c in ({k_min:.4f}, {k_max:.4f}] for eta={eta}, M={m}",
            constraint="k_range",
        )
    wanted = round_half_up(multiint_k_opt(eta, m))
    k = max(wanted, lo)
    if hi is not None:
        k = min(k, hi)
    if k != wanted:
        logger.debug("multiint: k_c=%d clamped to %d (range %d..%s)", wanted, k, lo, hi)

    params = multiint_params(m, k, eta, hw)
    dm = multiint_dm(m, k, params.ds, params.da)
    logger.debug(
        "multiint: eta=%g M=%d k_c=%d Ta=%.6f Ts=%.6f ds=%.6f dm=%.6f",
        eta, m, k, params.ta, params.ts, params.ds, dm,
    )
    return MultiIntSolution(
        params=params, m=m, k_c=k, gamma=params.gap, dm=dm, p_blk=0.0, clamped=k != wanted
    )


# ─── Latency evaluators for arbitrary parameters ────────────────────────────


def _check_gamma(gamma: int, ta: int, gap: int) -> None:
    if gamma <= 0:
        raise ParameterError("gamma = 0: the beacon-to-window offset never changes, latency is unbounded")
    if 2 * gamma > ta:
        raise ParameterError(f"gamma ({gamma} ns) exceeds Ta/2: parameters belong to the other case")
    if gamma > gap:
        raise ParameterError(
            f"gamma ({gamma} ns) exceeds ds - da ({gap} ns): multi-period offset analysis is not supported"
        )


def multiint_dm_caseb(params: PiParams) -> TimeNs:
    """Worst case for shrinking offsets, k_f = ⌊Ts/Ta⌋, γ = Ts − k_f·Ta."""
    p = params.to_ns()
    gap = p.ds - p.da
    k_f = p.ts // p.ta
    gamma = p.ts - k_f * p.ta
    _check_gamma(gamma, p.ta, gap)
    steps = ceil_div(p.ta - gap, gamma)
    return k_f * p.ta + steps * k_f * p.ta + p.ta + p.da


def multiint_dm_casec(params: PiParams) -> TimeNs:
    """Worst case for growing offsets, k_c = ⌈Ts/Ta⌉, γ = k_c·Ta − Ts.

    On '+'-branch solver output this equals the closed-form latency plus one
    Ta: the first in-range beacon is counted inside the ⌈Ts/Ta⌉·Ta term.
    """
    p = params.to_ns()
    gap = p.ds - p.da
    k_c = ceil_div(p.ts, p.ta)
    gamma = k_c * p.ta - p.ts
    _check_gamma(gamma, p.ta, gap)
    steps = ceil_div(p.ta - gap, gamma)
    return k_c * p.ta + steps * k_c * p.ta + p.da


# ─── Blocking compensation ──────────────────────────────────────────────────


def bc_failure_prob(params: PiParams, hw: HardwareProfile) -> float:
    """Remaining failure probability of a MultiInt-BC pair."""
    da, ta, ts = params.da, params.ta, params.ts
    tr = (hw.d_tr + da) ** 2 / (ta * ts)
    rt = (hw.d_rt + da) ** 2 / (ta * ts)
    return 0.5 * (tr + rt) + (hw.d_rt + hw.d_tr + 2.0 * da) / ts


def _floor_div(a: np.ndarray, b: int) -> np.ndarray:
    return a // b


def _ceil_div(a: np.ndarray, b: int) -> np.ndarray:
    return -((-a) // b)


def _interval_ticks(params: PiParams, hw: HardwareProfile) -> tuple[int, int]:
    p = params.to_ns()
    ta, ts = to_ticks(p.ta, hw.f_clk), to_ticks(p.ts, hw.f_clk)
    if ta < 1 or ts < 1:
        raise ParameterError(f"Ta and Ts must span at least one tick of a {hw.f_clk:g} Hz clock")
    return ta, ts


def bc_beacon_rate(params: PiParams, hw: HardwareProfile, phase_ns: TimeNs = 0) -> float:
    """Beacons per second after suppression and compensation.

    A regular beacon starting in (w − d_tr − da, w + ds + d_rt) of an own scan
    window w is suppressed; compensation beacons go out at w − d_tr − da and
    w + ds + d_rt unless a surviving regular beacon overlaps them.

    Ta and Ts are quantized to whole sleep-clock ticks and the counts are
    summed over one hyperperiod lcm(Ta, Ts), capped at 10⁴ scan windows.
    `phase_ns` is the lead of the beacon train over the window train
    (phase_adv − phase_scan in `sim.gen_schedule` terms).
    """
    p = params.to_ns()
    ta_ticks, ts_ticks = _interval_ticks(params, hw)
    f = Fraction(hw.f_clk)
    # integer time unit of 1/f.numerator ns: ticks and ns are both whole
    tick, ns = NS_PER_S * f.denominator, f.numerator
    ta = ta_ticks * tick
    drt, dtr = seconds_to_ns(hw.d_rt), seconds_to_ns(hw.d_tr)

    windows = min(ta_ticks // math.gcd(ta_ticks, ts_ticks), HYPERPERIOD_WINDOW_CAP)
    j = np.arange(windows, dtype=np.int64)
    w = (j * ts_ticks % ta_ticks) * tick - phase_ns * ns
    lo = w - (dtr + p.da) * ns
    hi = w + (p.ds + drt) * ns
    suppressed = _ceil_div(hi, ta) - _floor_div(lo, ta) - 1
    # surviving regular beacons overlapping the compensation slots
    dup_before = _floor_div(lo, ta) - _floor_div(lo - p.da * ns, ta)
    dup_after = _ceil_div(hi + p.da * ns, ta) - _ceil_div(hi, ta)
    extra = 2 - suppressed - dup_before - dup_after
    return (1.0 / ta_ticks + float(extra.mean()) / ts_ticks) * hw.f_clk


def bc_mean_beacon_rate(params: PiParams, hw: HardwareProfile) -> float:
    """`bc_beacon_rate` averaged over a uniformly random phase, without quantization."""
    per_window = 2.0 - (params.ds + hw.d_rt + hw.d_tr + 3.0 * params.da) / params.ta
    return 1.0 / params.ta + per_window / params.ts


def bc_duty_cycle(
    params: PiParams,
    hw: HardwareProfile,
    accounting: BcAccounting = BcAccounting.EXACT,
    *,
    phase_ns: TimeNs = 0,
    comp_da: float | None = None,
) -> DutyCycle:
    """Duty-cycle of a blocking-compensated device.

    `phase_ns` only applies to exact accounting. `comp_da` overrides the
    compensation beacon length in surcharge mode.
    """
    match accounting:
        case BcAccounting.SURCHARGE:
            comp = params.da if comp_da is None else comp_da
            return eta_of(params.ta, params.ts, params.ds, params.da, hw.alpha) + (
                hw.alpha * 2.0 * comp / params.ts
            )
        case BcAccounting.PHASE_AVERAGE:
            return params.ds / params.ts + hw.alpha * params.da * bc_mean_beacon_rate(params, hw)
    ts = _interval_ticks(params, hw)[1] / hw.f_clk
    return params.ds / ts + hw.alpha * params.da * bc_beacon_rate(params, hw, phase_ns)


def _bc_fixed_point(
    eta_target: DutyCycle,
    m: int,
    k: int,
    hw: HardwareProfile,
    accounting: BcAccounting,
    tol: float,
    max_iter: int,
    comp_da: float | None,
) -> tuple[PiParams, float, int]:
    eta = eta_target
    for it in range(1, max_iter + 1):
        params = multiint_params(m, k, eta, hw, bc_enabled=True)
        err = bc_duty_cycle(params, hw, accounting, comp_da=comp_da) - eta_target
        logger.debug("bc_adjust: k_c=%d iter=%d eta'=%.9f err=%.3e", k, it, eta, err)
        if abs(err) < tol:
            return params, eta, it
        eta -= err
        if not eta > 0:
            break
    raise NoConvergenceError(
        f"blocking compensation did not converge for eta={eta_target}, k_c={k}", iterations=max_iter
    )


def _widen_ds(params: PiParams, eta_target: DutyCycle, hw: HardwareProfile, tol: float) -> PiParams | None:
    """Smallest whole-ns widening of ds that lifts the exact duty-cycle onto `eta_target`.

    None when the exact duty-cycle is already above the target or no ds
    below Ts reaches it. With Ta and Ts fixed the exact duty-cycle rises with
    ds and only steps down where a beacon next to a window is suppressed or
    merged, so every sign change found by bisection is a continuous crossing.
    """
    p = params.to_ns()
    if p.ds >= p.ts:
        return None
    pinned = params.replace(ta=ns_to_seconds(p.ta), ts=ns_to_seconds(p.ts))

    def excess(ds: TimeNs) -> tuple[PiParams, float]:
        widened = pinned.replace(ds=ns_to_seconds(ds))
        return widened, bc_duty_cycle(widened, hw) - eta_target

    err = bc_duty_cycle(params, hw) - eta_target
    if abs(err) < tol:
        return params
    if err > 0:
        return None

    lo, step = p.ds, max(1, math.ceil(-err * p.ts))
    hi = lo + step
    while True:
        if hi >= p.ts:
            return None
        widened, err = excess(hi)
        if err >= 0:
            break
        lo, step = hi, 2 * step
        hi = lo + step
    # excess(lo) < 0 <= excess(hi)
    while hi - lo > 1 and err >= tol:
        mid = (lo + hi) // 2
        candidate, mid_err = excess(mid)
        if mid_err < 0:
            lo = mid
        else:
            hi, widened, err = mid, candidate, mid_err
    return widened


def _bc_exact(
    eta_target: DutyCycle, m: int, k: int, hw: HardwareProfile, tol: float, max_iter: int
) -> tuple[PiParams, PiParams, float, int]:
    """(nominal, widened, η′, iterations) for exact accounting.

    η′ comes from the phase-averaged fixed point; the remaining error of the
    quantized hyperperiod count is taken up by widening ds alone, which keeps
    Ta, Ts and the latency of the nominal parameters.
    """
    aim = eta_target
    iterations = 0
    for attempt in range(max_iter):
        nominal, eta_nominal, it = _bc_fixed_point(
            aim, m, k, hw, BcAccounting.PHASE_AVERAGE, tol, max_iter, None
        )
        iterations += it
        widened = _widen_ds(nominal, eta_target, hw, tol)
        if widened is not None:
            logger.debug(
                "bc_adjust: k_c=%d ds widened by %d ns",
                k, widened.to_ns().ds - nominal.to_ns().ds,
            )
            return nominal, widened, eta_nominal, iterations
        overshoot = bc_duty_cycle(nominal, hw) - eta_target
        logger.debug("bc_adjust: k_c=%d exact duty-cycle off target by %.3e, moving eta'", k, overshoot)
        aim -= overshoot + math.copysign(tol * 2**attempt, overshoot)
    raise NoConvergenceError(
        f"exact blocking compensation did not converge for eta={eta_target}, k_c={k}",
        iterations=iterations,
    )


def bc_adjust(
    eta_target: DutyCycle,
    hw: HardwareProfile,
    *,
    m: int = 2,
    accounting: BcAccounting = BcAccounting.EXACT,
    tol: float = BC_TOLERANCE,
    max_iter: int = BC_MAX_ITERATIONS,
    comp_da: float | None = None,
) -> MultiIntSolution:
    """MultiInt-BC parameters whose compensated duty-cycle equals `eta_target`.

    The nominal duty-cycle η′ is lowered until the duty-cycle including
    suppressed and compensation beacons hits the target. k_c is re-optimized
    over the solver's choice and its two neighbours. With exact accounting
    the target holds for the device's own schedule at phase 0 on the
    tick-quantized intervals, and ds may end up slightly wider than
    Ta/(M+1) + da.

    Raises:
        NoConvergenceError: no k_c reached the target in `max_iter` steps.
    """
    base = multiint_solve(eta_target, m, hw)
    best: tuple[PiParams, float, int] | None = None
    best_dm = math.inf
    for k in (base.k_c, base.k_c - 1, base.k_c + 1):
        if k < 1:
            continue
        try:
            if accounting is BcAccounting.EXACT:
                nominal, params, eta_nominal, it = _bc_exact(eta_target, m, k, hw, tol, max_iter)
            else:
                params, eta_nominal, it = _bc_fixed_point(
                    eta_target, m, k, hw, accounting, tol, max_iter, comp_da
                )
                nominal = params
        except (InfeasibleError, NoConvergenceError) as e:
            logger.debug("bc_adjust: k_c=%d skipped: %s", k, e)
            continue
        if nominal.ds < hw.d_s_min:
            continue
        dm = multiint_dm(m, k, nominal.ds, nominal.da)
        if dm < best_dm:
            best, best_dm = (params, eta_nominal, it), dm
    if best is None:
        raise NoConvergenceError(
            f"blocking compensation found no feasible k_c for eta={eta_target}", iterations=max_iter
        )
    params, eta_nominal, it = best
    sol = MultiIntSolution(
        params=params,
        m=m,
        k_c=params.k_c,
        gamma=params.k_c * params.ta - params.ts,
        dm=best_dm,
        p_blk=bc_failure_prob(params, hw),
        clamped=base.clamped,
        dm_uncompensated=base.dm,
        eta_nominal=eta_nominal,
        iterations=it,
        accounting=accounting,
    )
    logger.debug(
        "bc_adjust: eta=%g -> eta'=%.6f k_c=%d dm=%.6f (+%.3f%%) p_blk=%.5f",
        eta_target, eta_nominal, sol.k_c, sol.dm, 100 * (sol.dm_increase or 0.0), sol.p_blk,
    )
    return sol
