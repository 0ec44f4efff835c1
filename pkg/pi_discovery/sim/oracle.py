"""
Exact worst-case and mean one-way latency over all initial offsets.

The beacon train is shifted by an offset Φ ∈ [0, P) against the window
train. Beacon n is received in window j for Φ ∈ [w_j − b_n, w_j + len_j −
d_a − b_n]. Over all (n, j) these intervals cut [0, P) into pieces on which
the latency is constant, so evaluating one offset per piece covers every
offset. Within a piece the first covering beacon wins; pieces are painted
in beacon order with a next-unpainted pointer and the sweep stops as soon as
all of them are covered.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..error import ParameterError, UnboundedLatencyError
from ..timebase import HardwareProfile, PiParams, Scheme, TimeNs, ceil_div
from .schedule import QuantizedClock, Times, gen_schedule

__all__ = [
    "OracleResult",
    "analytic_dm",
    "latency_pieces",
    "offset_sweep_oracle",
    "quantized_sweep",
]

logger = logging.getLogger(__name__)

HORIZON_FACTOR = 4
FAILURE_FACTOR = 1.01
# beacons per vectorized batch of interval construction
_BATCH = 1 << 16


def analytic_dm(params: PiParams) -> TimeNs:
    """Worst-case latency of a scheme solution on its integer-ns rendition."""
    p = params.to_ns()
    match params.scheme:
        case Scheme.SINGLE_INT:
            return (params.m + 1) * p.ta + p.da
        case Scheme.MULTI_INT:
            # from Ta and Ts: compensated ds may exceed Ta/(M+1) + da
            if params.k_c == 1:
                return params.m * p.ta + p.da
            return (params.m + 1) * p.ts + p.da
        case _:
            raise ParameterError("generic parameters have no analytic latency; pass an explicit horizon")


@dataclass(frozen=True)
class OracleResult:
    worst: TimeNs
    argmax_offset: TimeNs
    # mean over a uniform offset and a uniform arrival within one Ta
    mean: float
    period: TimeNs
    pieces: int
    beacons_used: int
    unbounded_offsets: list[TimeNs] = field(default_factory=list)
    # pieces whose latency exceeds FAILURE_FACTOR·dm_predicted (quantized sweeps)
    exceedances: int = 0
    dm_predicted: TimeNs | None = None

    @property
    def bounded(self) -> bool:
        return not self.unbounded_offsets


def _intervals(
    b: Times, starts: Times, ends: Times, da: TimeNs, period: TimeNs
) -> tuple[Times, Times, Times]:
    """Offset intervals [A, B] (clipped to [0, period)) and their beacon index."""
    # windows whose success range for beacon b can meet [0, period)
    lo = np.searchsorted(ends - da, b, side="left")
    hi = np.searchsorted(starts, b + period, side="left")
    count = np.maximum(hi - lo, 0)
    n = np.repeat(np.arange(b.size, dtype=np.int64), count)
    offs = np.arange(count.sum(), dtype=np.int64) - np.repeat(np.cumsum(count) - count, count)
    j = np.repeat(lo, count) + offs
    a = starts[j] - b[n]
    e = ends[j] - da - b[n]
    keep = e >= a
    return np.maximum(a[keep], 0), np.minimum(e[keep], period - 1), n[keep]


def latency_pieces(
    beacon_offsets: Times,
    window_starts: Times,
    window_lengths: Times,
    da: TimeNs,
    period: TimeNs,
) -> tuple[Times, Times, int]:
    """Piecewise-constant latency over the offset range [0, period).

    Args:
        beacon_offsets: beacon start times relative to the first beacon,
            increasing, first entry 0.
        window_starts: window start times, increasing.
        window_lengths: matching window lengths.
        da: beacon length.
        period: offset range; the latency is periodic in it.

    Returns:
        (starts, latency, beacons_used): piece start offsets, the latency
        b_n + d_a from the first in-range beacon for each piece (−1 where
        no beacon is received), and how many beacons were looked at.
    """
    ends = window_starts + window_lengths
    a_all: list[Times] = []
    e_all: list[Times] = []
    n_all: list[Times] = []
    for first in range(0, beacon_offsets.size, _BATCH):
        chunk = beacon_offsets[first : first + _BATCH]
        a, e, n = _intervals(chunk, window_starts, ends, da, period)
        a_all.append(a)
        e_all.append(e)
        n_all.append(n + first)
    a = np.concatenate(a_all) if a_all else np.empty(0, dtype=np.int64)
    e = np.concatenate(e_all) if e_all else np.empty(0, dtype=np.int64)
    n = np.concatenate(n_all) if n_all else np.empty(0, dtype=np.int64)

    cuts = np.concatenate(([0], a, e + 1))
    starts = np.unique(cuts[cuts < period])
    first_piece = np.searchsorted(starts, a, side="left")
    stop_piece = np.searchsorted(starts, e + 1, side="left")

    latency = np.full(starts.size, -1, dtype=np.int64)
    nxt = list(range(starts.size + 1))

    def find(i: int) -> int:
        while nxt[i] != i:
            nxt[i] = nxt[nxt[i]]
            i = nxt[i]
        return i

    remaining = starts.size
    used = 0
    # intervals are already in beacon order
    for lo_i, hi_i, k in zip(first_piece.tolist(), stop_piece.tolist(), n.tolist(), strict=True):
        used = k + 1
        i = find(lo_i)
        while i < hi_i:
            latency[i] = int(beacon_offsets[k]) + da
            nxt[i] = i + 1
            remaining -= 1
            i = find(i + 1)
        if remaining == 0:
            break
    return starts, latency, used


def _summarize(
    starts: Times,
    latency: Times,
    used: int,
    ta: TimeNs,
    period: TimeNs,
    on_unbounded: str,
    dm_predicted: TimeNs | None,
) -> OracleResult:
    missing = latency < 0
    unbounded = starts[missing].tolist()
    if unbounded and on_unbounded == "raise":
        raise UnboundedLatencyError(
            f"offset {unbounded[0]} ns finds no reception within the horizon", offset_ns=unbounded[0]
        )
    widths = np.diff(np.concatenate((starts, [period])))
    ok = ~missing
    if ok.any():
        best = int(np.argmax(np.where(ok, latency, -1)))
        worst = int(latency[best]) + ta
        argmax = int(starts[best])
        mean = float((latency[ok] * widths[ok]).sum() / widths[ok].sum()) + ta / 2
    else:
        worst, argmax, mean = 0, 0, float("nan")
    exceed = 0
    if dm_predicted is not None:
        limit = FAILURE_FACTOR * dm_predicted
        exceed = int(np.count_nonzero(ok & (latency + ta > limit))) + len(unbounded)
    return OracleResult(
        worst=worst,
        argmax_offset=argmax,
        mean=mean,
        period=period,
        pieces=int(starts.size),
        beacons_used=used,
        unbounded_offsets=unbounded,
        exceedances=exceed,
        dm_predicted=dm_predicted,
    )


def offset_sweep_oracle(
    params_rx: PiParams,
    params_tx: PiParams | None = None,
    *,
    horizon: TimeNs | None = None,
    on_unbounded: str = "raise",
) -> OracleResult:
    """Worst-case one-way latency of tx → rx over every initial offset.

    The horizon defaults to four times the analytic latency of `params_rx`
    and must be given for generic parameters. Both trains run on ideal
    clocks, so no radio constants enter; `quantized_sweep` covers sleep-clock
    ticks.

    Raises:
        UnboundedLatencyError: some offset sees no reception within the
            horizon (unless `on_unbounded="record"`).
    """
    params_tx = params_tx or params_rx
    rx, tx = params_rx.to_ns(), params_tx.to_ns()
    if on_unbounded not in ("raise", "record"):
        raise ParameterError(f"on_unbounded must be 'raise' or 'record', got {on_unbounded!r}")
    if horizon is None:
        horizon = HORIZON_FACTOR * analytic_dm(params_rx)
    period = rx.ts
    n_beacons = ceil_div(horizon, tx.ta) + 1
    beacons = np.arange(n_beacons, dtype=np.int64) * tx.ta
    if rx.ds >= rx.ts:
        starts = np.array([0], dtype=np.int64)
        lengths = np.array([horizon + 2 * rx.ts], dtype=np.int64)
    else:
        starts = np.arange(ceil_div(horizon + period, rx.ts) + 1, dtype=np.int64) * rx.ts
        lengths = np.full(starts.shape, rx.ds, dtype=np.int64)
    pieces, latency, used = latency_pieces(beacons, starts, lengths, tx.da, period)
    logger.debug(
        "oracle: Ta=%d Ts=%d ds=%d pieces=%d beacons=%d/%d",
        tx.ta, rx.ts, rx.ds, pieces.size, used, n_beacons,
    )
    return _summarize(pieces, latency, used, tx.ta, period, on_unbounded, None)


def quantized_sweep(
    params: PiParams,
    hw: HardwareProfile,
    clock: QuantizedClock,
    *,
    dm_predicted: TimeNs | None = None,
    horizon: TimeNs | None = None,
) -> OracleResult:
    """Offset sweep on schedules realized by a quantized sleep clock.

    Offsets without reception are recorded, and together with pieces above
    1.01·dm_predicted they count as exceedances.
    """
    p = params.to_ns()
    dm_predicted = dm_predicted if dm_predicted is not None else analytic_dm(params)
    horizon = horizon or HORIZON_FACTOR * dm_predicted
    sched = gen_schedule(params, hw, clock, (0, 0), horizon + 2 * p.ts)
    beacons = sched.beacons - sched.beacons[0]
    windows = sched.windows[sched.window_starts >= 0]
    result = latency_pieces(beacons, windows[:, 0], windows[:, 1], p.da, p.ts)
    res = _summarize(*result, p.ta, p.ts, "record", dm_predicted)
    logger.info(
        "quantized sweep: correction=%s ext=%d worst=%d dm=%d exceedances=%d",
        clock.q_correction, clock.ds_extension_ticks, res.worst, dm_predicted, res.exceedances,
    )
    return res
