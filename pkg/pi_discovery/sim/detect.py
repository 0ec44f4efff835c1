"""
First successful reception between devices.

A beacon is received when it lies entirely inside a scan window of the
receiver, the receiver is not busy around one of its own transmissions, and
no third device transmits at an overlapping time. Overlapping transmissions
destroy each other; there is no capture effect.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from ..timebase import HardwareProfile, TimeNs, seconds_to_ns
from .schedule import DeviceSchedule, Times

__all__ = ["count_in_open", "detect_discovery", "first_reception"]


def count_in_open(sorted_times: Times, lo: Times, hi: Times) -> Times:
    """Number of `sorted_times` inside each open interval (lo, hi)."""
    return np.searchsorted(sorted_times, hi, side="left") - np.searchsorted(
        sorted_times, lo, side="right"
    )


def _received(rx: DeviceSchedule, tx: DeviceSchedule, t: Times, hw: HardwareProfile) -> npt.NDArray[np.bool_]:
    """Mask of tx beacons `t` fully inside a window of rx and clear of rx's blackout."""
    if rx.windows.shape[0] == 0 or t.size == 0:
        return np.zeros(t.shape, dtype=bool)
    starts, ends = rx.window_starts, rx.window_ends
    idx = np.searchsorted(starts, t, side="right") - 1
    inside = (idx >= 0) & (t + tx.da <= ends[np.maximum(idx, 0)])
    if rx.beacons.size:
        drt, dtr = seconds_to_ns(hw.d_rt), seconds_to_ns(hw.d_tr)
        # own beacon s blocks reception over [s − d_rt, s + d_a + d_tr]
        busy = count_in_open(rx.beacons, t - rx.da - dtr, t + tx.da + drt) > 0
        inside &= ~busy
    return inside


def first_reception(
    rx: DeviceSchedule,
    tx: DeviceSchedule,
    hw: HardwareProfile,
    others: Sequence[DeviceSchedule] = (),
) -> TimeNs | None:
    """Time at which rx has completely received its first beacon from tx.

    Returns None if no beacon within the schedules' horizon gets through.
    """
    t = tx.beacons
    ok = _received(rx, tx, t, hw)
    for other in others:
        if other.beacons.size:
            ok &= count_in_open(other.beacons, t - other.da, t + tx.da) == 0
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return None
    return int(t[hits[0]]) + tx.da


def detect_discovery(
    rx: DeviceSchedule, tx_all: Sequence[DeviceSchedule], hw: HardwareProfile
) -> list[TimeNs | None]:
    """First success time of rx for every schedule in `tx_all`.

    Every schedule except the sender itself acts as a source of collisions.
    The entry for rx itself (if present) is None.
    """
    out: list[TimeNs | None] = []
    for tx in tx_all:
        if tx is rx:
            out.append(None)
            continue
        others = [o for o in tx_all if o is not tx and o is not rx]
        out.append(first_reception(rx, tx, hw, others))
    return out
