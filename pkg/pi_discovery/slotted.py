"""
Slotted baselines: worst-case latencies, slot-length calibration to a target
failure probability, and gains of MultiInt-BC over each protocol.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .error import ParameterError
from .multiint import BcAccounting, bc_adjust
from .timebase import DutyCycle, HardwareProfile, TimeNs, check_eta, seconds_to_ns

__all__ = [
    "GainRow",
    "GainSummary",
    "GainTable",
    "Protocol",
    "SearchlightEvaluator",
    "SlotDesign",
    "SlottedSpec",
    "UCONNECT_SLOT",
    "calibrate_slot",
    "default_eta_grid",
    "gain_table",
    "protocol_slot",
    "slot_failure_prob",
    "slotted_dm",
    "slotted_dm_seconds",
]

logger = logging.getLogger(__name__)

UCONNECT_SLOT = 250e-6
DEFAULT_NIHAO_M = 33
DEFAULT_NIHAO_GAMMA = 2


class Protocol(str, enum.Enum):
    DISCO = "disco"
    UCONNECT = "u-connect"
    SEARCHLIGHT_STRIPED = "searchlight-s"
    OPTIMAL_DIFFCODES = "diffcodes"
    GNIHAO = "g-nihao"


class SlotDesign(str, enum.Enum):
    # two beacons padded inside the slot
    PADDED_TWO_BEACON = "padded"
    # one beacon sent past the slot boundary
    OVERFLOWING = "overflowing"
    # m consecutive listen-only slots
    NIHAO_LISTEN_BLOCK = "nihao"


class SearchlightEvaluator(str, enum.Enum):
    LITERAL = "literal"
    GAIN_CONSISTENT = "gain_consistent"


_DESIGN = {
    Protocol.DISCO: SlotDesign.PADDED_TWO_BEACON,
    Protocol.SEARCHLIGHT_STRIPED: SlotDesign.OVERFLOWING,
    Protocol.OPTIMAL_DIFFCODES: SlotDesign.OVERFLOWING,
    Protocol.GNIHAO: SlotDesign.NIHAO_LISTEN_BLOCK,
}


@dataclass(frozen=True)
class SlottedSpec:
    protocol: Protocol
    d_sl: float
    nihao_gamma: int = DEFAULT_NIHAO_GAMMA
    nihao_m: int = DEFAULT_NIHAO_M

    def __post_init__(self) -> None:
        if not self.d_sl > 0:
            raise ParameterError(f"slot length must be positive, got {self.d_sl!r}")
        if self.nihao_gamma < 1 or self.nihao_m < 1:
            raise ParameterError("nihao_gamma and nihao_m must be >= 1")


def _searchlight_slots(eta: float, evaluator: SearchlightEvaluator) -> float:
    half = math.ceil(math.floor(1.0 / eta) / 2)
    if evaluator is SearchlightEvaluator.GAIN_CONSISTENT:
        return 2 * half * math.floor(1.0 / eta)
    return half


def slotted_dm_seconds(
    slot: SlottedSpec,
    eta: DutyCycle,
    da: float,
    searchlight: SearchlightEvaluator = SearchlightEvaluator.LITERAL,
) -> float:
    eta = check_eta(eta)
    d = slot.d_sl
    match slot.protocol:
        case Protocol.DISCO:
            return 4.0 / eta**2 * d
        case Protocol.UCONNECT:
            return (math.sqrt(1 / (2 * eta) + 9 / (16 * eta**2)) + 3 / (4 * eta)) ** 2 * d
        case Protocol.SEARCHLIGHT_STRIPED:
            return _searchlight_slots(eta, searchlight) * d
        case Protocol.OPTIMAL_DIFFCODES:
            return 1.0 / (2 * eta**2) * d
        case Protocol.GNIHAO:
            g = slot.nihao_gamma
            x = (d + da * g) / (2 * g * eta * d)
            # slot count times the slot length
            return (x + math.sqrt(x - da / d)) ** 2 * g * d


def slotted_dm(
    slot: SlottedSpec,
    eta: DutyCycle,
    da: float,
    searchlight: SearchlightEvaluator = SearchlightEvaluator.LITERAL,
) -> TimeNs:
    """Worst-case discovery latency of a slotted protocol, in ns."""
    return seconds_to_ns(slotted_dm_seconds(slot, eta, da, searchlight))


def _design_cost(design: SlotDesign, hw: HardwareProfile, nihao_m: int) -> float:
    """Blocked time per slot-equivalent; the failure probability is cost/d_sl."""
    da, drt, dtr = hw.d_a, hw.d_rt, hw.d_tr
    match design:
        case SlotDesign.PADDED_TWO_BEACON:
            return 3 * da + drt + dtr
        case SlotDesign.OVERFLOWING:
            return 2 * da + dtr
        case SlotDesign.NIHAO_LISTEN_BLOCK:
            return (drt + dtr + 2 * da) / nihao_m


def slot_failure_prob(
    design: SlotDesign, d_sl: float, hw: HardwareProfile, nihao_m: int = DEFAULT_NIHAO_M
) -> float:
    """Two-device failure probability of a slot design."""
    if not d_sl > 0:
        raise ParameterError(f"slot length must be positive, got {d_sl!r}")
    return _design_cost(design, hw, nihao_m) / d_sl


def calibrate_slot(
    design: SlotDesign, target_p: float, hw: HardwareProfile, nihao_m: int = DEFAULT_NIHAO_M
) -> float:
    """Slot length at which `design` fails with probability `target_p`."""
    check_eta(target_p, "target_p")
    return _design_cost(design, hw, nihao_m) / target_p


def protocol_slot(
    protocol: Protocol, target_p: float, hw: HardwareProfile, nihao_m: int = DEFAULT_NIHAO_M
) -> SlottedSpec:
    """Calibrated slot for a protocol; U-Connect keeps its fixed 250 µs slots."""
    if protocol is Protocol.UCONNECT:
        return SlottedSpec(protocol, UCONNECT_SLOT, nihao_m=nihao_m)
    d_sl = calibrate_slot(_DESIGN[protocol], target_p, hw, nihao_m)
    return SlottedSpec(protocol, d_sl, nihao_m=nihao_m)


def default_eta_grid(lo: float = 0.002, hi: float = 0.0155, n: int = 28) -> list[float]:
    return [float(x) for x in np.linspace(lo, hi, n)]


# ─── Gains ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class GainRow:
    eta: float
    protocol: Protocol
    d_sl: float
    dm_protocol: float
    dm_reference: float
    gain: float
    evaluator: str


@dataclass(frozen=True)
class GainSummary:
    protocol: Protocol
    g_max: float
    g_mean: float
    evaluator: str


@dataclass(frozen=True)
class GainTable:
    rows: list[GainRow]
    summary: dict[Protocol, GainSummary]
    target_p: float


def gain_table(
    eta_grid: Iterable[float],
    hw: HardwareProfile,
    *,
    target_p: float = 0.0019,
    reference: Mapping[float, float] | Callable[[float], float] | None = None,
    protocols: Sequence[Protocol] = tuple(Protocol),
    searchlight: SearchlightEvaluator = SearchlightEvaluator.LITERAL,
    nihao_m: int = DEFAULT_NIHAO_M,
    accounting: BcAccounting = BcAccounting.EXACT,
) -> GainTable:
    """Gains G = dm_protocol / dm_reference over a duty-cycle grid.

    `reference` maps η to the reference latency in seconds; by default it is
    the blocking-compensated MultiInt latency from `bc_adjust`. Slot lengths
    are calibrated once to `target_p`.
    """
    etas = [check_eta(e) for e in eta_grid]
    if not etas:
        raise ParameterError("empty duty-cycle grid")
    if reference is None:
        ref = {e: bc_adjust(e, hw, accounting=accounting).dm for e in etas}
    elif callable(reference):
        ref = {e: reference(e) for e in etas}
    else:
        ref = dict(reference)

    rows: list[GainRow] = []
    summary: dict[Protocol, GainSummary] = {}
    for protocol in protocols:
        slot = protocol_slot(protocol, target_p, hw, nihao_m)
        label = (
            searchlight.value
            if protocol is Protocol.SEARCHLIGHT_STRIPED
            else SearchlightEvaluator.LITERAL.value
        )
        gains = []
        for e in etas:
            dm = slotted_dm_seconds(slot, e, hw.d_a, searchlight)
            g = dm / ref[e]
            gains.append(g)
            rows.append(GainRow(e, protocol, slot.d_sl, dm, ref[e], g, label))
        summary[protocol] = GainSummary(protocol, max(gains), float(np.mean(gains)), label)
        logger.info(
            "gain %s: d_sl=%.4f ms G_m=%.1f mean=%.1f (%s)",
            protocol.value, slot.d_sl * 1e3, max(gains), summary[protocol].g_mean, label,
        )
    return GainTable(rows=rows, summary=summary, target_p=target_p)
