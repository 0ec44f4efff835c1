"""
Time representation, hardware constants and duty-cycle accounting.

The analytic layer works in float seconds; the simulator works in integer
nanoseconds (`TimeNs`). Conversions between both are explicit.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any

from typing_extensions import Self

from .error import ParameterError, ProfileError

__all__ = [
    "NS_PER_S",
    "DutyCycle",
    "HardwareProfile",
    "PiParams",
    "PiParamsNs",
    "Scheme",
    "TimeNs",
    "ceil_div",
    "check_eta",
    "duty_cycle",
    "eta_of",
    "ns_to_seconds",
    "round_half_up",
    "seconds_to_ns",
    "tick_quantize",
    "ticks_to_ns",
    "to_ticks",
]

TimeNs = int
DutyCycle = float

NS_PER_S = 1_000_000_000

# Relative tolerance for recognizing a scheme's structural identities in float params.
_STRUCTURE_RTOL = 1e-9


def seconds_to_ns(s: float) -> TimeNs:
    return int(round(s * NS_PER_S))


def ns_to_seconds(t: TimeNs) -> float:
    return t / NS_PER_S


def round_half_up(x: float | Fraction) -> int:
    return math.floor(x + Fraction(1, 2)) if isinstance(x, Fraction) else math.floor(x + 0.5)


def ceil_div(a: int, b: int) -> int:
    """Integer ceiling of a / b for b > 0."""
    return -((-a) // b)


def check_eta(eta: float, name: str = "eta") -> DutyCycle:
    if not (0.0 < eta < 1.0) or math.isnan(eta):
        raise ParameterError(f"{name} must lie in (0, 1), got {eta!r}")
    return float(eta)


# ─── Hardware ────────────────────────────────────────────────────────────────

_PROFILE_KEYS = {
    "da_us": ("d_a", 1e-6),
    "ds_min_us": ("d_s_min", 1e-6),
    "drt_us": ("d_rt", 1e-6),
    "dtr_us": ("d_tr", 1e-6),
    "fclk_hz": ("f_clk", 1.0),
    "alpha": ("alpha", 1.0),
}


@dataclass(frozen=True)
class HardwareProfile:
    """Radio constants, all times in seconds.

    Defaults: 32 µs beacons, 140 µs turnarounds, a 32768 Hz sleep clock and a
    1 ms minimum scan window.
    """

    d_a: float = 32e-6
    d_s_min: float = 1e-3
    d_rt: float = 140e-6
    d_tr: float = 140e-6
    f_clk: float = 32768.0
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not self.d_a > 0:
            raise ParameterError(f"d_a must be positive, got {self.d_a!r}")
        if not self.d_s_min > self.d_a:
            raise ParameterError(
                f"d_s_min ({self.d_s_min!r}) must exceed d_a ({self.d_a!r})"
            )
        if self.d_rt < 0 or self.d_tr < 0:
            raise ParameterError("turnaround times must be non-negative")
        if not self.f_clk > 0:
            raise ParameterError(f"f_clk must be positive, got {self.f_clk!r}")
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha!r}")

    @property
    def t_clk(self) -> float:
        return 1.0 / self.f_clk

    def replace(self, **changes: float) -> Self:
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Build a profile from the JSON key set {da_us, ds_min_us, drt_us, dtr_us, fclk_hz, alpha}.

        Missing keys keep their defaults; unknown keys are rejected.
        """
        unknown = set(data) - set(_PROFILE_KEYS)
        if unknown:
            raise ProfileError(f"unknown hardware profile keys: {sorted(unknown)}")
        kwargs: dict[str, float] = {}
        for key, (attr, scale) in _PROFILE_KEYS.items():
            if key in data:
                try:
                    kwargs[attr] = float(data[key]) * scale
                except (TypeError, ValueError) as e:
                    raise ProfileError(f"{key}: not a number: {data[key]!r}") from e
        try:
            return cls(**kwargs)
        except ParameterError as e:
            raise ProfileError(str(e)) from e

    @classmethod
    def load(cls, path: str | Path) -> Self:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ProfileError(f"cannot read hardware profile {path}: {e}") from e
        if not isinstance(data, dict):
            raise ProfileError(f"hardware profile {path} must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, float]:
        return {key: getattr(self, attr) / scale for key, (attr, scale) in _PROFILE_KEYS.items()}

    def digest(self) -> str:
        """sha256 of the canonical JSON form; used in run manifests."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# ─── Parameters ──────────────────────────────────────────────────────────────


class Scheme(str, enum.Enum):
    SINGLE_INT = "singleint"
    MULTI_INT = "multiint"
    # arbitrary (Ta, Ts, ds) without scheme structure, e.g. grid-search candidates
    GENERIC = "generic"


@dataclass(frozen=True)
class PiParamsNs:
    ta: TimeNs
    ts: TimeNs
    ds: TimeNs
    da: TimeNs


@dataclass(frozen=True)
class PiParams:
    """One periodic-interval configuration, times in seconds."""

    ta: float
    ts: float
    ds: float
    da: float
    scheme: Scheme = Scheme.GENERIC
    m: int = 0
    k_c: int = 0
    bc_enabled: bool = False
    extra: Mapping[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.da > 0:
            raise ParameterError(f"da must be positive, got {self.da!r}")
        if not self.ta > self.da:
            raise ParameterError(f"Ta ({self.ta!r}) must exceed da ({self.da!r})")
        if not self.ds > self.da:
            raise ParameterError(f"ds ({self.ds!r}) must exceed da ({self.da!r})")
        if not self.ts >= self.ds:
            raise ParameterError(f"Ts ({self.ts!r}) must be at least ds ({self.ds!r})")
        if self.scheme is Scheme.MULTI_INT and self.k_c < 1:
            raise ParameterError(f"MultiInt params need k_c >= 1, got {self.k_c}")

    @property
    def gap(self) -> float:
        """Effective scan window ds − da."""
        return self.ds - self.da

    def replace(self, **changes: Any) -> Self:
        return replace(self, **changes)

    def _close(self, a: float, b: float) -> bool:
        return math.isclose(a, b, rel_tol=_STRUCTURE_RTOL, abs_tol=1e-15)

    def to_ns(self) -> PiParamsNs:
        """Integer-nanosecond rendition for the simulator.

        Scheme identities (Ta = ds − da, Ts = (M+1)(ds − da) for SingleInt;
        Ta = (M+1)(ds − da), Ts = (k(M+1) − 1)(ds − da) for MultiInt) are kept
        exact when they hold in the float params; otherwise fields are
        rounded one by one.
        """
        da = seconds_to_ns(self.da)
        g = seconds_to_ns(self.gap)
        n = self.m + 1
        if self.scheme is Scheme.SINGLE_INT and self._close(self.ta, self.gap) and self._close(
            self.ts, n * self.gap
        ):
            return PiParamsNs(ta=g, ts=n * g, ds=g + da, da=da)
        if self.scheme is Scheme.MULTI_INT:
            x = self.k_c * n - 1
            if self._close(self.ta, n * self.gap) and self._close(self.ts, x * self.gap):
                return PiParamsNs(ta=n * g, ts=x * g, ds=g + da, da=da)
        return PiParamsNs(
            ta=seconds_to_ns(self.ta),
            ts=seconds_to_ns(self.ts),
            ds=seconds_to_ns(self.ds),
            da=da,
        )


# ─── Duty-cycle ──────────────────────────────────────────────────────────────


def eta_of(ta: float, ts: float, ds: float, da: float, alpha: float = 1.0) -> DutyCycle:
    """ds/Ts + α·da/Ta."""
    return ds / ts + alpha * da / ta


def duty_cycle(params: PiParams, hw: HardwareProfile) -> DutyCycle:
    """Fraction of active radio time of one device running `params`.

    With blocking compensation the beacon count per scan interval changes
    (suppressed and compensation beacons); see `multiint.bc_duty_cycle`.
    """
    if params.bc_enabled:
        from .multiint import bc_duty_cycle

        return bc_duty_cycle(params, hw)
    return eta_of(params.ta, params.ts, params.ds, params.da, hw.alpha)


# ─── Sleep clock ─────────────────────────────────────────────────────────────


def _tick_ns(f_clk: float) -> Fraction:
    return Fraction(NS_PER_S) / Fraction(f_clk)


def to_ticks(t: TimeNs, f_clk: float) -> int:
    """Nearest tick count for `t` (half-up)."""
    return round_half_up(Fraction(t) / _tick_ns(f_clk))


def ticks_to_ns(ticks: int, f_clk: float) -> TimeNs:
    return round_half_up(ticks * _tick_ns(f_clk))


def tick_quantize(t: TimeNs, f_clk: float) -> TimeNs:
    """Nearest multiple of T_clk = 1/f_clk, half-up, expressed in whole ns."""
    if t < 0:
        raise ParameterError(f"tick_quantize needs t >= 0, got {t}")
    return ticks_to_ns(to_ticks(t, f_clk), f_clk)
