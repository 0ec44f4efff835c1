"""
Lower bounds on the worst-case latency of any neighbor-discovery protocol,
and the check that SingleInt attains the symmetric bound.

Bounds use the relaxed convention: beacons cost duty-cycle but their
transmission time is not part of the latency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .error import ParameterError
from .singleint import singleint_relaxed_dm
from .timebase import DutyCycle, TimeNs, check_eta, seconds_to_ns

__all__ = [
    "BoundInputs",
    "OptimalityReport",
    "check_singleint_optimal",
    "sym_bound",
    "sym_bound_seconds",
    "unidir_bound",
    "unidir_bound_seconds",
]

EQUALITY_RTOL = 1e-9


@dataclass(frozen=True)
class BoundInputs:
    rho: float
    beta: float
    da: float

    def __post_init__(self) -> None:
        if not (0 < self.rho < 1 and 0 < self.beta < 1):
            raise ParameterError(f"rho and beta must lie in (0, 1), got {self.rho!r}, {self.beta!r}")
        if not self.rho + self.beta < 1:
            raise ParameterError("rho + beta must stay below 1")

    @property
    def eta(self) -> float:
        return self.rho + self.beta

    @property
    def lam(self) -> float:
        """Mean beacon spacing da/β."""
        return self.da / self.beta

    @property
    def n(self) -> int:
        """Minimum number of beacons ⌈1/ρ⌉."""
        return math.ceil(1.0 / self.rho)


def unidir_bound_seconds(rho: float, beta: float, da: float) -> float:
    if not (0 < rho < 1 and 0 < beta < 1):
        raise ParameterError(f"rho and beta must lie in (0, 1), got {rho!r}, {beta!r}")
    return math.ceil(1.0 / rho) * da / beta


def unidir_bound(rho: float, beta: float, da: float) -> TimeNs:
    """⌈1/ρ⌉·da/β: no receiver/transmitter pair can guarantee less."""
    return seconds_to_ns(unidir_bound_seconds(rho, beta, da))


def _sym_candidates(eta: DutyCycle) -> list[int]:
    two = 2.0 / eta
    return [k for k in sorted({math.floor(two), math.ceil(two)}) if eta * k > 1.0]


def sym_bound_seconds(eta: DutyCycle, da: float) -> float:
    eta = check_eta(eta)
    return min(k * k * da / (eta * k - 1.0) for k in _sym_candidates(eta))


def sym_bound(eta: DutyCycle, da: float) -> TimeNs:
    """Best latency any protocol can guarantee at per-device duty-cycle `eta`."""
    return seconds_to_ns(sym_bound_seconds(eta, da))


@dataclass(frozen=True)
class OptimalityReport:
    eta: float
    bound: float
    singleint_relaxed_dm: float
    m: int
    equal: bool


def check_singleint_optimal(eta: DutyCycle, da: float) -> OptimalityReport:
    """Compare SingleInt's relaxed latency with the symmetric bound.

    A mismatch is reported through `equal`, not raised.
    """
    eta = check_eta(eta)
    bound = sym_bound_seconds(eta, da)
    ms = [k - 1 for k in _sym_candidates(eta)]
    m = min(ms, key=lambda m: singleint_relaxed_dm(m, eta, da))
    dm = singleint_relaxed_dm(m, eta, da)
    return OptimalityReport(
        eta=eta,
        bound=bound,
        singleint_relaxed_dm=dm,
        m=m,
        equal=math.isclose(dm, bound, rel_tol=EQUALITY_RTOL),
    )
