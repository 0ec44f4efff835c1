"""
Brute-force search over (Ta, Ts, ds) for parameters that beat SingleInt.

Every grid point inside the duty-cycle band is evaluated with the exact
offset-sweep oracle and compared against SingleInt at the candidate's own
duty-cycle. A negative gap would falsify SingleInt's optimality.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat

from .error import BudgetExceededError, InfeasibleError, ParameterError
from .sim.oracle import HORIZON_FACTOR, offset_sweep_oracle
from .singleint import singleint_solve
from .timebase import HardwareProfile, PiParams, eta_of, ns_to_seconds, seconds_to_ns

__all__ = ["DEFAULT_BUDGET", "SearchGrid", "SearchResult", "SearchRow", "grid_search"]

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 1_000_000
# absolute slack of 1 µs plus 1e-9 relative before a gap counts as a violation
VIOLATION_ATOL = 1e-6
VIOLATION_RTOL = 1e-9


@dataclass(frozen=True)
class SearchGrid:
    """(min, max, step) ranges in seconds; every ds step up to Ts is tried."""

    ta_range: tuple[float, float, float] = (0.05, 1.0, 0.05)
    ts_range: tuple[float, float, float] = (0.05, 1.0, 0.05)
    ds_step: float = 0.05
    # 30-byte beacon at 1 Mbit/s plus framing
    da: float = 320e-6
    eta_band: tuple[float, float] = (0.001, 0.10)
    # optional targets: keep only candidates within eta_window of one of them
    eta_targets: tuple[float, ...] = ()
    eta_window: float = 0.0

    def __post_init__(self) -> None:
        for name, (lo, hi, step) in (("ta_range", self.ta_range), ("ts_range", self.ts_range)):
            if not step > 0 or lo < step or hi < lo:
                raise ParameterError(f"{name} must satisfy 0 < step <= min <= max, got {(lo, hi, step)}")
        if not self.ds_step > 0:
            raise ParameterError(f"ds_step must be positive, got {self.ds_step!r}")
        if not self.da > 0:
            raise ParameterError(f"da must be positive, got {self.da!r}")
        lo, hi = self.eta_band
        if not 0 < lo < hi < 1:
            raise ParameterError(f"eta_band must satisfy 0 < lo < hi < 1, got {self.eta_band}")

    @classmethod
    def full(cls) -> SearchGrid:
        """Ta, Ts from 10 ms to 5 s and ds in steps of 10 ms."""
        return cls(ta_range=(0.01, 5.0, 0.01), ts_range=(0.01, 5.0, 0.01), ds_step=0.01)

    @staticmethod
    def _axis(r: tuple[float, float, float]) -> list[int]:
        lo, hi, step = (seconds_to_ns(x) for x in r)
        return list(range(lo, hi + 1, step))

    def ta_values(self) -> list[int]:
        return self._axis(self.ta_range)

    def ts_values(self) -> list[int]:
        return self._axis(self.ts_range)

    def ds_values(self, ts: int) -> list[int]:
        step = seconds_to_ns(self.ds_step)
        return list(range(step, ts + 1, step))

    def candidate_count(self) -> int:
        return len(self.ta_values()) * sum(len(self.ds_values(ts)) for ts in self.ts_values())

    def candidates(self) -> Iterator[tuple[int, int, int]]:
        da = seconds_to_ns(self.da)
        for ts in self.ts_values():
            for ds in self.ds_values(ts):
                if ds <= da:
                    continue
                for ta in self.ta_values():
                    if ta > da:
                        yield ta, ts, ds

    def accepts(self, eta: float) -> bool:
        lo, hi = self.eta_band
        if not lo < eta < hi:
            return False
        if self.eta_targets:
            return any(abs(eta - t) <= self.eta_window for t in self.eta_targets)
        return True


@dataclass(frozen=True)
class SearchRow:
    ta: float
    ts: float
    ds: float
    da: float
    eta: float
    candidate_dm: float
    singleint_dm: float

    @property
    def gap(self) -> float:
        return self.candidate_dm - self.singleint_dm

    @property
    def violates(self) -> bool:
        return self.gap < -(VIOLATION_ATOL + VIOLATION_RTOL * self.singleint_dm)


@dataclass(frozen=True)
class SearchResult:
    candidates: int
    rows: list[SearchRow]
    violations: list[SearchRow]
    unbounded: list[PiParams] = field(default_factory=list)
    infeasible: int = 0

    @property
    def min_gap(self) -> float:
        return min((r.gap for r in self.rows), default=math.inf)

    @property
    def witness(self) -> PiParams | None:
        if not self.rows:
            return None
        r = min(self.rows, key=lambda r: r.gap)
        return PiParams(ta=r.ta, ts=r.ts, ds=r.ds, da=r.da)


def _evaluate(
    cand: tuple[int, int, int], grid: SearchGrid, hw: HardwareProfile
) -> tuple[str, SearchRow | PiParams | None]:
    ta, ts, ds = (ns_to_seconds(x) for x in cand)
    eta = eta_of(ta, ts, ds, grid.da, hw.alpha)
    if not grid.accepts(eta):
        return "skip", None
    params = PiParams(ta=ta, ts=ts, ds=ds, da=grid.da)
    try:
        ref = singleint_solve(eta, hw)
    except InfeasibleError:
        return "infeasible", None
    res = offset_sweep_oracle(
        params, horizon=HORIZON_FACTOR * seconds_to_ns(ref.dm), on_unbounded="record"
    )
    if not res.bounded:
        return "unbounded", params
    return "row", SearchRow(ta, ts, ds, grid.da, eta, ns_to_seconds(res.worst), ref.dm)


def _evaluate_chunk(
    chunk: list[tuple[int, int, int]], grid: SearchGrid, hw: HardwareProfile
) -> list[tuple[str, SearchRow | PiParams | None]]:
    return [_evaluate(c, grid, hw) for c in chunk]


def grid_search(
    grid: SearchGrid,
    hw: HardwareProfile | None = None,
    *,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    chunk_size: int = 256,
) -> SearchResult:
    """Compare every in-band grid point against SingleInt.

    The hardware profile's d_a is replaced by the grid's beacon length.

    Raises:
        BudgetExceededError: the grid has more than `budget` candidates;
            nothing is evaluated.
    """
    count = grid.candidate_count()
    if count > budget:
        raise BudgetExceededError(
            f"grid has {count} candidates, budget is {budget}", candidates=count, budget=budget
        )
    hw = (hw or HardwareProfile()).replace(d_a=grid.da)
    logger.info("grid_search: %d candidates", count)

    cands = list(grid.candidates())
    chunks = [cands[i : i + chunk_size] for i in range(0, len(cands), chunk_size)]
    if workers <= 1 or len(chunks) <= 1:
        parts = [_evaluate_chunk(c, grid, hw) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(_evaluate_chunk, chunks, repeat(grid), repeat(hw)))

    rows: list[SearchRow] = []
    unbounded: list[PiParams] = []
    infeasible = 0
    for part in parts:
        for kind, value in part:
            if kind == "row":
                assert isinstance(value, SearchRow)
                rows.append(value)
            elif kind == "unbounded":
                assert isinstance(value, PiParams)
                unbounded.append(value)
            elif kind == "infeasible":
                infeasible += 1
    violations = [r for r in rows if r.violates]
    result = SearchResult(
        candidates=count, rows=rows, violations=violations, unbounded=unbounded, infeasible=infeasible
    )
    logger.info(
        "grid_search: evaluated=%d unbounded=%d violations=%d min_gap=%.6f s",
        len(rows), len(unbounded), len(violations), result.min_gap,
    )
    for v in violations:
        logger.warning(
            "grid_search: Ta=%.3f Ts=%.3f ds=%.3f beats SingleInt by %.6f s", v.ta, v.ts, v.ds, -v.gap
        )
    return result
