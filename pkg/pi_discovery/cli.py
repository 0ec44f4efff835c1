"""
Command-line interface.

    pi-discovery param --scheme singleint --eta 0.55% --da 32us
    pi-discovery compare --eta 0.002:0.0155:28 --pblk 0.0019 --out results --svg
    pi-discovery simulate --scheme multiint2-bc --eta 1.55% --trials 100000 --mode twoway --seed 7
    pi-discovery sweep --scheme singleint --eta 0.2%
    pi-discovery search --out results
    pi-discovery bound --eta 1%
    pi-discovery ble --eta-joint 5% --mode unidir

Every command prints its main result as JSON. With `--out DIR` results are
also written to DIR together with `manifest.json`.

Exit codes: 0 ok, 2 usage or invalid parameters, 3 infeasible or
unbounded, 4 an `--assert` check failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import re
import sys
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import svg
from .ble import (
    ETA_JOINT_RANGE,
    BleMode,
    BleOverheads,
    ble_compliance,
    ble_config_json,
    ble_solve,
    ble_vs_ideal_ratio,
    multiint_ble_report,
)
from .bounds import check_singleint_optimal, unidir_bound_seconds
from .error import (
    BudgetExceededError,
    InfeasibleError,
    NoConvergenceError,
    ParameterError,
    UnboundedLatencyError,
)
from .multiint import BcAccounting, bc_adjust, bc_duty_cycle, multiint_solve
from .optsearch import DEFAULT_BUDGET, SearchGrid, grid_search
from .report import RunManifest, atomic_write_text, dumps, write_csv, write_json
from .sim import (
    IdealClock,
    Mode,
    QuantizedClock,
    ScenarioConfig,
    analytic_dm,
    collision_monte_carlo,
    monte_carlo,
    offset_sweep_oracle,
    quantized_sweep,
)
from .singleint import SolveMode, singleint_blocking, singleint_solve
from .slotted import DEFAULT_NIHAO_M, Protocol, SearchlightEvaluator, gain_table
from .testing import reference
from .timebase import HardwareProfile, PiParams, duty_cycle, ns_to_seconds, seconds_to_ns

__all__ = ["build_parser", "load_profile", "main", "parse_eta", "parse_time"]

logger = logging.getLogger(__name__)

PROG = "pi-discovery"
PROFILE_ENV = "PI_DISCOVERY_PROFILE"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_ASSERT = 4

# points per series in emitted SVG plots
SVG_POINT_LIMIT = 2000

CONSTRAINT_NAMES = {
    "eta_max": "conservative maximum duty-cycle limit",
    "ds_min": "minimum scan window",
    "m_min": "lower bound on M",
    "m_range": "admissible integer range of M",
    "k_min": "lower bound on k_c",
    "k_range": "admissible integer range of k_c",
}


# ─── Argument types ──────────────────────────────────────────────────────────

_UNITS = {"ns": 1e-9, "us": 1e-6, "µs": 1e-6, "ms": 1e-3, "s": 1.0}
_TIME_RE = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(ns|us|µs|ms|s)\s*$")
_SCHEME_RE = re.compile(r"^(?:singleint|multiint(\d+)(-bc)?)$")


def parse_time(text: str) -> float:
    """'32us' -> 3.2e-05 seconds. A unit is required."""
    m = _TIME_RE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(
            f"invalid time {text!r}: expected a number with unit ns, us, ms or s"
        )
    return float(m.group(1)) * _UNITS[m.group(2)]


def parse_eta(text: str) -> float:
    """A duty-cycle as a fraction ('0.0055') or a percentage ('0.55%')."""
    s = text.strip()
    percent = s.endswith("%")
    try:
        value = float(s[:-1] if percent else s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid duty-cycle {text!r}") from None
    if percent:
        value /= 100
    elif value > 1:
        raise argparse.ArgumentTypeError(
            f"ambiguous duty-cycle {text!r}: give a fraction or add an explicit '%'"
        )
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"duty-cycle {text!r} must lie strictly between 0 and 1")
    return value


def parse_eta_range(text: str) -> list[float]:
    """'lo:hi:n' -> n evenly spaced duty-cycles; a single value -> [value]."""
    parts = text.split(":")
    if len(parts) == 1:
        return [parse_eta(parts[0])]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}: expected lo:hi:n")
    lo, hi = parse_eta(parts[0]), parse_eta(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid point count in {text!r}") from None
    if n < 1 or hi < lo or (n == 1 and hi != lo):
        raise argparse.ArgumentTypeError(f"invalid range {text!r}: need lo <= hi and n >= 1")
    return [float(x) for x in np.linspace(lo, hi, n)]


def parse_eta_band(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"invalid band {text!r}: expected lo:hi")
    return parse_eta(parts[0]), parse_eta(parts[1])


def parse_time_range(text: str) -> tuple[float, float, float]:
    """'min:max:step' with units, e.g. '50ms:1s:50ms'."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}: expected min:max:step")
    lo, hi, step = (parse_time(p) for p in parts)
    return lo, hi, step


@dataclass(frozen=True)
class SchemeChoice:
    name: str
    # 0 for SingleInt
    m: int
    bc: bool

    def __str__(self) -> str:
        return self.name


def parse_scheme(text: str) -> SchemeChoice:
    """'singleint', 'multiint<M>' or 'multiint<M>-bc'."""
    m = _SCHEME_RE.match(text.strip().lower())
    if not m:
        raise argparse.ArgumentTypeError(
            f"unknown scheme {text!r}: expected singleint, multiint<M> or multiint<M>-bc"
        )
    if m.group(1) is None:
        return SchemeChoice("singleint", 0, False)
    order = int(m.group(1))
    if order < 1:
        raise argparse.ArgumentTypeError(f"scheme {text!r}: M must be >= 1")
    return SchemeChoice(text.strip().lower(), order, m.group(2) is not None)


# ─── Configuration ───────────────────────────────────────────────────────────


def load_profile(args: argparse.Namespace) -> HardwareProfile:
    """Defaults, then the profile file (--profile or $PI_DISCOVERY_PROFILE), then single flags."""
    path = args.profile or os.environ.get(PROFILE_ENV)
    hw = HardwareProfile.load(path) if path else HardwareProfile()
    overrides = {
        attr: value
        for attr, value in (
            ("d_a", args.da),
            ("d_s_min", args.ds_min),
            ("d_rt", args.drt),
            ("d_tr", args.dtr),
            ("f_clk", args.fclk),
            ("alpha", args.alpha),
        )
        if value is not None
    }
    if overrides:
        hw = hw.replace(**overrides)
    logger.debug("hardware profile: %s", hw)
    return hw


def _arguments(args: argparse.Namespace) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in sorted(vars(args).items()):
        if key == "func":
            continue
        if isinstance(value, tuple):
            value = list(value)
        if not isinstance(value, (int, float, str, bool, list, type(None))):
            value = str(value)
        out[key] = value
    return out


# ─── Run context ─────────────────────────────────────────────────────────────


class _Run:
    """Output files, manifest and acceptance checks of one command."""

    def __init__(self, args: argparse.Namespace, hw: HardwareProfile) -> None:
        self.args = args
        self.hw = hw
        self.out = Path(args.out) if args.out else None
        self.manifest = RunManifest(
            command=args.command,
            arguments=_arguments(args),
            hw=hw,
            master_seed=getattr(args, "seed", None),
        )
        self.failures: list[str] = []

    @property
    def checking(self) -> bool:
        return bool(self.args.check)

    def emit(self, name: str, payload: dict[str, Any]) -> None:
        print(dumps(payload))
        if self.out is not None:
            self.manifest.add(write_json(self.out / name, payload))

    def csv(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
        if self.out is not None:
            self.manifest.add(write_csv(self.out / name, columns, rows))

    def svg(self, name: str, render: Callable[[], str]) -> None:
        if self.out is not None and self.args.svg:
            self.manifest.add(atomic_write_text(self.out / name, render()))

    def check(self, ok: bool, message: str) -> None:
        if ok:
            logger.info("check passed: %s", message)
        else:
            self.failures.append(message)

    def finish(self) -> int:
        if self.out is not None:
            self.manifest.write(self.out)
        for f in self.failures:
            print(f"{PROG}: assertion failed: {f}", file=sys.stderr)
        return EXIT_ASSERT if self.failures else EXIT_OK


# ─── Scheme solving ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Solved:
    scheme: SchemeChoice
    eta: float
    params: PiParams
    dm: float
    p_blk: float
    eta_achieved: float
    clamped: bool
    extra: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        p = self.params
        return {
            "scheme": self.scheme.name,
            "eta": self.eta,
            "Ta": p.ta,
            "Ts": p.ts,
            "ds": p.ds,
            "da": p.da,
            "M": p.m,
            "k": p.k_c if p.k_c else None,
            "dm": self.dm,
            "p_blk": self.p_blk,
            "eta_achieved": self.eta_achieved,
            "clamped": self.clamped,
            **self.extra,
        }


def solve(scheme: SchemeChoice, eta: float, hw: HardwareProfile, args: argparse.Namespace) -> Solved:
    force = getattr(args, "force", False)
    if scheme.m == 0:
        mode = SolveMode(getattr(args, "solve_mode", SolveMode.ROUNDED_OPT.value))
        sol = singleint_solve(
            eta, hw, mode, safety_margin=getattr(args, "safety_margin", False), force=force
        )
        extra: dict[str, Any] = {"dm_star": sol.dm_star, "mode": mode.value}
        if sol.dm_relaxed is not None:
            extra["dm_relaxed"] = sol.dm_relaxed
        return Solved(
            scheme, eta, sol.params, sol.dm, singleint_blocking(sol.params, hw),
            duty_cycle(sol.params, hw), sol.clamped, extra,
        )
    if not scheme.bc:
        sol = multiint_solve(eta, scheme.m, hw, force=force)
        return Solved(
            scheme, eta, sol.params, sol.dm, sol.p_blk, duty_cycle(sol.params, hw), sol.clamped,
            {"gamma": sol.gamma},
        )
    accounting = BcAccounting(getattr(args, "accounting", BcAccounting.EXACT.value))
    sol = bc_adjust(eta, hw, m=scheme.m, accounting=accounting)
    return Solved(
        scheme,
        eta,
        sol.params,
        sol.dm,
        sol.p_blk,
        bc_duty_cycle(sol.params, hw, accounting),
        sol.clamped,
        {
            "gamma": sol.gamma,
            "eta_nominal": sol.eta_nominal,
            "dm_uncompensated": sol.dm_uncompensated,
            "dm_increase": sol.dm_increase,
            "iterations": sol.iterations,
            "accounting": accounting.value,
        },
    )


def _thin(xs: Sequence[float], ys: Sequence[float]) -> tuple[list[float], list[float]]:
    if len(xs) <= SVG_POINT_LIMIT:
        return list(xs), list(ys)
    idx = np.unique(np.linspace(0, len(xs) - 1, SVG_POINT_LIMIT).round().astype(int))
    return [xs[i] for i in idx], [ys[i] for i in idx]


# ─── Commands ────────────────────────────────────────────────────────────────


def cmd_param(args: argparse.Namespace, run: _Run) -> None:
    solved = solve(args.scheme, args.eta, run.hw, args)
    run.emit("param.json", solved.to_dict())
    if not run.checking:
        return
    row = next((r for r in reference.PARAM_TABLE if math.isclose(r.eta, args.eta, rel_tol=1e-9)), None)
    if row is None or args.scheme.name not in ("singleint", "multiint2"):
        raise ParameterError(f"no reference values for {args.scheme} at eta={args.eta}")
    expected = row.singleint if args.scheme.name == "singleint" else row.multiint2
    p = solved.params
    for name, want, got in zip(("Ta", "Ts", "ds"), expected, (p.ta, p.ts, p.ds), strict=True):
        run.check(
            abs(got - want) <= reference.PARAM_TABLE_TOL + 1e-12,
            f"{args.scheme} eta={args.eta}: {name}={got:.4f} s, expected {want:.4f} s",
        )


def _gain_reference_index(target_p: float) -> int:
    for i, p in enumerate((0.0019, 0.03)):
        if math.isclose(target_p, p, rel_tol=1e-9):
            return i
    raise ParameterError(f"no reference gains for a failure probability of {target_p}")


def cmd_compare(args: argparse.Namespace, run: _Run) -> None:
    accounting = BcAccounting(args.accounting)
    table = gain_table(
        args.eta,
        run.hw,
        target_p=args.pblk,
        searchlight=SearchlightEvaluator(args.searchlight),
        nihao_m=args.nihao_m,
        accounting=accounting,
    )
    run.csv(
        "compare.csv",
        ("eta", "protocol", "d_sl_s", "dm_protocol_s", "dm_reference_s", "gain", "evaluator"),
        (
            (r.eta, r.protocol.value, r.d_sl, r.dm_protocol, r.dm_reference, r.gain, r.evaluator)
            for r in table.rows
        ),
    )
    summary = {
        s.protocol.value: {"G_max": s.g_max, "G_mean": s.g_mean, "evaluator": s.evaluator}
        for s in table.summary.values()
    }
    run.emit(
        "compare.json",
        {
            "target_p": args.pblk,
            "eta_points": len(args.eta),
            "reference": f"multiint2-bc ({accounting.value})",
            "summary": summary,
        },
    )

    def render() -> str:
        series = []
        for protocol in table.summary:
            rows = [r for r in table.rows if r.protocol is protocol]
            series.append(svg.Series(protocol.value, [r.eta * 100 for r in rows], [r.dm_protocol for r in rows]))
        first = next(iter(table.summary))
        ref_rows = [r for r in table.rows if r.protocol is first]
        series.append(
            svg.Series("multiint2-bc", [r.eta * 100 for r in ref_rows], [r.dm_reference for r in ref_rows])
        )
        return svg.line_chart(
            f"Worst-case latency, P_fail = {args.pblk:g}",
            series,
            "duty-cycle [%]",
            "worst-case latency [s]",
            log_y=True,
        )

    run.svg("compare.svg", render)

    if run.checking:
        i = _gain_reference_index(args.pblk)
        for protocol in (Protocol.DISCO, Protocol.OPTIMAL_DIFFCODES):
            if protocol not in table.summary:
                continue
            want = reference.GAINS[protocol][i].g_max
            got = table.summary[protocol].g_max
            run.check(
                abs(got / want - 1.0) <= 0.02,
                f"{protocol.value} G_max={got:.1f}, expected {want:.1f} ±2%",
            )


def _clock(args: argparse.Namespace, hw: HardwareProfile) -> IdealClock | QuantizedClock:
    if args.clock == "quantized":
        return QuantizedClock(
            f_clk=hw.f_clk,
            q_correction=not args.no_q_correction,
            ds_extension_ticks=args.ds_extension,
        )
    return IdealClock()


def cmd_simulate(args: argparse.Namespace, run: _Run) -> None:
    solved = solve(args.scheme, args.eta, run.hw, args)
    params = solved.params
    cfg = ScenarioConfig(
        params=params,
        hw=run.hw,
        mode=Mode(args.mode),
        n_devices=args.devices,
        timeout=seconds_to_ns(args.timeout),
        trials=args.trials,
        master_seed=args.seed,
        ble_random_delay=seconds_to_ns(args.ble_random_delay) if args.ble_random_delay else None,
        clock=_clock(args, run.hw),
    )
    res = monte_carlo(cfg, workers=args.workers)
    run.csv(
        "simulate.csv",
        ("trial", "trial_seed", "latency_ab_ns", "latency_ba_ns", "failed"),
        ((o.trial, o.trial_seed, o.latency_ab, o.latency_ba, int(o.failed)) for o in res.outcomes),
    )
    payload: dict[str, Any] = {
        "params": solved.to_dict(),
        "mode": cfg.mode.value,
        "devices": cfg.n_devices,
        "clock": args.clock,
        "trials": cfg.trials,
        "seed": cfg.master_seed,
        "failures": res.failures,
        "failure_rate": res.failure_rate,
        "p_blk_predicted": solved.p_blk,
        "dm_predicted_s": ns_to_seconds(res.dm_predicted),
        "mean_latency_s": res.mean_latency / 1e9,
        "percentiles_s": {k: v / 1e9 for k, v in res.percentiles().items()},
    }
    if args.collision_trials:
        est = collision_monte_carlo(
            cfg.n_devices, params, run.hw, args.collision_trials, master_seed=args.seed, workers=args.workers
        )
        payload["collisions"] = {
            "trials": est.trials,
            "hits": est.hits,
            "p_hat": est.p_hat,
            "p_formula": est.p_formula,
            "sigma": est.sigma,
        }
    run.emit("simulate.json", payload)

    def render_cdf() -> str:
        x, y = res.cdf()
        xs, ys = _thin((x / 1e9).tolist(), y.tolist())
        return svg.cdf_chart(f"Discovery latency, {args.scheme} at {args.eta:.2%}", [svg.Series(str(args.scheme), xs, ys)])

    def render_scatter() -> str:
        done = [o for o in res.outcomes if o.latency is not None]
        xs, ys = _thin([float(o.trial) for o in done], [o.latency / 1e9 for o in done if o.latency is not None])
        return svg.scatter_chart(
            f"Latency per trial, {args.scheme} at {args.eta:.2%}",
            [svg.Series("latency", xs, ys)],
            "trial",
            "latency [s]",
        )

    run.svg("simulate_cdf.svg", render_cdf)
    run.svg("simulate_scatter.svg", render_scatter)

    if run.checking:
        if params.bc_enabled and cfg.mode is Mode.TWO_WAY:
            sigma = res.binomial_sigma(solved.p_blk)
            run.check(
                abs(res.failure_rate - solved.p_blk) <= 3 * sigma,
                f"failure rate {res.failure_rate:.5f} not within 3σ ({3 * sigma:.5f}) of {solved.p_blk:.5f}",
            )
        elif cfg.mode is Mode.ONE_WAY:
            run.check(res.failures == 0, f"{res.failures} one-way failures, expected none")
        else:
            raise ParameterError("no acceptance check for two-way runs without blocking compensation")


def cmd_sweep(args: argparse.Namespace, run: _Run) -> None:
    solved = solve(args.scheme, args.eta, run.hw, args)
    params = solved.params
    dm = analytic_dm(params)
    if args.clock == "quantized":
        clock = _clock(args, run.hw)
        assert isinstance(clock, QuantizedClock)
        res = quantized_sweep(params, run.hw, clock, dm_predicted=dm)
    else:
        res = offset_sweep_oracle(params)
    run.emit(
        "sweep.json",
        {
            "params": solved.to_dict(),
            "clock": args.clock,
            "worst_s": ns_to_seconds(res.worst),
            "argmax_offset_ns": res.argmax_offset,
            "mean_s": res.mean / 1e9,
            "dm_predicted_s": ns_to_seconds(dm),
            "worst_over_dm": res.worst / dm,
            "pieces": res.pieces,
            "beacons_used": res.beacons_used,
            "unbounded_offsets": len(res.unbounded_offsets),
            "exceedances": res.exceedances,
        },
    )
    if run.checking:
        if args.clock == "quantized":
            run.check(res.exceedances == 0, f"{res.exceedances} offsets exceed 1.01·dm")
        else:
            run.check(
                0.99 * dm <= res.worst <= dm,
                f"worst latency {ns_to_seconds(res.worst):.6f} s outside [0.99, 1]·{ns_to_seconds(dm):.6f} s",
            )


def cmd_search(args: argparse.Namespace, run: _Run) -> None:
    base = SearchGrid.full() if args.full else SearchGrid()
    changes = {
        k: v
        for k, v in (
            ("ta_range", args.ta),
            ("ts_range", args.ts),
            ("ds_step", args.ds_step),
            ("da", args.beacon),
            ("eta_band", args.eta_band),
        )
        if v is not None
    }
    grid = dataclasses.replace(base, **changes)
    result = grid_search(grid, run.hw, budget=args.budget, workers=args.workers)
    run.csv(
        "search.csv",
        ("ta_s", "ts_s", "ds_s", "eta", "candidate_dm_s", "singleint_dm_s", "gap_s"),
        ((r.ta, r.ts, r.ds, r.eta, r.candidate_dm, r.singleint_dm, r.gap) for r in result.rows),
    )
    witness = result.witness
    run.emit(
        "search.json",
        {
            "candidates": result.candidates,
            "evaluated": len(result.rows),
            "violations": len(result.violations),
            "unbounded": len(result.unbounded),
            "infeasible": result.infeasible,
            "min_gap_s": result.min_gap if result.rows else None,
            "witness": None
            if witness is None
            else {"Ta": witness.ta, "Ts": witness.ts, "ds": witness.ds, "da": witness.da},
        },
    )

    def render() -> str:
        xs, ys = _thin([r.eta * 100 for r in result.rows], [r.gap for r in result.rows])
        return svg.scatter_chart(
            "Latency gap to SingleInt", [svg.Series("candidates", xs, ys)], "duty-cycle [%]", "gap [s]"
        )

    run.svg("search.svg", render)

    if run.checking:
        run.check(not result.violations, f"{len(result.violations)} candidates beat SingleInt")
        run.check(result.min_gap > 0, f"min gap {result.min_gap:.6f} s is not positive")
        if args.full:
            run.check(0.05 <= result.min_gap <= 0.5, f"min gap {result.min_gap:.6f} s outside [50 ms, 500 ms]")


def cmd_bound(args: argparse.Namespace, run: _Run) -> None:
    rep = check_singleint_optimal(args.eta, run.hw.d_a)
    payload: dict[str, Any] = {
        "eta": rep.eta,
        "da": run.hw.d_a,
        "sym_bound_s": rep.bound,
        "singleint_relaxed_dm_s": rep.singleint_relaxed_dm,
        "M": rep.m,
        "optimal": rep.equal,
    }
    if (args.rho is None) != (args.beta is None):
        raise ParameterError("--rho and --beta go together")
    if args.rho is not None:
        payload["unidir_bound_s"] = unidir_bound_seconds(args.rho, args.beta, run.hw.d_a)
    run.emit("bound.json", payload)
    if run.checking:
        run.check(rep.equal, f"SingleInt latency {rep.singleint_relaxed_dm:.9f} s differs from the bound {rep.bound:.9f} s")


def cmd_ble(args: argparse.Namespace, run: _Run) -> None:
    overheads = BleOverheads(payload_bytes=args.payload_bytes)
    mode = BleMode(args.mode)
    if args.multiint:
        rep = multiint_ble_report(args.eta_joint, overheads, run.hw, m=args.order)
        p = rep.solution.params
        run.emit(
            "ble.json",
            {
                "scheme": f"multiint{args.order}",
                "advInterval_ms": p.ta * 1e3,
                "scanInterval_ms": p.ts * 1e3,
                "scanWindow_ms": rep.ds_extended * 1e3,
                "random_delay_cap_ms": rep.random_delay_cap * 1e3,
                "intervals_per_shift": rep.n,
                "eta_ble": rep.eta_ble,
                "predicted_dm_ms": rep.solution.dm * 1e3,
                "standard_compliant": rep.standard_compliant,
                "violations": rep.violations,
            },
        )
        if run.checking:
            run.check(rep.standard_compliant, "; ".join(rep.violations))
        return

    rounding = not args.no_rounding
    sol = ble_solve(
        args.eta_joint,
        overheads,
        mode,
        run.hw,
        allow_out_of_range=args.allow_out_of_range,
        mean_delay_shift=args.mean_delay_shift,
    )
    payload = ble_config_json(sol, rounding)
    violations = ble_compliance(sol, rounding)
    payload["violations"] = violations
    if args.ratio:
        grid = np.linspace(*ETA_JOINT_RANGE, 20)
        payload["ratio_vs_ideal"] = ble_vs_ideal_ratio(grid, overheads, mode, run.hw)
    run.emit("ble.json", payload)
    if run.checking:
        run.check(not violations, "; ".join(violations))
        ranges = reference.BLE_RANGES[mode]
        for key, value in (("ta", sol.params.ta), ("ts", sol.params.ts), ("ds", sol.params.ds)):
            lo, hi = ranges[key]
            run.check(
                0.85 * lo <= value <= 1.15 * hi,
                f"{key}={value * 1e3:.1f} ms outside the published range {lo * 1e3:g}..{hi * 1e3:g} ms",
            )


# ─── Parser ──────────────────────────────────────────────────────────────────


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    hw = p.add_argument_group("hardware profile")
    hw.add_argument("--profile", help=f"hardware profile JSON (default: ${PROFILE_ENV})")
    hw.add_argument("--da", type=parse_time, help="beacon duration, e.g. 32us")
    hw.add_argument("--ds-min", type=parse_time, help="minimum scan window, e.g. 1ms")
    hw.add_argument("--drt", type=parse_time, help="rx-to-tx turnaround")
    hw.add_argument("--dtr", type=parse_time, help="tx-to-rx turnaround")
    hw.add_argument("--fclk", type=float, help="sleep clock frequency in Hz")
    hw.add_argument("--alpha", type=float, help="transmit/receive power ratio")
    out = p.add_argument_group("output")
    out.add_argument("--out", help="directory for result files and manifest.json")
    out.add_argument("--svg", action="store_true", help="also write SVG plots (needs --out)")
    out.add_argument("--assert", dest="check", action="store_true", help="run the acceptance checks; exit 4 on failure")
    out.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    out.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    return p


def _scheme_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--scheme", type=parse_scheme, required=True, help="singleint, multiint<M> or multiint<M>-bc")
    p.add_argument("--eta", type=parse_eta, required=True, help="duty-cycle, e.g. 0.0055 or 0.55%%")
    p.add_argument(
        "--solve-mode",
        choices=[m.value for m in SolveMode],
        default=SolveMode.ROUNDED_OPT.value,
        help="SingleInt choice of M",
    )
    p.add_argument("--safety-margin", action="store_true", help="shorten Ts by one sleep-clock tick")
    p.add_argument("--force", action="store_true", help="skip the conservative duty-cycle limit")
    p.add_argument(
        "--accounting",
        choices=[a.value for a in BcAccounting],
        default=BcAccounting.EXACT.value,
        help="duty-cycle accounting of compensation beacons",
    )
    return p


def _clock_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--clock", choices=("ideal", "quantized"), default="ideal")
    p.add_argument("--no-q-correction", action="store_true", help="disable the accumulated-error correction")
    p.add_argument("--ds-extension", type=int, default=5, help="scan window extension in ticks (default: 5)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    scheme = _scheme_parser()
    parser = argparse.ArgumentParser(
        prog=PROG, description="Parametrize, analyse and simulate periodic-interval neighbor discovery."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("param", parents=[common, scheme], help="parameters for a duty-cycle")
    s.set_defaults(func=cmd_param)

    s = sub.add_parser("compare", parents=[common], help="gains over slotted protocols")
    s.add_argument("--eta", type=parse_eta_range, default=parse_eta_range("0.002:0.0155:28"), help="lo:hi:n")
    s.add_argument("--pblk", type=float, default=0.0019, help="failure probability the slots are calibrated to")
    s.add_argument(
        "--searchlight",
        choices=[e.value for e in SearchlightEvaluator],
        default=SearchlightEvaluator.GAIN_CONSISTENT.value,
    )
    s.add_argument("--nihao-m", type=int, default=DEFAULT_NIHAO_M)
    s.add_argument("--accounting", choices=[a.value for a in BcAccounting], default=BcAccounting.EXACT.value)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("simulate", parents=[common, scheme], help="Monte Carlo discovery trials")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.ONE_WAY.value)
    s.add_argument("--devices", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--timeout", type=parse_time, default=35.0, help="per-trial timeout (default: 35s)")
    s.add_argument("--ble-random-delay", type=parse_time, help="largest random advertising delay, e.g. 10ms")
    s.add_argument("--collision-trials", type=int, default=0, help="also estimate the collision probability")
    _clock_arguments(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", parents=[common, scheme], help="exact worst case over all offsets")
    _clock_arguments(s)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("search", parents=[common], help="grid search for parameters beating SingleInt")
    s.add_argument("--full", action="store_true", help="Ta, Ts from 10 ms to 5 s in 10 ms steps")
    s.add_argument("--ta", type=parse_time_range, help="min:max:step, e.g. 50ms:1s:50ms")
    s.add_argument("--ts", type=parse_time_range, help="min:max:step")
    s.add_argument("--ds-step", type=parse_time)
    s.add_argument("--beacon", type=parse_time, help="beacon length of the candidates (default: 320us)")
    s.add_argument("--eta-band", type=parse_eta_band, help="lo:hi")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("bound", parents=[common], help="latency bounds and SingleInt optimality")
    s.add_argument("--eta", type=parse_eta, required=True)
    s.add_argument("--rho", type=parse_eta, help="receive duty-cycle for the one-way bound")
    s.add_argument("--beta", type=parse_eta, help="transmit duty-cycle for the one-way bound")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("ble", parents=[common], help="BLE advertising and scanning configuration")
    s.add_argument("--eta-joint", type=parse_eta, required=True)
    s.add_argument("--mode", choices=[m.value for m in BleMode], default=BleMode.UNIDIR.value)
    s.add_argument("--payload-bytes", type=int, default=30)
    s.add_argument("--no-rounding", action="store_true", help="emit values off the 0.625 ms grid")
    s.add_argument("--mean-delay-shift", action="store_true", help="count the mean random delay into Ta")
    s.add_argument("--allow-out-of-range", action="store_true")
    s.add_argument("--ratio", action="store_true", help="mean latency ratio against an ideal PI protocol")
    s.add_argument(
        "--multiint",
        action="store_true",
        help="report MultiInt parameters instead; --assert then checks that a stock BLE stack can run them, "
        "which fails whenever Ts > Ta shrinks the random delay range",
    )
    s.add_argument("--order", type=int, default=2, help="M for --multiint (default: 2)")
    s.set_defaults(func=cmd_ble)
    return parser


# ─── Entry point ─────────────────────────────────────────────────────────────


def _configure_logging(verbose: int) -> None:
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _error(message: str) -> None:
    print(f"{PROG}: error: {message}", file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.svg and not args.out:
            parser.error("--svg needs --out")
        if args.workers < 1:
            parser.error("--workers must be >= 1")
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else (EXIT_OK if e.code is None else EXIT_USAGE)

    _configure_logging(args.verbose)
    try:
        run = _Run(args, load_profile(args))
        args.func(args, run)
        return run.finish()
    except (ParameterError, BudgetExceededError) as e:
        _error(str(e))
        return EXIT_USAGE
    except InfeasibleError as e:
        name = CONSTRAINT_NAMES.get(e.constraint, e.constraint)
        _error(f"{e} (violated constraint: {name}, {e.constraint})")
        return EXIT_INFEASIBLE
    except (NoConvergenceError, UnboundedLatencyError) as e:
        _error(str(e))
        return EXIT_INFEASIBLE
