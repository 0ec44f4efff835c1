import logging
import math

import numpy as np
import pytest

from pi_discovery import (
    BleMode,
    BleOverheads,
    ParameterError,
    PiParams,
    ble_compliance,
    ble_config_json,
    ble_duty_cycle,
    ble_solve,
    ble_vs_ideal_ratio,
    multiint_ble_report,
)
from pi_discovery.ble import BLE_UNIT, ETA_JOINT_RANGE, burst_span
from pi_discovery.sim import offset_sweep_oracle
from pi_discovery.testing import BLE_RANGES, BLE_RATIO
from pi_discovery.timebase import ns_to_seconds


def test_overheads():
    """Test the default beacon air time and scan-window extension."""
    o = BleOverheads()
    assert math.isclose(o.air_time, 320e-6)
    assert math.isclose(o.o_s, 11e-3)
    assert math.isclose(BleOverheads(payload_bytes=20).air_time, 240e-6)
    assert BleOverheads.zero().o_s == 0
    assert BleOverheads.zero().burst == 0

    with pytest.raises(ParameterError):
        BleOverheads(o_a=-1e-6)
    with pytest.raises(ParameterError):
        BleOverheads(payload_bytes=0, framing=0.0)



def test_burst_span():
    """Test the measured burst and its derivation from the beacon air time."""
    assert BleOverheads().burst == 1e-3
    assert math.isclose(burst_span(320e-6), 1.26e-3)
    # overriding the measured offsets derives d_e from the beacon length
    o = BleOverheads(o_a=500e-6)
    assert math.isclose(o.burst, 3 * o.air_time + 2 * 150e-6)
    assert math.isclose(o.o_s, 10e-3 + 1.26e-3)
    assert math.isclose(BleOverheads(o_a2=0.0, payload_bytes=20).burst, 3 * 240e-6 + 300e-6)
    # an explicit d_e always wins
    assert BleOverheads(o_a=500e-6, d_e=2e-3).burst == 2e-3
    with pytest.raises(ParameterError):
        BleOverheads(d_e=-1e-3)

def test_duty_cycle():
    """Test the overhead-inclusive duty-cycle of a hand-picked configuration."""
    p = PiParams(ta=0.05, ts=2.0, ds=0.06, da=240e-6)
    o = BleOverheads()
    assert abs(ble_duty_cycle(p, o, BleMode.UNIDIR) - 0.05268) < 1e-9
    assert abs(ble_duty_cycle(p, o, BleMode.BIDIR) - 0.05554) < 1e-9


def test_solution_spends_eta_joint():
    """Test that advertiser and scanner together spend exactly the joint duty-cycle."""
    for mode in BleMode:
        for eta in np.linspace(*ETA_JOINT_RANGE, 9):
            sol = ble_solve(float(eta), mode=mode)
            got = ble_duty_cycle(sol.core_params, sol.overheads, mode)
            assert abs(got - eta) < 1e-6, f"{mode.value} eta={eta}: duty-cycle {got}"
            assert math.isclose(sol.eta_advertiser + sol.eta_scanner, eta)
            assert math.isclose(sol.params.ds, sol.core_params.ds + sol.overheads.o_s)
            assert math.isclose(sol.params.ta, sol.params.ds - sol.overheads.o_s - sol.params.da)


def test_published_ranges():
    """Test the parameters at both ends of the supported range."""
    for mode in BleMode:
        low = ble_solve(ETA_JOINT_RANGE[0], mode=mode).params
        high = ble_solve(ETA_JOINT_RANGE[1], mode=mode).params
        ranges = BLE_RANGES[mode]
        # the lowest duty-cycle gives the longest intervals
        for key, got in (("ta", low.ta), ("ts", low.ts), ("ds", low.ds)):
            want = ranges[key][1]
            assert abs(got / want - 1) <= 0.10, f"{mode.value} {key}: expected ~{want}, got {got:.4f}"
        for key, got in (("ta", high.ta), ("ts", high.ts), ("ds", high.ds)):
            want = ranges[key][0]
            tolerance = 0.15 if key == "ts" else 0.10
            assert abs(got / want - 1) <= tolerance, f"{mode.value} {key}: expected ~{want}, got {got:.4f}"


def test_latency_falls_with_duty_cycle():
    """Test that more duty-cycle never costs latency."""
    for mode in BleMode:
        dms = [ble_solve(float(e), mode=mode).dm for e in np.linspace(*ETA_JOINT_RANGE, 12)]
        assert all(a > b for a, b in zip(dms, dms[1:])), f"{mode.value}: {dms}"


def test_out_of_range():
    """Test the supported duty-cycle range."""
    with pytest.raises(ParameterError):
        ble_solve(0.01)
    sol = ble_solve(0.15, allow_out_of_range=True)
    assert sol.eta_joint == 0.15


def test_mean_delay_shift():
    """Test that counting the mean random delay into Ta shortens the latency."""
    plain = ble_solve(0.05)
    shifted = ble_solve(0.05, mean_delay_shift=True)
    assert shifted.dm < plain.dm


def test_config_rounding():
    """Test the emitted configuration on the 0.625 ms grid."""
    sol = ble_solve(0.05)
    cfg = ble_config_json(sol)
    for key in ("advInterval_ms", "scanInterval_ms", "scanWindow_ms"):
        units = cfg[key] / (BLE_UNIT * 1e3)
        assert abs(units - round(units)) < 1e-6, f"{key}={cfg[key]} is off the grid"
    assert cfg["advInterval_ms"] <= sol.params.ta * 1e3
    assert cfg["scanWindow_ms"] >= sol.params.ds * 1e3
    assert cfg["eta_joint_emitted"] >= sol.eta_joint - 1e-12
    assert cfg["rounded"]

    raw = ble_config_json(sol, rounding=False)
    assert math.isclose(raw["advInterval_ms"], sol.params.ta * 1e3)
    assert abs(raw["eta_joint_emitted"] - sol.eta_joint) < 1e-6


def test_compliance():
    """Test that emitted values stay within the accepted stack ranges."""
    for e in np.linspace(*ETA_JOINT_RANGE, 15):
        sol = ble_solve(float(e), mode=BleMode.UNIDIR)
        assert ble_compliance(sol) == [], f"unidir eta={e}"
    for e in np.linspace(0.022, ETA_JOINT_RANGE[1], 15):
        sol = ble_solve(float(e), mode=BleMode.BIDIR)
        assert ble_compliance(sol) == [], f"bidir eta={e}"


def test_compliance_violation_is_logged(caplog):
    """Test the bidirectional scan interval at the lowest duty-cycle."""
    sol = ble_solve(ETA_JOINT_RANGE[0], mode=BleMode.BIDIR)
    with caplog.at_level(logging.WARNING, logger="pi_discovery"):
        violations = ble_compliance(sol)
    assert len(violations) == 1
    assert violations[0].startswith("scanInterval")
    assert "scanInterval" in caplog.text


def test_ratio_to_ideal():
    """Test the mean latency ratio against an overhead-free protocol."""
    grid = np.linspace(*ETA_JOINT_RANGE, 20)
    for mode in BleMode:
        ratio = ble_vs_ideal_ratio(grid, mode=mode)
        want = BLE_RATIO[mode]
        assert abs(ratio / want - 1) <= 0.15, f"{mode.value}: expected ~{want}x, got {ratio:.2f}x"

    with pytest.raises(ParameterError):
        ble_vs_ideal_ratio([])



def test_latency_over_ideal_protocol():
    """Test that BLE adds at most the random delay to the overhead-free latency."""
    for overheads in (BleOverheads(), BleOverheads(random_delay_max=5e-3)):
        for mode in BleMode:
            for eta in np.linspace(*ETA_JOINT_RANGE, 5):
                sol = ble_solve(float(eta), overheads, mode)
                ideal = ns_to_seconds(offset_sweep_oracle(sol.core_params).worst)
                excess = sol.dm - ideal
                assert -1e-6 <= excess <= overheads.random_delay_max + 1e-6, (
                    f"{mode.value} eta={eta}: BLE {sol.dm} vs ideal {ideal}"
                )

def test_multiint_report(caplog):
    """Test the random-delay cap a MultiInt configuration needs."""
    with caplog.at_level(logging.WARNING, logger="pi_discovery"):
        rep = multiint_ble_report(0.05)
    p = rep.solution.params
    o = BleOverheads()
    assert rep.n == math.ceil(p.ts / p.ta)
    assert math.isclose(rep.n * rep.random_delay_cap, o.random_delay_max)
    assert math.isclose(rep.ds_extended, p.ds + o.o_s)
    assert math.isclose(p.da, o.air_time)
    assert rep.eta_ble > 0.05
    assert not rep.standard_compliant
    assert rep.violations[0].startswith("random delay capped")
    assert "random delay capped" in caplog.text

    # without a random delay there is nothing to cap
    rep = multiint_ble_report(0.05, BleOverheads(random_delay_max=0.0))
    assert rep.n > 1
    assert not any(v.startswith("random delay") for v in rep.violations)
