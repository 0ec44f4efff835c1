import math

import numpy as np
import pytest

from pi_discovery import ParameterError, Protocol, SlotDesign, SlottedSpec, calibrate_slot, gain_table, slotted_dm
from pi_discovery.slotted import (
    UCONNECT_SLOT,
    SearchlightEvaluator,
    default_eta_grid,
    protocol_slot,
    slot_failure_prob,
    slotted_dm_seconds,
)
from pi_discovery.testing import GAINS

from .conftest import get_hw

# one gain table per target probability, shared by the tests below
_TABLES = {}


def _table(target_p):
    if target_p not in _TABLES:
        _TABLES[target_p] = gain_table(
            default_eta_grid(),
            get_hw(),
            target_p=target_p,
            searchlight=SearchlightEvaluator.GAIN_CONSISTENT,
        )
    return _TABLES[target_p]


def test_slot_calibration():
    """Test slot lengths calibrated to a failure probability of 0.0019."""
    hw = get_hw()
    padded = calibrate_slot(SlotDesign.PADDED_TWO_BEACON, 0.0019, hw)
    overflowing = calibrate_slot(SlotDesign.OVERFLOWING, 0.0019, hw)
    nihao = calibrate_slot(SlotDesign.NIHAO_LISTEN_BLOCK, 0.0019, hw)
    assert abs(padded - 0.19789) < 1e-4, f"Expected ~0.19789 s, got {padded}"
    assert abs(overflowing - 0.10737) < 1e-4, f"Expected ~0.10737 s, got {overflowing}"
    assert abs(nihao - 5.486e-3) < 1e-5, f"Expected ~5.486 ms, got {nihao}"
    assert math.isclose(slot_failure_prob(SlotDesign.PADDED_TWO_BEACON, padded, hw), 0.0019)
    assert protocol_slot(Protocol.UCONNECT, 0.0019, hw).d_sl == UCONNECT_SLOT


def test_slotted_latency():
    """Test the closed forms on a 1 ms slot."""
    disco = SlottedSpec(Protocol.DISCO, 1e-3)
    diffcodes = SlottedSpec(Protocol.OPTIMAL_DIFFCODES, 1e-3)
    assert math.isclose(slotted_dm_seconds(disco, 0.01, 32e-6), 40.0)
    assert math.isclose(slotted_dm_seconds(diffcodes, 0.01, 32e-6), 5.0)
    assert slotted_dm(disco, 0.01, 32e-6) == 40_000_000_000

    searchlight = SlottedSpec(Protocol.SEARCHLIGHT_STRIPED, 1e-3)
    assert math.isclose(slotted_dm_seconds(searchlight, 0.01, 32e-6), 0.05)
    assert math.isclose(
        slotted_dm_seconds(searchlight, 0.01, 32e-6, SearchlightEvaluator.GAIN_CONSISTENT), 10.0
    )

    with pytest.raises(ParameterError):
        SlottedSpec(Protocol.DISCO, 0.0)



def test_slotted_latency_falls_with_duty_cycle():
    """Test that every closed form is non-increasing in the duty-cycle."""
    etas = np.geomspace(0.002, 0.2, 400)
    for protocol in Protocol:
        for evaluator in SearchlightEvaluator:
            slot = SlottedSpec(protocol, 1e-3)
            dms = [slotted_dm_seconds(slot, float(eta), 32e-6, evaluator) for eta in etas]
            assert all(a >= b for a, b in zip(dms, dms[1:])), f"{protocol.value} {evaluator.value}"


def test_slotted_latency_scales_with_slot():
    """Test that latency is proportional to the slot length."""
    for protocol in Protocol:
        if protocol is Protocol.GNIHAO:
            continue
        for eta in (0.002, 0.0155, 0.05):
            base = slotted_dm_seconds(SlottedSpec(protocol, 1e-3), eta, 32e-6)
            for c in (0.25, 2.0, 7.5):
                got = slotted_dm_seconds(SlottedSpec(protocol, c * 1e-3), eta, 32e-6)
                assert math.isclose(got, c * base, rel_tol=1e-12), f"{protocol.value} eta={eta} c={c}"

    # g-nihao keeps d_a fixed inside the slot, so it only grows with the slot
    slots = np.linspace(200e-6, 5e-3, 100)
    for eta in (0.002, 0.0155, 0.05):
        dms = [slotted_dm_seconds(SlottedSpec(Protocol.GNIHAO, float(d)), eta, 32e-6) for d in slots]
        assert all(a < b for a, b in zip(dms, dms[1:])), f"eta={eta}"

def test_gains_low_failure_probability():
    """Test G_max and G_mean over the default grid against published values."""
    table = _table(0.0019)
    for protocol in (Protocol.DISCO, Protocol.OPTIMAL_DIFFCODES, Protocol.SEARCHLIGHT_STRIPED):
        want = GAINS[protocol][0]
        got = table.summary[protocol]
        assert abs(got.g_max / want.g_max - 1) <= 0.02, (
            f"{protocol.value}: expected G_max {want.g_max}, got {got.g_max:.1f}"
        )
        assert abs(got.g_mean / want.g_mean - 1) <= 0.10, (
            f"{protocol.value}: expected G_mean {want.g_mean}, got {got.g_mean:.1f}"
        )

    uconnect = table.summary[Protocol.UCONNECT]
    assert abs(uconnect.g_max / GAINS[Protocol.UCONNECT][0].g_max - 1) <= 0.05

    nihao = table.summary[Protocol.GNIHAO]
    assert 5 <= nihao.g_max <= 50


def test_gains_high_failure_probability():
    """Test that a larger failure probability shrinks the slotted gains."""
    table = _table(0.03)
    for protocol in (Protocol.DISCO, Protocol.OPTIMAL_DIFFCODES):
        want = GAINS[protocol][1].g_max
        got = table.summary[protocol].g_max
        assert abs(got / want - 1) <= 0.02, f"{protocol.value}: expected G_max {want}, got {got:.1f}"
        assert got < _table(0.0019).summary[protocol].g_max


def test_gain_mean_between_extremes():
    """Test that every mean gain lies between the smallest and largest gain."""
    table = _table(0.0019)
    for protocol, summary in table.summary.items():
        gains = [r.gain for r in table.rows if r.protocol is protocol]
        assert min(gains) <= summary.g_mean <= max(gains)
        assert summary.g_max == max(gains)


def test_gain_table_custom_reference():
    """Test a caller-supplied reference latency."""
    grid = [0.005, 0.01]
    table = gain_table(grid, get_hw(), reference=lambda eta: 1.0, protocols=[Protocol.DISCO])
    assert len(table.rows) == 2
    for row in table.rows:
        assert math.isclose(row.gain, row.dm_protocol)

    with pytest.raises(ParameterError):
        gain_table([], get_hw())
