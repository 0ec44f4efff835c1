import numpy as np
import pytest

from pi_discovery import ParameterError, UnboundedLatencyError, multiint_solve, singleint_solve
from pi_discovery.sim import QuantizedClock, analytic_dm, latency_pieces, offset_sweep_oracle, quantized_sweep

from .conftest import generic_params, get_hw


def test_singleint_worst_case_matches_analytic():
    """Test the exhaustive sweep against (M + 1)·Ta + da."""
    for eta in (0.0055, 0.0155):
        params = singleint_solve(eta, get_hw()).params
        dm = analytic_dm(params)
        res = offset_sweep_oracle(params)
        assert res.bounded
        assert abs(res.worst / dm - 1) <= 0.01, f"eta={eta}: oracle {res.worst} ns vs analytic {dm} ns"
        assert res.mean < res.worst
        assert 0 <= res.argmax_offset < res.period


def test_multiint_worst_case_matches_analytic():
    """Test the exhaustive sweep on MultiInt solutions."""
    for m in (1, 2):
        params = multiint_solve(0.0055, m, get_hw()).params
        dm = analytic_dm(params)
        res = offset_sweep_oracle(params)
        assert abs(res.worst / dm - 1) <= 0.01, f"M={m}: oracle {res.worst} ns vs analytic {dm} ns"
        assert res.mean < res.worst


def test_unbounded_offsets():
    """Test parameters where part of the offsets never meet a window."""
    # Ta divides Ts and exceeds ds: the beacons keep missing the same windows
    params = generic_params(0.01, 0.1, 0.005)
    with pytest.raises(ParameterError):
        analytic_dm(params)
    with pytest.raises(ParameterError):
        offset_sweep_oracle(params)
    with pytest.raises(UnboundedLatencyError) as info:
        offset_sweep_oracle(params, horizon=2_000_000_000)
    assert info.value.offset_ns >= 0

    res = offset_sweep_oracle(params, horizon=2_000_000_000, on_unbounded="record")
    assert not res.bounded
    assert all(0 <= o < res.period for o in res.unbounded_offsets)

    with pytest.raises(ParameterError):
        offset_sweep_oracle(params, horizon=2_000_000_000, on_unbounded="ignore")


def test_latency_pieces_by_hand():
    """Test the piecewise latency for two beacons and one window."""
    # windows [0, 10) and [10, 20), beacons at 0 and 6, da = 2, offsets in [0, 10)
    starts, latency, used = latency_pieces(
        np.array([0, 6], dtype=np.int64),
        np.array([0, 10], dtype=np.int64),
        np.array([10, 10], dtype=np.int64),
        2,
        10,
    )
    # beacon 0 covers offsets [0, 8], beacon 1 the remaining offset 9
    assert starts.tolist() == [0, 3, 4, 9]
    assert latency.tolist() == [2, 2, 2, 8]
    assert used == 2


def test_quantized_sweep_with_correction():
    """Test that the corrected clock and the window extension keep the latency bound."""
    params = singleint_solve(0.0155, get_hw()).params
    res = quantized_sweep(params, get_hw(), QuantizedClock())
    assert res.exceedances == 0, f"{res.exceedances} pieces above 1.01·dm"


def test_quantized_sweep_negative_control():
    """Test that dropping correction and extension breaks the latency bound."""
    params = singleint_solve(0.0155, get_hw()).params
    res = quantized_sweep(params, get_hw(), QuantizedClock(q_correction=False, ds_extension_ticks=0))
    assert res.exceedances >= 1


@pytest.mark.slow
def test_quantized_sweep_low_duty_cycle():
    """Test the quantized sweep at 0.2 %."""
    params = singleint_solve(0.002, get_hw()).params
    res = quantized_sweep(params, get_hw(), QuantizedClock())
    assert res.exceedances == 0
