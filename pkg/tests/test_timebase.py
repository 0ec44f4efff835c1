import json
import math

import numpy as np
import pytest

from pi_discovery import (
    BcAccounting,
    HardwareProfile,
    ParameterError,
    PiParams,
    ProfileError,
    Scheme,
    bc_duty_cycle,
    duty_cycle,
    tick_quantize,
)
from pi_discovery.singleint import eta_max_singleint
from pi_discovery.timebase import ceil_div, eta_of, ticks_to_ns, to_ticks

from .conftest import generic_params, get_hw


def test_eta_of():
    """Test the duty-cycle of a plain configuration."""
    assert math.isclose(eta_of(0.1, 1.0, 0.01, 0.001), 0.02)
    assert math.isclose(eta_of(0.1, 1.0, 0.01, 0.001, alpha=2.0), 0.03)


def test_eta_max_singleint():
    """Test the conservative SingleInt duty-cycle limit for the default radio."""
    eta = eta_max_singleint(get_hw())
    assert abs(eta - 0.155727) < 1e-5, f"Expected ~0.155727, got {eta}"


def test_tick_quantize():
    """Test quantization to a 32768 Hz sleep clock."""
    assert to_ticks(1_000_000, 32768) == 33
    assert ticks_to_ns(1, 32768) == 30518
    assert tick_quantize(1_000_000, 32768) == 1007080
    assert tick_quantize(0, 32768) == 0

    with pytest.raises(ParameterError):
        tick_quantize(-1, 32768)


def test_tick_quantize_error():
    """Test that quantization moves a time by at most half a tick."""
    rng = np.random.default_rng(5)
    for f_clk in (32768, 1e6, 1000):
        half = 1e9 / f_clk / 2
        for t in rng.integers(0, 10**11, 2000).tolist():
            q = tick_quantize(t, f_clk)
            assert abs(q - t) <= half + 0.5, f"f_clk={f_clk} t={t}: {q}"
            # on-grid times are fixed points
            assert tick_quantize(q, f_clk) == q
            k = to_ticks(t, f_clk)
            assert to_ticks(ticks_to_ns(k, f_clk), f_clk) == k


def test_duty_cycle_scale_invariance():
    """Test that scaling all durations together keeps the duty-cycle."""
    hw = get_hw()
    rng = np.random.default_rng(11)
    for _ in range(200):
        ta = float(rng.uniform(0.001, 1.0))
        ts = float(rng.uniform(ta, 20 * ta))
        da = float(rng.uniform(10e-6, ta / 10))
        ds = float(rng.uniform(2 * da, ts))
        c = float(rng.uniform(0.1, 10.0))
        base = generic_params(ta, ts, ds, da)
        scaled = generic_params(c * ta, c * ts, c * ds, c * da)
        assert math.isclose(duty_cycle(scaled, hw), duty_cycle(base, hw), rel_tol=1e-12)

        # phase-averaged compensation scales along with the turnaround times
        hw_c = hw.replace(d_rt=c * hw.d_rt, d_tr=c * hw.d_tr)
        bc = bc_duty_cycle(base.replace(bc_enabled=True), hw, BcAccounting.PHASE_AVERAGE)
        bc_scaled = bc_duty_cycle(scaled.replace(bc_enabled=True), hw_c, BcAccounting.PHASE_AVERAGE)
        assert math.isclose(bc_scaled, bc, rel_tol=1e-9)


def test_ceil_div():
    """Test integer ceiling division."""
    assert ceil_div(10, 5) == 2
    assert ceil_div(11, 5) == 3
    assert ceil_div(0, 7) == 0


def test_params_validation():
    """Test that impossible configurations are rejected."""
    with pytest.raises(ParameterError):
        PiParams(ta=0.01, ts=0.1, ds=0.01, da=0.0)
    with pytest.raises(ParameterError):
        PiParams(ta=20e-6, ts=0.1, ds=0.01, da=32e-6)
    with pytest.raises(ParameterError):
        PiParams(ta=0.01, ts=0.005, ds=0.01, da=32e-6)
    with pytest.raises(ParameterError):
        PiParams(ta=0.01, ts=0.1, ds=0.01, da=32e-6, scheme=Scheme.MULTI_INT, k_c=0)


def test_to_ns_keeps_singleint_structure():
    """Test that Ta = ds − da and Ts = (M+1)·Ta survive the ns conversion."""
    g = 0.0040963
    p = PiParams(ta=g, ts=8 * g, ds=g + 32e-6, da=32e-6, scheme=Scheme.SINGLE_INT, m=7)
    ns = p.to_ns()
    assert ns.ta == ns.ds - ns.da
    assert ns.ts == 8 * ns.ta


def test_to_ns_generic_rounds_fields():
    """Test that generic parameters are rounded field by field."""
    ns = generic_params(0.1, 1.0, 0.01).to_ns()
    assert (ns.ta, ns.ts, ns.ds, ns.da) == (100_000_000, 1_000_000_000, 10_000_000, 32_000)


def test_profile_from_dict():
    """Test the JSON profile key set and its unit scaling."""
    hw = HardwareProfile.from_dict({"da_us": 320, "ds_min_us": 2000, "fclk_hz": 32000})
    assert math.isclose(hw.d_a, 320e-6)
    assert math.isclose(hw.d_s_min, 2e-3)
    assert hw.f_clk == 32000
    assert hw.d_rt == HardwareProfile().d_rt

    with pytest.raises(ProfileError):
        HardwareProfile.from_dict({"bogus": 1})
    with pytest.raises(ProfileError):
        HardwareProfile.from_dict({"da_us": "fast"})
    with pytest.raises(ProfileError):
        HardwareProfile.from_dict({"da_us": 2000, "ds_min_us": 1000})


def test_profile_load(tmp_path):
    """Test reading a profile file and its digest."""
    path = tmp_path / "radio.json"
    path.write_text(json.dumps({"da_us": 32, "alpha": 1.5}))
    hw = HardwareProfile.load(path)
    assert hw.alpha == 1.5
    assert hw.digest() == HardwareProfile.from_dict(hw.to_dict()).digest()
    assert hw.digest() != HardwareProfile().digest()

    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ProfileError):
        HardwareProfile.load(bad)
    with pytest.raises(ProfileError):
        HardwareProfile.load(tmp_path / "missing.json")
