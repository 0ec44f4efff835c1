import numpy as np

from pi_discovery.sim import DeviceSchedule, Role, detect_discovery, first_reception, gen_schedule

from .conftest import generic_params, get_hw

DA = 32_000


def schedule(beacons=(), windows=(), role=Role.BOTH) -> DeviceSchedule:
    """Build a schedule from explicit beacon starts and (start, length) windows."""
    return DeviceSchedule(
        beacons=np.array(beacons, dtype=np.int64),
        windows=np.array(windows, dtype=np.int64).reshape(-1, 2),
        da=DA,
        role=role,
    )


def test_beacon_at_window_start():
    """Test a beacon starting exactly at the window start."""
    rx = schedule(windows=[(1_000_000, 1_000_000)], role=Role.SCANNER)
    tx = schedule(beacons=[1_000_000], role=Role.ADVERTISER)
    assert first_reception(rx, tx, get_hw()) == 1_000_000 + DA


def test_effective_window_edge():
    """Test that the last beacon start fitting into ds − da is the edge."""
    rx = schedule(windows=[(0, 1_000_000)], role=Role.SCANNER)
    last = 1_000_000 - DA
    assert first_reception(rx, schedule(beacons=[last]), get_hw()) == last + DA
    assert first_reception(rx, schedule(beacons=[last + 1]), get_hw()) is None


def test_collision_destroys_both():
    """Test two foreign beacons overlapping by 1 ns inside a window."""
    rx = schedule(windows=[(0, 10_000_000)], role=Role.SCANNER)
    a = schedule(beacons=[5_000_000], role=Role.ADVERTISER)
    b = schedule(beacons=[5_000_000 + DA - 1], role=Role.ADVERTISER)
    assert detect_discovery(rx, [rx, a, b], get_hw()) == [None, None, None]

    c = schedule(beacons=[5_000_000 + DA], role=Role.ADVERTISER)
    assert detect_discovery(rx, [a, c], get_hw()) == [5_000_000 + DA, 5_000_000 + 2 * DA]


def test_own_transmission_blocks_reception():
    """Test the blackout d_rt before and d_a + d_tr after an own beacon."""
    hw = get_hw()
    rx = schedule(beacons=[5_100_000], windows=[(0, 10_000_000)])
    assert first_reception(rx, schedule(beacons=[5_000_000]), hw) is None
    # incoming beacons ending or starting exactly on the blackout edges
    assert first_reception(rx, schedule(beacons=[5_100_000 - 140_000 - DA]), hw) is not None
    assert first_reception(rx, schedule(beacons=[5_100_000 + DA + 140_000]), hw) is not None


def test_discovery_over_generated_schedules():
    """Test first receptions on generated schedules with a third device."""
    hw = get_hw()
    horizon = 1_000_000_000
    rx = gen_schedule(generic_params(0.05, 0.1, 0.01), hw, None, (0, 0), horizon, role=Role.SCANNER)
    tx = gen_schedule(
        generic_params(0.03, 0.1, 0.01), hw, None, (0, 15_000_000), horizon, role=Role.ADVERTISER
    )
    assert first_reception(rx, tx, hw) == 105_032_000

    # a third device destroys the beacon at 105 ms, the next fitting one is at 405 ms
    other = gen_schedule(
        generic_params(0.5, 1.0, 0.01), hw, None, (0, 105_010_000), horizon, role=Role.ADVERTISER
    )
    assert detect_discovery(rx, [rx, tx, other], hw) == [None, 405_032_000, 605_042_000]
