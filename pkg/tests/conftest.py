import json
import logging

import pytest

from pi_discovery import HardwareProfile, PiParams, Scheme
from pi_discovery.cli import main

pytest_plugins = ["pi_discovery.testing.pytest_plugin"]


def pytest_configure(config):
    logging.getLogger("pi_discovery").setLevel(logging.DEBUG)


def get_hw(**changes) -> HardwareProfile:
    """Get the default hardware profile, optionally with some fields changed."""
    hw = HardwareProfile()
    return hw.replace(**changes) if changes else hw


def generic_params(ta: float, ts: float, ds: float, da: float = 32e-6) -> PiParams:
    """Arbitrary (Ta, Ts, ds) without scheme structure."""
    return PiParams(ta=ta, ts=ts, ds=ds, da=da, scheme=Scheme.GENERIC)


def run_cli(capsys, *argv: str) -> tuple[int, dict | None, str]:
    """Run the command line and return (exit code, parsed stdout JSON, stderr)."""
    code = main(list(argv))
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else None
    return code, payload, captured.err


@pytest.fixture
def hw() -> HardwareProfile:
    """Provide the default hardware profile."""
    return get_hw()


@pytest.fixture(autouse=True)
def _no_profile_env(monkeypatch):
    """Keep a developer's profile from leaking into CLI tests."""
    monkeypatch.delenv("PI_DISCOVERY_PROFILE", raising=False)
