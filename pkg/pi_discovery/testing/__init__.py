"""
Testing utilities for pi_discovery.

This package provides the published reference values the acceptance checks
compare against, and a pytest plugin that keeps long-running acceptance
tests behind ``--run-slow``.
"""

from .reference import (
    BC_DM_INCREASE,
    BC_FAILURE_PROB,
    BLE_RANGES,
    BLE_RATIO,
    COLLISION_PROB,
    GAINS,
    PARAM_TABLE,
    PARAM_TABLE_TOL,
    SINGLEINT_BLOCKING,
    GainReference,
    ParamRow,
)

__all__ = [
    "BC_DM_INCREASE",
    "BC_FAILURE_PROB",
    "BLE_RANGES",
    "BLE_RATIO",
    "COLLISION_PROB",
    "GAINS",
    "PARAM_TABLE",
    "PARAM_TABLE_TOL",
    "SINGLEINT_BLOCKING",
    "GainReference",
    "ParamRow",
]
