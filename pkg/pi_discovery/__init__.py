"""
Neighbor discovery with periodic-interval protocols.

Turns a target duty-cycle into SingleInt, MultiInt, MultiInt-BC and
SingleInt-BLE parameters, predicts worst-case latencies and failure
probabilities, compares them with slotted protocols, and checks every
prediction with an integer-nanosecond simulator and an exact offset sweep.
"""

from .ble import (
    BleMode,
    BleOverheads,
    BleSolution,
    ble_compliance,
    ble_config_json,
    ble_duty_cycle,
    ble_solve,
    ble_vs_ideal_ratio,
    multiint_ble_report,
)
from .bounds import check_singleint_optimal, sym_bound, sym_bound_seconds, unidir_bound, unidir_bound_seconds
from .error import (
    BudgetExceededError,
    Error,
    InfeasibleError,
    NoConvergenceError,
    ParameterError,
    ProfileError,
    UnboundedLatencyError,
)
from .multiint import (
    BcAccounting,
    MultiIntSolution,
    bc_adjust,
    bc_duty_cycle,
    bc_failure_prob,
    multiint_dm_caseb,
    multiint_dm_casec,
    multiint_k_bounds,
    multiint_k_opt,
    multiint_solve,
)
from .optsearch import SearchGrid, SearchResult, grid_search
from .report import RunManifest, tool_version
from .singleint import (
    SingleIntSolution,
    SolveMode,
    singleint_blocking,
    singleint_dm_star,
    singleint_m_bounds,
    singleint_m_opt,
    singleint_solve,
)
from .slotted import Protocol, SlotDesign, SlottedSpec, calibrate_slot, gain_table, slotted_dm
from .timebase import (
    DutyCycle,
    HardwareProfile,
    PiParams,
    Scheme,
    TimeNs,
    duty_cycle,
    ns_to_seconds,
    seconds_to_ns,
    tick_quantize,
)

__version__ = tool_version()

__all__ = [
    "BcAccounting",
    "BleMode",
    "BleOverheads",
    "BleSolution",
    "BudgetExceededError",
    "DutyCycle",
    "Error",
    "HardwareProfile",
    "InfeasibleError",
    "MultiIntSolution",
    "NoConvergenceError",
    "ParameterError",
    "PiParams",
    "ProfileError",
    "Protocol",
    "RunManifest",
    "Scheme",
    "SearchGrid",
    "SearchResult",
    "SingleIntSolution",
    "SlotDesign",
    "SlottedSpec",
    "SolveMode",
    "TimeNs",
    "UnboundedLatencyError",
    "__version__",
    "bc_adjust",
    "bc_duty_cycle",
    "bc_failure_prob",
    "ble_compliance",
    "ble_config_json",
    "ble_duty_cycle",
    "ble_solve",
    "ble_vs_ideal_ratio",
    "calibrate_slot",
    "check_singleint_optimal",
    "duty_cycle",
    "gain_table",
    "grid_search",
    "multiint_ble_report",
    "multiint_dm_caseb",
    "multiint_dm_casec",
    "multiint_k_bounds",
    "multiint_k_opt",
    "multiint_solve",
    "ns_to_seconds",
    "seconds_to_ns",
    "singleint_blocking",
    "singleint_dm_star",
    "singleint_m_bounds",
    "singleint_m_opt",
    "singleint_solve",
    "slotted_dm",
    "sym_bound",
    "sym_bound_seconds",
    "tick_quantize",
    "unidir_bound",
    "unidir_bound_seconds",
]
