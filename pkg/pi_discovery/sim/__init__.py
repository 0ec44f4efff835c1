"""
Discrete-event simulation in integer nanoseconds: schedules, reception,
Monte Carlo trials and the exact offset-sweep oracle.
"""

from .detect import detect_discovery, first_reception
from .montecarlo import (
    CollisionEstimate,
    Mode,
    MonteCarloResult,
    ScenarioConfig,
    SimOutcome,
    cdf,
    collision_monte_carlo,
    collision_prob,
    monte_carlo,
    percentiles,
    run_trial,
    trial_rng,
)
from .oracle import OracleResult, analytic_dm, latency_pieces, offset_sweep_oracle, quantized_sweep
from .schedule import (
    Clock,
    DeviceSchedule,
    IdealClock,
    QuantizedClock,
    Role,
    apply_bc,
    gen_schedule,
    horizon_for,
    quantized_steps,
)

__all__ = [
    "Clock",
    "CollisionEstimate",
    "DeviceSchedule",
    "IdealClock",
    "Mode",
    "MonteCarloResult",
    "OracleResult",
    "QuantizedClock",
    "Role",
    "ScenarioConfig",
    "SimOutcome",
    "analytic_dm",
    "apply_bc",
    "cdf",
    "collision_monte_carlo",
    "collision_prob",
    "detect_discovery",
    "first_reception",
    "gen_schedule",
    "horizon_for",
    "latency_pieces",
    "monte_carlo",
    "offset_sweep_oracle",
    "percentiles",
    "quantized_sweep",
    "quantized_steps",
    "run_trial",
    "trial_rng",
]
