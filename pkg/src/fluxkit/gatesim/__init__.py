"""Pulse-level gate simulation on three-level truncations."""
from .kernels import BACKEND, BACKENDS, get_propagator
from .sim import (
    DurationCurve,
    GateSimResult,
    IntegratorStats,
    PulseSpec,
    ThreeLevelSystem,
    calibrate_amplitude,
    calibrated_pulse,
    envelope,
    error_vs_duration,
    evolve,
    half_pi_amplitude,
    ideal_train_population,
    leakage_error,
    pi_area_amplitude,
    run_batch,
    simulate_pulse_train,
    step_count,
    train_amplitude,
    truncate_system,
)
