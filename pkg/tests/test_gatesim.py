import io
import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from fluxkit.errors import CalibrationError, IncompleteSolutionError, InvalidParameterError, StepBudgetError
from fluxkit.gatesim import (
    BACKEND,
    BACKENDS,
    PulseSpec,
    ThreeLevelSystem,
    calibrate_amplitude,
    envelope,
    error_vs_duration,
    evolve,
    get_propagator,
    half_pi_amplitude,
    ideal_train_population,
    pi_area_amplitude,
    run_batch,
    simulate_pulse_train,
    step_count,
    train_amplitude,
    truncate_system,
)
from fluxkit.spectra import EigenSolution

TOY = ThreeLevelSystem(5.0, 4.7, np.array([[0, 1, 0], [1, 0, 1.4], [0, 1.4, 0]], dtype=complex), "toy")

needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernel not built")


def lab_rhs(sys, spec):
    e = sys.energies
    d = sys.drive

    def f(t, y):
        s = envelope(t, spec) * math.cos(2 * math.pi * spec.f_d * t + spec.phase)
        return -2j * math.pi * (e * y + s * (d @ y))  # envelope already carries eps

    return f


# --- system / pulse types --------------------------------------------------------------


def test_system_validation():
    with pytest.raises(InvalidParameterError):
        ThreeLevelSystem(5.0, 4.7, np.zeros((3, 3)))
    with pytest.raises(InvalidParameterError):
        ThreeLevelSystem(5.0, 4.7, np.array([[0, 1, 0], [2, 0, 0], [0, 0, 0]]))
    with pytest.raises(InvalidParameterError):
        ThreeLevelSystem(5.0, 4.7, np.eye(2))
    with pytest.raises(InvalidParameterError):
        PulseSpec(0.1, 0.0, 5.0)
    with pytest.raises(InvalidParameterError):
        PulseSpec(-0.1, 6.0, 5.0)


def test_truncate_needs_matrix_elements(fl3_sol):
    with pytest.raises(IncompleteSolutionError):
        truncate_system(EigenSolution(fl3_sol.energies, fl3_sol.states))


def test_truncation_values(fl3_sys, transmon_sys):
    assert fl3_sys.f01 == pytest.approx(1.25160, abs=1e-5)
    assert abs(fl3_sys.d(0, 2)) < 1e-6
    assert transmon_sys.f01 == pytest.approx(5.6826, abs=1e-4)
    assert transmon_sys.anharmonicity == pytest.approx(-0.34477, abs=1e-5)


def test_with_drive_keeps_hermiticity():
    s = TOY.with_drive(d12=0.3j)
    assert s.d(1, 2) == 0.3j and s.d(2, 1) == -0.3j


def test_envelope_area_and_support():
    spec = PulseSpec(0.4, 6.0, 5.0)
    area, _ = quad(lambda t: envelope(t, spec), 0, 6.0)
    assert area == pytest.approx(0.4 * 6.0 / 2, rel=1e-12)
    assert envelope(-0.1, spec) == 0.0 and envelope(6.1, spec) == 0.0
    assert envelope(3.0, spec) == pytest.approx(0.4)


def test_step_count_resolves_fastest_frequency():
    n = step_count(TOY, 6.0, 5.0)
    assert 6.0 / n <= 1 / (400 * 9.7)


# --- integrator ---------------------------------------------------------------------------


def test_zero_amplitude_free_evolution(fl3_sys):
    psi0 = np.array([0.6, 0.8j, 0.0])
    res = evolve(fl3_sys, PulseSpec(0.0, 6.0, fl3_sys.f01), psi0)
    expect = np.exp(-2j * math.pi * fl3_sys.energies * 6.0) * psi0
    assert np.max(np.abs(res.state - expect)) < 1e-8  # RK4 phase error over ~1e4 steps
    assert res.populations == pytest.approx((0.36, 0.64, 0.0), abs=1e-10)


def test_norm_and_step_halving(fl3_sys, fl3_pi_6ns):
    res = evolve(fl3_sys, PulseSpec(fl3_pi_6ns.eps_star, 6.0, fl3_sys.f01), check_convergence=True)
    assert abs(np.linalg.norm(res.state) - 1) < 1e-9
    assert res.stats.convergence < 1e-6


def test_against_adaptive_integrator(fl3_sys):
    spec = PulseSpec(0.5, 6.0, fl3_sys.f01)
    ours = evolve(fl3_sys, spec).state
    ref = solve_ivp(lab_rhs(fl3_sys, spec), (0, 6.0), np.array([1, 0, 0], complex), method="DOP853", rtol=1e-12, atol=1e-12)
    assert np.max(np.abs(ours - ref.y[:, -1])) < 1e-8


def test_two_level_rwa_limit():
    # long weak pulse on a decoupled qubit follows sin²(θ/2) with θ = π ε |d01| t_g
    sys = TOY.with_drive(d12=0)
    t_g = 50.0
    eps_pi = pi_area_amplitude(sys, t_g)
    for frac in (0.25, 0.5, 1.0):
        p1 = evolve(sys, PulseSpec(frac * eps_pi, t_g, sys.f01)).p1
        assert p1 == pytest.approx(math.sin(frac * math.pi / 2) ** 2, abs=0.02)


def test_no_leakage_without_upper_coupling(fl3_sys):
    sys = fl3_sys.with_drive(d12=0, d02=0)
    res = evolve(sys, PulseSpec(0.58, 6.0, sys.f01))
    assert res.leakage < 1e-12


def test_step_budget():
    with pytest.raises(StepBudgetError):
        run_batch(TOY, [0.1], 100.0, 5.0, n_pulses=10 ** 4)


def test_run_batch_validation():
    with pytest.raises(InvalidParameterError):
        run_batch(TOY, [0.1], 6.0, 0.0)
    with pytest.raises(ValueError):
        get_propagator("fortran")


@needs_cython
def test_backends_agree(fl3_sys):
    eps = np.linspace(0.1, 1.0, 5)
    a, _ = run_batch(fl3_sys, eps, 6.0, fl3_sys.f01, n_pulses=2, backend="cython")
    b, _ = run_batch(fl3_sys, eps, 6.0, fl3_sys.f01, n_pulses=2, backend="python")
    assert np.max(np.abs(a - b)) < 1e-12
    assert BACKEND == "cython"


# --- calibration ------------------------------------------------------------------------


def test_calibrated_pi_pulse_is_a_maximum(fl3_sys, fl3_pi_6ns):
    eps = fl3_pi_6ns.eps_star
    for d in (-1e-3, 1e-3):
        assert evolve(fl3_sys, PulseSpec(eps * (1 + d), 6.0, fl3_sys.f01)).p1 < fl3_pi_6ns.p1
    assert eps == pytest.approx(pi_area_amplitude(fl3_sys, 6.0), rel=0.05)


def test_eps_star_decreases_with_duration(fl3_sys):
    eps = [calibrate_amplitude(fl3_sys, t) for t in (6.0, 12.0, 24.0)]
    assert eps[0] > eps[1] > eps[2]


def test_calibration_fails_without_maximum():
    with pytest.raises(CalibrationError):
        calibrate_amplitude(TOY, 6.0, scan_points=2)  # no interior grid point


def test_leakage_vs_duration(fl3_sys, transmon_sys):
    grid = (4.0, 6.0, 8.0, 12.0)
    fl = error_vs_duration(fl3_sys, grid)
    tr = error_vs_duration(transmon_sys, grid)
    assert np.all(np.diff(tr.leakage) < 0)
    assert np.all(np.diff(fl.leakage) < 0)
    assert np.all(fl.leakage < tr.leakage)
    buf = io.StringIO()
    fl.write_csv(buf)
    assert buf.getvalue().splitlines()[0] == "t_g_ns,eps_star,leakage,p1"


def test_leakage_frozen_values(fl3_pi_6ns, transmon_pi_6ns):
    assert fl3_pi_6ns.leakage == pytest.approx(7.794e-7, rel=1e-3)
    assert transmon_pi_6ns.leakage == pytest.approx(4.8166e-3, rel=1e-3)


# --- pulse trains --------------------------------------------------------------------------


def _pulse_unitary(sys, eps, t_g, f_d, phase):
    basis = np.eye(3, dtype=complex)
    out, _ = run_batch(sys, np.full(3, eps), t_g, f_d, phase, basis)
    return out.T  # columns are images of the basis states


def test_train_equals_composed_pulses(fl3_sys):
    t_g, eps, k = 6.0, 0.3, 4
    f_d = fl3_sys.f01
    u = np.eye(3, dtype=complex)
    for j in range(k):
        # carrier phase carried over from the previous pulses
        u = _pulse_unitary(sys=fl3_sys, eps=eps, t_g=t_g, f_d=f_d, phase=2 * math.pi * f_d * j * t_g) @ u
    train, _ = run_batch(fl3_sys, [eps], t_g, f_d, n_pulses=k)
    assert np.max(np.abs(train[0] - u[:, 0])) < 1e-10


def test_train_flat_at_zero_amplitude(fl3_sys):
    traces = simulate_pulse_train(fl3_sys, 6.0, [0.0], counts=(4, 16))
    assert all(abs(t[0]) < 1e-20 for t in traces.values())


def test_train_oscillates_faster_with_more_pulses(fl3_sys):
    grid = np.linspace(0.0, 0.6, 121)
    traces = simulate_pulse_train(fl3_sys, 6.0, grid, counts=(4, 36))

    def maxima(p):
        return int(np.sum((p[1:-1] > p[:-2]) & (p[1:-1] > p[2:])))

    assert maxima(traces[36]) > 3 * maxima(traces[4])


def test_half_pi_train_matches_ideal_pattern(fl3_sys):
    eps = half_pi_amplitude(fl3_sys, 6.0)
    assert eps == pytest.approx(0.29297, rel=1e-3)
    traces = simulate_pulse_train(fl3_sys, 6.0, [eps])
    for k, p1 in traces.items():
        assert abs(p1[0] - ideal_train_population(k)) < 0.05, k


def test_train_amplitude_picks_best_grid_point():
    grid = [0.1, 0.2, 0.3]
    traces = {4: np.array([0.5, 0.1, 0.0]), 16: np.array([0.3, 0.2, 0.0])}
    assert train_amplitude(traces, grid) == 0.3
    assert ideal_train_population(2) == pytest.approx(1.0)


def test_train_counts_must_be_even(fl3_sys):
    with pytest.raises(InvalidParameterError):
        simulate_pulse_train(fl3_sys, 6.0, [0.1], counts=(3,))
