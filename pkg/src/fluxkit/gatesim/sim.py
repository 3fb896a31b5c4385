"""Cosine-envelope single-qubit pulses on three-level truncations.

The simulation runs in the lab frame without the rotating-wave approximation:

    H(t)/h = diag(0, f01, f01 + f12) + f(t) · cos(2π f_d t + phase) · D

with f(t) = (ε/2)(1 − cos(2π t / t_g)) and D the charge operator written in
the eigenbasis (capacitive drive). Times are in ns, frequencies in GHz.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from ..errors import CalibrationError, IncompleteSolutionError, InvalidParameterError, StepBudgetError
from ..spectra import EigenSolution, fmt17, golden_section
from .kernels import get_propagator

#: Default integration density: RK4 steps per period of the fastest frequency.
STEPS_PER_PERIOD = 400
MAX_STEPS = 10 ** 8
DEFAULT_TRAIN_COUNTS = (4, 16, 36, 64, 100, 144)


@dataclass(frozen=True)
class ThreeLevelSystem:
    f01: float
    f12: float
    drive: np.ndarray
    label: str = "fluxonium"

    def __post_init__(self):
        d = np.array(self.drive, dtype=complex)
        if d.shape != (3, 3):
            raise InvalidParameterError("drive matrix must be 3x3")
        if not self.f01 > 0:
            raise InvalidParameterError("f01 must be > 0")
        if abs(d[0, 1]) == 0:
            raise InvalidParameterError("drive must couple |0> and |1>")
        if np.max(np.abs(d - d.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(d))):
            raise InvalidParameterError("drive matrix must be Hermitian")
        d.setflags(write=False)
        object.__setattr__(self, "drive", d)

    @property
    def energies(self) -> np.ndarray:
        return np.array([0.0, self.f01, self.f01 + self.f12])

    @property
    def anharmonicity(self) -> float:
        return self.f12 - self.f01

    def d(self, j: int, k: int) -> complex:
        return complex(self.drive[j, k])

    def with_drive(self, **elements) -> "ThreeLevelSystem":
        """Copy with some drive elements replaced, e.g. ``with_drive(d12=0)``."""
        d = np.array(self.drive)
        for key, val in elements.items():
            j, k = int(key[1]), int(key[2])
            d[j, k] = val
            d[k, j] = np.conj(val)
        return ThreeLevelSystem(self.f01, self.f12, d, self.label)


def truncate_system(sol: EigenSolution, label: str = "fluxonium") -> ThreeLevelSystem:
    """Keep the lowest three eigenstates of ``sol`` and their charge matrix elements."""
    if sol.n_levels < 3 or sol.n_elems is None or sol.n_elems.shape[0] < 3:
        raise IncompleteSolutionError("truncation needs three levels with charge matrix elements")
    return ThreeLevelSystem(sol.freq(0, 1), sol.freq(1, 2), sol.n_elems[:3, :3], label)


@dataclass(frozen=True)
class PulseSpec:
    eps: float
    t_g: float
    f_d: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.t_g > 0:
            raise InvalidParameterError("t_g must be > 0")
        if self.eps < 0:
            raise InvalidParameterError("eps must be >= 0")


def envelope(t, spec: PulseSpec):
    """(ε/2)(1 − cos(2πt/t_g)) inside [0, t_g], zero outside."""
    t = np.asarray(t, dtype=float)
    val = 0.5 * spec.eps * (1.0 - np.cos(2 * np.pi * t / spec.t_g))
    val = np.where((t >= 0) & (t <= spec.t_g), val, 0.0)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class IntegratorStats:
    dt: float
    steps: int
    convergence: Optional[float] = None


@dataclass(frozen=True)
class GateSimResult:
    populations: tuple
    eps_star: float
    leakage: float
    stats: IntegratorStats
    state: np.ndarray = field(repr=False, default=None)

    @property
    def p1(self) -> float:
        return self.populations[1]

    @property
    def infidelity(self) -> float:
        """1 − P1, reported for reference; leakage is the error metric."""
        return 1.0 - self.populations[1]


def step_count(sys: ThreeLevelSystem, t_g: float, f_d: float, steps_per_period: int = STEPS_PER_PERIOD) -> int:
    """Steps per pulse so that dt ≤ 1 / (steps_per_period · max(f_d, f01 + f12))."""
    f_max = max(f_d, sys.f01 + sys.f12)
    return max(1, math.ceil(t_g * steps_per_period * f_max))


def _initial(psi0, batch):
    if psi0 is None:
        psi0 = np.array([1.0, 0.0, 0.0], dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.ndim == 1:
        psi0 = np.tile(psi0, (batch, 1))
    return np.ascontiguousarray(psi0)


def run_batch(
    sys: ThreeLevelSystem,
    eps,
    t_g: float,
    f_d: float,
    phase: float = 0.0,
    psi0=None,
    n_pulses: int = 1,
    steps_per_period: int = STEPS_PER_PERIOD,
    backend: Optional[str] = None,
):
    """Final lab-frame states for a batch of amplitudes; returns ``(states, n_steps)``."""
    if not f_d > 0:
        raise InvalidParameterError("drive frequency must be > 0")
    if not t_g > 0:
        raise InvalidParameterError("t_g must be > 0")
    eps = np.ascontiguousarray(np.atleast_1d(np.asarray(eps, dtype=float)))
    n_steps = step_count(sys, t_g, f_d, steps_per_period)
    if n_steps * n_pulses > MAX_STEPS:
        raise StepBudgetError(
            f"{n_steps * n_pulses} RK4 steps exceed the budget of {MAX_STEPS}; "
            "shorten the pulse train or lower steps_per_period"
        )
    energies = sys.energies
    # shifting by the spectral midpoint only changes the global phase; it halves
    # the largest |E| and with it the RK4 norm drift
    shift = 0.5 * (energies.max() + energies.min())
    psi = get_propagator(backend)(
        np.ascontiguousarray(energies - shift),
        np.ascontiguousarray(sys.drive),
        eps,
        _initial(psi0, eps.size),
        float(t_g),
        float(f_d),
        float(phase),
        int(n_steps),
        int(n_pulses),
    )
    psi = psi * np.exp(-2j * np.pi * shift * t_g * n_pulses)
    return psi, n_steps


def evolve(
    sys: ThreeLevelSystem,
    spec: PulseSpec,
    psi0=None,
    *,
    n_pulses: int = 1,
    steps_per_period: int = STEPS_PER_PERIOD,
    check_convergence: bool = False,
    backend: Optional[str] = None,
) -> GateSimResult:
    """Apply the pulse ``spec`` (``n_pulses`` times back to back) to ``psi0`` (default |0⟩).

    The state is never renormalised; the norm is an accuracy check. With
    ``check_convergence`` the run is repeated at half the step and the largest
    population change is stored in ``stats.convergence``.
    """
    psi, n_steps = run_batch(
        sys, [spec.eps], spec.t_g, spec.f_d, spec.phase, psi0, n_pulses, steps_per_period, backend
    )
    pops = np.abs(psi[0]) ** 2
    conv = None
    if check_convergence:
        psi_h, _ = run_batch(
            sys, [spec.eps], spec.t_g, spec.f_d, spec.phase, psi0, n_pulses, 2 * steps_per_period, backend
        )
        conv = float(np.max(np.abs(np.abs(psi_h[0]) ** 2 - pops)))
    stats = IntegratorStats(spec.t_g / n_steps, n_steps * n_pulses, conv)
    return GateSimResult(tuple(float(p) for p in pops), spec.eps, float(pops[2]), stats, psi[0])


def pi_area_amplitude(sys: ThreeLevelSystem, t_g: float) -> float:
    """Amplitude whose envelope area gives a π rotation in the two-level RWA limit."""
    return 1.0 / (t_g * abs(sys.d(0, 1)))


def calibrate_amplitude(
    sys: ThreeLevelSystem,
    t_g: float,
    f_d: Optional[float] = None,
    *,
    phase: float = 0.0,
    scan_points: int = 41,
    rtol: float = 1e-6,
    steps_per_period: int = STEPS_PER_PERIOD,
    backend: Optional[str] = None,
) -> float:
    """Amplitude maximising P1 after one pulse from |0⟩ (the π-pulse branch).

    A coarse scan over [0, 2·ε_π] (ε_π from the RWA area condition, i.e. up to
    a 2π rotation) picks the first interior local maximum of P1, which is then
    refined by golden-section search.
    """
    f_d = sys.f01 if f_d is None else f_d
    eps_max = 2.0 * pi_area_amplitude(sys, t_g)
    grid = np.linspace(0.0, eps_max, scan_points)
    psi, _ = run_batch(sys, grid, t_g, f_d, phase, None, 1, steps_per_period, backend)
    p1 = np.abs(psi[:, 1]) ** 2
    peak = None
    for i in range(1, scan_points - 1):
        if p1[i] >= p1[i - 1] and p1[i] > p1[i + 1]:
            peak = i
            break
    if peak is None:
        raise CalibrationError(f"no interior maximum of P1 on [0, {eps_max:.4g}] GHz for t_g={t_g} ns")

    def p1_at(eps):
        out, _ = run_batch(sys, [eps], t_g, f_d, phase, None, 1, steps_per_period, backend)
        return abs(out[0, 1]) ** 2

    eps_star, _ = golden_section(p1_at, grid[peak - 1], grid[peak + 1], rtol * grid[peak], maximize=True)
    return float(eps_star)


def calibrated_pulse(sys: ThreeLevelSystem, t_g: float, f_d: Optional[float] = None, **kwargs) -> GateSimResult:
    """Calibrate the π pulse at ``t_g`` and return the simulation at the optimum."""
    f_d = sys.f01 if f_d is None else f_d
    eps_star = calibrate_amplitude(sys, t_g, f_d, **kwargs)
    evolve_kw = {k: kwargs[k] for k in ("steps_per_period", "backend", "phase") if k in kwargs}
    phase = evolve_kw.pop("phase", 0.0)
    return evolve(sys, PulseSpec(eps_star, t_g, f_d, phase), **evolve_kw)


def leakage_error(sys: ThreeLevelSystem, t_g: float, **kwargs) -> float:
    """Population of |2⟩ after the calibrated π pulse from |0⟩."""
    return calibrated_pulse(sys, t_g, **kwargs).leakage


@dataclass
class DurationCurve:
    label: str
    rows: list  # (t_g, eps_star, leakage, p1)

    @property
    def t_g(self):
        return np.array([r[0] for r in self.rows])

    @property
    def leakage(self):
        return np.array([r[2] for r in self.rows])

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_g_ns", "eps_star", "leakage", "p1"])
        for row in self.rows:
            writer.writerow([fmt17(v) for v in row])


def error_vs_duration(sys: ThreeLevelSystem, tg_grid: Sequence[float], **kwargs) -> DurationCurve:
    """Leakage of the calibrated π pulse for every gate duration in ``tg_grid``."""
    rows = []
    for t_g in tg_grid:
        res = calibrated_pulse(sys, float(t_g), **kwargs)
        rows.append((float(t_g), res.eps_star, res.leakage, res.p1))
    return DurationCurve(sys.label, rows)


def half_pi_amplitude(sys: ThreeLevelSystem, t_g: float, f_d: Optional[float] = None, **kwargs) -> float:
    """Amplitude at which one pulse from |0⟩ reaches P1 = 1/2 on the first rising branch."""
    f_d = sys.f01 if f_d is None else f_d
    eps_pi = calibrate_amplitude(sys, t_g, f_d, **kwargs)
    run_kw = {k: kwargs[k] for k in ("steps_per_period", "backend") if k in kwargs}

    def excess(eps):
        out, _ = run_batch(sys, [eps], t_g, f_d, 0.0, None, 1, **run_kw)
        return abs(out[0, 1]) ** 2 - 0.5

    return float(brentq(excess, 0.0, eps_pi, xtol=1e-12 * eps_pi))


def simulate_pulse_train(
    sys: ThreeLevelSystem,
    t_g: float,
    eps_grid: Sequence[float],
    counts: Sequence[int] = DEFAULT_TRAIN_COUNTS,
    f_d: Optional[float] = None,
    **kwargs,
) -> dict:
    """P1 versus amplitude after ``k`` back-to-back pulses, for every ``k`` in ``counts``.

    The carrier is phase-continuous across the train. Returns ``{k: P1 array}``.
    """
    f_d = sys.f01 if f_d is None else f_d
    for k in counts:
        if k <= 0 or k % 2:
            raise InvalidParameterError(f"pulse counts must be positive even integers, got {k}")
    eps_grid = np.asarray(eps_grid, dtype=float)
    traces = {}
    for k in counts:
        psi, _ = run_batch(sys, eps_grid, t_g, f_d, 0.0, None, int(k), **kwargs)
        traces[int(k)] = np.abs(psi[:, 1]) ** 2
    return traces


def ideal_train_population(k: int) -> float:
    """P1 after ``k`` perfect X/2 pulses from |0⟩: sin²(kπ/4)."""
    return math.sin(k * math.pi / 4) ** 2


def train_amplitude(traces: dict, eps_grid: Sequence[float]) -> float:
    """Grid amplitude where all traces jointly sit closest to the ideal X/2 pattern."""
    eps_grid = np.asarray(eps_grid, dtype=float)
    cost = np.zeros_like(eps_grid)
    for k, p1 in traces.items():
        cost += (np.asarray(p1) - ideal_train_population(k)) ** 2
    return float(eps_grid[int(np.argmin(cost))])
