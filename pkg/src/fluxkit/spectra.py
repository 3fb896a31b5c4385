"""Diagonalisation, transition frequencies, dispersive shifts and flux sweeps.

All frequencies are linear (GHz) and dispersive shifts are returned in linear
MHz; multiply by 2π for angular rates.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import (
    BasisConfig,
    CouplingSpec,
    FluxoniumParams,
    Operator,
    ResonatorParams,
    TransmonParams,
    build_coupled_h,
    build_fluxonium_h,
    build_oscillator_ops,
    build_transmon_h,
    resolve_g_mhz,
)
from .errors import (
    DivergentDispersiveError,
    IncompleteSolutionError,
    InvalidParameterError,
    NoCrossingError,
    NumericalError,
)

#: Guard band around a resonance in the dispersive sum, in GHz (1 kHz).
RESONANCE_GUARD_GHZ = 1e-6

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class EigenSolution:
    """Lowest eigenpairs of a Hamiltonian plus charge matrix elements between them."""

    energies: np.ndarray
    states: np.ndarray
    n_elems: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("energies", "states", "n_elems"):
            val = getattr(self, name)
            if val is not None:
                arr = np.array(val)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def n_levels(self) -> int:
        return len(self.energies)

    def freq(self, i: int, j: int) -> float:
        """Transition frequency f_ij = E_j − E_i in GHz."""
        return float(self.energies[j] - self.energies[i])


def _fix_phases(vecs):
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(lead) / lead)


def diagonalize(h: Operator, n_keep: int, n_op: Optional[Operator] = None) -> EigenSolution:
    """Lowest ``n_keep`` eigenpairs of ``h`` in ascending order.

    Eigenvectors are phase-fixed so their largest-magnitude component is real
    and positive. When ``n_op`` is given, n_jk = ⟨ψ_j|n̂|ψ_k⟩ is stored.
    """
    if n_keep > h.dim or n_keep < 1:
        raise InvalidParameterError(f"n_keep={n_keep} outside 1..{h.dim}")
    m = h.matrix
    try:
        if np.isrealobj(m) or not np.any(m.imag):
            vals, vecs = np.linalg.eigh(np.real(m))
        else:
            vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        finite = bool(np.all(np.isfinite(m)))
        raise NumericalError(
            f"eigensolver failed on {h.dim}x{h.dim} matrix ({h.basis}); "
            f"finite={finite}, hermiticity error={h.hermiticity_error():.3e}: {exc}"
        ) from exc
    vals = vals[:n_keep]
    vecs = _fix_phases(vecs[:, :n_keep])
    n_elems = None
    if n_op is not None:
        n_elems = vecs.conj().T @ n_op.matrix @ vecs
        n_elems = 0.5 * (n_elems + n_elems.conj().T)
    return EigenSolution(vals, vecs, n_elems)


def solve_fluxonium(
    params: FluxoniumParams, basis: BasisConfig = BasisConfig(), n_keep: Optional[int] = None
) -> EigenSolution:
    """Build and diagonalise the bare fluxonium, keeping ``basis.n_flux_keep`` levels by default."""
    h = build_fluxonium_h(params, basis)
    n_op = build_oscillator_ops(basis, params).n_hat
    return diagonalize(h, n_keep or basis.n_flux_keep, n_op)


def solve_transmon(
    params: TransmonParams, basis: BasisConfig = BasisConfig(), n_keep: int = 6
) -> EigenSolution:
    """Charge-basis transmon eigensystem with charge matrix elements."""
    h, n_op = build_transmon_h(params, basis)
    return diagonalize(h, n_keep, n_op)


def dispersive_shift(sol: EigenSolution, g_mhz: float, f_r: float, j: int, n_sum: int = 20) -> float:
    """Resonator pull χ_j (MHz) caused by fluxonium level ``j``.

    χ_j = g² Σ_k |n_jk|² · 2 f_jk / (f_jk² − f_r²), summed over k < n_sum.
    """
    if sol.n_elems is None:
        raise IncompleteSolutionError("dispersive shift needs charge matrix elements")
    if sol.n_levels < n_sum:
        raise IncompleteSolutionError(f"need {n_sum} levels for the dispersive sum, have {sol.n_levels}")
    if g_mhz == 0:
        return 0.0
    g = g_mhz * 1e-3
    total = 0.0
    for k in range(n_sum):
        if k == j:
            continue
        f_jk = float(sol.energies[k] - sol.energies[j])
        if abs(abs(f_jk) - f_r) < RESONANCE_GUARD_GHZ:
            raise DivergentDispersiveError(j, k, f_jk, f_r)
        total += abs(sol.n_elems[j, k]) ** 2 * 2 * f_jk / (f_jk ** 2 - f_r ** 2)
    return g ** 2 * total * 1e3


def qubit_chi(sol: EigenSolution, g_mhz: float, f_r: float, n_sum: int = 20) -> float:
    """|χ_01| = |χ_0 − χ_1| in MHz."""
    return abs(dispersive_shift(sol, g_mhz, f_r, 0, n_sum) - dispersive_shift(sol, g_mhz, f_r, 1, n_sum))


@dataclass
class FluxSweep:
    flux_grid: np.ndarray
    transitions: list
    freqs: dict
    chi01_mhz: Optional[np.ndarray] = None
    flags: list = field(default_factory=list)

    def column(self, i: int, j: int) -> np.ndarray:
        return self.freqs[(i, j)]

    def write_csv(self, fh) -> None:
        """Write the sweep as CSV: flux, f01, f12, f02 (+ other transitions), chi01_mhz, flags."""
        names = [f"f{i}{j}" for i, j in self.transitions]
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["flux", *names, "chi01_mhz", "flags"])
        for idx, flux in enumerate(self.flux_grid):
            row = [fmt17(flux)]
            row += [fmt17(self.freqs[t][idx]) for t in self.transitions]
            chi = "" if self.chi01_mhz is None else fmt17(self.chi01_mhz[idx])
            row += [chi, self.flags[idx]]
            writer.writerow(row)


def fmt17(x) -> str:
    """Float with 17 significant digits (round-trip exact)."""
    return format(float(x), ".17g")


DEFAULT_TRANSITIONS = ((0, 1), (1, 2), (0, 2))


def flux_sweep(
    params: FluxoniumParams,
    basis: BasisConfig,
    flux_grid: Sequence[float],
    transitions: Sequence[tuple] = DEFAULT_TRANSITIONS,
    with_chi: bool = False,
    res: Optional[ResonatorParams] = None,
    cpl: Optional[CouplingSpec] = None,
    n_sum: int = 20,
    workers: int = 1,
) -> FluxSweep:
    """Diagonalise the bare fluxonium at every flux point.

    Resonance errors in the χ sum flag the point (χ = NaN) instead of
    aborting. Output order always follows the grid.
    """
    grid = np.asarray(flux_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidParameterError("flux grid must be a nonempty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("flux grid must be strictly increasing")
    transitions = [tuple(t) for t in transitions]
    if with_chi and (res is None or cpl is None):
        raise InvalidParameterError("with_chi needs resonator and coupling parameters")
    g_mhz = resolve_g_mhz(cpl, params, res) if with_chi else None

    def point(flux):
        sol = solve_fluxonium(params.at_flux(float(flux)), basis)
        freqs = [sol.freq(i, j) for i, j in transitions]
        chi, flag = math.nan, ""
        if with_chi:
            try:
                chi = qubit_chi(sol, g_mhz, res.f_r, n_sum)
            except DivergentDispersiveError as exc:
                flag = f"divergent_dispersive({exc.j},{exc.k})"
        return freqs, chi, flag

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(point, grid))
    else:
        results = [point(f) for f in grid]

    freqs = {t: np.array([r[0][n] for r in results]) for n, t in enumerate(transitions)}
    chi = np.array([r[1] for r in results]) if with_chi else None
    return FluxSweep(grid, transitions, freqs, chi, [r[2] for r in results])


def golden_section(func, lo: float, hi: float, xtol: float, maximize: bool = False, max_iter: int = 500):
    """Golden-section search for the extremum of a unimodal function on [lo, hi].

    Returns ``(x, f(x))``.
    """
    sign = -1.0 if maximize else 1.0
    a, b = float(lo), float(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = sign * func(c), sign * func(d)
    for _ in range(max_iter):
        if abs(b - a) <= xtol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = sign * func(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = sign * func(d)
    if fc < fd:
        return c, sign * fc
    return d, sign * fd


class Crossing(NamedTuple):
    flux: float
    splitting_mhz: float
    two_level_mhz: float


def _bare_energy(sol, f_r, state):
    j, k = state
    return sol.energies[j] + f_r * k


def dressed_gap(params, basis, res, cpl, pair, flux) -> float:
    """Gap (GHz) between the two dressed levels carrying most weight on the bare pair."""
    sol = solve_fluxonium(params.at_flux(flux), basis)
    h = build_coupled_h(sol, res, cpl, basis, fluxonium=params)
    vals, vecs = np.linalg.eigh(h.matrix)
    idx = [j * basis.n_res + k for j, k in pair]
    weight = np.sum(np.abs(vecs[idx, :]) ** 2, axis=0)
    top = np.argsort(weight)[-2:]
    return float(abs(vals[top[1]] - vals[top[0]]))


def avoided_crossing(
    params: FluxoniumParams,
    basis: BasisConfig,
    res: ResonatorParams,
    cpl: CouplingSpec,
    pair=((2, 0), (0, 1)),
    window=(0.2, 0.3),
    xtol: float = 1e-9,
) -> Crossing:
    """Locate the avoided crossing between two bare product states |j,k⟩ in a flux window.

    The dressed gap is minimised by golden-section search; the two-level
    estimate 2g|n_jj'|√max(k,k') at the located flux is returned alongside.
    """
    (ja, ka), (jb, kb) = pair
    lo, hi = window

    def detuning(flux):
        sol = solve_fluxonium(params.at_flux(flux), basis)
        return _bare_energy(sol, res.f_r, (ja, ka)) - _bare_energy(sol, res.f_r, (jb, kb))

    if detuning(lo) * detuning(hi) > 0:
        raise NoCrossingError(
            f"bare states |{ja},{ka}> and |{jb},{kb}> do not cross in flux window [{lo}, {hi}]"
        )
    flux_star, gap = golden_section(lambda f: dressed_gap(params, basis, res, cpl, pair, f), lo, hi, xtol)

    g_mhz = resolve_g_mhz(cpl, params, res)
    two_level = math.nan
    if abs(ka - kb) == 1:
        sol = solve_fluxonium(params.at_flux(flux_star), basis)
        two_level = float(2 * g_mhz * abs(sol.n_elems[ja, jb]) * math.sqrt(max(ka, kb)))
    return Crossing(flux_star, gap * 1e3, two_level)


def canonical_flux(flux: float) -> float:
    """Map flux onto [0, 0.5] using period-1 periodicity and reflection about 0.5."""
    y = flux % 1.0
    return 1.0 - y if y > 0.5 else y


class Derivative(NamedTuple):
    value: float
    error: float


def flux_derivative(
    params: FluxoniumParams,
    basis: BasisConfig,
    flux: float,
    transition=(0, 1),
    step: float = 1e-4,
) -> Derivative:
    """df_ij/dflux in GHz per flux quantum.

    Central differences at ``step`` and ``step/2`` combined by one Richardson
    level; ``error`` is the difference between the refined and the finer
    central estimate.
    """
    if not step > 0:
        raise InvalidParameterError("step must be > 0")
    i, j = transition

    def f(x):
        return solve_fluxonium(params.at_flux(canonical_flux(x)), basis).freq(i, j)

    def central(h):
        return (f(flux + h) - f(flux - h)) / (2 * h)

    d1 = central(step)
    d2 = central(step / 2)
    refined = (4 * d2 - d1) / 3
    return Derivative(refined, abs(refined - d2))
