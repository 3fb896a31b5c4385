"""Fit circuit energies to spectroscopy of the coupled fluxonium-resonator system."""
from __future__ import annotations

from typing import Iterable, NamedTuple, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..core import BasisConfig, CouplingSpec, FluxoniumParams, ResonatorParams, build_coupled_h
from ..errors import FluxkitError, InvalidParameterError
from ..spectra import solve_fluxonium
from .lm import covariance, levenberg_marquardt
from .synth import rng
from .types import FitResult

TRANSITIONS = ("01", "02", "resonator")
# bare |fluxonium, photons> labels of the final state of each transition
_BARE = {"01": (1, 0), "02": (2, 0), "resonator": (0, 1)}
HAM_PARAMS = ("e_j", "e_l", "e_c", "f_r", "g")


class SpectroscopyPoint(NamedTuple):
    flux: float
    f_ghz: float
    transition: str


def _as_points(points) -> list:
    out = [SpectroscopyPoint(float(f), float(v), str(lab)) for f, v, lab in points]
    for p in out:
        if p.transition not in TRANSITIONS:
            raise InvalidParameterError(f"unknown transition label {p.transition!r}; use one of {TRANSITIONS}")
    return out


def dressed_transitions(values: dict, flux: float, basis: BasisConfig = BasisConfig()) -> dict:
    """Dressed transition frequencies (GHz) from |0,0> at one flux bias.

    Dressed levels are matched to the bare states |0,0>, |1,0>, |2,0>, |0,1>
    by a maximum-overlap assignment, which stays one-to-one through avoided
    crossings.
    """
    fl = FluxoniumParams(values["e_j"], values["e_l"], values["e_c"], flux)
    res = ResonatorParams(values["f_r"])
    cpl = CouplingSpec(g_mhz=abs(values["g"]) * 1e3)
    sol = solve_fluxonium(fl, basis)
    h = build_coupled_h(sol, res, cpl, basis)
    vals, vecs = np.linalg.eigh(h.matrix)
    bare = [(0, 0)] + [_BARE[k] for k in TRANSITIONS]
    rows = [j * basis.n_res + k for j, k in bare]
    weight = np.abs(vecs[rows, :]) ** 2
    _, cols = linear_sum_assignment(-weight)
    e = vals[cols]
    return {lab: float(e[i + 1] - e[0]) for i, lab in enumerate(TRANSITIONS)}


def model_frequencies(values: dict, points, basis: BasisConfig = BasisConfig()) -> np.ndarray:
    points = _as_points(points)
    cache = {}
    out = np.empty(len(points))
    for i, p in enumerate(points):
        if p.flux not in cache:
            cache[p.flux] = dressed_transitions(values, p.flux, basis)
        out[i] = cache[p.flux][p.transition]
    return out


def synth_spectroscopy(
    values: dict,
    fluxes: Iterable[float],
    transitions: Iterable[str] = TRANSITIONS,
    sigma_ghz: float = 0.0,
    seed: int = 0,
    basis: BasisConfig = BasisConfig(),
) -> list:
    """Model spectroscopy points with optional Gaussian frequency noise."""
    pts = [(float(f), 0.0, lab) for f in fluxes for lab in transitions]
    freqs = model_frequencies(values, pts, basis)
    if sigma_ghz > 0:
        freqs = freqs + rng(seed).normal(0.0, sigma_ghz, size=freqs.size)
    return [SpectroscopyPoint(f, float(v), lab) for (f, _, lab), v in zip(pts, freqs)]


def fit_hamiltonian(
    points,
    guess: dict,
    fit_resonator: bool = True,
    basis: BasisConfig = BasisConfig(),
    max_iter: int = 200,
) -> FitResult:
    """Least-squares fit of E_J, E_L, E_C (and optionally f_r, g) in GHz.

    With ``fit_resonator=False`` the resonator frequency and coupling stay at
    their guessed values. Residuals are in GHz with equal weights.
    """
    points = _as_points(points)
    free = HAM_PARAMS if fit_resonator else HAM_PARAMS[:3]
    missing = [k for k in HAM_PARAMS if k not in guess]
    if missing:
        raise InvalidParameterError(f"guess lacks {missing}")
    if len(points) < len(free):
        raise InvalidParameterError(f"need at least {len(free)} points for {len(free)} free parameters")
    observed = np.array([p.f_ghz for p in points])
    fixed = {k: float(guess[k]) for k in HAM_PARAMS}

    def unpack(x):
        vals = dict(fixed)
        vals.update(zip(free, x))
        return vals

    def resid(x):
        try:
            return model_frequencies(unpack(x), points, basis) - observed
        except (FluxkitError, np.linalg.LinAlgError):
            return np.full(observed.size, np.inf)

    x0 = np.array([fixed[k] for k in free])
    res = levenberg_marquardt(resid, x0, max_iter=max_iter)
    vals = unpack(res.x)
    vals["g"] = abs(vals["g"])
    err = dict.fromkeys(HAM_PARAMS, 0.0)
    if np.all(np.isfinite(res.jac)):
        cov = covariance(res.jac, res.residuals)
        err.update(zip(free, np.sqrt(np.abs(np.diag(cov)))))
    rms = float(np.sqrt(np.mean(res.residuals**2)))
    return FitResult(vals, err, rms, bool(res.converged), res.n_iter, res.message, "hamiltonian")
