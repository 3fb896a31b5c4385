"""Decay, line-shape and randomized-benchmarking fits.

Every fitter returns a :class:`FitResult`; degenerate inputs (constant data,
no spectral peak, unphysical decay rates) yield ``converged=False`` rather
than an exception.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import InvalidParameterError
from .lm import covariance, levenberg_marquardt
from .models import MODELS
from .types import DecayTrace, FitResult, RBDataset

CLIFFORD_GATE_RATIO = 1.833  # physical gates per Clifford


def _failed(model, names, message, **known) -> FitResult:
    params = {n: known.get(n, np.nan) for n in names}
    return FitResult(params, {n: np.nan for n in names}, np.nan, False, 0, message, model)


def _run(model, names, x_data, y, sigma, x0, scale=None) -> FitResult:
    fn, _ = MODELS[model]
    w = 1.0 if sigma is None else 1.0 / sigma

    def resid(p):
        return (fn(x_data, *p) - y) * w

    res = levenberg_marquardt(resid, x0, scale=scale)
    raw = (fn(x_data, *res.x) - y) if np.all(np.isfinite(res.x)) else np.full_like(y, np.nan)
    rms = float(np.sqrt(np.mean(raw**2)))
    try:
        cov = covariance(res.jac, res.residuals, absolute_sigma=sigma is not None)
        err = np.sqrt(np.abs(np.diag(cov)))
    except (np.linalg.LinAlgError, ValueError):
        err = np.full(len(names), np.nan)
    return FitResult(
        dict(zip(names, map(float, res.x))),
        dict(zip(names, map(float, err))),
        rms,
        bool(res.converged),
        res.n_iter,
        res.message,
        model,
    )


def _tail_mean(y):
    return float(np.mean(y[-max(2, y.size // 10):]))


def _decay_guess(trace: DecayTrace, power: int):
    t, y = trace.t, trace.y
    b = _tail_mean(y)
    a = float(y[0] - b)
    if a == 0.0:
        a = float(y[np.argmax(np.abs(y - b))] - b)
    below = np.nonzero(np.abs(y - b) <= abs(a) / np.e)[0]
    span = t[-1] - t[0]
    tau = t[below[0]] - t[0] if below.size and below[0] > 0 else span / 2
    tau = max(tau, span / t.size)
    # shift the amplitude from t[0] back to t = 0
    a = a / np.exp(-((t[0] / tau) ** power))
    return a, b, tau


def _fit_decay(trace: DecayTrace, model: str, power: int) -> FitResult:
    names = MODELS[model][1]
    if np.ptp(trace.y) == 0.0:
        return _failed(model, names, "constant trace: decay time unidentifiable", B=float(trace.y[0]))
    a, b, tau = _decay_guess(trace, power)
    out = _run(model, names, trace.t, trace.y, trace.sigma, [a, b, tau])
    tau = out.params["T"]
    if not np.isfinite(tau) or tau <= 0:
        out.converged = False
        out.message = f"non-physical decay time {tau!r}"
    return out


def fit_exponential(trace: DecayTrace) -> FitResult:
    """Fit y = A exp(-t/T) + B (T1 and Hahn-echo traces)."""
    return _fit_decay(trace, "exp", 1)


def fit_gaussian_decay(trace: DecayTrace) -> FitResult:
    """Fit y = A exp(-(t/T)^2) + B."""
    return _fit_decay(trace, "gauss", 2)


def _peak_frequency(t, y, oversample=8):
    span = t[-1] - t[0]
    f_max = 0.5 * (t.size - 1) / span
    df = 1.0 / (oversample * span)
    freqs = np.arange(1.0 / span, f_max + df / 2, df)
    if freqs.size == 0:
        return None, None
    phases = np.exp(-2j * np.pi * np.outer(freqs, t))
    coeffs = phases @ y
    power = np.abs(coeffs) ** 2
    k = int(np.argmax(power))
    if not power[k] > 0:
        return None, None
    return float(freqs[k]), complex(coeffs[k])


def _wrap(phi):
    return float(np.angle(np.exp(1j * phi)))


def fit_damped_cosine(trace: DecayTrace) -> FitResult:
    """Fit a Ramsey fringe y = A exp(-t/T) cos(2π f t + φ) + B.

    ``f`` is in MHz when ``t`` is in µs. The frequency guess is the peak of an
    oversampled discrete Fourier transform. On return A > 0, f > 0 and φ lies
    in (-π, π].
    """
    names = MODELS["cos"][1]
    if trace.t.size < 8:
        raise InvalidParameterError("a Ramsey fit needs at least 8 points")
    if np.ptp(trace.y) == 0.0:
        return _failed("cos", names, "constant trace: no oscillation", B=float(trace.y[0]))
    t, y = trace.t, trace.y
    b = float(np.mean(y))
    f, c = _peak_frequency(t, y - b)
    if f is None:
        return _failed("cos", names, "no spectral peak")
    span = t[-1] - t[0]
    a = 2.0 * abs(c) / t.size
    phi = float(np.angle(c))
    tau = span / 2
    # refer the amplitude to t = 0 using the guessed envelope
    a *= np.exp(t.mean() / tau)
    out = _run("cos", names, t, y, trace.sigma, [a, b, tau, f, phi], scale=np.array([abs(a), max(abs(b), abs(a)), tau, f, np.pi]))
    p = out.params
    if p["A"] < 0:
        p["A"] = -p["A"]
        p["phi"] += np.pi
    if p["f"] < 0:
        p["f"] = -p["f"]
        p["phi"] = -p["phi"]
    p["phi"] = _wrap(p["phi"])
    if not np.isfinite(p["T"]) or p["T"] <= 0:
        out.converged = False
        out.message = f"non-physical decay time {p['T']!r}"
    return out


def fit_lorentzian(x, y, sigma=None) -> FitResult:
    """Fit a Lorentzian line (peak or dip) with parameters f0, fwhm, depth, offset."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    names = MODELS["lorentz"][1]
    if x.size < 7 or x.shape != y.shape:
        raise InvalidParameterError("a line-shape fit needs at least 7 points")
    if np.any(np.diff(x) <= 0):
        raise InvalidParameterError("frequencies must be strictly increasing")
    if np.ptp(y) == 0.0:
        return _failed("lorentz", names, "flat scan: no line")
    edge = max(1, x.size // 10)
    offset = float(np.median(np.concatenate([y[:edge], y[-edge:]])))
    d = y - offset
    k = int(np.argmax(np.abs(d)))
    depth = float(d[k])
    half = np.abs(d) >= abs(depth) / 2
    lo = k
    while lo > 0 and half[lo - 1]:
        lo -= 1
    hi = k
    while hi < x.size - 1 and half[hi + 1]:
        hi += 1
    step = float(np.min(np.diff(x)))
    fwhm = max(x[hi] - x[lo], 2 * step)
    scale = np.array([max(abs(x[k]), fwhm), fwhm, abs(depth), max(abs(offset), abs(depth))])
    out = _run("lorentz", names, x, y, None if sigma is None else np.asarray(sigma, float), [x[k], fwhm, depth, offset], scale)
    out.params["fwhm"] = abs(out.params["fwhm"])
    return out


class ChiExtraction(NamedTuple):
    chi: float
    ground: FitResult
    excited: FitResult


def chi_from_scans(freq, y_ground, y_excited) -> ChiExtraction:
    """Dispersive shift as the separation of the resonator line for the two qubit states.

    Returned in the units of ``freq``; sign is f_ground - f_excited.
    """
    g = fit_lorentzian(freq, y_ground)
    e = fit_lorentzian(freq, y_excited)
    return ChiExtraction(g.params["f0"] - e.params["f0"], g, e)


def _rb_guess(m, f):
    """Variable projection: for each trial p solve (A, B) linearly, keep the best."""
    m = m.astype(float)
    best = None
    for p in 1.0 - np.logspace(-7, 0, 400)[::-1][:-1]:
        basis = np.column_stack([np.ones_like(m), p**m])
        coef, *_ = np.linalg.lstsq(basis, f, rcond=None)
        r = basis @ coef - f
        c = float(r @ r)
        if best is None or c < best[0]:
            best = (c, coef[0], coef[1], p)
    return best[1:]


def fit_rb(data: RBDataset) -> FitResult:
    """Fit F(m) = A + B p^m and derive per-Clifford and per-gate error rates.

    Extra derived entries in ``params``: r_cliff = (1-p)/2, r_g = r_cliff/1.833,
    f_cliff = 1 - r_cliff and f_g = 1 - r_g.
    """
    names = MODELS["rb"][1]
    if np.unique(data.m).size < 4:
        raise InvalidParameterError("RB fit needs at least 4 distinct sequence lengths")
    m = data.m.astype(float)
    if np.ptp(data.f) == 0.0:
        out = _failed("rb", names, "flat decay: p indistinguishable from 1", A=float(data.f[0]), p=1.0)
        out.params.update(r_cliff=0.0, r_g=0.0, f_cliff=1.0, f_g=1.0)
        return out
    a, b, p = _rb_guess(data.m, data.f)
    scale = np.array([max(abs(a), 1e-3), max(abs(b), 1e-3), 1.0])
    out = _run("rb", names, m, data.f, None, [a, b, p], scale)
    p = out.params["p"]
    dp = out.stderr["p"]
    r_cliff = (1.0 - p) / 2
    r_g = r_cliff / CLIFFORD_GATE_RATIO
    out.params.update(r_cliff=r_cliff, r_g=r_g, f_cliff=1 - r_cliff, f_g=1 - r_g)
    out.stderr.update(r_cliff=dp / 2, r_g=dp / 2 / CLIFFORD_GATE_RATIO, f_cliff=dp / 2, f_g=dp / 2 / CLIFFORD_GATE_RATIO)
    if not 0 < p < 1:
        out.converged = False
        out.message = f"depolarizing parameter p={p!r} outside (0, 1)"
    return out


def fit_trace(trace: DecayTrace, model: str) -> FitResult:
    """Dispatch by model name: exp, gauss or cos."""
    table = {"exp": fit_exponential, "gauss": fit_gaussian_decay, "cos": fit_damped_cosine}
    if model not in table:
        raise InvalidParameterError(f"unknown model {model!r}; choose from {sorted(table)}")
    return table[model](trace)
