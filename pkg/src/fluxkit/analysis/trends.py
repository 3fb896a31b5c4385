"""Coherence-versus-bias analyses: flux-noise amplitude and CPMG pulse-number trend."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..core import BasisConfig, FluxoniumParams
from ..decoherence import flux_noise_rate
from ..errors import InvalidParameterError, UnidentifiableError
from ..spectra import flux_derivative
from .lm import covariance, levenberg_marquardt
from .types import FitResult

SWEET_SLOPE = 1e-6  # GHz/Φ0; below this a point carries no flux-noise information
FLAT_R = 0.5


def fit_t2_vs_flux(
    points,
    params: FluxoniumParams,
    basis: BasisConfig = BasisConfig(),
    t1_floor: float = 1.0,
) -> FitResult:
    """Fit the 1/f flux-noise amplitude A_Φ (µΦ0/√Hz) to T2 (µs) measured versus flux."""
    pts = np.asarray([(float(f), float(t)) for f, t in points])
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InvalidParameterError("no (flux, t2) points")
    if np.any(pts[:, 1] <= 0):
        raise InvalidParameterError("T2 values must be positive")
    slopes = np.array([flux_derivative(params, basis, f).value for f in pts[:, 0]])
    off = np.abs(slopes) > SWEET_SLOPE
    if off.sum() < 3:
        raise UnidentifiableError(
            f"A_phi needs at least 3 points away from the sweet spot, got {int(off.sum())}"
        )
    t2 = pts[:, 1]
    # per-point estimate: excess dephasing rate over the unit-amplitude rate
    excess = 1.0 / t2[off] - 1.0 / (2 * t1_floor)
    unit = np.array([flux_noise_rate(1.0, s) for s in slopes[off]])
    a0 = max(float(np.median(excess / unit)), 0.0)

    # Γ_Φ is linear in A_Φ; fitting |A_Φ| keeps the model defined for any trial step
    def resid(x):
        return 1.0 / (1.0 / (2 * t1_floor) + abs(x[0]) * rate_unit) - t2

    rate_unit = np.array([flux_noise_rate(1.0, s) for s in slopes])
    res = levenberg_marquardt(resid, [a0], scale=np.array([max(a0, 1.0)]))
    res.x = np.abs(res.x)
    err = float(np.sqrt(abs(covariance(res.jac, res.residuals)[0, 0])))
    rms = float(np.sqrt(np.mean(res.residuals**2)))
    return FitResult({"a_phi": float(res.x[0])}, {"a_phi": err}, rms, bool(res.converged), res.n_iter, res.message, "t2_vs_flux")


class CPMGTrend(NamedTuple):
    slope: float
    intercept: float
    r: float
    flat: bool


def cpmg_trend(pairs) -> CPMGTrend:
    """OLS slope of T2 against pulse number N and its Pearson correlation.

    The trend is called flat when |r| < 0.5. A constant T2 has r = 0.
    """
    arr = np.asarray([(float(n), float(t)) for n, t in pairs])
    if arr.ndim != 2 or arr.shape[0] < 3:
        raise InvalidParameterError("need at least 3 (N, T2) pairs")
    n, t2 = arr[:, 0], arr[:, 1]
    if np.any(n < 1) or np.any(n > 11):
        raise InvalidParameterError("pulse numbers must lie in [1, 11]")
    dn = n - n.mean()
    dt = t2 - t2.mean()
    sxx = float(dn @ dn)
    if sxx == 0:
        raise InvalidParameterError("pulse numbers must not all be equal")
    slope = float(dn @ dt) / sxx
    syy = float(dt @ dt)
    r = 0.0 if syy == 0 else float(dn @ dt) / np.sqrt(sxx * syy)
    return CPMGTrend(slope, float(t2.mean() - slope * n.mean()), r, abs(r) < FLAT_R)
