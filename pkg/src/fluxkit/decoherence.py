"""Decoherence rates, their inversions, and the combined coherence budget.

Rates are returned in 1/µs and times in µs. Frequencies entering the rate
formulas (κ, χ) are given as linear MHz and converted to angular rates
internally; E_C and transition frequencies are in GHz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import KELVIN_PER_GHZ, BasisConfig, FluxoniumParams
from .errors import InvalidParameterError, UnphysicalInputError
from .spectra import flux_derivative

TWO_PI = 2 * math.pi

GAUSSIAN = "gaussian"
EXPONENTIAL = "exponential"


def _one_plus_coth(f_ghz: float, temp: float) -> float:
    """1 + coth(h f / 2 k_B T), written as 2 / (1 − exp(−h f / k_B T)).

    The expm1 form stays finite as T → 0 (limit 2) and for tiny h f / k_B T.
    """
    if temp <= 0:
        return 2.0
    x = f_ghz * KELVIN_PER_GHZ / temp
    return -2.0 / math.expm1(-x)


def dielectric_rate(e_c: float, n01: float, f01: float, tan_delta: float, temp: float) -> float:
    """Dielectric-loss decay rate (1/µs).

    Γ = 16π (E_C/h) |n_01|² tanδ_C [1 + coth(h f01 / 2 k_B T)], with E_C/h in GHz.
    ``temp = 0`` is treated as the zero-temperature limit.
    """
    if tan_delta < 0 or e_c <= 0 or f01 <= 0:
        raise InvalidParameterError("dielectric_rate needs e_c, f01 > 0 and tan_delta >= 0")
    # E_C/h in GHz -> 1/µs: ×1e3
    return 16 * math.pi * e_c * 1e3 * abs(n01) ** 2 * tan_delta * _one_plus_coth(f01, temp)


def tan_delta_from_t1(t1: float, e_c: float, n01: float, f01: float, temp: float) -> float:
    """Loss tangent that would make the dielectric channel alone give ``t1`` (µs)."""
    if not t1 > 0:
        raise InvalidParameterError("t1 must be > 0")
    unit_rate = dielectric_rate(e_c, n01, f01, 1.0, temp)
    return 1.0 / (t1 * unit_rate)


def _lorentz_factor(kappa_mhz, chi_mhz):
    kappa = TWO_PI * kappa_mhz
    chi = TWO_PI * chi_mhz
    return kappa * chi ** 2 / (kappa ** 2 + chi ** 2)


def thermal_photon_rate(n_th: float, kappa: float, chi: float) -> float:
    """Photon-shot-noise dephasing Γ_φ = n_th κ χ² / (κ² + χ²) in 1/µs (κ, χ in MHz)."""
    if n_th < 0 or not kappa > 0:
        raise InvalidParameterError("thermal_photon_rate needs n_th >= 0 and kappa > 0")
    if n_th == 0:
        return 0.0
    return n_th * _lorentz_factor(kappa, chi)


def nth_from_tphi(tphi: float, kappa: float, chi: float) -> float:
    """Thermal photon number that explains a pure dephasing time ``tphi`` (µs)."""
    if math.isinf(tphi):
        return 0.0
    if not tphi > 0:
        raise InvalidParameterError("tphi must be > 0")
    return 1.0 / (tphi * _lorentz_factor(kappa, chi))


def nth_from_temp(temp: float, f_r: float) -> float:
    """Bose-Einstein occupation of a mode at ``f_r`` GHz and temperature ``temp`` K."""
    if not temp > 0:
        raise InvalidParameterError("temperature must be > 0")
    return 1.0 / math.expm1(f_r * KELVIN_PER_GHZ / temp)


def temp_from_nth(n_th: float, f_r: float) -> float:
    """Mode temperature (K) for occupation ``n_th``."""
    if not n_th > 0:
        raise InvalidParameterError("n_th must be > 0")
    return f_r * KELVIN_PER_GHZ / math.log1p(1.0 / n_th)


def flux_noise_rate(a_phi: float, dfdflux: float) -> float:
    """First-order 1/f flux-noise dephasing rate (1/µs).

    Γ_Φ = A_Φ √ln2 |∂ω/∂Φ_ext| with A_Φ in µΦ0/√Hz and the slope in GHz/Φ0.
    The associated decay envelope is Gaussian, exp(−(tΓ_Φ)²).
    """
    if a_phi < 0:
        raise InvalidParameterError("a_phi must be >= 0")
    # µΦ0 -> Φ0: 1e-6;  2π·GHz -> rad/µs: 2π·1e3
    return a_phi * 1e-6 * math.sqrt(math.log(2)) * TWO_PI * abs(dfdflux) * 1e3


def pure_dephasing_from_t1t2(t1: float, t2: float) -> float:
    """T_φ from 1/T_φ = 1/T2 − 1/(2 T1); returns ``inf`` when T2 = 2 T1."""
    if not (t1 > 0 and t2 > 0):
        raise InvalidParameterError("t1 and t2 must be > 0")
    if t2 > 2 * t1:
        raise UnphysicalInputError(f"T2={t2} exceeds 2*T1={2 * t1}")
    rate = 1.0 / t2 - 1.0 / (2 * t1)
    if rate <= 0:
        return math.inf
    return 1.0 / rate


def tphi_stderr(t1: float, t2: float, t1_err: float, t2_err: float) -> float:
    """First-order error of T_φ propagated from independent T1, T2 errors."""
    tphi = pure_dephasing_from_t1t2(t1, t2)
    d_t2 = tphi ** 2 / t2 ** 2
    d_t1 = tphi ** 2 / (2 * t1 ** 2)
    return math.hypot(d_t2 * t2_err, d_t1 * t1_err)


def coherence_limit_rb(t_cliff: float, t2: float) -> float:
    """Coherence-limited error per Clifford, t_cliff / T2 (t_cliff in ns, T2 in µs)."""
    if not t_cliff > 0 or not t2 > 0:
        raise InvalidParameterError("t_cliff and t2 must be > 0")
    if math.isinf(t2):
        return 0.0
    return t_cliff * 1e-3 / t2


@dataclass(frozen=True)
class NoiseEnvironment:
    temp_qubit: float = 0.020
    temp_res: Optional[float] = None
    n_th: Optional[float] = None
    a_phi: float = 0.0
    tan_delta: float = 0.0

    def __post_init__(self):
        if not self.temp_qubit > 0:
            raise InvalidParameterError("temp_qubit must be > 0")
        if self.temp_res is not None and self.n_th is not None:
            raise InvalidParameterError("give either temp_res or n_th, not both")
        if self.temp_res is not None and not self.temp_res > 0:
            raise InvalidParameterError("temp_res must be > 0")
        if self.n_th is not None and self.n_th < 0:
            raise InvalidParameterError("n_th must be >= 0")
        if self.a_phi < 0 or self.tan_delta < 0:
            raise InvalidParameterError("a_phi and tan_delta must be >= 0")

    def resonator_nth(self, f_r: float) -> Optional[float]:
        if self.n_th is not None:
            return self.n_th
        if self.temp_res is not None:
            return nth_from_temp(self.temp_res, f_r)
        return None


@dataclass(frozen=True)
class Contribution:
    mechanism: str
    kind: str  # "relaxation" or "dephasing"
    rate: float  # 1/µs
    envelope: str = EXPONENTIAL


@dataclass(frozen=True)
class RateBudget:
    contributions: tuple = field(default_factory=tuple)
    t1_pred: float = math.inf
    t2_pred: float = math.inf
    tphi_pred: float = math.inf

    def rates(self) -> dict:
        return {c.mechanism: c.rate for c in self.contributions}

    def as_dict(self) -> dict:
        def num(x):
            return None if math.isinf(x) else x

        return {
            "contributions": [
                {"mechanism": c.mechanism, "kind": c.kind, "rate_per_us": c.rate, "envelope": c.envelope}
                for c in self.contributions
            ],
            "t1_pred_us": num(self.t1_pred),
            "t2_pred_us": num(self.t2_pred),
            "tphi_pred_us": num(self.tphi_pred),
        }


def _inv(rate):
    return math.inf if rate == 0 else 1.0 / rate


def combine(contributions: Sequence[Contribution]) -> RateBudget:
    """Combine rates: 1/T1 = Σ relaxation, 1/T_φ = Σ dephasing, 1/T2 = 1/(2T1) + 1/T_φ."""
    gamma1 = sum(c.rate for c in contributions if c.kind == "relaxation")
    gamma_phi = sum(c.rate for c in contributions if c.kind == "dephasing")
    gamma2 = gamma1 / 2 + gamma_phi
    return RateBudget(tuple(contributions), _inv(gamma1), _inv(gamma2), _inv(gamma_phi))


def coherence_budget(
    env: NoiseEnvironment,
    *,
    e_c: Optional[float] = None,
    n01: Optional[float] = None,
    f01: Optional[float] = None,
    f_r: Optional[float] = None,
    kappa: Optional[float] = None,
    chi: Optional[float] = None,
    dfdflux: float = 0.0,
) -> RateBudget:
    """Assemble the predicted T1/T2/T_φ from every configured mechanism.

    Dielectric loss needs (e_c, n01, f01) and a nonzero ``tan_delta``;
    thermal photons need (kappa, chi) and an occupation (``n_th`` or
    ``temp_res`` with ``f_r``); flux noise needs ``a_phi`` and the slope
    ``dfdflux`` (zero at the sweet spot).
    """
    parts = []
    if env.tan_delta > 0 and None not in (e_c, n01, f01):
        parts.append(
            Contribution("dielectric", "relaxation", dielectric_rate(e_c, n01, f01, env.tan_delta, env.temp_qubit))
        )
    n_th = env.n_th if env.n_th is not None else (env.resonator_nth(f_r) if f_r is not None else None)
    if n_th is not None and None not in (kappa, chi):
        parts.append(Contribution("thermal_photon", "dephasing", thermal_photon_rate(n_th, kappa, chi)))
    if env.a_phi > 0:
        parts.append(Contribution("flux_noise", "dephasing", flux_noise_rate(env.a_phi, dfdflux), GAUSSIAN))
    if not parts:
        raise InvalidParameterError("no decoherence mechanism is configured")
    return combine(parts)


def flux_dephasing_profile(
    params: FluxoniumParams,
    basis: BasisConfig,
    a_phi: float,
    flux_grid: Sequence[float],
    t1_floor: float,
) -> np.ndarray:
    """Predicted T2 (µs) versus flux: 1 / (1/(2 t1_floor) + Γ_Φ(flux))."""
    grid = np.atleast_1d(np.asarray(flux_grid, dtype=float))
    if grid.size == 0:
        raise InvalidParameterError("flux grid is empty")
    slopes = np.array([flux_derivative(params, basis, float(f)).value for f in grid])
    return t2_from_slopes(slopes, a_phi, t1_floor)


def t2_from_slopes(slopes, a_phi: float, t1_floor: float) -> np.ndarray:
    """T2 for precomputed df01/dflux slopes (GHz/Φ0)."""
    gamma = np.array([flux_noise_rate(a_phi, s) for s in np.atleast_1d(slopes)])
    return 1.0 / (1.0 / (2 * t1_floor) + gamma)
