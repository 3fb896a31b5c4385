"""Circuit parameter types and operator/Hamiltonian construction.

Units used throughout fluxkit:

* energies and frequencies are stored as E/h in GHz (linear frequency),
* flux is in units of the flux quantum, temperature in K,
* capacitance in fF, inductance in nH,
* time is in ns inside :mod:`fluxkit.gatesim` and in µs in
  :mod:`fluxkit.decoherence` / :mod:`fluxkit.analysis`.

Every builder is a pure function and every returned array is read-only.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import constants as sc
from scipy.special import eval_genlaguerre, gammaln

from .errors import IncompleteSolutionError, InvalidBasisError, InvalidParameterError

#: h * (1 GHz) / k_B in kelvin; the only hard-coded unit conversion.
KELVIN_PER_GHZ = 0.047992

#: Resistance quantum h / (2e)^2 in ohm.
R_Q = sc.h / (2 * sc.e) ** 2


def _frozen(arr):
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FluxoniumParams:
    e_j: float
    e_l: float
    e_c: float
    flux: float = 0.5

    def __post_init__(self):
        for name in ("e_j", "e_l", "e_c"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if not math.isfinite(self.flux):
            raise InvalidParameterError(f"flux must be finite, got {self.flux!r}")

    def at_flux(self, flux: float) -> "FluxoniumParams":
        return FluxoniumParams(self.e_j, self.e_l, self.e_c, flux)


@dataclass(frozen=True)
class TransmonParams:
    e_j: float
    e_c: float
    n_g: float = 0.0

    def __post_init__(self):
        if not (self.e_j > 0 and self.e_c > 0):
            raise InvalidParameterError("transmon e_j and e_c must be > 0")
        if self.e_j / self.e_c < 1:
            warnings.warn(
                f"E_J/E_C = {self.e_j / self.e_c:.3g} is below the transmon regime",
                stacklevel=2,
            )


@dataclass(frozen=True)
class ResonatorParams:
    """Readout resonator.

    ``f_r`` in GHz, ``kappa`` (linewidth over 2π) in MHz, optional lumped
    ``l_r`` in nH and ``c_r`` in fF.
    """

    f_r: float
    kappa: float = 0.0
    l_r: Optional[float] = None
    c_r: Optional[float] = None

    def __post_init__(self):
        if not self.f_r > 0:
            raise InvalidParameterError("f_r must be > 0")
        if self.kappa < 0:
            raise InvalidParameterError("kappa must be >= 0")
        for name in ("l_r", "c_r"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise InvalidParameterError(f"{name} must be > 0 when given")
        if self.l_r is not None and self.c_r is not None:
            f_lc = lc_frequency(self.l_r, self.c_r)
            if abs(f_lc - self.f_r) > 0.01 * self.f_r:
                raise InvalidParameterError(
                    f"l_r={self.l_r} nH, c_r={self.c_r} fF resonate at {f_lc:.4f} GHz, "
                    f"inconsistent with f_r={self.f_r} GHz"
                )


def lc_frequency(l_nh: float, c_ff: float) -> float:
    """Resonance 1/(2π√(LC)) in GHz for L in nH and C in fF."""
    # nH * fF = 1e-24 s^2, so sqrt gives 1e-12 s; 1/(1e-12 s) = 1e3 GHz
    return 1e3 / (2 * math.pi * math.sqrt(l_nh * c_ff))


@dataclass(frozen=True)
class CouplingSpec:
    """Qubit-resonator coupling, given directly or through circuit capacitances (fF)."""

    g_mhz: Optional[float] = None
    c_qr: Optional[float] = None
    c_sigma: Optional[float] = None
    c_r: Optional[float] = None

    def __post_init__(self):
        caps = (self.c_qr, self.c_sigma, self.c_r)
        has_caps = any(c is not None for c in caps)
        if (self.g_mhz is None) == (not has_caps):
            raise InvalidParameterError("give exactly one of g_mhz or the capacitance set")
        if self.g_mhz is not None and self.g_mhz < 0:
            raise InvalidParameterError("g_mhz must be >= 0")
        if has_caps:
            if any(c is None for c in caps):
                raise InvalidParameterError("capacitance coupling needs c_qr, c_sigma and c_r")
            if self.c_qr < 0:
                raise InvalidParameterError("c_qr must be >= 0")


@dataclass(frozen=True)
class BasisConfig:
    n_osc: int = 60
    n_flux_keep: int = 25
    n_res: int = 5
    n_charge: int = 30

    def __post_init__(self):
        if self.n_osc < 2:
            raise InvalidBasisError(f"n_osc must be >= 2, got {self.n_osc}")
        if self.n_osc < 2 * self.n_flux_keep:
            raise InvalidBasisError(
                f"n_osc={self.n_osc} must be at least 2*n_flux_keep={2 * self.n_flux_keep}"
            )
        if self.n_res < 2:
            raise InvalidBasisError("n_res must be >= 2")
        if self.n_charge < 10:
            raise InvalidBasisError("n_charge must be >= 10")


@dataclass(frozen=True)
class Operator:
    """A dense operator together with a label of the basis it is written in."""

    matrix: np.ndarray
    basis: str

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidParameterError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_error(self) -> float:
        """‖H − H†‖_F / ‖H‖_F."""
        m = self.matrix
        norm = np.linalg.norm(m)
        if norm == 0:
            return 0.0
        return float(np.linalg.norm(m - m.conj().T) / norm)


class OscillatorOps(NamedTuple):
    n_hat: Operator
    phi_hat: Operator
    a: Operator
    a_dag: Operator


def zero_point_amplitudes(e_l: float, e_c: float) -> tuple[float, float]:
    """Return (φ_zpf, n_zpf) of the LC oscillator defined by E_L and E_C."""
    phi_zpf = (8 * e_c / e_l) ** 0.25 / math.sqrt(2)
    n_zpf = (e_l / (8 * e_c)) ** 0.25 / math.sqrt(2)
    return phi_zpf, n_zpf


def build_oscillator_ops(basis: BasisConfig, params: FluxoniumParams) -> OscillatorOps:
    """Charge, phase and ladder operators in the LC oscillator (Fock) basis.

    ``n_hat`` is in units of Cooper pairs with [φ̂, n̂] = i on the untruncated block.
    """
    n = basis.n_osc
    if n < 2:
        raise InvalidBasisError("oscillator basis needs at least 2 states")
    phi_zpf, n_zpf = zero_point_amplitudes(params.e_l, params.e_c)
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    a_dag = a.conj().T
    tag = f"fock[{n}]"
    return OscillatorOps(
        n_hat=Operator(1j * n_zpf * (a_dag - a), tag),
        phi_hat=Operator(phi_zpf * (a + a_dag), tag),
        a=Operator(a, tag),
        a_dag=Operator(a_dag, tag),
    )


def displacement_matrix(alpha_imag: float, n: int) -> np.ndarray:
    """⟨m|exp(i·x·(a + a†))|k⟩ for m, k < n with real ``x = alpha_imag``.

    Uses the closed-form Laguerre expression for the displacement operator
    D(i x), so each element is exact for the infinite-dimensional operator.
    """
    if alpha_imag == 0:
        return np.eye(n, dtype=complex)
    x2 = alpha_imag ** 2
    m = np.arange(n)
    hi = np.maximum.outer(m, m)
    lo = np.minimum.outer(m, m)
    diff = hi - lo
    log_mag = -x2 / 2 + 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + diff * math.log(abs(alpha_imag))
    mag = np.exp(log_mag) * eval_genlaguerre(lo, diff, x2)
    sign = 1.0 if alpha_imag > 0 else -1.0
    return mag * (1j * sign) ** diff


def _cos_phase_operator(phi_zpf, flux, n, method):
    theta = 2 * math.pi * flux
    if method == "exact":
        disp = displacement_matrix(phi_zpf, n)
        return (np.exp(-1j * theta) * disp).real
    if method == "spectral":
        phi = phi_zpf * (np.diag(np.sqrt(np.arange(1, n)), 1) + np.diag(np.sqrt(np.arange(1, n)), -1))
        w, v = np.linalg.eigh(phi)
        return (v * np.cos(w - theta)) @ v.T
    raise InvalidParameterError(f"unknown cosine method {method!r}")


def build_fluxonium_h(
    params: FluxoniumParams, basis: BasisConfig = BasisConfig(), cos_method: str = "exact"
) -> Operator:
    """H/h in GHz: 4E_C n̂² + ½E_L φ̂² − E_J cos(φ̂ − 2π·flux), in the oscillator basis.

    ``cos_method="exact"`` takes the cosine's matrix elements from the closed-form
    displacement operator; ``"spectral"`` diagonalises the truncated φ̂ instead
    (converges more slowly with ``n_osc``).
    """
    ops = build_oscillator_ops(basis, params)
    n_hat, phi_hat = ops.n_hat.matrix, ops.phi_hat.matrix
    phi_zpf, _ = zero_point_amplitudes(params.e_l, params.e_c)
    kinetic = 4 * params.e_c * (n_hat @ n_hat) + 0.5 * params.e_l * (phi_hat @ phi_hat)
    cos_term = _cos_phase_operator(phi_zpf, params.flux, basis.n_osc, cos_method)
    h = kinetic.real - params.e_j * cos_term
    h = 0.5 * (h + h.T)
    return Operator(h, f"fock[{basis.n_osc}]")


def build_transmon_h(params: TransmonParams, basis: BasisConfig = BasisConfig()) -> tuple[Operator, Operator]:
    """Charge-basis transmon Hamiltonian (GHz) and its charge operator n − n_g."""
    n = np.arange(-basis.n_charge, basis.n_charge + 1, dtype=float)
    dim = n.size
    hop = np.eye(dim, k=1) + np.eye(dim, k=-1)
    h = np.diag(4 * params.e_c * (n - params.n_g) ** 2) - 0.5 * params.e_j * hop
    tag = f"charge[{basis.n_charge}]"
    return Operator(h, tag), Operator(np.diag(n - params.n_g), tag)


def g_from_capacitance(cpl: CouplingSpec, fl: FluxoniumParams, res: ResonatorParams) -> float:
    """Coupling g/2π in MHz from the coupling, shunt and resonator capacitances.

    g = ½ · C_qr / (C_Σ C_r) · 1/√(ζ_q ζ_r) in rad/s with
    ζ_q = (R_q / 2π)·√(8E_C / (E_L + E_J)) and ζ_r = √(L_r / C_r).
    """
    if cpl.c_qr is None or cpl.c_sigma is None or cpl.c_r is None:
        raise InvalidParameterError("capacitance coupling needs c_qr, c_sigma and c_r")
    if res.l_r is None:
        raise InvalidParameterError("resonator inductance l_r is required")
    if not (cpl.c_sigma > 0 and cpl.c_r > 0 and res.l_r > 0):
        raise InvalidParameterError("capacitances and inductance must be > 0")
    if cpl.c_qr < 0:
        raise InvalidParameterError("c_qr must be >= 0")

    # fF -> F, nH -> H
    c_qr, c_sigma, c_r = cpl.c_qr * 1e-15, cpl.c_sigma * 1e-15, cpl.c_r * 1e-15
    l_r = res.l_r * 1e-9

    # C_Σ = e² / (2 E_C) with E_C in joule
    c_sigma_from_ec = sc.e ** 2 / (2 * sc.h * fl.e_c * 1e9)
    if abs(c_sigma - c_sigma_from_ec) > 0.05 * c_sigma_from_ec:
        warnings.warn(
            f"c_sigma={cpl.c_sigma} fF differs from e^2/2E_C = {c_sigma_from_ec * 1e15:.2f} fF by >5%",
            stacklevel=2,
        )

    zeta_q = R_Q / (2 * math.pi) * math.sqrt(8 * fl.e_c / (fl.e_l + fl.e_j))
    zeta_r = math.sqrt(l_r / c_r)
    g_rad_s = 0.5 * c_qr / (c_sigma * c_r) / math.sqrt(zeta_q * zeta_r)
    return g_rad_s / (2 * math.pi) / 1e6


def resolve_g_mhz(cpl: CouplingSpec, fl: Optional[FluxoniumParams] = None, res: Optional[ResonatorParams] = None) -> float:
    if cpl.g_mhz is not None:
        return cpl.g_mhz
    if fl is None or res is None:
        raise InvalidParameterError("capacitance coupling needs fluxonium and resonator parameters")
    return g_from_capacitance(cpl, fl, res)


def build_coupled_h(
    flux_sol,
    res: ResonatorParams,
    cpl: CouplingSpec,
    basis: BasisConfig = BasisConfig(),
    fluxonium: Optional[FluxoniumParams] = None,
) -> Operator:
    """Fluxonium ⊗ resonator Hamiltonian (GHz) truncated to n_flux_keep × n_res.

    diag(E_j) ⊗ I + I ⊗ f_r(a†a + ½) − g · n̂_eig ⊗ (a† + a)

    ``flux_sol`` is an :class:`~fluxkit.spectra.EigenSolution` of the bare
    fluxonium; ``fluxonium`` is only needed when the coupling is given by
    capacitances.
    """
    keep = basis.n_flux_keep
    energies = getattr(flux_sol, "energies", None)
    n_elems = getattr(flux_sol, "n_elems", None)
    if energies is None or n_elems is None:
        raise IncompleteSolutionError("eigensolution has no charge matrix elements")
    if len(energies) < keep or n_elems.shape[0] < keep:
        raise IncompleteSolutionError(
            f"need {keep} fluxonium levels with matrix elements, got {len(energies)}"
        )
    g = resolve_g_mhz(cpl, fluxonium, res) * 1e-3
    nr = basis.n_res
    a = np.diag(np.sqrt(np.arange(1, nr, dtype=float)), 1)
    h_res = res.f_r * (a.T @ a + 0.5 * np.eye(nr))
    n_eig = np.asarray(n_elems)[:keep, :keep]
    h = (
        np.kron(np.diag(energies[:keep]), np.eye(nr))
        + np.kron(np.eye(keep), h_res)
        - g * np.kron(n_eig, a + a.T)
    )
    h = 0.5 * (h + h.conj().T)
    return Operator(h, f"fluxonium_eig[{keep}]xfock[{nr}]")
