"""Quantities derived from a device configuration, shared by commands and reproductions."""
from __future__ import annotations

import math
from typing import NamedTuple

from ..decoherence import (
    NoiseEnvironment,
    coherence_budget,
    nth_from_tphi,
    pure_dephasing_from_t1t2,
    tan_delta_from_t1,
    temp_from_nth,
    tphi_stderr,
)
from ..core import resolve_g_mhz
from ..gatesim import ThreeLevelSystem, truncate_system
from ..spectra import flux_derivative, qubit_chi, solve_fluxonium, solve_transmon
from .config import DeviceConfig


class Row(NamedTuple):
    name: str
    value: float
    unit: str


def sweet_spot(cfg: DeviceConfig, n_sum: int = 20) -> dict:
    """Spectrum, charge matrix elements and χ01 at the configured flux bias."""
    (fl,) = cfg.need("fluxonium")
    sol = solve_fluxonium(fl, cfg.basis)
    out = {
        "f01": sol.freq(0, 1),
        "f12": sol.freq(1, 2),
        "f02": sol.freq(0, 2),
        "n01": abs(complex(sol.n_elems[0, 1])),
        "n02": abs(complex(sol.n_elems[0, 2])),
    }
    out["f12_over_f01"] = out["f12"] / out["f01"]
    if cfg.resonator is not None and cfg.coupling is not None:
        g = resolve_g_mhz(cfg.coupling, fl, cfg.resonator)
        out["g_mhz"] = g
        out["chi01_mhz"] = qubit_chi(sol, g, cfg.resonator.f_r, n_sum)
    return out


def device_budget(cfg: DeviceConfig):
    """Infer loss and thermal parameters from measured coherence, then predict T1/T2.

    Returns ``(rows, budget)``. Measured χ01 takes precedence over the
    computed one in the photon-shot-noise inversion.
    """
    fl, res = cfg.need("fluxonium", "resonator")
    m = cfg.measured
    ss = sweet_spot(cfg)
    rows = [
        Row("f01", ss["f01"], "GHz"),
        Row("n01", ss["n01"], "Cooper pairs"),
    ]
    chi = m.get("chi01_mhz", ss.get("chi01_mhz"))
    if "chi01_mhz" in ss:
        rows.append(Row("chi01_computed", ss["chi01_mhz"], "MHz"))
    if chi is not None:
        rows.append(Row("chi01_used", chi, "MHz"))

    n_th = cfg.noise.resonator_nth(res.f_r)
    if "t1_us" in m and "t2e_us" in m:
        tphi = pure_dephasing_from_t1t2(m["t1_us"], m["t2e_us"])
        rows.append(Row("tphi", tphi, "us"))
        if "t1_err_us" in m and "t2e_err_us" in m:
            rows.append(Row("tphi_err", tphi_stderr(m["t1_us"], m["t2e_us"], m["t1_err_us"], m["t2e_err_us"]), "us"))
        if chi is not None and res.kappa > 0:
            nth_inf = nth_from_tphi(tphi, res.kappa, chi)
            rows.append(Row("n_th", nth_inf, ""))
            rows.append(Row("T_res", temp_from_nth(nth_inf, res.f_r) * 1e3, "mK"))
            if n_th is None:
                n_th = nth_inf

    tan_delta = cfg.noise.tan_delta
    if "t1_max_us" in m:
        td = tan_delta_from_t1(m["t1_max_us"], fl.e_c, ss["n01"], ss["f01"], cfg.noise.temp_qubit)
        rows.append(Row("tan_delta", td, ""))
        if tan_delta == 0:
            tan_delta = td

    env = NoiseEnvironment(cfg.noise.temp_qubit, None, n_th, cfg.noise.a_phi, tan_delta)
    slope = flux_derivative(fl, cfg.basis, fl.flux).value
    budget = coherence_budget(
        env,
        e_c=fl.e_c,
        n01=ss["n01"],
        f01=ss["f01"],
        f_r=res.f_r,
        kappa=res.kappa if res.kappa > 0 else None,
        chi=chi,
        dfdflux=slope,
    )
    for c in budget.contributions:
        rows.append(Row(f"rate_{c.mechanism}", c.rate, "1/us"))
    rows += [
        Row("T1_pred", budget.t1_pred, "us"),
        Row("Tphi_pred", budget.tphi_pred, "us"),
        Row("T2_pred", budget.t2_pred, "us"),
    ]
    return rows, budget


def fluxonium_system(cfg: DeviceConfig) -> ThreeLevelSystem:
    (fl,) = cfg.need("fluxonium")
    return truncate_system(solve_fluxonium(fl, cfg.basis, 3), "fluxonium")


def transmon_system(cfg: DeviceConfig) -> ThreeLevelSystem:
    (tr,) = cfg.need("transmon")
    return truncate_system(solve_transmon(tr, cfg.basis, 3), "transmon")


def finite(x: float):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x
