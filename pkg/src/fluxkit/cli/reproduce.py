"""Regenerate the data behind each published figure/table and check it against tolerances."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..analysis import chi_from_scans, fit_t2_vs_flux, rng
from ..analysis.hamfit import dressed_transitions
from ..analysis.models import lorentzian
from ..core import resolve_g_mhz
from ..decoherence import flux_noise_rate
from ..gatesim import calibrated_pulse, error_vs_duration
from ..spectra import avoided_crossing, dispersive_shift, flux_derivative, flux_sweep, solve_fluxonium
from .config import load_fixture
from .derived import device_budget, fluxonium_system, sweet_spot, transmon_system


@dataclass
class Check:
    name: str
    value: float
    expected: float
    tol: float
    mode: str = "rel"  # rel | abs | min

    @property
    def delta(self) -> float:
        if self.mode == "rel":
            return abs(self.value - self.expected) / abs(self.expected)
        if self.mode == "abs":
            return abs(self.value - self.expected)
        return self.value - self.expected

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.mode == "min":
            return self.value >= self.expected
        return self.delta <= self.tol

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        if self.mode == "min":
            crit = f">= {self.expected:.4g}"
        elif self.mode == "rel":
            crit = f"= {self.expected:.4g} within {self.tol:.3g} rel (delta {self.delta:.3g})"
        else:
            crit = f"= {self.expected:.4g} within {self.tol:.3g} (delta {self.delta:.3g})"
        return f"{verdict} {self.name}: {self.value:.6g} {crit}"


@dataclass
class Table:
    name: str
    header: list
    rows: list


@dataclass
class Outcome:
    tables: list
    checks: list


def _chi_parts(name):
    cfg = load_fixture(name)
    sol = solve_fluxonium(cfg.fluxonium, cfg.basis)
    g = resolve_g_mhz(cfg.coupling, cfg.fluxonium, cfg.resonator)
    return cfg, sol, g


def _chi_checks(name, expected, tol):
    cfg, sol, g = _chi_parts(name)
    f_r = cfg.resonator.f_r
    chi20 = abs(dispersive_shift(sol, g, f_r, 0, 20) - dispersive_shift(sol, g, f_r, 1, 20))
    chi24 = abs(dispersive_shift(sol, g, f_r, 0, 24) - dispersive_shift(sol, g, f_r, 1, 24))
    return [
        Check(f"{name} |chi01| (MHz)", chi20, expected, tol),
        Check(f"{name} chi01 n_sum 20->24 shift", abs(chi24 - chi20) / chi20, 0.0, 0.01, "abs"),
    ]


def fig2(seed: int) -> Outcome:
    cfg = load_fixture("fluxonium3")
    fl = cfg.fluxonium
    values = dict(e_j=fl.e_j, e_l=fl.e_l, e_c=fl.e_c, f_r=cfg.resonator.f_r, g=cfg.coupling.g_mhz * 1e-3)
    rows = []
    for flux in np.linspace(0.2, 0.5, 61):
        d = dressed_transitions(values, float(flux), cfg.basis)
        bare = solve_fluxonium(fl.at_flux(float(flux)), cfg.basis, 3)
        rows.append([float(flux), d["01"], d["02"], d["resonator"], bare.freq(0, 2), cfg.resonator.f_r])
    cross = avoided_crossing(fl, cfg.basis, cfg.resonator, cfg.coupling)
    checks = [
        Check("fluxonium3 |2,0>-|0,1> splitting (MHz)", cross.splitting_mhz, 31.0, 0.10),
        Check("splitting vs 2g|n20| (MHz)", cross.splitting_mhz, cross.two_level_mhz, 0.05),
    ]
    header = ["flux", "f01_dressed_ghz", "f02_dressed_ghz", "f_res_dressed_ghz", "f02_bare_ghz", "f_r_bare_ghz"]
    crossing = Table("crossing", ["flux", "splitting_mhz", "two_g_n20_mhz"], [list(cross)])
    return Outcome([Table("fig2_spectrum", header, rows), crossing], checks)


def fig3d(seed: int) -> Outcome:
    tables, checks = [], []
    for name, expected, tol in (("fluxonium3", 1.39, 0.10), ("fluxonium4", 0.63, 0.15)):
        cfg, sol, g = _chi_parts(name)
        f_r = cfg.resonator.f_r
        chi0 = dispersive_shift(sol, g, f_r, 0)
        chi1 = dispersive_shift(sol, g, f_r, 1)
        det = np.linspace(-4.0, 4.0, 161)  # MHz from the bare resonator
        kappa = cfg.resonator.kappa
        y0 = lorentzian(det, chi0, kappa, -0.8, 1.0)
        y1 = lorentzian(det, chi1, kappa, -0.8, 1.0)
        tables.append(Table(f"fig3d_{name}", ["detuning_mhz", "response_ground", "response_excited"], np.column_stack([det, y0, y1]).tolist()))
        extracted = chi_from_scans(det, y0, y1)
        checks.append(Check(f"{name} chi01 from fitted line centres vs model (MHz)", abs(extracted.chi), abs(chi0 - chi1), 1e-6))
        checks += _chi_checks(name, expected, tol)
    return Outcome(tables, checks)


FIG4B_TG = (4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0)


def fig4b(seed: int) -> Outcome:
    flux_sys = fluxonium_system(load_fixture("fluxonium3"))
    tr_sys = transmon_system(load_fixture("transmon"))
    curves = [error_vs_duration(s, FIG4B_TG) for s in (flux_sys, tr_sys)]
    tables = [Table(f"fig4b_{c.label}", ["t_g_ns", "eps_star", "leakage", "p1"], [list(r) for r in c.rows]) for c in curves]
    i6 = FIG4B_TG.index(6.0)
    fl6, tr6 = curves[0].rows[i6], curves[1].rows[i6]
    checks = [
        Check("transmon/fluxonium leakage ratio at 6 ns", tr6[2] / fl6[2], 1e3, 0.0, "min"),
        Check("fluxonium calibrated 6 ns P1", fl6[3], 0.999, 0.0, "min"),
    ]
    return Outcome(tables, checks)


def s1(seed: int) -> Outcome:
    tables, checks = [], []
    grid = np.linspace(0.3, 0.5, 41)
    for name, expected, tol in (("fluxonium3", 1.39, 0.10), ("fluxonium4", 0.63, 0.15)):
        cfg = load_fixture(name)
        sw = flux_sweep(cfg.fluxonium, cfg.basis, grid, ((0, 1),), with_chi=True, res=cfg.resonator, cpl=cfg.coupling)
        rows = [[f, f01, chi, flag] for f, f01, chi, flag in zip(grid, sw.freqs[(0, 1)], sw.chi01_mhz, sw.flags)]
        tables.append(Table(f"s1_{name}", ["flux", "f01_ghz", "chi01_mhz", "flags"], rows))
        checks += _chi_checks(name, expected, tol)
    return Outcome(tables, checks)


S2_GRID = np.linspace(0.40, 0.5, 11)


def s2_curve(seed: int) -> Outcome:
    cfg = load_fixture("fluxonium3")
    fl, a_phi = cfg.fluxonium, cfg.noise.a_phi
    t1 = cfg.measured["t1_us"]
    slopes = np.array([flux_derivative(fl, cfg.basis, float(f)).value for f in S2_GRID])
    gamma = np.array([flux_noise_rate(a_phi, s) for s in slopes])
    tphi = np.where(gamma > 0, 1.0 / np.where(gamma > 0, gamma, 1.0), np.inf)
    t2 = 1.0 / (1.0 / (2 * t1) + gamma)
    rows = [list(r) for r in zip(S2_GRID, slopes, tphi, t2)]
    noisy = t2 * (1.0 + 0.10 * rng(seed).normal(size=t2.size))
    fit = fit_t2_vs_flux(zip(S2_GRID, noisy), fl, cfg.basis, t1)
    synth = [[f, v] for f, v in zip(S2_GRID, noisy)]
    checks = [Check(f"A_phi refit from 10% noisy synthetic T2 (seed {seed})", fit.params["a_phi"], a_phi, 0.10)]
    return Outcome(
        [
            Table("s2_curve", ["flux", "df01_dflux_ghz", "tphi_flux_us", "t2_pred_us"], rows),
            Table("s2_synthetic", ["flux", "t2_us"], synth),
        ],
        checks,
    )


def table_s1_derived(seed: int) -> Outcome:
    expect = {
        "fluxonium3": dict(f01=1.252, ratio=2.14, chi=1.39, chi_tol=0.10, tphi=36.6, tan=1.6e-6, nth=(1.2e-2, 0.1e-2), tres=(70.0, 2.0)),
        "fluxonium4": dict(f01=1.330, ratio=1.99, chi=0.63, chi_tol=0.15, tphi=35.4, tan=2.0e-6, nth=(2.0e-2, 0.2e-2), tres=(75.0, 3.0)),
    }
    rows, checks = [], []
    for name, e in expect.items():
        cfg = load_fixture(name)
        ss = sweet_spot(cfg)
        budget_rows, _ = device_budget(cfg)
        b = {r.name: r.value for r in budget_rows}
        derived = [
            ("f01_ghz", ss["f01"]),
            ("f12_over_f01", ss["f12_over_f01"]),
            ("chi01_mhz", ss["chi01_mhz"]),
            ("tphi_us", b["tphi"]),
            ("tan_delta", b["tan_delta"]),
            ("n_th", b["n_th"]),
            ("t_res_mk", b["T_res"]),
        ]
        rows += [[name, k, v] for k, v in derived]
        checks += [
            Check(f"{name} f01 (GHz)", ss["f01"], e["f01"], 0.01),
            Check(f"{name} f12/f01", ss["f12_over_f01"], e["ratio"], 0.02),
            Check(f"{name} |chi01| (MHz)", ss["chi01_mhz"], e["chi"], e["chi_tol"]),
            Check(f"{name} T_phi (us)", b["tphi"], e["tphi"], 0.01),
            Check(f"{name} tan delta_C", b["tan_delta"], e["tan"], 0.15),
            Check(f"{name} n_th", b["n_th"], e["nth"][0], e["nth"][1], "abs"),
            Check(f"{name} T_res (mK)", b["T_res"], e["tres"][0], e["tres"][1], "abs"),
        ]
    return Outcome([Table("table_s1_derived", ["device", "quantity", "value"], rows)], checks)


TARGETS: dict[str, Callable[[int], Outcome]] = {
    "fig2": fig2,
    "fig3d": fig3d,
    "fig4b": fig4b,
    "s1": s1,
    "s2-curve": s2_curve,
    "table-s1-derived": table_s1_derived,
}

DEFAULT_SEED = 20210
