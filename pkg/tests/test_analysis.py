import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import least_squares

from fluxkit import BasisConfig
from fluxkit.analysis import (
    SCHEMA_VERSION,
    DecayTrace,
    RBDataset,
    average_traces,
    chi_from_scans,
    covariance,
    cpmg_trend,
    dressed_transitions,
    fit_damped_cosine,
    fit_exponential,
    fit_gaussian_decay,
    fit_hamiltonian,
    fit_lorentzian,
    fit_rb,
    fit_t2_vs_flux,
    fit_trace,
    levenberg_marquardt,
    read_rb,
    read_spectroscopy,
    read_trace,
    rng,
    rng_streams,
    synth_rb,
    synth_spectroscopy,
    synth_trace,
    write_fit_json,
    write_rb,
    write_trace,
)
from fluxkit.analysis.models import lorentzian
from fluxkit.decoherence import t2_from_slopes
from fluxkit.errors import InvalidParameterError, UnidentifiableError
from fluxkit.spectra import flux_derivative

from .conftest import FL3

T_GRID = np.linspace(0, 200, 101)


# --- least squares ------------------------------------------------------------------------


def test_lm_matches_scipy_on_rosenbrock():
    def fun(x):
        return np.array([10 * (x[1] - x[0] ** 2), 1 - x[0]])

    ours = levenberg_marquardt(fun, [-1.2, 1.0])
    ref = least_squares(fun, [-1.2, 1.0], method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    assert ours.converged
    assert np.allclose(ours.x, ref.x, atol=1e-8)
    assert np.allclose(ours.x, [1, 1], atol=1e-8)


def test_lm_linear_problem_and_covariance():
    r = rng(3)
    x = np.linspace(0, 1, 50)
    a = np.column_stack([np.ones_like(x), x])
    y = a @ [0.3, -1.2] + r.normal(0, 0.01, x.size)
    res = levenberg_marquardt(lambda p: a @ p - y, [0.0, 0.0], scale=np.ones(2))
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    assert np.allclose(res.x, coef, atol=1e-10)
    dof = x.size - 2
    s2 = float(res.residuals @ res.residuals) / dof
    assert np.allclose(covariance(res.jac, res.residuals), s2 * np.linalg.inv(a.T @ a), rtol=1e-5)


def test_lm_reports_nonfinite_start():
    res = levenberg_marquardt(lambda p: np.array([np.nan]), [1.0])
    assert not res.converged and "non-finite" in res.message


# --- decay traces ------------------------------------------------------------------------


@pytest.mark.parametrize("model,fit", [("exp", fit_exponential), ("gauss", fit_gaussian_decay)])
def test_decay_noiseless_round_trip(model, fit):
    truth = {"A": 0.8, "B": 0.1, "T": 55.1}
    out = fit(synth_trace(model, truth, T_GRID))
    assert out.converged
    for k, v in truth.items():
        assert out[k] == pytest.approx(v, rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(factor=st.sampled_from([1e-3, 1e-1, 10.0, 1e6]))
def test_decay_scale_invariance(factor):
    base = synth_trace("exp", {"A": 0.8, "B": 0.1, "T": 55.1}, T_GRID, sigma=0.01, seed=5)
    a = fit_exponential(base)
    b = fit_exponential(base.scaled(factor))
    assert b["T"] == pytest.approx(a["T"], rel=1e-9)
    assert b["A"] == pytest.approx(a["A"] * factor, rel=1e-9)


def test_t1_noisy_recovery():
    out = fit_exponential(synth_trace("exp", {"A": 0.8, "B": 0.1, "T": 55.1}, T_GRID, sigma=0.01, seed=11))
    assert out.converged
    assert out["T"] == pytest.approx(55.1, rel=0.03)
    assert 0 < out.stderr["T"] < 3


def test_gaussian_decay_noisy_recovery():
    t = np.linspace(0, 30, 61)
    out = fit_gaussian_decay(synth_trace("gauss", {"A": 0.5, "B": 0.5, "T": 10.0}, t, sigma=0.01, seed=4))
    assert out["T"] == pytest.approx(10.0, rel=0.03)


def test_model_selection_by_residual():
    t = np.linspace(0, 30, 61)
    tr = synth_trace("gauss", {"A": 0.5, "B": 0.5, "T": 10.0}, t, sigma=0.005, seed=8)
    assert fit_gaussian_decay(tr).residual_rms < fit_exponential(tr).residual_rms


def test_constant_trace_is_not_converged():
    out = fit_exponential(DecayTrace(T_GRID, np.full(T_GRID.size, 0.3)))
    assert not out.converged and math.isnan(out["T"])


def test_trace_validation():
    with pytest.raises(InvalidParameterError):
        DecayTrace([0, 1, 2], [1, 2, 3])
    with pytest.raises(InvalidParameterError):
        DecayTrace([0, 1, 1, 2, 3], [1, 2, 3, 4, 5])
    with pytest.raises(InvalidParameterError):
        fit_trace(DecayTrace(T_GRID, T_GRID), "poly")


def test_sigma_weighting_used():
    tr = synth_trace("exp", {"A": 0.8, "B": 0.1, "T": 55.1}, T_GRID, sigma=0.01, seed=2)
    weighted = fit_exponential(DecayTrace(tr.t, tr.y, np.full(tr.t.size, 0.01)))
    assert weighted["T"] == pytest.approx(fit_exponential(tr)["T"], rel=1e-8)
    # absolute sigma: error bars follow the stated noise
    assert weighted.stderr["T"] == pytest.approx(fit_exponential(tr).stderr["T"], rel=0.3)


# --- Ramsey fringes -------------------------------------------------------------------------


def test_ramsey_noiseless_round_trip():
    truth = {"A": 0.45, "B": 0.5, "T": 29.5, "f": 0.25, "phi": 0.4}
    out = fit_damped_cosine(synth_trace("cos", truth, np.linspace(0, 60, 241)))
    for k, v in truth.items():
        assert out[k] == pytest.approx(v, rel=1e-8, abs=1e-10)


def test_ramsey_noisy_recovery():
    truth = {"A": 0.45, "B": 0.5, "T": 29.5, "f": 0.25, "phi": 0.0}
    out = fit_damped_cosine(synth_trace("cos", truth, np.linspace(0, 60, 241), sigma=0.02, seed=7))
    assert out.converged
    assert out["T"] == pytest.approx(29.5, rel=0.04)
    assert out["f"] == pytest.approx(0.25, rel=0.01)


@pytest.mark.parametrize("phi", [-3.0, 2.9, math.pi])
def test_ramsey_phase_normalised(phi):
    truth = {"A": -0.45, "B": 0.5, "T": 29.5, "f": 0.25, "phi": phi}
    out = fit_damped_cosine(synth_trace("cos", truth, np.linspace(0, 60, 241)))
    assert out["A"] > 0 and out["f"] > 0
    assert -math.pi < out["phi"] <= math.pi
    # same curve as the input
    expect = np.angle(np.exp(1j * (phi + math.pi)))
    assert abs(np.angle(np.exp(1j * (out["phi"] - expect)))) < 1e-7


def test_ramsey_needs_eight_points():
    with pytest.raises(InvalidParameterError):
        fit_damped_cosine(DecayTrace(np.arange(7.0), np.sin(np.arange(7.0))))


# --- line shapes and χ ----------------------------------------------------------------------


def test_lorentzian_round_trip_and_kappa():
    x = np.linspace(-3, 3, 121)
    truth = dict(f0=0.2, fwhm=0.391, depth=-0.8, offset=1.0)
    y = lorentzian(x, **truth) + rng(12).normal(0, 0.01, x.size)
    out = fit_lorentzian(x, y)
    assert out["fwhm"] == pytest.approx(0.391, rel=0.02)
    assert out["f0"] == pytest.approx(0.2, abs=0.005)


def test_chi_from_two_lines():
    x = np.linspace(-3, 3, 121)
    r = rng(21)
    y0 = lorentzian(x, 0.695, 0.4, -0.8, 1.0) * (1 + 0.02 * r.normal(size=x.size))
    y1 = lorentzian(x, -0.695, 0.4, -0.8, 1.0) * (1 + 0.02 * r.normal(size=x.size))
    ext = chi_from_scans(x, y0, y1)
    assert ext.chi == pytest.approx(1.39, rel=0.03)


def test_lorentzian_validation():
    with pytest.raises(InvalidParameterError):
        fit_lorentzian(np.arange(6.0), np.ones(6))


# --- randomized benchmarking ----------------------------------------------------------------

M = np.array([1, 2, 4, 8, 16, 32, 64, 128, 256, 512])


def test_rb_noiseless():
    out = fit_rb(synth_rb(0.998, 0.5, 0.45, M, 0.0, 1, seed=0))
    assert out["p"] == pytest.approx(0.998, abs=1e-12)
    assert out["r_cliff"] == pytest.approx(1e-3, rel=1e-8)
    assert out["r_g"] == pytest.approx(1e-3 / 1.833, rel=1e-8)
    assert out["f_g"] == pytest.approx(1 - 1e-3 / 1.833, rel=1e-12)


def test_rb_noisy():
    out = fit_rb(synth_rb(0.998, 0.5, 0.45, M, 0.01, 32, seed=9))
    assert out.converged
    assert out["p"] == pytest.approx(0.998, abs=2e-4)


def test_rb_flat_and_short():
    flat = fit_rb(RBDataset(M, np.full(M.size, 0.97)))
    assert not flat.converged and flat["r_cliff"] == 0.0
    with pytest.raises(InvalidParameterError):
        fit_rb(RBDataset([1, 2, 4], [0.9, 0.8, 0.7]))


def test_synth_rb_deterministic_and_averaged():
    a = synth_rb(0.99, 0.5, 0.45, M, 0.01, 32, seed=4)
    b = synth_rb(0.99, 0.5, 0.45, M, 0.01, 32, seed=4)
    assert np.array_equal(a.f, b.f)
    dev = a.f - (0.5 + 0.45 * 0.99 ** M)
    assert np.all(np.abs(dev) < 3 * 0.01 / math.sqrt(32) * 1.5)
    with pytest.raises(InvalidParameterError):
        synth_rb(1.2, 0.5, 0.45, M, 0.01, 1, seed=1)


def test_rng_requires_seed_and_streams_are_independent():
    with pytest.raises(InvalidParameterError):
        rng(None)
    s1, s2 = rng_streams(7, 2)
    assert not np.array_equal(s1.normal(size=4), s2.normal(size=4))
    assert np.array_equal(rng(7).normal(size=3), rng(7).normal(size=3))


# --- Hamiltonian fit -----------------------------------------------------------------------

TRUTH = dict(e_j=2.50, e_l=1.14, e_c=0.89, f_r=6.4493, g=0.086)


def test_dressed_transitions_near_bare():
    d = dressed_transitions(TRUTH, 0.5)
    assert d["01"] == pytest.approx(1.2516, abs=0.01)
    assert d["resonator"] == pytest.approx(6.4493, abs=0.01)


def test_hamiltonian_fit_recovers_parameters():
    # coarse coverage plus a dense patch around the f02 / resonator crossing pins g
    fluxes = np.concatenate([np.linspace(0.2, 0.5, 7), np.linspace(0.249, 0.2556, 8)])
    pts = synth_spectroscopy(TRUTH, fluxes, sigma_ghz=5e-4, seed=1)
    guess = dict(e_j=2.4, e_l=1.2, e_c=0.85, f_r=6.44, g=0.08)
    out = fit_hamiltonian(pts, guess)
    assert out.converged
    for k, v in TRUTH.items():
        assert out[k] == pytest.approx(v, rel=0.01), k


def test_hamiltonian_fit_validation():
    with pytest.raises(InvalidParameterError):
        fit_hamiltonian([(0.5, 1.25, "01")], dict(e_j=2.5))
    with pytest.raises(InvalidParameterError):
        fit_hamiltonian([(0.5, 1.25, "01")] * 2, TRUTH)


# --- flux-noise trend ------------------------------------------------------------------------

GRID = np.linspace(0.45, 0.5, 11)


@pytest.fixture(scope="module")
def slopes():
    return np.array([flux_derivative(FL3, BasisConfig(), float(f)).value for f in GRID])


def test_t2_vs_flux_noiseless(slopes):
    t2 = t2_from_slopes(slopes, 5.5, 55.1)
    out = fit_t2_vs_flux(zip(GRID, t2), FL3, BasisConfig(), 55.1)
    assert out["a_phi"] == pytest.approx(5.5, rel=1e-8)


def test_t2_vs_flux_noisy(slopes):
    t2 = t2_from_slopes(slopes, 5.5, 55.1) * (1 + 0.10 * rng(2).normal(size=GRID.size))
    out = fit_t2_vs_flux(zip(GRID, t2), FL3, BasisConfig(), 55.1)
    assert out["a_phi"] == pytest.approx(5.5, rel=0.10)


def test_t2_vs_flux_null(slopes):
    # no flux noise: T2 = 2 T1 everywhere (with noise)
    t2 = np.full(GRID.size, 110.2) * (1 + 0.01 * rng(3).normal(size=GRID.size))
    out = fit_t2_vs_flux(zip(GRID, t2), FL3, BasisConfig(), 55.1)
    assert out["a_phi"] < 0.3


def test_t2_vs_flux_ignores_sweet_spot(slopes):
    t2 = t2_from_slopes(slopes, 5.5, 55.1) * (1 + 0.05 * rng(6).normal(size=GRID.size))
    full = fit_t2_vs_flux(zip(GRID, t2), FL3, BasisConfig(), 55.1)
    trimmed = fit_t2_vs_flux(zip(GRID[:-1], t2[:-1]), FL3, BasisConfig(), 55.1)
    assert trimmed["a_phi"] == pytest.approx(full["a_phi"], rel=0.02)


def test_t2_vs_flux_single_bias():
    slope = flux_derivative(FL3, BasisConfig(), 0.47).value
    t2 = float(t2_from_slopes([slope], 5.5, 55.1)[0])
    out = fit_t2_vs_flux([(0.47, t2), (0.4705, t2), (0.4695, t2)], FL3, BasisConfig(), 55.1)
    assert out["a_phi"] == pytest.approx(5.5, rel=0.02)


def test_t2_vs_flux_unidentifiable():
    with pytest.raises(UnidentifiableError):
        fit_t2_vs_flux([(0.5, 100.0), (0.5, 101.0), (0.45, 40.0)], FL3, BasisConfig(), 55.1)


# --- CPMG trend --------------------------------------------------------------------------------


def test_cpmg_constant_and_rising():
    flat = cpmg_trend([(n, 30.0) for n in range(1, 12)])
    assert flat.r == 0.0 and flat.flat and flat.slope == 0.0
    rising = cpmg_trend([(n, 30.0 + 2 * n) for n in range(1, 12)])
    assert rising.slope == pytest.approx(2.0) and rising.r == pytest.approx(1.0) and not rising.flat


def _null_flat_count(seed=123, trials=1000):
    streams = rng_streams(seed, trials)
    n = np.arange(1, 12)
    return sum(cpmg_trend(zip(n, 30.0 * (1 + 0.05 * g.normal(size=n.size)))).flat for g in streams)


def test_cpmg_noise_only_is_mostly_flat():
    # constant T2 with 5% white noise, N = 1..11, 1000 seeded trials
    assert _null_flat_count() >= 950


def test_cpmg_flat_rate_matches_null_distribution():
    # under the null, t = r·sqrt(n-2)/sqrt(1-r²) is Student-t with n-2 dof
    from scipy import stats

    n = 11
    t_cut = 0.5 * math.sqrt(n - 2) / math.sqrt(1 - 0.25)
    p_flat = 1 - 2 * stats.t.sf(t_cut, n - 2)
    sd = math.sqrt(p_flat * (1 - p_flat) / 1000)
    assert abs(_null_flat_count() / 1000 - p_flat) < 3 * sd


def test_cpmg_validation():
    with pytest.raises(InvalidParameterError):
        cpmg_trend([(1, 30), (2, 31)])
    with pytest.raises(InvalidParameterError):
        cpmg_trend([(0, 30), (1, 31), (2, 32)])


# --- IO and averaging -----------------------------------------------------------------------


def test_trace_csv_round_trip():
    tr = synth_trace("exp", {"A": 0.8, "B": 0.1, "T": 55.1}, T_GRID, sigma=0.01, seed=1)
    buf = io.StringIO()
    write_trace(buf, tr)
    buf.seek(0)
    back = read_trace(buf)
    assert np.array_equal(back.t, tr.t) and np.array_equal(back.y, tr.y)


def test_rb_csv_round_trip():
    data = synth_rb(0.99, 0.5, 0.45, M, 0.01, 4, seed=1)
    buf = io.StringIO()
    write_rb(buf, data)
    buf.seek(0)
    assert np.array_equal(read_rb(buf, 4).f, data.f)


def test_csv_errors_carry_line_numbers():
    with pytest.raises(InvalidParameterError, match="line 3"):
        read_trace(io.StringIO("t_us,y\n0,1\n1,abc\n2,3\n"))
    with pytest.raises(InvalidParameterError, match="lacks"):
        read_trace(io.StringIO("time,y\n0,1\n"))
    pts = read_spectroscopy(io.StringIO("flux,f_ghz,transition\n0.5,1.25,01\n"))
    assert pts[0].transition == "01"


def test_fit_json_schema():
    out = fit_exponential(DecayTrace(T_GRID, np.full(T_GRID.size, 0.3)))
    buf = io.StringIO()
    write_fit_json(buf, out, {"source": "unit"})
    doc = json.loads(buf.getvalue())
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["params"]["T"] is None and doc["converged"] is False
    assert doc["source"] == "unit"


def test_average_then_fit():
    traces = [synth_trace("exp", {"A": 0.8, "B": 0.1, "T": 55.1}, T_GRID, sigma=0.03, seed=s) for s in range(8)]
    avg = average_traces(traces)
    assert np.allclose(avg.y, np.mean([t.y for t in traces], axis=0))
    assert fit_exponential(avg)["T"] == pytest.approx(55.1, rel=0.03)
    with pytest.raises(InvalidParameterError):
        average_traces([traces[0], DecayTrace(T_GRID + 1, traces[0].y)])
