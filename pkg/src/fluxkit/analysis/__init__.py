"""Curve fitting for decay traces, spectroscopy, RB and coherence trends."""
from .fits import (
    CLIFFORD_GATE_RATIO,
    ChiExtraction,
    chi_from_scans,
    fit_damped_cosine,
    fit_exponential,
    fit_gaussian_decay,
    fit_lorentzian,
    fit_rb,
    fit_trace,
)
from .hamfit import (
    SpectroscopyPoint,
    dressed_transitions,
    fit_hamiltonian,
    model_frequencies,
    synth_spectroscopy,
)
from .io import read_rb, read_spectroscopy, read_trace, write_fit_json, write_rb, write_trace
from .lm import LMResult, covariance, levenberg_marquardt
from .models import MODELS
from .synth import rng, rng_streams, synth_rb, synth_trace
from .trends import CPMGTrend, cpmg_trend, fit_t2_vs_flux
from .types import SCHEMA_VERSION, DecayTrace, FitResult, RBDataset, average_traces

__all__ = [
    "CLIFFORD_GATE_RATIO",
    "CPMGTrend",
    "ChiExtraction",
    "DecayTrace",
    "FitResult",
    "LMResult",
    "MODELS",
    "RBDataset",
    "SCHEMA_VERSION",
    "SpectroscopyPoint",
    "average_traces",
    "chi_from_scans",
    "covariance",
    "cpmg_trend",
    "dressed_transitions",
    "fit_damped_cosine",
    "fit_exponential",
    "fit_gaussian_decay",
    "fit_hamiltonian",
    "fit_lorentzian",
    "fit_rb",
    "fit_t2_vs_flux",
    "fit_trace",
    "levenberg_marquardt",
    "model_frequencies",
    "read_rb",
    "read_spectroscopy",
    "read_trace",
    "rng",
    "rng_streams",
    "synth_rb",
    "synth_spectroscopy",
    "synth_trace",
    "write_fit_json",
    "write_rb",
    "write_trace",
]
