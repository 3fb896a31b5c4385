"""Seeded synthetic data used as oracles for the fitters.

All noise is additive Gaussian drawn from counter-based Philox streams, so a
given seed reproduces bit-identical data on every platform numpy supports.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import InvalidParameterError
from .models import MODELS
from .types import DecayTrace, RBDataset


def rng(seed: int) -> np.random.Generator:
    if seed is None:
        raise InvalidParameterError("a seed is mandatory for synthetic data")
    return np.random.Generator(np.random.Philox(seed))


def rng_streams(seed: int, n: int) -> list:
    """Independent generators for ``n`` parallel tasks derived from one root seed."""
    if seed is None:
        raise InvalidParameterError("a seed is mandatory for synthetic data")
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def synth_trace(model: str, params: dict, t: Sequence[float], sigma: float = 0.0, seed: int = 0) -> DecayTrace:
    """Evaluate one of the decay/line-shape models on ``t`` and add Gaussian noise."""
    fn, names = MODELS[model]
    t = np.asarray(t, dtype=float)
    y = fn(t, *[params[n] for n in names])
    if sigma > 0:
        y = y + rng(seed).normal(0.0, sigma, size=t.shape)
    return DecayTrace(t, y)


def synth_rb(
    p: float,
    a: float,
    b: float,
    m: Sequence[int],
    sigma: float,
    n_rand: int,
    seed: int,
) -> RBDataset:
    """Mean of ``n_rand`` noisy draws of A + B p^m at each sequence length."""
    if not 0 < p <= 1:
        raise InvalidParameterError("p must lie in (0, 1]")
    if n_rand < 1:
        raise InvalidParameterError("n_rand must be >= 1")
    m = np.asarray(m, dtype=int)
    model = a + b * np.power(p, m.astype(float))
    if sigma > 0:
        draws = rng(seed).normal(0.0, sigma, size=(m.size, n_rand))
        f = model + draws.mean(axis=1)
    else:
        f = model.copy()
    return RBDataset(m, f, n_rand)
