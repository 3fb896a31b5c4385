from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidParameterError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class DecayTrace:
    """A measured time trace: ``t`` in µs (strictly increasing), signal ``y``."""

    t: np.ndarray
    y: np.ndarray
    sigma: Optional[np.ndarray] = None
    min_points: int = field(default=5, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if t.ndim != 1 or t.shape != y.shape:
            raise InvalidParameterError("t and y must be 1-D arrays of equal length")
        if t.size < self.min_points:
            raise InvalidParameterError(f"need at least {self.min_points} points, got {t.size}")
        if np.any(np.diff(t) <= 0):
            raise InvalidParameterError("t must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != t.shape or np.any(s <= 0):
                raise InvalidParameterError("sigma must be positive and match t")
            object.__setattr__(self, "sigma", s)

    def scaled(self, factor: float) -> "DecayTrace":
        sigma = None if self.sigma is None else self.sigma * abs(factor)
        return DecayTrace(self.t, self.y * factor, sigma)


def average_traces(traces) -> DecayTrace:
    """Point-wise mean of repeated traces on a common time grid.

    Interleaved loops are analysed by averaging the raw traces first and
    fitting once, rather than averaging per-trace fit results.
    """
    traces = list(traces)
    if not traces:
        raise InvalidParameterError("no traces to average")
    t = traces[0].t
    for tr in traces[1:]:
        if tr.t.shape != t.shape or np.any(tr.t != t):
            raise InvalidParameterError("traces must share a time grid")
    y = np.mean([tr.y for tr in traces], axis=0)
    return DecayTrace(t, y)


@dataclass(frozen=True)
class RBDataset:
    m: np.ndarray
    f: np.ndarray
    n_rand: int = 1

    def __post_init__(self):
        m = np.asarray(self.m)
        f = np.asarray(self.f, dtype=float)
        if m.ndim != 1 or m.shape != f.shape:
            raise InvalidParameterError("m and f must be 1-D arrays of equal length")
        if np.any(m <= 0) or np.any(np.asarray(m) != np.round(m)):
            raise InvalidParameterError("sequence lengths must be positive integers")
        if np.any(np.diff(m) <= 0):
            raise InvalidParameterError("sequence lengths must be strictly increasing")
        if not np.all(np.isfinite(f)):
            raise InvalidParameterError("fidelities must be finite")
        object.__setattr__(self, "m", m.astype(int))
        object.__setattr__(self, "f", f)


@dataclass
class FitResult:
    params: dict
    stderr: dict
    residual_rms: float
    converged: bool
    n_iter: int
    message: str = ""
    model: str = ""

    def __getitem__(self, name):
        return self.params[name]

    def to_json_dict(self) -> dict:
        def num(x):
            x = float(x)
            return x if math.isfinite(x) else None

        return {
            "schema_version": SCHEMA_VERSION,
            "model": self.model,
            "params": {k: num(v) for k, v in self.params.items()},
            "stderr": {k: num(v) for k, v in self.stderr.items()},
            "residual_rms": num(self.residual_rms),
            "converged": bool(self.converged),
            "n_iter": int(self.n_iter),
            "message": self.message,
        }
