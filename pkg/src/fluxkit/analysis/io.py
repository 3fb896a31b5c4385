"""CSV readers for measurement data and the JSON writer for fit results.

CSV headers:
  traces         t_us,y[,sigma]
  RB data        m,fidelity
  spectroscopy   flux,f_ghz,transition
"""
from __future__ import annotations

import csv
import json

import numpy as np

from ..errors import InvalidParameterError
from .hamfit import SpectroscopyPoint
from .types import DecayTrace, FitResult, RBDataset


def _rows(fh, required, optional=()):
    reader = csv.DictReader(fh)
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in required if c not in header]
    if missing:
        raise InvalidParameterError(f"CSV header lacks columns {missing}; found {header}")
    extra = [c for c in header if c not in required and c not in optional]
    if extra:
        raise InvalidParameterError(f"unexpected CSV columns {extra}")
    reader.fieldnames = header
    rows = []
    for row in reader:
        if not any((v or "").strip() for v in row.values()):
            continue
        rows.append((reader.line_num, row))
    return rows


def _float(row, key, line):
    try:
        return float(row[key])
    except (TypeError, ValueError):
        raise InvalidParameterError(f"line {line}: column {key!r} is not a number: {row[key]!r}") from None


def read_trace(fh) -> DecayTrace:
    rows = _rows(fh, ("t_us", "y"), ("sigma",))
    t = [_float(r, "t_us", n) for n, r in rows]
    y = [_float(r, "y", n) for n, r in rows]
    sigma = None
    if rows and "sigma" in rows[0][1]:
        sigma = [_float(r, "sigma", n) for n, r in rows]
    return DecayTrace(np.array(t), np.array(y), None if sigma is None else np.array(sigma))


def write_trace(fh, trace: DecayTrace, fmt=repr) -> None:
    cols = ["t_us", "y"] + (["sigma"] if trace.sigma is not None else [])
    fh.write(",".join(cols) + "\n")
    for i in range(trace.t.size):
        vals = [trace.t[i], trace.y[i]] + ([trace.sigma[i]] if trace.sigma is not None else [])
        fh.write(",".join(fmt(float(v)) for v in vals) + "\n")


def read_rb(fh, n_rand: int = 1) -> RBDataset:
    rows = _rows(fh, ("m", "fidelity"))
    m = []
    for n, r in rows:
        v = _float(r, "m", n)
        if v != int(v):
            raise InvalidParameterError(f"line {n}: sequence length {v} is not an integer")
        m.append(int(v))
    f = [_float(r, "fidelity", n) for n, r in rows]
    return RBDataset(np.array(m), np.array(f), n_rand)


def write_rb(fh, data: RBDataset, fmt=repr) -> None:
    fh.write("m,fidelity\n")
    for m, f in zip(data.m, data.f):
        fh.write(f"{int(m)},{fmt(float(f))}\n")


def read_spectroscopy(fh) -> list:
    rows = _rows(fh, ("flux", "f_ghz", "transition"))
    return [SpectroscopyPoint(_float(r, "flux", n), _float(r, "f_ghz", n), r["transition"].strip()) for n, r in rows]


def write_fit_json(fh, result: FitResult, extra: dict = None) -> None:
    doc = result.to_json_dict()
    if extra:
        doc.update(extra)
    json.dump(doc, fh, indent=2, sort_keys=True)
    fh.write("\n")
