"""INI device configuration with unit-suffixed keys.

Every key names its unit (``ej_ghz``, ``kappa_mhz``, ``temp_qubit_k`` ...).
Unknown sections and keys are rejected with their line and column.
"""
from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from ..core import BasisConfig, CouplingSpec, FluxoniumParams, ResonatorParams, TransmonParams
from ..decoherence import NoiseEnvironment
from ..errors import ConfigError, InvalidParameterError

# section -> key -> converter
SCHEMA = {
    "device": {"name": str},
    "fluxonium": {"ej_ghz": float, "el_ghz": float, "ec_ghz": float, "flux": float},
    "resonator": {"fr_ghz": float, "kappa_mhz": float, "lr_nh": float, "cr_ff": float},
    "coupling": {"g_mhz": float, "cqr_ff": float, "csigma_ff": float, "cr_ff": float},
    "noise": {
        "temp_qubit_k": float,
        "temp_res_k": float,
        "nth": float,
        "a_phi_uphi0": float,
        "tan_delta": float,
    },
    "basis": {"n_osc": int, "n_flux_keep": int, "n_res": int, "n_charge": int},
    "measured": {
        "t1_us": float,
        "t1_err_us": float,
        "t2e_us": float,
        "t2e_err_us": float,
        "t1_max_us": float,
        "t2e_max_us": float,
        "chi01_mhz": float,
    },
    "transmon": {"ej_ghz": float, "ec_ghz": float, "ng": float},
}

REQUIRED = {
    "fluxonium": ("ej_ghz", "el_ghz", "ec_ghz"),
    "resonator": ("fr_ghz",),
    "transmon": ("ej_ghz", "ec_ghz"),
}

FIXTURES = ("fluxonium3", "fluxonium4", "transmon")


@dataclass(frozen=True)
class DeviceConfig:
    name: str
    basis: BasisConfig
    fluxonium: Optional[FluxoniumParams] = None
    resonator: Optional[ResonatorParams] = None
    coupling: Optional[CouplingSpec] = None
    noise: NoiseEnvironment = NoiseEnvironment()
    transmon: Optional[TransmonParams] = None
    measured: dict = field(default_factory=dict)

    def need(self, *parts: str):
        missing = [p for p in parts if getattr(self, p) is None]
        if missing:
            raise ConfigError(f"configuration {self.name!r} lacks section(s) {missing}")
        return tuple(getattr(self, p) for p in parts)


def _locate(text: str):
    """Map (section, key) -> (line, column of value) and section -> header line."""
    where, headers = {}, {}
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            headers[section] = lineno
            continue
        m = re.match(r"(\s*)([^=:#;\s][^=:]*?)\s*[=:]\s*", line)
        if m and section is not None:
            where[(section, m.group(2).strip().lower())] = (lineno, m.end() + 1)
    return where, headers


def parse_config(text: str, source: str = "<config>") -> DeviceConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"cannot parse {source}", lineno, 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno, 1) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno, 1) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", exc.lineno, 1) from None
    where, headers = _locate(text)

    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", headers.get(section), 1)
        values[section] = {}
        for key, raw in parser.items(section):
            line, col = where.get((section, key), (None, None))
            conv = SCHEMA[section].get(key)
            if conv is None:
                raise ConfigError(f"unknown key {key!r} in [{section}]", line, 1)
            try:
                values[section][key] = conv(raw)
            except ValueError:
                raise ConfigError(f"{key} = {raw!r} is not a valid {conv.__name__}", line, col) from None
    for section, keys in REQUIRED.items():
        if section in values:
            lacking = [k for k in keys if k not in values[section]]
            if lacking:
                raise ConfigError(f"[{section}] lacks {lacking}", headers.get(section), 1)
    try:
        return _build(values, source)
    except InvalidParameterError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _build(v: dict, source: str) -> DeviceConfig:
    name = v.get("device", {}).get("name", os.path.splitext(os.path.basename(source))[0])
    basis = BasisConfig(**v.get("basis", {}))
    fl = v.get("fluxonium")
    fluxonium = None
    if fl is not None:
        fluxonium = FluxoniumParams(fl["ej_ghz"], fl["el_ghz"], fl["ec_ghz"], fl.get("flux", 0.5))
    r = v.get("resonator")
    resonator = None
    if r is not None:
        resonator = ResonatorParams(r["fr_ghz"], r.get("kappa_mhz", 0.0), r.get("lr_nh"), r.get("cr_ff"))
    c = v.get("coupling")
    coupling = None
    if c is not None:
        coupling = CouplingSpec(c.get("g_mhz"), c.get("cqr_ff"), c.get("csigma_ff"), c.get("cr_ff"))
    n = v.get("noise", {})
    noise = NoiseEnvironment(
        temp_qubit=n.get("temp_qubit_k", 0.020),
        temp_res=n.get("temp_res_k"),
        n_th=n.get("nth"),
        a_phi=n.get("a_phi_uphi0", 0.0),
        tan_delta=n.get("tan_delta", 0.0),
    )
    t = v.get("transmon")
    transmon = None if t is None else TransmonParams(t["ej_ghz"], t["ec_ghz"], t.get("ng", 0.0))
    return DeviceConfig(name, basis, fluxonium, resonator, coupling, noise, transmon, dict(v.get("measured", {})))


def load_config(path: str) -> DeviceConfig:
    """Read a config file; a bare fixture name (e.g. ``fluxonium3``) loads the shipped copy."""
    if not os.path.exists(path) and path in FIXTURES:
        return load_fixture(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, path)


def load_fixture(name: str) -> DeviceConfig:
    text = resources.files("fluxkit").joinpath("fixtures", f"{name}.cfg").read_text(encoding="utf-8")
    return parse_config(text, f"{name}.cfg")
