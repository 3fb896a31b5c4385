"""Modeling and analysis toolkit for fluxonium circuit-QED devices."""
from .core import (
    BasisConfig,
    CouplingSpec,
    FluxoniumParams,
    Operator,
    ResonatorParams,
    TransmonParams,
)

__version__ = "0.1.0"

__all__ = [
    "BasisConfig",
    "CouplingSpec",
    "FluxoniumParams",
    "Operator",
    "ResonatorParams",
    "TransmonParams",
]
