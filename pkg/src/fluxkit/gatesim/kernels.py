"""Select the RK4 propagator: the compiled extension when built, numpy otherwise."""
from . import _rk4_py

try:
    from . import _rk4 as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _rk4_py.propagate}
if _compiled is not None:
    BACKENDS["cython"] = _compiled.propagate

BACKEND = "cython" if _compiled is not None else "python"


def get_propagator(backend=None):
    """Return the propagate function for ``backend`` (default: fastest available)."""
    name = backend or BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; have {sorted(BACKENDS)}") from None
