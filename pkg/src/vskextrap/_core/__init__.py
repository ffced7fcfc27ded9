"""Hot numerical kernels with a compiled fast path.

The Cython extension ``_ccore`` is used when importable; otherwise, or when
the environment variable ``VSKEXTRAP_PURE_PYTHON`` is set to a non-empty
value, the numpy implementations in ``_pycore`` are used. Both expose
``phs_cross``, ``lu_factor``, ``lu_solve`` and ``smo_solve``.
"""
import os

from . import _pycore

try:
    from . import _ccore
except ImportError:  # extension not built
    _ccore = None

BACKENDS = {"python": _pycore}
if _ccore is not None:
    BACKENDS["compiled"] = _ccore

if _ccore is not None and not os.environ.get("VSKEXTRAP_PURE_PYTHON"):
    BACKEND = "compiled"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]
phs_cross = _impl.phs_cross
lu_factor = _impl.lu_factor
lu_solve = _impl.lu_solve
smo_solve = _impl.smo_solve
