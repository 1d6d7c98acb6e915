"""Backend selection for the hot loops.

The Cython extension ``pslearn._ckernels`` is used when it was built; the
numpy module ``pslearn._pykernels`` otherwise, or whenever the environment
variable ``PSLEARN_PURE`` is set. Both produce identical integers.

Kernel conventions:

* ``mc_hits`` counts Monte-Carlo successes against a leaf table. Positions
  are integers over a common scale ``U`` (a true value v is ``u / U``);
  leaves of seed s occupy ``seed_start[s]:seed_start[s+1]`` sorted by their
  left end; leaf k's estimator support is ``sup_start[k]:sup_start[k+1]``
  with cumulative weights over ``P``. A trial hits if the chosen support
  point is within ``half`` of ``u``.
* ``ob_estimates`` runs the opportunistic-bisection learner for many
  (point, seed) pairs with every coordinate scaled by ``unit``.
"""

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

BACKEND = "python" if os.environ.get("PSLEARN_PURE") or _ckernels is None else "cython"


def get_backend(name: str | None = None) -> ModuleType:
    name = name or BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def mc_hits(*args, backend=None):
    return get_backend(backend).mc_hits(*args)


def ob_estimates(*args, backend=None):
    return get_backend(backend).ob_estimates(*args)
