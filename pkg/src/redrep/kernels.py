"""Backend selection for the numeric inner loops.

The numba path is used unless ``REDREP_DISABLE_NUMBA`` is set to a truthy
value or numba cannot be imported; the pure-numpy path computes the same
quantities and is what the numba kernels are tested against.
"""

import os

from . import _kernels_np as numpy_backend

_FLAG = os.environ.get("REDREP_DISABLE_NUMBA", "").strip().lower()

numba_backend = None
if _FLAG not in ("1", "true", "yes", "on"):
    try:
        from . import _kernels_nb as numba_backend
    except ImportError:  # pragma: no cover - numba missing
        numba_backend = None

active = numba_backend if numba_backend is not None else numpy_backend
BACKEND = "numba" if active is numba_backend else "numpy"


def get_backend(name=None):
    """Kernel module by name (``"numba"``/``"numpy"``), default the active one."""
    if name is None:
        return active
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        if numba_backend is None:
            raise RuntimeError("numba backend unavailable")
        return numba_backend
    raise ValueError(f"unknown backend {name!r}")


emissions = active.emissions
forward = active.forward
backward = active.backward
viterbi = active.viterbi
sequence_score = active.sequence_score
crf_accumulate = active.crf_accumulate
crf_marginals = active.crf_marginals
logreg_accumulate = active.logreg_accumulate
softmax_rows = active.softmax_rows
logsumexp = numpy_backend.logsumexp
