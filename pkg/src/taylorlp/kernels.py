"""Backend selection for the numerical hot loops.

The compiled Cython module is preferred. Setting ``TAYLORLP_PURE_PYTHON=1``
forces the reference implementation, which is also used when the extension
was not built.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("TAYLORLP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python") or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def group_demean(values, codes, n_groups):
    return _impl.group_demean(values, codes, n_groups)


def cluster_score_sums(scores, codes, n_clusters):
    return _impl.cluster_score_sums(scores, codes, n_clusters)


def shift_index(codes, years, k):
    return _impl.shift_index(codes, years, k)
