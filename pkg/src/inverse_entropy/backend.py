"""Kernel backend selection and system-level dispatch.

The compiled extension (``inverse_entropy._core``) is preferred; the numpy
fallback (``inverse_entropy._kernels_py``) implements the same contract and is
selected when the extension is missing or when ``IEL_BACKEND=python`` is set.

The two entry points used by the estimators are :func:`inverse_depths` and
:func:`forward_depths`; both return, per sample point, the deepest admissible
level (int32, -1 when the level-0 ball already misses).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py
from .systems import (
    METRIC_TORUS_EUCLIDEAN,
    ExpandingCircle,
    FatBaker,
    FullShift,
    System,
    ToralLinear,
    Tsujii,
)

if os.environ.get("IEL_BACKEND", "").lower() == "python":
    _impl = _kernels_py
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py


def backend_name() -> str:
    return getattr(_impl, "BACKEND_NAME", "compiled")


def get_impl(name: str):
    """The active backend module ('compiled'/'python') for benchmarking."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


def _shift_inverse_depths(system: FullShift, anchor_words: np.ndarray,
                          pts: np.ndarray, eps: float) -> np.ndarray:
    # An eps-ball pins the first k symbols.  Any backward branch may copy the
    # anchor's prepended symbols, so membership at every depth reduces to the
    # level-0 constraint: agree with the anchor word on k symbols.
    k = system.required_prefix(eps)
    nmax = anchor_words.shape[0] - 1
    neq = pts[:, :k] != anchor_words[0][:k]
    member = ~neq.any(axis=1)
    return np.where(member, np.int32(nmax), np.int32(-1)).astype(np.int32)


def _shift_forward_depths(system: FullShift, orbit_words: np.ndarray,
                          pts: np.ndarray, eps: float) -> np.ndarray:
    # d(shift^i z, shift^i x) < eps iff z and x agree on i + k symbols, so the
    # maximal depth is (agreement length with the time-0 word) - k.
    k = system.required_prefix(eps)
    nmax = orbit_words.shape[0] - 1
    w = system.word_length
    neq = pts != orbit_words[0]
    agree = np.where(neq.any(axis=1), neq.argmax(axis=1), w)
    return np.clip(agree - k, -1, nmax).astype(np.int32)


def inverse_depths(system: System, anchor_points: np.ndarray,
                   pts: np.ndarray, eps: float) -> np.ndarray:
    """Deepest m with an admissible backward branch eps-shadowing the anchor."""
    if isinstance(system, ToralLinear):
        return _impl.toral_inverse_depths(
            system.inverse_matrix, system.coset_offsets,
            np.ascontiguousarray(anchor_points), np.ascontiguousarray(pts),
            float(eps), system.metric == METRIC_TORUS_EUCLIDEAN)
    if isinstance(system, ExpandingCircle):
        return _impl.circle_inverse_depths(
            system.degree, np.ascontiguousarray(anchor_points.reshape(-1)),
            np.ascontiguousarray(pts.reshape(-1)), float(eps))
    if isinstance(system, FatBaker):
        return _impl.fatbaker_inverse_depths(
            system.beta, np.ascontiguousarray(anchor_points),
            np.ascontiguousarray(pts), float(eps))
    if isinstance(system, Tsujii):
        return _impl.tsujii_inverse_depths(
            system.ell, system.lam, system.cos_coefficients, system.sin_coefficients,
            np.ascontiguousarray(anchor_points), np.ascontiguousarray(pts), float(eps))
    if isinstance(system, FullShift):
        return _shift_inverse_depths(system, anchor_points, pts, eps)
    raise TypeError(f"no inverse-depth kernel for {type(system).__name__}")


def forward_depths(system: System, orbit_points: np.ndarray,
                   pts: np.ndarray, eps: float) -> np.ndarray:
    """Deepest m with the forward orbit of the sample eps-tracking the anchor orbit."""
    if isinstance(system, ToralLinear):
        return _impl.toral_forward_depths(
            np.ascontiguousarray(system.matrix.entries), np.ascontiguousarray(orbit_points),
            np.ascontiguousarray(pts), float(eps),
            system.metric == METRIC_TORUS_EUCLIDEAN)
    if isinstance(system, ExpandingCircle):
        return _impl.circle_forward_depths(
            system.degree, np.ascontiguousarray(orbit_points.reshape(-1)),
            np.ascontiguousarray(pts.reshape(-1)), float(eps))
    if isinstance(system, FatBaker):
        return _impl.fatbaker_forward_depths(
            system.beta, np.ascontiguousarray(orbit_points),
            np.ascontiguousarray(pts), float(eps))
    if isinstance(system, Tsujii):
        return _impl.tsujii_forward_depths(
            system.ell, system.lam, system.cos_coefficients, system.sin_coefficients,
            np.ascontiguousarray(orbit_points), np.ascontiguousarray(pts), float(eps))
    if isinstance(system, FullShift):
        return _shift_forward_depths(system, orbit_points, pts, eps)
    raise TypeError(f"no forward-depth kernel for {type(system).__name__}")
