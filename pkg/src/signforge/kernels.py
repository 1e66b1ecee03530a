"""Kernel backend selection: compiled extension when built, numpy fallback otherwise.

`BACKEND` names the active implementation; `backends()` enumerates the
available ones (used by the cross-check tests and the benchmark).
"""

from __future__ import annotations

import numpy as np

from signforge import _kernels_py

try:
    from signforge import _kernels  # type: ignore[attr-defined]

    _impl = _kernels
    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build
    _impl = _kernels_py
    BACKEND = "python"


def backends() -> dict[str, object]:
    """Name -> module for every importable kernel implementation."""
    out: dict[str, object] = {"python": _kernels_py}
    if BACKEND == "cython":
        out["cython"] = _impl
    return out


def _f64(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def first_argmax(values) -> tuple[int, float]:
    return _impl.first_argmax(_f64(values))


def nms_keep(peak_times, min_gap: float) -> np.ndarray:
    return _impl.nms_keep(_f64(peak_times), float(min_gap))


def greedy_match(det_starts, det_ends, gt_starts, gt_ends, iou_threshold: float) -> np.ndarray:
    return _impl.greedy_match(
        _f64(det_starts), _f64(det_ends), _f64(gt_starts), _f64(gt_ends), float(iou_threshold)
    )
