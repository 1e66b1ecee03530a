"""Pure-Python/numpy implementations of the hot kernels.

Mirrors `_kernels.pyx`; selected at import time by `signforge.kernels`
when the compiled extension is unavailable.
"""

from __future__ import annotations

import numpy as np


def first_argmax(values: np.ndarray) -> tuple[int, float]:
    """Index and value of the maximum; earliest index wins ties."""
    k = int(np.argmax(values))
    return k, float(values[k])


def nms_keep(peak_times: np.ndarray, min_gap: float) -> np.ndarray:
    """Greedy 1-D suppression over peaks given in rank order.

    A peak is kept iff it lies at least `min_gap` from every already-kept
    peak. Returns a uint8 mask aligned with the input.
    """
    n = len(peak_times)
    keep = np.zeros(n, dtype=np.uint8)
    kept: list[float] = []
    for i in range(n):
        t = peak_times[i]
        if all(abs(t - k) >= min_gap for k in kept):
            keep[i] = 1
            kept.append(t)
    return keep


def greedy_match(
    det_starts: np.ndarray,
    det_ends: np.ndarray,
    gt_starts: np.ndarray,
    gt_ends: np.ndarray,
    iou_threshold: float,
) -> np.ndarray:
    """Match ranked detections to ground-truth intervals, one-to-one.

    Each detection takes the unmatched ground-truth interval of highest IoU
    (lowest index on ties) and consumes it only when the IoU strictly
    exceeds `iou_threshold`. Returns the matched index per detection, -1
    for unmatched.
    """
    n_det = len(det_starts)
    n_gt = len(gt_starts)
    matched = np.full(n_det, -1, dtype=np.int64)
    taken = np.zeros(n_gt, dtype=bool)
    for i in range(n_det):
        best_iou = 0.0
        best_j = -1
        for j in range(n_gt):
            if taken[j]:
                continue
            inter = min(det_ends[i], gt_ends[j]) - max(det_starts[i], gt_starts[j])
            if inter <= 0:
                continue
            union = max(det_ends[i], gt_ends[j]) - min(det_starts[i], gt_starts[j])
            v = inter / union
            if v > best_iou:
                best_iou = v
                best_j = j
        if best_j >= 0 and best_iou > iou_threshold:
            matched[i] = best_j
            taken[best_j] = True
    return matched
