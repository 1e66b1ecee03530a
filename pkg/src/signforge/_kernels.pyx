# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: peak picking, 1-D suppression, detection matching.

Behaviour matches `_kernels_py` exactly (including tie-breaks); the test
suite cross-checks the two on random inputs.
"""

import numpy as np


def first_argmax(double[::1] values):
    """Index and value of the maximum; earliest index wins ties."""
    cdef Py_ssize_t i, best = 0
    cdef double v, best_v = values[0]
    for i in range(1, values.shape[0]):
        v = values[i]
        if v > best_v:
            best_v = v
            best = i
    return best, best_v


def nms_keep(double[::1] peak_times, double min_gap):
    """Greedy 1-D suppression over peaks given in rank order."""
    cdef Py_ssize_t n = peak_times.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] keep = out
    kept_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] kept = kept_arr
    cdef Py_ssize_t i, j, n_kept = 0
    cdef double t, d
    cdef bint ok
    for i in range(n):
        t = peak_times[i]
        ok = True
        for j in range(n_kept):
            d = t - kept[j]
            if d < 0:
                d = -d
            if d < min_gap:
                ok = False
                break
        if ok:
            keep[i] = 1
            kept[n_kept] = t
            n_kept += 1
    return out


def greedy_match(
    double[::1] det_starts,
    double[::1] det_ends,
    double[::1] gt_starts,
    double[::1] gt_ends,
    double iou_threshold,
):
    """Match ranked detections to ground-truth intervals, one-to-one."""
    cdef Py_ssize_t n_det = det_starts.shape[0]
    cdef Py_ssize_t n_gt = gt_starts.shape[0]
    out = np.full(n_det, -1, dtype=np.int64)
    cdef long long[::1] matched = out
    taken_arr = np.zeros(n_gt, dtype=np.uint8)
    cdef unsigned char[::1] taken = taken_arr
    cdef Py_ssize_t i, j, best_j
    cdef double inter, union, v, best_iou
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
            taken[best_j] = 1
    return out
