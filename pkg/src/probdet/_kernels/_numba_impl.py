"""Numba versions of the hot kernels.

Same contracts as `_numpy_impl`; written as explicit loops so @njit can
compile them.  Kept single-threaded: every caller relies on a fixed
accumulation order for bit-reproducible runs.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _iou_single(ax1, ay1, ax2, ay2, bx1, by1, bx2, by2):
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    area_a = max(0.0, ax2 - ax1) * max(0.0, ay2 - ay1)
    area_b = max(0.0, bx2 - bx1) * max(0.0, by2 - by1)
    union = area_a + area_b - inter
    if union <= 0.0:
        return 0.0
    return inter / union


@njit(cache=True)
def nms_keep_mask(boxes, thr):
    n = boxes.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    alive = np.ones(n, dtype=np.bool_)
    for i in range(n):
        if not alive[i]:
            continue
        keep[i] = True
        for j in range(i + 1, n):
            if not alive[j]:
                continue
            iou = _iou_single(
                boxes[i, 0], boxes[i, 1], boxes[i, 2], boxes[i, 3],
                boxes[j, 0], boxes[j, 1], boxes[j, 2], boxes[j, 3],
            )
            if iou > thr:
                alive[j] = False
    return keep


@njit(cache=True)
def greedy_match(det_boxes, gt_boxes, thr):
    d = det_boxes.shape[0]
    g = gt_boxes.shape[0]
    out = np.full(d, -1, dtype=np.int64)
    taken = np.zeros(g, dtype=np.bool_)
    for i in range(d):
        best = -1
        best_iou = -1.0
        for j in range(g):
            if taken[j]:
                continue
            iou = _iou_single(
                det_boxes[i, 0], det_boxes[i, 1], det_boxes[i, 2], det_boxes[i, 3],
                gt_boxes[j, 0], gt_boxes[j, 1], gt_boxes[j, 2], gt_boxes[j, 3],
            )
            if iou > best_iou:
                best_iou = iou
                best = j
        if best >= 0 and best_iou >= thr:
            out[i] = best
            taken[best] = True
    return out


@njit(cache=True)
def render_features(hc, wc, stride, boxes, sigs, ray_len, window_half):
    s = sigs.shape[1]
    out = np.zeros((hc, wc, s + 8), dtype=np.float64)
    m = boxes.shape[0]
    if m == 0:
        return out
    cell_area = stride * stride
    warea = (2.0 * window_half) ** 2
    for iy in range(hc):
        cy = (iy + 0.5) * stride
        y1c = iy * stride
        y2c = y1c + stride
        for ix in range(wc):
            cx = (ix + 0.5) * stride
            x1c = ix * stride
            x2c = x1c + stride
            owner = -1
            wcov = 0.0
            mx = 0.0
            my = 0.0
            for k in range(m):
                bx1 = boxes[k, 0]
                by1 = boxes[k, 1]
                bx2 = boxes[k, 2]
                by2 = boxes[k, 3]
                ox = min(x2c, bx2) - max(x1c, bx1)
                oy = min(y2c, by2) - max(y1c, by1)
                if ox > 0.0 and oy > 0.0:
                    frac = ox * oy / cell_area
                    for c in range(s):
                        out[iy, ix, c] += frac * sigs[k, c]
                    out[iy, ix, s] += frac
                if owner < 0 and bx1 <= cx <= bx2 and by1 <= cy <= by2:
                    owner = k
                wx1 = max(cx - window_half, bx1)
                wx2 = min(cx + window_half, bx2)
                wy1 = max(cy - window_half, by1)
                wy2 = min(cy + window_half, by2)
                owx = wx2 - wx1
                owy = wy2 - wy1
                if owx > 0.0 and owy > 0.0:
                    a = owx * owy
                    wcov += a
                    mx += a * (0.5 * (wx1 + wx2) - cx)
                    my += a * (0.5 * (wy1 + wy2) - cy)
            if owner >= 0:
                out[iy, ix, s + 1] = min(cx - boxes[owner, 0], ray_len) / ray_len
                out[iy, ix, s + 2] = min(cy - boxes[owner, 1], ray_len) / ray_len
                out[iy, ix, s + 3] = min(boxes[owner, 2] - cx, ray_len) / ray_len
                out[iy, ix, s + 4] = min(boxes[owner, 3] - cy, ray_len) / ray_len
            out[iy, ix, s + 5] = wcov / warea
            if wcov > 0.0:
                out[iy, ix, s + 6] = mx / (wcov * window_half)
                out[iy, ix, s + 7] = my / (wcov * window_half)
    return out


@njit(cache=True)
def pool_cell_means(feat, boxes, stride):
    h, w, f = feat.shape
    p = boxes.shape[0]
    means = np.zeros((p, f), dtype=np.float64)
    counts = np.zeros(p, dtype=np.int64)
    for i in range(p):
        x1 = boxes[i, 0]
        y1 = boxes[i, 1]
        x2 = boxes[i, 2]
        y2 = boxes[i, 3]
        j0 = max(0, int(math.ceil(x1 / stride - 0.5)))
        j1 = min(w - 1, int(math.floor(x2 / stride - 0.5)))
        i0 = max(0, int(math.ceil(y1 / stride - 0.5)))
        i1 = min(h - 1, int(math.floor(y2 / stride - 0.5)))
        if j0 > j1 or i0 > i1:
            continue
        n = (j1 - j0 + 1) * (i1 - i0 + 1)
        counts[i] = n
        for iy in range(i0, i1 + 1):
            for jx in range(j0, j1 + 1):
                for c in range(f):
                    means[i, c] += feat[iy, jx, c]
        for c in range(f):
            means[i, c] /= n
    return means, counts
