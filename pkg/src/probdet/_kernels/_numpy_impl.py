"""Pure-numpy implementations of the hot kernels.

Semantics must match `_numba_impl` exactly up to floating-point
associativity; the test suite and the benchmark compare the two paths.
"""

from __future__ import annotations

import numpy as np


def nms_keep_mask(boxes: np.ndarray, thr: float) -> np.ndarray:
    """Greedy suppression over boxes already sorted in keep-priority order.

    A later box is dropped when its IoU with any kept box exceeds `thr`
    (strictly).  Zero-area boxes have IoU 0 against everything.
    """
    n = boxes.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    if n == 0:
        return keep
    x1, y1, x2, y2 = boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3]
    areas = np.maximum(0.0, x2 - x1) * np.maximum(0.0, y2 - y1)
    alive = np.ones(n, dtype=np.bool_)
    for i in range(n):
        if not alive[i]:
            continue
        keep[i] = True
        rest = np.nonzero(alive[i + 1:])[0] + i + 1
        if rest.size == 0:
            continue
        iw = np.minimum(x2[i], x2[rest]) - np.maximum(x1[i], x1[rest])
        ih = np.minimum(y2[i], y2[rest]) - np.maximum(y1[i], y1[rest])
        inter = np.maximum(0.0, iw) * np.maximum(0.0, ih)
        union = areas[i] + areas[rest] - inter
        iou = np.where(union > 0.0, inter / np.where(union > 0.0, union, 1.0), 0.0)
        alive[rest[iou > thr]] = False
    return keep


def greedy_match(det_boxes: np.ndarray, gt_boxes: np.ndarray, thr: float) -> np.ndarray:
    """Match detections (in priority order) to ground truths, greedily.

    Each detection takes the unmatched ground truth with the highest IoU,
    provided that IoU >= thr; ties go to the lower ground-truth index.
    Returns the matched index per detection, -1 for unmatched.
    """
    d = det_boxes.shape[0]
    g = gt_boxes.shape[0]
    out = np.full(d, -1, dtype=np.int64)
    if d == 0 or g == 0:
        return out
    gx1, gy1, gx2, gy2 = gt_boxes[:, 0], gt_boxes[:, 1], gt_boxes[:, 2], gt_boxes[:, 3]
    gareas = np.maximum(0.0, gx2 - gx1) * np.maximum(0.0, gy2 - gy1)
    taken = np.zeros(g, dtype=np.bool_)
    for i in range(d):
        bx1, by1, bx2, by2 = det_boxes[i]
        area = max(0.0, bx2 - bx1) * max(0.0, by2 - by1)
        iw = np.minimum(bx2, gx2) - np.maximum(bx1, gx1)
        ih = np.minimum(by2, gy2) - np.maximum(by1, gy1)
        inter = np.maximum(0.0, iw) * np.maximum(0.0, ih)
        union = area + gareas - inter
        iou = np.where(union > 0.0, inter / np.where(union > 0.0, union, 1.0), 0.0)
        iou = np.where(taken, -1.0, iou)
        j = int(np.argmax(iou))
        if iou[j] >= thr:
            out[i] = j
            taken[j] = True
    return out


def render_features(
    hc: int,
    wc: int,
    stride: float,
    boxes: np.ndarray,
    sigs: np.ndarray,
    ray_len: float,
    window_half: float,
) -> np.ndarray:
    """Rasterize per-cell feature statistics for one pyramid level.

    Channel layout, with S = sigs.shape[1]:
      [0:S]    cell-coverage-weighted mean of object signatures
      [S]      cell coverage fraction
      [S+1:S+5] capped distances to the enclosing object's four sides
                (left, top, right, bottom), normalized by ray_len
      [S+5]    object coverage of the window around the cell
      [S+6:S+8] coverage centroid offset within the window, in [-1, 1]
    """
    s = sigs.shape[1]
    out = np.zeros((hc, wc, s + 8), dtype=np.float64)
    m = boxes.shape[0]
    cx = (np.arange(wc, dtype=np.float64) + 0.5) * stride
    cy = (np.arange(hc, dtype=np.float64) + 0.5) * stride
    if m == 0:
        return out

    ex = np.arange(wc + 1, dtype=np.float64) * stride
    ey = np.arange(hc + 1, dtype=np.float64) * stride
    cell_area = stride * stride
    warea = (2.0 * window_half) ** 2

    owner = np.full((hc, wc), -1, dtype=np.int64)
    wcov_num = np.zeros((hc, wc), dtype=np.float64)
    mx_num = np.zeros((hc, wc), dtype=np.float64)
    my_num = np.zeros((hc, wc), dtype=np.float64)

    for k in range(m):
        bx1, by1, bx2, by2 = boxes[k]
        # cell-box overlap, per axis then outer product
        ox = np.maximum(0.0, np.minimum(ex[1:], bx2) - np.maximum(ex[:-1], bx1))
        oy = np.maximum(0.0, np.minimum(ey[1:], by2) - np.maximum(ey[:-1], by1))
        frac = np.outer(oy, ox) / cell_area
        out[:, :, :s] += frac[:, :, None] * sigs[k]
        out[:, :, s] += frac

        # first containing object wins the boundary rays
        inside = (
            (cx[None, :] >= bx1)
            & (cx[None, :] <= bx2)
            & (cy[:, None] >= by1)
            & (cy[:, None] <= by2)
        )
        claim = inside & (owner < 0)
        owner[claim] = k

        # window overlap and first moments
        wx1 = np.maximum(cx - window_half, bx1)
        wx2 = np.minimum(cx + window_half, bx2)
        wy1 = np.maximum(cy - window_half, by1)
        wy2 = np.minimum(cy + window_half, by2)
        owx = np.maximum(0.0, wx2 - wx1)
        owy = np.maximum(0.0, wy2 - wy1)
        a = np.outer(owy, owx)
        wcov_num += a
        rcx = np.where(owx > 0.0, 0.5 * (wx1 + wx2), 0.0)
        rcy = np.where(owy > 0.0, 0.5 * (wy1 + wy2), 0.0)
        mx_num += a * (rcx - cx)[None, :]
        my_num += a * (rcy - cy)[:, None]

    has = owner >= 0
    own = np.where(has, owner, 0)
    out[:, :, s + 1] = np.where(has, np.minimum(cx[None, :] - boxes[own, 0], ray_len), 0.0) / ray_len
    out[:, :, s + 2] = np.where(has, np.minimum(cy[:, None] - boxes[own, 1], ray_len), 0.0) / ray_len
    out[:, :, s + 3] = np.where(has, np.minimum(boxes[own, 2] - cx[None, :], ray_len), 0.0) / ray_len
    out[:, :, s + 4] = np.where(has, np.minimum(boxes[own, 3] - cy[:, None], ray_len), 0.0) / ray_len

    out[:, :, s + 5] = wcov_num / warea
    covered = wcov_num > 0.0
    denom = np.where(covered, wcov_num * window_half, 1.0)
    out[:, :, s + 6] = np.where(covered, mx_num / denom, 0.0)
    out[:, :, s + 7] = np.where(covered, my_num / denom, 0.0)
    return out


def pool_cell_means(feat: np.ndarray, boxes: np.ndarray, stride: float) -> tuple[np.ndarray, np.ndarray]:
    """Mean feature over cells whose centers fall inside each box.

    Returns (means, counts); rows with count 0 are left at zero and the
    caller applies its fallback.
    """
    h, w, f = feat.shape
    p = boxes.shape[0]
    means = np.zeros((p, f), dtype=np.float64)
    counts = np.zeros(p, dtype=np.int64)
    for i in range(p):
        x1, y1, x2, y2 = boxes[i]
        j0 = max(0, int(np.ceil(x1 / stride - 0.5)))
        j1 = min(w - 1, int(np.floor(x2 / stride - 0.5)))
        i0 = max(0, int(np.ceil(y1 / stride - 0.5)))
        i1 = min(h - 1, int(np.floor(y2 / stride - 0.5)))
        if j0 > j1 or i0 > i1:
            continue
        n = (j1 - j0 + 1) * (i1 - i0 + 1)
        counts[i] = n
        means[i] = feat[i0 : i1 + 1, j0 : j1 + 1].sum(axis=(0, 1)) / n
    return means, counts
