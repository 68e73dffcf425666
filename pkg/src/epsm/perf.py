"""Conventional detection metrics used as baselines next to the safety score."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from . import geometry, kernels
from .errors import DegenerateInput, EmptyInput


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)


class RateScores(NamedTuple):
    precision: float
    recall: float
    f1: float
    accuracy: float
    # names of the scores whose denominator was empty (reported as 0)
    degenerate: frozenset


class PRPoint(NamedTuple):
    recall: float
    precision: float
    threshold: float = math.nan


def _ratio(num, den, name, flags):
    if den == 0:
        flags.add(name)
        return 0.0
    return num / den


def precision_recall_f1_accuracy(c: ConfusionCounts) -> RateScores:
    flags: set = set()
    p = _ratio(c.tp, c.tp + c.fp, "precision", flags)
    r = _ratio(c.tp, c.tp + c.fn, "recall", flags)
    f1 = _ratio(2.0 * p * r, p + r, "f1", flags)
    a = _ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn, "accuracy", flags)
    return RateScores(p, r, f1, a, frozenset(flags))


def pr_curve(confidences: Sequence[float], is_tp: Sequence[bool], n_gt: int) -> list[PRPoint]:
    """Precision/recall after each detection, most confident first."""
    conf = np.asarray(confidences, dtype=np.float64)
    order = np.argsort(-conf, kind="stable")
    hits = np.asarray(is_tp, dtype=bool)[order]
    tp = np.cumsum(hits)
    fp = np.cumsum(~hits)
    out = []
    for k in range(len(order)):
        rec = tp[k] / n_gt if n_gt > 0 else 0.0
        out.append(PRPoint(float(rec), float(tp[k] / (tp[k] + fp[k])), float(conf[order[k]])))
    return out


def _arrays(curve):
    if not len(curve):
        return np.empty(0), np.empty(0)
    arr = np.asarray([(pt[0], pt[1]) for pt in curve], dtype=np.float64)
    order = np.argsort(arr[:, 0], kind="stable")
    return arr[order, 0], arr[order, 1]


def ap_11point(curve: Sequence[PRPoint]) -> float:
    r, p = _arrays(curve)
    if r.size == 0:
        return 0.0
    total = 0.0
    for k in range(11):
        level = k / 10
        mask = r >= level
        total += p[mask].max() if mask.any() else 0.0
    return total / 11.0


def ap_allpoint(curve: Sequence[PRPoint]) -> float:
    """All-point interpolated AP, with an implicit start at recall 0."""
    r, p = _arrays(curve)
    if r.size == 0:
        return 0.0
    p_interp = np.maximum.accumulate(p[::-1])[::-1]
    r_prev = np.concatenate(([0.0], r[:-1]))
    return float(np.sum((r - r_prev) * p_interp))


def mean_ap(per_class: Mapping[str, float]) -> float:
    if not per_class:
        raise EmptyInput("mean_ap needs at least one class")
    return sum(per_class.values()) / len(per_class)


def moda(misses: Sequence[int], fps: Sequence[int], gts: Sequence[int]) -> float:
    """1 - (misses + false positives) / ground truth, summed over time. May be negative."""
    if not len(misses) == len(fps) == len(gts):
        raise ValueError("misses, fps and gts must have equal length")
    g = sum(gts)
    if g == 0:
        raise DegenerateInput("MODA is undefined without ground-truth objects")
    return 1.0 - (sum(misses) + sum(fps)) / g


class MeanScore(NamedTuple):
    value: float
    degenerate: bool


def modp(ious: Sequence[float]) -> MeanScore:
    if len(ious) == 0:
        return MeanScore(0.0, True)
    return MeanScore(float(sum(ious)) / len(ious), False)


def lane_point_confusion(gt_polyline, det_polyline, threshold: float = 0.5,
                         step: float = geometry.RESAMPLE_STEP) -> ConfusionCounts:
    """Point-level confusion of a detected lane line against ground truth.

    Both lines are resampled every ``step`` metres. A detected point within
    ``threshold`` of some ground-truth point is a TP, otherwise an FP; a
    ground-truth point with no detected point within ``threshold`` is an FN.
    TN counts the cells of a ``step``-sized raster over the joint bounding
    box (grown by ``threshold``) that hold neither kind of point.
    """
    gt = geometry.resample(gt_polyline, step) if gt_polyline is not None and len(gt_polyline) >= 2 else np.empty((0, 2))
    det = geometry.resample(det_polyline, step) if det_polyline is not None and len(det_polyline) >= 2 else np.empty((0, 2))
    if len(gt) == 0 and len(det) == 0:
        return ConfusionCounts()
    if len(det) == 0:
        return ConfusionCounts(fn=len(gt), tn=_raster_tn(gt, threshold, step))
    if len(gt) == 0:
        return ConfusionCounts(fp=len(det), tn=_raster_tn(det, threshold, step))

    det_hit = kernels.nearest_distance(det, gt) <= threshold
    gt_hit = kernels.nearest_distance(gt, det) <= threshold
    tp = int(det_hit.sum())
    return ConfusionCounts(tp=tp, fp=len(det) - tp, fn=int((~gt_hit).sum()),
                           tn=_raster_tn(np.vstack((gt, det)), threshold, step))


def _raster_tn(pts: np.ndarray, margin: float, step: float) -> int:
    lo = pts.min(axis=0) - margin
    hi = pts.max(axis=0) + margin
    shape = np.maximum(np.ceil((hi - lo) / step).astype(int), 1)
    cells = np.minimum(((pts - lo) / step).astype(int), shape - 1)
    occupied = len({(int(i), int(j)) for i, j in cells})
    return int(shape[0] * shape[1]) - occupied
