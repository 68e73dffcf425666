"""Detection-to-ground-truth matching and the object safety score S_obj."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import geometry
from .criticality import encounters, object_criticality
from .params import MetricParams
from .scenario import DetectedBox, Frame, LaneRecord, ObjectState
from .severity import VehicleSeverityModel, severity

# multipliers for the worst, second-worst and remaining objects
HEAD_WEIGHTS = (16.0, 4.0)


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[str, int, float], ...]
    fn_ids: tuple[str, ...]
    fp_indices: tuple[int, ...]

    @property
    def tp(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class WeightedObject:
    id: str
    criticality: float
    severity: float
    weight: float
    missed: bool
    ttc: Optional[float] = None


def iou_threshold(obj: ObjectState, params: MetricParams) -> float:
    return params.iou_threshold_vru if obj.category.is_vru else params.iou_threshold_vehicle


def match(gt: Sequence[ObjectState], det: Sequence[DetectedBox],
          params: MetricParams = MetricParams()) -> MatchResult:
    """Greedy same-class matching by descending IoU.

    Ties go to the lexicographically smaller ground-truth id, then the lower
    detection index, so the result never depends on input order beyond the
    detection indices themselves.
    """
    cand = []
    for o in gt:
        thr = iou_threshold(o, params)
        for j, b in enumerate(det):
            if b.category != o.category:
                continue
            reach = o.radius + 0.5 * math.hypot(b.length, b.width)
            if math.hypot(b.position[0] - o.position[0], b.position[1] - o.position[1]) >= reach:
                continue
            v = geometry.iou(o, b)
            if v >= thr:
                cand.append((-v, o.id, j))
    cand.sort()
    used_gt, used_det, pairs = set(), set(), []
    for neg_v, gid, j in cand:
        if gid in used_gt or j in used_det:
            continue
        used_gt.add(gid)
        used_det.add(j)
        pairs.append((gid, j, -neg_v))
    fn = tuple(o.id for o in gt if o.id not in used_gt)
    fp = tuple(j for j in range(len(det)) if j not in used_det)
    return MatchResult(tuple(pairs), fn, fp)


def weighted_safety(weights: Sequence[float], crits: Sequence[float]) -> float:
    """Ordered weighted score ``1 - sum(m_k w_k) / sum(m_k c_k)``.

    Objects are ranked by weight, largest first (ties by larger criticality),
    and the top two receive multipliers 16 and 4.
    """
    order = sorted(zip(weights, crits), key=lambda wc: (-wc[0], -wc[1]))
    num = den = 0.0
    for k, (w, c) in enumerate(order):
        m = HEAD_WEIGHTS[k] if k < len(HEAD_WEIGHTS) else 1.0
        num += m * w
        den += m * c
    if den <= 0.0:
        return 1.0
    return min(max(1.0 - num / den, 0.0), 1.0)


def weigh_objects(frame: Frame, m: MatchResult, params: MetricParams,
                  model: VehicleSeverityModel) -> list[WeightedObject]:
    missed = set(m.fn_ids)
    out = []
    for o, enc in zip(frame.objects, encounters(frame.ego, list(frame.objects))):
        c = object_criticality(frame.ego, o, params, enc)
        i = severity(frame.ego, o, model, params)
        is_missed = o.id in missed
        out.append(WeightedObject(o.id, c, i, c * i if is_missed else 0.0, is_missed, enc.ttc))
    return out


def object_safety_score(frame: Frame, m: MatchResult, params: MetricParams,
                        model: VehicleSeverityModel) -> tuple[float, list[WeightedObject]]:
    weighted = weigh_objects(frame, m, params, model)
    s = weighted_safety([w.weight for w in weighted], [w.criticality for w in weighted])
    return s, weighted


def missed_objects_in_lane(frame: Frame, m: MatchResult, lane: LaneRecord) -> list[ObjectState]:
    missed = set(m.fn_ids)
    objs = [o for o in frame.objects if o.id in missed]
    if not objs or len(lane.centerline) < 2:
        return []
    d = geometry.distance_to_polyline(np.array([o.position for o in objs]), lane.centerline)
    return [o for o, di in zip(objs, d) if di <= 0.5 * lane.width]
