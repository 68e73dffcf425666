"""Per-frame and per-scenario evaluation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import geometry, perf
from .combiner import MissLocation, SafetyBreakdown, classify_tree_case, final_safety
from .lane_safety import LaneSafetyBreakdown, evaluate_lane
from .object_safety import (MatchResult, WeightedObject, match, missed_objects_in_lane,
                            object_safety_score)
from .params import MetricParams, SensorConfig
from .scenario import Frame, LaneMap, LaneRecord, LaneRelation, ObjectState, Scenario
from .sensor import simulate_scenario
from .severity import VehicleSeverityModel


@dataclass(frozen=True)
class FrameResult:
    scenario_id: str
    index: int
    t: float
    n_gt: int
    matches: MatchResult
    obj_scores: perf.RateScores
    modp: perf.MeanScore
    lane_counts: perf.ConfusionCounts
    lane_scores: perf.RateScores
    lane: LaneSafetyBreakdown
    weighted: tuple[WeightedObject, ...]
    safety: SafetyBreakdown
    # (class, confidence, is_tp) for every in-range detection
    detections: tuple[tuple[str, float, bool], ...] = ()
    gt_classes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScenarioResult:
    scenario_id: str
    frames: tuple[FrameResult, ...]
    moda_cumulative: tuple[float, ...]
    ap_allpoint: dict = field(default_factory=dict)
    ap_11point: dict = field(default_factory=dict)

    @property
    def min_s_f(self) -> float:
        return min(f.safety.s_f for f in self.frames) if self.frames else math.nan

    @property
    def moda(self) -> float:
        return self.moda_cumulative[-1] if self.moda_cumulative else math.nan


def in_range(ego: ObjectState, position, reach: float) -> bool:
    return math.hypot(position[0] - ego.position[0], position[1] - ego.position[1]) <= reach


def _inside(obj: ObjectState, lane: LaneRecord) -> bool:
    d = geometry.distance_to_polyline([obj.position], lane.centerline)[0]
    return d <= 0.5 * lane.width


def miss_location(obj: ObjectState, lane_map: LaneMap) -> MissLocation:
    for lane in lane_map.adjacent:
        if lane.relation == LaneRelation.SIDEWALK and _inside(obj, lane):
            return MissLocation.SIDEWALK
    return MissLocation.ROAD


def lane_eval_window(ego: ObjectState, lane_map: LaneMap, length: float) -> np.ndarray:
    """Ground-truth ego-lane centerline from the ego forward over ``length`` metres."""
    pts = lane_map.ego_lane.points
    _, _, st = geometry.project([ego.position], pts)
    return geometry.resample(pts, start=float(st[0]), stop=float(st[0]) + length)


def evaluate_frame(scenario_id: str, index: int, frame: Frame, lane_map: LaneMap,
                   params: MetricParams, model: VehicleSeverityModel) -> FrameResult:
    ego = frame.ego
    reach = params.detection_distance
    objs = tuple(o for o in frame.objects if in_range(ego, o.position, reach))
    det = frame.detections
    boxes = tuple(b for b in (det.boxes if det else ()) if in_range(ego, b.position, reach))
    det_lane = det.lane if det else None
    eval_frame = replace(frame, objects=objs)

    m = match(objs, boxes, params)
    obj_scores = perf.precision_recall_f1_accuracy(perf.ConfusionCounts(m.tp, len(m.fp_indices), len(m.fn_ids)))
    modp = perf.modp([iou for _, _, iou in m.pairs])
    matched_det = {j for _, j, _ in m.pairs}
    det_records = tuple((b.category.value, b.confidence, j in matched_det) for j, b in enumerate(boxes))

    gt_window = lane_eval_window(ego, lane_map, reach)
    lane_counts = perf.lane_point_confusion(gt_window, det_lane, params.lane_match_threshold)
    lane_scores = perf.precision_recall_f1_accuracy(lane_counts)

    s_obj, weighted = object_safety_score(eval_frame, m, params, model)
    lane = evaluate_lane(ego, lane_map, det_lane, params.brake_decel)

    missed = [o for o in objs if o.id in set(m.fn_ids)]
    missed_adjacent = any(_inside(o, a) for o in missed for a in lane_map.adjacent)
    if det_lane is not None and len(det_lane) >= 2:
        detected = LaneRecord(det_lane, lane_map.ego_lane.width)
        in_lane = missed_objects_in_lane(eval_frame, m, detected)
    else:
        in_lane = []
    case = classify_tree_case(lane.lateral_safe, missed_adjacent,
                              [miss_location(o, lane_map) for o in in_lane])
    ttc_by_id = {w.id: w.ttc for w in weighted}
    ttcs = [ttc_by_id[o.id] for o in in_lane if ttc_by_id.get(o.id) is not None]
    ttc_min = min(ttcs) if ttcs else None
    safety = final_safety(s_obj, lane.s_lane, case, params.power_mean_p, params.bonus_factor, ttc_min)

    return FrameResult(scenario_id, index, frame.t, len(objs), m, obj_scores, modp, lane_counts,
                       lane_scores, lane, tuple(weighted), safety, det_records,
                       tuple(o.category.value for o in objs))


def evaluate_scenario(scenario: Scenario, model: VehicleSeverityModel,
                      params: Optional[MetricParams] = None, seed: Optional[int] = None,
                      sensor: Optional[SensorConfig] = None) -> ScenarioResult:
    """Evaluate every frame; frames without detections are simulated first."""
    params = params or scenario.params
    if any(f.detections is None for f in scenario.frames):
        scenario = simulate_scenario(scenario, sensor, seed=seed, overwrite=False)
    results = []
    misses = fps = gts = 0
    moda_cum = []
    for i, f in enumerate(scenario.frames):
        r = evaluate_frame(scenario.id, i, f, scenario.map, params, model)
        results.append(r)
        misses += len(r.matches.fn_ids)
        fps += len(r.matches.fp_indices)
        gts += r.n_gt
        moda_cum.append(perf.moda([misses], [fps], [gts]) if gts else math.nan)

    ap_all, ap_11 = {}, {}
    classes = sorted({o.category.value for f in scenario.frames for o in f.objects})
    for c in classes:
        n_gt = sum(r.gt_classes.count(c) for r in results)
        recs = [(conf, tp) for r in results for (cls, conf, tp) in r.detections if cls == c]
        curve = perf.pr_curve([x[0] for x in recs], [x[1] for x in recs], n_gt)
        ap_all[c] = perf.ap_allpoint(curve)
        ap_11[c] = perf.ap_11point(curve)
    return ScenarioResult(scenario.id, tuple(results), tuple(moda_cum), ap_all, ap_11)

