"""Lane safety score S_lane from longitudinal, lateral and semantic ratings.

The lateral rating compares the mean lateral deviation of the detected
centerline to the slack the ego has on each side of its lane. When the
deviation is too large the semantic rating takes over: if the detected lane
would steer the ego into oncoming traffic, the score drops with the closing
speed of a head-on impact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import geometry
from .errors import EmptyDetection, GeometryError
from .scenario import LaneMap, LaneRelation, ObjectState
from .severity import to_kmh

REACTION_TIME = 1.0
LATERAL_TRIGGER = 0.8
S_LAT_CAP = 0.8

# (upper closing speed km/h, score at band start, score at band end)
SEMANTIC_BANDS = (
    (30.0, 0.8, 0.6),
    (60.0, 0.6, 0.4),
    (100.0, 0.4, 0.2),
    (200.0, 0.2, 0.0),
)


@dataclass(frozen=True)
class LaneSafetyBreakdown:
    s_long: float
    d_lat_mean: float
    s_lat: float
    s_sem: Optional[float]
    s_lane: float
    lateral_safe: bool


def _det_points(det_centerline) -> np.ndarray:
    pts = geometry.as_points(det_centerline) if det_centerline is not None else np.empty((0, 2))
    if len(pts) >= 2:
        return geometry.resample(pts)
    return pts


def mean_lateral_deviation(gt_centerline, det_centerline) -> float:
    pts = _det_points(det_centerline)
    if len(pts) == 0:
        raise EmptyDetection("no detected centerline points")
    return float(np.mean(geometry.distance_to_polyline(pts, gt_centerline)))


def lateral_threshold(lane_width: float, vehicle_width: float) -> float:
    if not lane_width > vehicle_width > 0:
        raise GeometryError(f"vehicle width {vehicle_width} does not fit lane width {lane_width}")
    return 0.5 * (lane_width - vehicle_width)


def lateral_rating(d_mean: float, lane_width: float, vehicle_width: float) -> tuple[float, bool]:
    trigger = LATERAL_TRIGGER * lateral_threshold(lane_width, vehicle_width)
    if d_mean < trigger:
        # keep strictly above the cap even when d_mean / trigger rounds to 1
        s = 1.0 - (1.0 - S_LAT_CAP) * d_mean / trigger
        return max(s, math.nextafter(S_LAT_CAP, 1.0)), True
    return S_LAT_CAP, False


def required_distance(ego_speed: float, brake_decel: float, reaction_time: float = REACTION_TIME) -> float:
    return ego_speed * ego_speed / (2.0 * brake_decel) + ego_speed * reaction_time


def longitudinal_rating(detected_range: float, ego_speed: float, brake_decel: float) -> float:
    d_req = required_distance(ego_speed, brake_decel)
    if d_req <= 0.0:
        return 1.0
    return min(1.0, max(detected_range, 0.0) / d_req)


def detected_range(ego: ObjectState, gt_centerline, det_centerline) -> float:
    """How far ahead of the ego, along the true lane, the detection reaches."""
    pts = geometry.as_points(det_centerline) if det_centerline is not None else np.empty((0, 2))
    if len(pts) == 0:
        return 0.0
    _, _, st = geometry.project(pts, gt_centerline)
    _, _, st_ego = geometry.project([ego.position], gt_centerline)
    return max(float(st.max() - st_ego[0]), 0.0)


def semantic_score(v_rel_kmh: float) -> float:
    """Piecewise-linear, non-increasing map from closing speed to S_sem."""
    lo = 0.0
    for hi, top, bottom in SEMANTIC_BANDS:
        if v_rel_kmh < hi:
            return top + (bottom - top) * (max(v_rel_kmh, 0.0) - lo) / (hi - lo)
        lo = hi
    return 0.0


def intrudes_oncoming(ego: ObjectState, lane_map: LaneMap, det_centerline) -> bool:
    pts = _det_points(det_centerline)
    oncoming = [a for a in lane_map.adjacent if a.relation == LaneRelation.ONCOMING]
    if len(pts) == 0 or not oncoming:
        return False
    ego_line = lane_map.ego_lane.centerline
    _, offs, _ = geometry.project(pts, ego_line)
    edge = 0.5 * lane_map.ego_lane.width
    for lane in oncoming:
        mid = lane.points[len(lane.points) // 2]
        _, side, _ = geometry.project([mid], ego_line)
        sign = 1.0 if side[0] >= 0.0 else -1.0
        if np.any(sign * offs + 0.5 * ego.width > edge):
            return True
    return False


def semantic_rating(ego: ObjectState, lane_map: LaneMap, det_centerline) -> float:
    if not intrudes_oncoming(ego, lane_map, det_centerline):
        return S_LAT_CAP
    return semantic_score(to_kmh(ego.speed + lane_map.speed_limit))


def lane_safety_score(s_long: float, d_lat_mean: float, s_lat: float, lateral_safe: bool,
                      s_sem: Optional[float] = None) -> LaneSafetyBreakdown:
    if lateral_safe:
        return LaneSafetyBreakdown(s_long, d_lat_mean, s_lat, None, s_long * s_lat, True)
    if s_sem is None:
        raise ValueError("semantic rating required when the lateral rating is unsafe")
    return LaneSafetyBreakdown(s_long, d_lat_mean, s_lat, s_sem, s_long * s_sem, False)


def evaluate_lane(ego: ObjectState, lane_map: LaneMap, det_centerline, brake_decel: float) -> LaneSafetyBreakdown:
    """All three ratings for one frame, tolerating a missing detection."""
    gt = lane_map.ego_lane.centerline
    if det_centerline is None or len(det_centerline) == 0:
        return lane_safety_score(0.0, math.nan, S_LAT_CAP, False, S_LAT_CAP)
    s_long = longitudinal_rating(detected_range(ego, gt, det_centerline), ego.speed, brake_decel)
    d = mean_lateral_deviation(gt, det_centerline)
    s_lat, safe = lateral_rating(d, lane_map.ego_lane.width, ego.width)
    s_sem = None if safe else semantic_rating(ego, lane_map, det_centerline)
    return lane_safety_score(s_long, d, s_lat, safe, s_sem)
