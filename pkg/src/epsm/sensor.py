"""Seeded statistical lane and object sensor models.

Every (scenario, frame, channel) triple gets its own random stream derived
from the master seed, so detections do not depend on the order in which
frames or scenarios are simulated.
"""
from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from . import geometry
from .errors import OffMap
from .params import SensorConfig
from .scenario import DetectedBox, DetectionSet, LaneMap, ObjectClass, ObjectState, Scenario

GHOST_LENGTH, GHOST_WIDTH = 4.5, 1.9


class Channel(enum.IntEnum):
    LANE = 1
    OBJECT = 2


def _id_key(scenario_id: str) -> int:
    return int.from_bytes(hashlib.blake2b(scenario_id.encode("utf-8"), digest_size=8).digest(), "little")


def rng_stream_for(scenario_id: str, frame_index: int, channel: Channel, seed: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_id_key(scenario_id), int(frame_index), int(channel)))
    return np.random.Generator(np.random.PCG64(ss))


def detection_probability(cfg: SensorConfig, distance: float) -> float:
    """Piecewise-constant lookup; bins are [previous edge, edge)."""
    for edge, p in cfg.detect_prob_curve:
        if distance < edge:
            return p
    return 0.0


def _visible_prefix(pts: np.ndarray, half_width: float) -> int:
    """Number of leading points visible from the first one along the lane.

    A point is hidden once the straight sight line to it leaves the lane
    corridor, i.e. some intermediate centerline point lies farther than
    ``half_width`` from the chord.
    """
    p0 = pts[0]
    for k in range(2, len(pts)):
        chord = pts[k] - p0
        n = math.hypot(chord[0], chord[1])
        mid = pts[1:k] - p0
        dev = np.abs(chord[0] * mid[:, 1] - chord[1] * mid[:, 0]) / n
        if dev.max() > half_width:
            return k
    return len(pts)


def simulate_lane_detection(lane_map: LaneMap, ego: ObjectState, cfg: SensorConfig,
                            rng: np.random.Generator) -> Optional[tuple]:
    lane = lane_map.ego_lane
    dist, _, station = geometry.project([ego.position], lane.centerline)
    if dist[0] > 0.5 * lane.width:
        raise OffMap(f"ego '{ego.id}' is {dist[0]:.2f} m from its lane centerline")
    s0 = float(station[0])
    pts = geometry.resample(lane.points, start=s0, stop=s0 + cfg.max_lane_distance)
    if len(pts) < 2:
        return None
    pts = pts[: _visible_prefix(pts, 0.5 * lane.width)]

    stations = s0 + geometry.cumulative_length(pts)
    t = geometry.tangents(lane.points, stations)
    normal = np.column_stack((-t[:, 1], t[:, 0]))
    noise = rng.normal(0.0, cfg.lane_noise_sigma, size=len(pts)) if cfg.lane_noise_sigma > 0 else np.zeros(len(pts))
    out = pts + normal * noise[:, None]
    return tuple((float(x), float(y)) for x, y in out)


def simulate_object_detection(gt_objects: Sequence[ObjectState], ego: ObjectState, cfg: SensorConfig,
                              rng: np.random.Generator) -> tuple[DetectedBox, ...]:
    forced = set(cfg.force_miss_ids)
    boxes = []
    for o in sorted(gt_objects, key=lambda o: o.id):
        # fixed number of draws per object keeps the stream aligned
        u, z_size, z_head = rng.random(), rng.standard_normal(), rng.standard_normal()
        d = math.hypot(o.position[0] - ego.position[0], o.position[1] - ego.position[1])
        p = detection_probability(cfg, d)
        if o.id in forced or not u < p:
            continue
        scale = max(1.0 + cfg.bbox_size_jitter_sigma * z_size, 0.05)
        boxes.append(DetectedBox(
            category=o.category,
            position=o.position,
            heading=geometry.wrap_angle(o.heading + cfg.heading_jitter_sigma * z_head),
            length=o.length * scale,
            width=o.width * scale,
            confidence=p,
        ))
    if cfg.ghost_rate > 0.0 and cfg.detect_prob_curve:
        reach = cfg.detect_prob_curve[-1][0]
        for _ in range(int(rng.poisson(cfg.ghost_rate))):
            r = reach * math.sqrt(rng.random())
            phi = 2.0 * math.pi * rng.random()
            heading = geometry.wrap_angle(2.0 * math.pi * rng.random())
            boxes.append(DetectedBox(
                category=ObjectClass.CAR,
                position=(ego.position[0] + r * math.cos(phi), ego.position[1] + r * math.sin(phi)),
                heading=heading, length=GHOST_LENGTH, width=GHOST_WIDTH,
                confidence=detection_probability(cfg, r),
            ))
    return tuple(boxes)


def simulate_scenario(scenario: Scenario, cfg: Optional[SensorConfig] = None,
                      seed: Optional[int] = None, overwrite: bool = True) -> Scenario:
    """Fill in detections for every frame (or only empty ones if not ``overwrite``)."""
    cfg = cfg or scenario.sensor or SensorConfig.default()
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    frames = []
    for idx, f in enumerate(scenario.frames):
        if f.detections is not None and not overwrite:
            frames.append(f)
            continue
        lane = simulate_lane_detection(scenario.map, f.ego, cfg,
                                       rng_stream_for(scenario.id, idx, Channel.LANE, cfg.seed))
        boxes = simulate_object_detection(f.objects, f.ego, cfg,
                                          rng_stream_for(scenario.id, idx, Channel.OBJECT, cfg.seed))
        frames.append(replace(f, detections=DetectionSet(boxes, lane)))
    return replace(scenario, frames=tuple(frames), sensor=cfg)
