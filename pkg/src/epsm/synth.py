"""Builders for synthetic scenarios: fixtures, decision-tree cases and a random corpus.

Coordinates: the ego lane runs along +x at y = 0; +y is the driver's left.
The standard map puts oncoming traffic on the left, a same-direction lane on
the right and a sidewalk beyond each.
"""
from __future__ import annotations

import math
from dataclasses import replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import geometry
from .params import MetricParams, SensorConfig
from .scenario import (DetectedBox, DetectionSet, Frame, LaneMap, LaneRecord, LaneRelation,
                       ObjectClass, ObjectState, Scenario)
from .sensor import simulate_scenario

LANE_WIDTH = 3.5
SIDEWALK_WIDTH = 2.5

DIMENSIONS = {
    ObjectClass.CAR: (4.5, 1.9),
    ObjectClass.TRUCK: (8.0, 2.5),
    ObjectClass.MOTORCYCLE: (2.2, 0.8),
    ObjectClass.CYCLIST: (1.8, 0.6),
    ObjectClass.PEDESTRIAN: (0.6, 0.6),
}


def straight_map(x_min=-100.0, x_max=400.0, speed_limit=13.89) -> LaneMap:
    def line(y):
        return ((x_min, y), (x_max, y))

    def back(y):
        return ((x_max, y), (x_min, y))

    side_off = LANE_WIDTH + 0.5 * (LANE_WIDTH + SIDEWALK_WIDTH)
    return LaneMap(
        ego_lane=LaneRecord(line(0.0), LANE_WIDTH),
        adjacent=(
            LaneRecord(back(LANE_WIDTH), LANE_WIDTH, LaneRelation.ONCOMING),
            LaneRecord(line(-LANE_WIDTH), LANE_WIDTH, LaneRelation.SAME_DIRECTION),
            LaneRecord(line(side_off), SIDEWALK_WIDTH, LaneRelation.SIDEWALK),
            LaneRecord(line(-side_off), SIDEWALK_WIDTH, LaneRelation.SIDEWALK),
        ),
        speed_limit=speed_limit,
    )


def make_object(id, category, x, y, vx=0.0, vy=0.0, heading=None, age=None) -> ObjectState:
    category = ObjectClass(category)
    length, width = DIMENSIONS[category]
    if heading is None:
        heading = math.atan2(vy, vx) if (vx or vy) else 0.0
    return ObjectState(id, category, (float(x), float(y)), geometry.wrap_angle(heading),
                       (float(vx), float(vy)), length, width, age)


def move(o: ObjectState, dt: float, velocity=None) -> ObjectState:
    vx, vy = o.velocity
    pos = (o.position[0] + vx * dt, o.position[1] + vy * dt)
    o = replace(o, position=pos)
    if velocity is not None:
        o = replace(o, velocity=(float(velocity[0]), float(velocity[1])))
    return o


def perfect_detections(frame: Frame, lane_map: LaneMap, reach: float = 50.0,
                       skip: Iterable[str] = (), lane_offset: float = 0.0) -> DetectionSet:
    """Boxes equal to ground truth, and the true ego lane shifted sideways by ``lane_offset``."""
    skip = set(skip)
    boxes = tuple(DetectedBox(o.category, o.position, o.heading, o.length, o.width, 1.0)
                  for o in frame.objects if o.id not in skip)
    pts = lane_map.ego_lane.points
    _, _, st = geometry.project([frame.ego.position], pts)
    window = geometry.resample(pts, start=float(st[0]), stop=float(st[0]) + reach)
    t = geometry.tangents(pts, float(st[0]) + geometry.cumulative_length(window))
    shifted = window + lane_offset * np.column_stack((-t[:, 1], t[:, 0]))
    return DetectionSet(boxes, tuple((float(x), float(y)) for x, y in shifted))


# ----------------------------------------------------------------------------
# crossing fixture

CROSSING_DT = 0.1
CROSSING_FRAMES = 28
CROSSING_EGO_SPEED = 10.0
CROSSING_V0 = 5.0
CROSSING_ACCEL = 6.0


def crossing_scenario(seed: int = 7) -> Scenario:
    """Ego approaching an intersection while a car from the left accelerates into it.

    The two meet just after the last frame. Three vehicles travelling with
    the ego are detected reliably; the crossing car ``car_cross`` is never
    detected. Detections come from the sensor simulator (full detection
    probability, small jitter).
    """
    t_hit = CROSSING_DT * CROSSING_FRAMES
    x_hit = CROSSING_EGO_SPEED * t_hit
    y0 = CROSSING_V0 * t_hit + 0.5 * CROSSING_ACCEL * t_hit ** 2
    v_e = CROSSING_EGO_SPEED
    frames = []
    for k in range(CROSSING_FRAMES):
        t = round(k * CROSSING_DT, 10)
        ego = make_object("ego", "Car", v_e * t, 0.0, v_e, 0.0)
        vy = CROSSING_V0 + CROSSING_ACCEL * t
        y = y0 - (CROSSING_V0 * t + 0.5 * CROSSING_ACCEL * t * t)
        objects = (
            make_object("car_cross", "Car", x_hit, y, 0.0, -vy),
            make_object("car_lead", "Car", v_e * t + 30.0, 0.0, v_e, 0.0),
            make_object("car_right", "Car", v_e * t - 14.0, -LANE_WIDTH, v_e, 0.0),
            make_object("car_follow", "Car", v_e * t - 25.0, 0.0, v_e, 0.0),
        )
        frames.append(Frame(t, ego, objects))
    sensor = replace(SensorConfig.default(), seed=seed,
                     detect_prob_curve=((60.0, 1.0),),
                     bbox_size_jitter_sigma=0.02,
                     heading_jitter_sigma=math.radians(1.0),
                     force_miss_ids=("car_cross",))
    sc = Scenario("crossing", tuple(frames), straight_map(), MetricParams(),
                  ("ego", "car_cross"), sensor)
    return simulate_scenario(sc)


# ----------------------------------------------------------------------------
# decision-tree fixtures (one frame each, hand-placed detections)


def _single_frame(sid, objects, skip, lane_offset=0.0, ego_speed=10.0) -> Scenario:
    m = straight_map()
    ego = make_object("ego", "Car", 0.0, 0.0, ego_speed, 0.0)
    f = Frame(0.0, ego, tuple(objects))
    f = replace(f, detections=perfect_detections(f, m, skip=skip, lane_offset=lane_offset))
    return Scenario(sid, (f,), m)


def tree_case_scenarios() -> dict[str, Scenario]:
    """One scenario per interdependence case, keyed by the expected case name."""
    ped_side = make_object("ped", "Pedestrian", 20.0, -(LANE_WIDTH + 0.5 * (LANE_WIDTH + SIDEWALK_WIDTH)),
                           0.0, 0.0, age=40.0)
    car_stopped = make_object("car_stop", "Car", 25.0, -LANE_WIDTH, 0.0, 0.0)
    car_adj = make_object("car_adj", "Car", 15.0, -LANE_WIDTH, 10.0, 0.0)
    car_other = make_object("car_far", "Car", 40.0, 0.0, 10.0, 0.0)
    return {
        # lane detected well; the car in the right-hand lane is missed
        "A1": _single_frame("tree_A1", [car_adj, car_other], skip={"car_adj"}),
        # lane detected well; everything detected
        "A2": _single_frame("tree_A2", [car_adj, car_other], skip=()),
        # detected lane pushed 5 m right, onto the sidewalk; pedestrian there missed
        "B1_1": _single_frame("tree_B1_1", [ped_side, car_other], skip={"ped"}, lane_offset=-5.0),
        # detected lane pushed 3.5 m right onto the next lane; stopped car there missed
        "B1_2": _single_frame("tree_B1_2", [car_stopped, car_other], skip={"car_stop"}, lane_offset=-3.5),
        # detected lane 3.5 m off but nothing missed inside it
        "B2": _single_frame("tree_B2", [car_stopped, car_other], skip=(), lane_offset=-3.5),
    }


def perfect_scenario(n_frames: int = 10) -> Scenario:
    """Straight-road traffic with every object and the lane detected exactly."""
    m = straight_map()
    ego = make_object("ego", "Car", 0.0, 0.0, 10.0, 0.0)
    objs = [
        make_object("car_lead", "Car", 30.0, 0.0, 10.0, 0.0),
        make_object("car_right", "Car", 10.0, -LANE_WIDTH, 11.0, 0.0),
        make_object("ped_walk", "Pedestrian", 20.0, -7.0, 1.4, 0.0, age=35.0),
    ]
    frames = []
    for k in range(n_frames):
        t = round(0.1 * k, 10)
        f = Frame(t, move(ego, t), tuple(move(o, t) for o in objs))
        frames.append(replace(f, detections=perfect_detections(f, m)))
    return Scenario("perfect", tuple(frames), m)


# ----------------------------------------------------------------------------
# random corpus


def random_scenario(sid: str, rng: np.random.Generator, n_frames: int = 20, dt: float = 0.1) -> Scenario:
    """Ground truth only; detections are left to the sensor simulator."""
    m = straight_map()
    v_e = float(rng.uniform(6.0, 16.0))
    ego = make_object("ego", "Car", 0.0, 0.0, v_e, 0.0)
    objs = []
    n = int(rng.integers(2, 8))
    lanes_y = {"ego": 0.0, "onc": LANE_WIDTH, "right": -LANE_WIDTH}
    for i in range(n):
        kind = rng.choice(["car", "car", "truck", "ped", "cyc", "cross"])
        x = float(rng.uniform(-30.0, 60.0))
        if kind == "ped":
            side = LANE_WIDTH + 0.5 * (LANE_WIDTH + SIDEWALK_WIDTH)
            y = float(rng.choice([side, -side]))
            vx, vy = float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-0.3, 0.3))
            objs.append(make_object(f"ped_{i}", "Pedestrian", x, y, vx, vy,
                                    age=float(rng.integers(8, 85))))
        elif kind == "cyc":
            objs.append(make_object(f"cyc_{i}", "Cyclist", x, -LANE_WIDTH - 0.5, float(rng.uniform(3, 7)), 0.0))
        elif kind == "cross":
            y = float(rng.uniform(15.0, 35.0)) * float(rng.choice([1.0, -1.0]))
            vy = -math.copysign(float(rng.uniform(5.0, 15.0)), y)
            objs.append(make_object(f"cross_{i}", "Car", max(x, 10.0), y, 0.0, vy))
        else:
            lane = str(rng.choice(list(lanes_y)))
            y = lanes_y[lane]
            if lane == "ego" and abs(x) < 8.0:
                x += 16.0
            v = float(rng.uniform(5.0, 16.0))
            vx = -v if lane == "onc" else v
            objs.append(make_object(f"{kind}_{i}", "Truck" if kind == "truck" else "Car", x, y, vx, 0.0))
    frames = []
    for k in range(n_frames):
        t = round(dt * k, 10)
        frames.append(Frame(t, move(ego, t), tuple(move(o, t) for o in objs)))
    return Scenario(sid, tuple(frames), m)


def random_corpus(n: int = 20, seed: int = 2024) -> list[Scenario]:
    rng = np.random.default_rng(seed)
    return [random_scenario(f"synth_{i:03d}", rng) for i in range(n)]
