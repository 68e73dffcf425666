import math
from dataclasses import replace

import numpy as np
import pytest

from epsm.errors import OffMap
from epsm.params import SensorConfig
from epsm.scenario import LaneMap, LaneRecord
from epsm.sensor import (Channel, detection_probability, rng_stream_for, simulate_lane_detection,
                         simulate_object_detection, simulate_scenario)
from epsm.synth import crossing_scenario, make_object, straight_map

EGO = make_object("ego", "Car", 0.0, 0.0, 10.0, 0.0)


def config(**kw):
    return replace(SensorConfig.default(), **kw)


def exact():
    return config(lane_noise_sigma=0.0, bbox_size_jitter_sigma=0.0, heading_jitter_sigma=0.0,
                  detect_prob_curve=((1000.0, 1.0),))


def stream(frame=0, channel=Channel.LANE, seed=0, sid="s"):
    return rng_stream_for(sid, frame, channel, seed)


def test_zero_noise_lane_is_centerline_prefix():
    pts = np.array(simulate_lane_detection(straight_map(), EGO, exact(), stream()))
    assert len(pts) == 101
    assert np.array_equal(pts[:, 1], np.zeros(101))
    assert pts[0, 0] == 0.0 and pts[-1, 0] == pytest.approx(50.0)
    assert np.allclose(np.diff(pts[:, 0]), 0.5)


def test_lane_detection_is_seeded():
    cfg = config()
    a = simulate_lane_detection(straight_map(), EGO, cfg, stream(seed=3))
    b = simulate_lane_detection(straight_map(), EGO, cfg, stream(seed=3))
    c = simulate_lane_detection(straight_map(), EGO, cfg, stream(seed=4))
    assert a == b and a != c


def test_lane_noise_sigma():
    cfg = config(lane_noise_sigma=0.05)
    ys = np.concatenate([np.array(simulate_lane_detection(straight_map(), EGO, cfg, stream(seed=s)))[:, 1]
                         for s in range(100)])
    assert len(ys) >= 10_000
    assert 0.045 <= ys.std() <= 0.055
    assert abs(ys.mean()) < 0.005


def curved_map(radius=20.0):
    # 10 m straight, then a left-hand quarter circle
    arc = [(10.0 + radius * math.sin(a), radius - radius * math.cos(a))
           for a in np.linspace(0.0, math.pi / 2, 60)]
    return LaneMap(LaneRecord(((-20.0, 0.0),) + tuple(arc), 3.5))


def test_curve_cuts_line_of_sight():
    pts = np.array(simulate_lane_detection(curved_map(), EGO, exact(), stream()))
    assert 2 <= len(pts) < 101
    # every returned point is visible: the chord from the first point stays in the corridor
    p0 = pts[0]
    for k in range(2, len(pts)):
        chord = pts[k] - p0
        mid = pts[1:k] - p0
        dev = np.abs(chord[0] * mid[:, 1] - chord[1] * mid[:, 0]) / np.hypot(*chord)
        assert dev.max() <= 1.75


def test_off_map_ego():
    with pytest.raises(OffMap):
        simulate_lane_detection(straight_map(), make_object("ego", "Car", 0, 10), config(), stream())


def test_exact_object_detection_equals_ground_truth():
    gt = [make_object("a", "Car", 10, 0, 5, 0), make_object("b", "Pedestrian", 20, 4)]
    boxes = simulate_object_detection(gt, EGO, exact(), stream(channel=Channel.OBJECT))
    assert len(boxes) == 2
    for o, b in zip(gt, boxes):
        assert (b.category, b.position, b.heading, b.length, b.width) == \
            (o.category, o.position, o.heading, o.length, o.width)


def test_default_curve_lookup():
    cfg = config()
    assert detection_probability(cfg, 0.0) == 0.98
    assert detection_probability(cfg, 10.0) == 0.95
    assert detection_probability(cfg, 35.0) == 0.80
    assert detection_probability(cfg, 50.0) == 0.0


def test_beyond_last_bin_never_detected():
    far = [make_object("far", "Car", 50.0, 0.0), make_object("farther", "Car", 80.0, 0.0)]
    cfg = config()
    assert all(not simulate_object_detection(far, EGO, cfg, stream(k, Channel.OBJECT)) for k in range(500))


def test_forced_misses_never_detected():
    gt = [make_object("keep", "Car", 5, 0), make_object("drop", "Car", 6, 3)]
    cfg = replace(exact(), force_miss_ids=("drop",))
    for k in range(50):
        assert [b.position for b in simulate_object_detection(gt, EGO, cfg, stream(k, Channel.OBJECT))] == \
            [gt[0].position]


def test_per_bin_detection_rates():
    cfg = config()
    gt = [make_object(f"o{d}", "Car", float(d), 0.0) for d in (5, 15, 25, 35, 45)]
    hits = {o.position: 0 for o in gt}
    n = 10_000
    for k in range(n):
        for b in simulate_object_detection(gt, EGO, cfg, stream(k, Channel.OBJECT)):
            hits[b.position] += 1
    for o in gt:
        p = detection_probability(cfg, o.position[0])
        assert abs(hits[o.position] / n - p) <= 0.02


def test_streams_identical_and_distinct():
    a = stream(3, Channel.LANE, 9).random(8)
    assert np.array_equal(a, stream(3, Channel.LANE, 9).random(8))
    assert not np.array_equal(a, stream(4, Channel.LANE, 9).random(8))
    assert not np.array_equal(a, stream(3, Channel.OBJECT, 9).random(8))
    assert not np.array_equal(a, stream(3, Channel.LANE, 9, sid="t").random(8))


def test_simulation_order_independent():
    sc = crossing_scenario()
    full = simulate_scenario(sc, seed=11)
    cfg = full.sensor
    # rebuilding frames one at a time, last first, reproduces every detection
    for k in reversed(range(len(sc.frames))):
        f = sc.frames[k]
        boxes = simulate_object_detection(f.objects, f.ego, cfg, rng_stream_for(sc.id, k, Channel.OBJECT, 11))
        lane = simulate_lane_detection(sc.map, f.ego, cfg, rng_stream_for(sc.id, k, Channel.LANE, 11))
        assert boxes == full.frames[k].detections.boxes
        assert lane == full.frames[k].detections.lane


def test_keep_existing_detections():
    sc = simulate_scenario(crossing_scenario(), seed=1)
    again = simulate_scenario(sc, seed=2, overwrite=False)
    assert [f.detections for f in again.frames] == [f.detections for f in sc.frames]
    assert simulate_scenario(sc, seed=2).frames != sc.frames
