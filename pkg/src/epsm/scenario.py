"""Scenario data model and the JSON scenario document format.

A scenario is a time-ordered list of frames. Each frame holds the ego state,
the ground-truth objects around it and (optionally) what the perception
system reported. Everything is 2D bird's-eye in metres, seconds and m/s.

Document layout (one scenario per file)::

    {
      "id": "crossing",
      "params": {...},            # optional, MetricParams overrides
      "sensor": {...},            # optional, SensorConfig overrides
      "colliding_ids": ["ego", "car_1"],   # optional
      "map": {
        "speed_limit_mps": 13.9,
        "ego_lane": {"centerline_m": [[x, y], ...], "width_m": 3.5},
        "adjacent": [{"relation": "Oncoming", "centerline_m": [...], "width_m": 3.5}]
      },
      "frames": [
        {"t_s": 0.0,
         "ego": {<object>},
         "objects": [{<object>}, ...],
         "detections": {"boxes": [{<box>}, ...], "lane_pts_m": [[x, y], ...]}}
      ]
    }

    object = {"id", "class", "position_m", "heading_rad", "velocity_mps",
              "length_m", "width_m", "age_years"?}
    box    = {"class", "position_m", "heading_rad", "length_m", "width_m",
              "confidence"}

``detections`` may be omitted from a frame; such frames are filled in by the
sensor simulator before evaluation.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterator, Optional

import numpy as np

from .errors import ParseError, ValidationError
from .params import MetricParams, SensorConfig

Vec2 = tuple[float, float]
Polyline = tuple[Vec2, ...]


class ObjectClass(str, enum.Enum):
    CAR = "Car"
    TRUCK = "Truck"
    MOTORCYCLE = "Motorcycle"
    CYCLIST = "Cyclist"
    PEDESTRIAN = "Pedestrian"

    @property
    def is_vru(self) -> bool:
        return self in (ObjectClass.PEDESTRIAN, ObjectClass.CYCLIST)


class LaneRelation(str, enum.Enum):
    SAME_DIRECTION = "SameDirection"
    ONCOMING = "Oncoming"
    SIDEWALK = "Sidewalk"


@dataclass(frozen=True)
class ObjectState:
    id: str
    category: ObjectClass
    position: Vec2
    heading: float
    velocity: Vec2
    length: float
    width: float
    age: Optional[float] = None

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)

    @property
    def radius(self) -> float:
        """Radius of the disk enclosing the footprint."""
        return 0.5 * math.hypot(self.length, self.width)


@dataclass(frozen=True)
class DetectedBox:
    category: ObjectClass
    position: Vec2
    heading: float
    length: float
    width: float
    confidence: float


@dataclass(frozen=True)
class DetectionSet:
    boxes: tuple[DetectedBox, ...] = ()
    lane: Optional[Polyline] = None


@dataclass(frozen=True)
class LaneRecord:
    centerline: Polyline
    width: float
    relation: Optional[LaneRelation] = None

    @cached_property
    def points(self) -> np.ndarray:
        return np.asarray(self.centerline, dtype=np.float64)


@dataclass(frozen=True)
class LaneMap:
    ego_lane: LaneRecord
    adjacent: tuple[LaneRecord, ...] = ()
    speed_limit: float = 13.89


@dataclass(frozen=True)
class Frame:
    t: float
    ego: ObjectState
    objects: tuple[ObjectState, ...] = ()
    detections: Optional[DetectionSet] = None


@dataclass(frozen=True)
class Scenario:
    id: str
    frames: tuple[Frame, ...]
    map: LaneMap
    params: MetricParams = field(default_factory=MetricParams)
    colliding_ids: Optional[tuple[str, str]] = None
    sensor: Optional[SensorConfig] = None


@dataclass(frozen=True)
class Violation:
    rule: str
    frame: Optional[int] = None
    entity: Optional[str] = None
    detail: str = ""

    def __str__(self):
        where = []
        if self.frame is not None:
            where.append(f"frame {self.frame}")
        if self.entity is not None:
            where.append(f"'{self.entity}'")
        loc = f" at {', '.join(where)}" if where else ""
        return f"{self.rule}{loc}" + (f" ({self.detail})" if self.detail else "")


# ----------------------------------------------------------------------------
# parsing


class _Reader:
    def __init__(self, source):
        self.source = source

    def fail(self, msg, locus):
        raise ParseError(msg, self.source, locus)

    def obj(self, v, locus):
        if not isinstance(v, dict):
            self.fail(f"expected an object, got {type(v).__name__}", locus)
        return v

    def key(self, d, k, locus, required=True, default=None):
        if k in d:
            return d[k]
        if required:
            self.fail(f"missing required key '{k}'", locus)
        return default

    def check_keys(self, d, allowed, locus):
        extra = sorted(set(d) - set(allowed))
        if extra:
            self.fail(f"unknown key(s) {extra}", locus)

    def num(self, v, locus):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"expected a number, got {type(v).__name__}", locus)
        v = float(v)
        if not math.isfinite(v):
            self.fail("non-finite number", locus)
        return v

    def string(self, v, locus):
        if not isinstance(v, str):
            self.fail(f"expected a string, got {type(v).__name__}", locus)
        return v

    def vec2(self, v, locus) -> Vec2:
        if not isinstance(v, list) or len(v) != 2:
            self.fail("expected a [x, y] pair", locus)
        return (self.num(v[0], f"{locus}[0]"), self.num(v[1], f"{locus}[1]"))

    def polyline(self, v, locus) -> Polyline:
        if not isinstance(v, list):
            self.fail("expected a list of [x, y] points", locus)
        return tuple(self.vec2(p, f"{locus}[{i}]") for i, p in enumerate(v))

    def enum(self, cls, v, locus):
        try:
            return cls(v)
        except (ValueError, TypeError):
            self.fail(f"expected one of {[m.value for m in cls]}, got {v!r}", locus)

    # -- entities

    _OBJ_KEYS = ("id", "class", "position_m", "heading_rad", "velocity_mps",
                 "length_m", "width_m", "age_years")
    _BOX_KEYS = ("class", "position_m", "heading_rad", "length_m", "width_m", "confidence")

    def object_state(self, d, locus) -> ObjectState:
        d = self.obj(d, locus)
        self.check_keys(d, self._OBJ_KEYS, locus)
        age = self.key(d, "age_years", locus, required=False)
        return ObjectState(
            id=self.string(self.key(d, "id", locus), f"{locus}.id"),
            category=self.enum(ObjectClass, self.key(d, "class", locus), f"{locus}.class"),
            position=self.vec2(self.key(d, "position_m", locus), f"{locus}.position_m"),
            heading=self.num(self.key(d, "heading_rad", locus), f"{locus}.heading_rad"),
            velocity=self.vec2(self.key(d, "velocity_mps", locus), f"{locus}.velocity_mps"),
            length=self.num(self.key(d, "length_m", locus), f"{locus}.length_m"),
            width=self.num(self.key(d, "width_m", locus), f"{locus}.width_m"),
            age=None if age is None else self.num(age, f"{locus}.age_years"),
        )

    def box(self, d, locus) -> DetectedBox:
        d = self.obj(d, locus)
        self.check_keys(d, self._BOX_KEYS, locus)
        return DetectedBox(
            category=self.enum(ObjectClass, self.key(d, "class", locus), f"{locus}.class"),
            position=self.vec2(self.key(d, "position_m", locus), f"{locus}.position_m"),
            heading=self.num(self.key(d, "heading_rad", locus), f"{locus}.heading_rad"),
            length=self.num(self.key(d, "length_m", locus), f"{locus}.length_m"),
            width=self.num(self.key(d, "width_m", locus), f"{locus}.width_m"),
            confidence=self.num(self.key(d, "confidence", locus), f"{locus}.confidence"),
        )

    def lane(self, d, locus, with_relation) -> LaneRecord:
        d = self.obj(d, locus)
        allowed = ("centerline_m", "width_m") + (("relation",) if with_relation else ())
        self.check_keys(d, allowed, locus)
        rel = None
        if with_relation:
            rel = self.enum(LaneRelation, self.key(d, "relation", locus), f"{locus}.relation")
        return LaneRecord(
            centerline=self.polyline(self.key(d, "centerline_m", locus), f"{locus}.centerline_m"),
            width=self.num(self.key(d, "width_m", locus), f"{locus}.width_m"),
            relation=rel,
        )

    def lane_map(self, d, locus) -> LaneMap:
        d = self.obj(d, locus)
        self.check_keys(d, ("ego_lane", "adjacent", "speed_limit_mps"), locus)
        adj = self.key(d, "adjacent", locus, required=False, default=[])
        if not isinstance(adj, list):
            self.fail("expected a list", f"{locus}.adjacent")
        return LaneMap(
            ego_lane=self.lane(self.key(d, "ego_lane", locus), f"{locus}.ego_lane", False),
            adjacent=tuple(self.lane(a, f"{locus}.adjacent[{i}]", True) for i, a in enumerate(adj)),
            speed_limit=self.num(self.key(d, "speed_limit_mps", locus), f"{locus}.speed_limit_mps"),
        )

    def frame(self, d, locus) -> Frame:
        d = self.obj(d, locus)
        self.check_keys(d, ("t_s", "ego", "objects", "detections"), locus)
        objs = self.key(d, "objects", locus, required=False, default=[])
        if not isinstance(objs, list):
            self.fail("expected a list", f"{locus}.objects")
        det = None
        if "detections" in d:
            dd = self.obj(d["detections"], f"{locus}.detections")
            self.check_keys(dd, ("boxes", "lane_pts_m"), f"{locus}.detections")
            boxes = self.key(dd, "boxes", f"{locus}.detections", required=False, default=[])
            if not isinstance(boxes, list):
                self.fail("expected a list", f"{locus}.detections.boxes")
            lane = dd.get("lane_pts_m")
            det = DetectionSet(
                boxes=tuple(self.box(b, f"{locus}.detections.boxes[{i}]") for i, b in enumerate(boxes)),
                lane=None if lane is None else self.polyline(lane, f"{locus}.detections.lane_pts_m"),
            )
        return Frame(
            t=self.num(self.key(d, "t_s", locus), f"{locus}.t_s"),
            ego=self.object_state(self.key(d, "ego", locus), f"{locus}.ego"),
            objects=tuple(self.object_state(o, f"{locus}.objects[{i}]") for i, o in enumerate(objs)),
            detections=det,
        )

    def scenario(self, doc) -> Scenario:
        doc = self.obj(doc, "$")
        self.check_keys(doc, ("id", "params", "sensor", "colliding_ids", "map", "frames"), "$")
        frames = self.key(doc, "frames", "$")
        if not isinstance(frames, list):
            self.fail("expected a list", "frames")
        coll = doc.get("colliding_ids")
        if coll is not None:
            if not isinstance(coll, list) or len(coll) != 2:
                self.fail("expected a pair of object ids", "colliding_ids")
            coll = tuple(self.string(c, f"colliding_ids[{i}]") for i, c in enumerate(coll))
        sensor = doc.get("sensor")
        return Scenario(
            id=self.string(self.key(doc, "id", "$"), "id"),
            frames=tuple(self.frame(f, f"frames[{i}]") for i, f in enumerate(frames)),
            map=self.lane_map(self.key(doc, "map", "$"), "map"),
            params=MetricParams.from_mapping(doc.get("params"), self.source),
            colliding_ids=coll,
            sensor=None if sensor is None else SensorConfig.from_mapping(sensor, self.source),
        )


def parse_scenario(doc: Any, source=None, check: bool = True) -> Scenario:
    """Build a Scenario from an already-decoded document."""
    scenario = _Reader(source).scenario(doc)
    if check:
        problems = validate(scenario)
        if problems:
            raise ValidationError(problems, source)
    return scenario


def loads_scenario(text, source=None) -> Scenario:
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc.reason}", source, f"byte {exc.start}") from None
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, source, f"line {exc.lineno} col {exc.colno}") from None
    except RecursionError:
        raise ParseError("document nested too deeply", source) from None
    return parse_scenario(doc, source)


def _reject_constant(name):
    raise json.JSONDecodeError(f"non-finite literal {name}", name, 0)


def load_scenario(path) -> Scenario:
    """Read, parse and validate a scenario document.

    Raises ParseError for malformed documents (with a line/column or field
    locus) and ValidationError listing every violated invariant.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ParseError(exc.strerror or str(exc), str(path)) from None
    return loads_scenario(data, str(path))


# ----------------------------------------------------------------------------
# serialisation


def _object_doc(o: ObjectState) -> dict:
    d = {
        "id": o.id,
        "class": o.category.value,
        "position_m": list(o.position),
        "heading_rad": o.heading,
        "velocity_mps": list(o.velocity),
        "length_m": o.length,
        "width_m": o.width,
    }
    if o.age is not None:
        d["age_years"] = o.age
    return d


def _box_doc(b: DetectedBox) -> dict:
    return {
        "class": b.category.value,
        "position_m": list(b.position),
        "heading_rad": b.heading,
        "length_m": b.length,
        "width_m": b.width,
        "confidence": b.confidence,
    }


def _lane_doc(lane: LaneRecord) -> dict:
    d = {"centerline_m": [list(p) for p in lane.centerline], "width_m": lane.width}
    if lane.relation is not None:
        d = {"relation": lane.relation.value, **d}
    return d


def scenario_to_doc(s: Scenario, include_defaults: bool = False) -> dict:
    doc: dict[str, Any] = {"id": s.id}
    if include_defaults or s.params != MetricParams():
        doc["params"] = s.params.to_mapping()
    if s.sensor is not None:
        doc["sensor"] = s.sensor.to_mapping()
    if s.colliding_ids is not None:
        doc["colliding_ids"] = list(s.colliding_ids)
    doc["map"] = {
        "speed_limit_mps": s.map.speed_limit,
        "ego_lane": _lane_doc(s.map.ego_lane),
        "adjacent": [_lane_doc(a) for a in s.map.adjacent],
    }
    frames = []
    for f in s.frames:
        fd: dict[str, Any] = {
            "t_s": f.t,
            "ego": _object_doc(f.ego),
            "objects": [_object_doc(o) for o in f.objects],
        }
        if f.detections is not None:
            dd: dict[str, Any] = {"boxes": [_box_doc(b) for b in f.detections.boxes]}
            if f.detections.lane is not None:
                dd["lane_pts_m"] = [list(p) for p in f.detections.lane]
            fd["detections"] = dd
        frames.append(fd)
    doc["frames"] = frames
    return doc


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_doc(s), indent=1, allow_nan=False) + "\n"


def dump_scenario(s: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(s), encoding="utf-8")


# ----------------------------------------------------------------------------
# validation

_RATE_TOL = 1e-9


def _check_object(o: ObjectState, idx, out, rule_prefix=""):
    if not (o.length > 0 and o.width > 0):
        out.append(Violation("positive_dims", idx, o.id, f"length={o.length}, width={o.width}"))
    if not (-math.pi <= o.heading < math.pi):
        out.append(Violation("heading_range", idx, o.id, f"heading={o.heading}"))
    if o.age is not None and not (0.0 <= o.age <= 120.0):
        out.append(Violation("age_range", idx, o.id, f"age={o.age}"))


def _polyline_ok(pts) -> bool:
    if len(pts) < 2:
        return False
    return all(math.hypot(b[0] - a[0], b[1] - a[1]) > 0.0 for a, b in zip(pts, pts[1:]))


def validate(scenario: Scenario) -> list[Violation]:
    """Check every scenario invariant; an empty list means the scenario is valid."""
    out: list[Violation] = []

    for p in scenario.params.problems():
        out.append(Violation("param_range", detail=p))
    if scenario.sensor is not None:
        for p in scenario.sensor.problems():
            out.append(Violation("sensor_config", detail=p))

    lanes = [("ego_lane", scenario.map.ego_lane)] + [
        (f"adjacent[{i}]", a) for i, a in enumerate(scenario.map.adjacent)
    ]
    for name, lane in lanes:
        if len(lane.centerline) < 2:
            out.append(Violation("centerline_points", entity=name, detail=f"{len(lane.centerline)} point(s)"))
        elif not _polyline_ok(lane.centerline):
            out.append(Violation("centerline_points", entity=name, detail="repeated point"))
        if not lane.width > 0:
            out.append(Violation("lane_width", entity=name, detail=f"width={lane.width}"))
    if not scenario.map.speed_limit >= 0:
        out.append(Violation("speed_limit", detail=f"{scenario.map.speed_limit}"))

    seen_ids = set()
    prev_t = None
    first_dt = None
    for i, f in enumerate(scenario.frames):
        if f.t < 0:
            out.append(Violation("nonneg_time", i, detail=f"t={f.t}"))
        if prev_t is not None:
            dt = f.t - prev_t
            if dt <= 0:
                out.append(Violation("monotone_time", i, detail=f"t={f.t} after {prev_t}"))
            elif first_dt is None:
                first_dt = dt
            elif abs(dt - first_dt) > _RATE_TOL:
                out.append(Violation("constant_rate", i, detail=f"dt={dt!r} vs {first_dt!r}"))
        prev_t = f.t

        _check_object(f.ego, i, out)
        ids = [o.id for o in f.objects]
        dupes = sorted({x for x in ids if ids.count(x) > 1})
        for d in dupes:
            out.append(Violation("unique_id", i, d))
        if f.ego.id in ids:
            out.append(Violation("ego_not_in_objects", i, f.ego.id))
        seen_ids.add(f.ego.id)
        seen_ids.update(ids)
        for o in f.objects:
            _check_object(o, i, out)

        if f.detections is not None:
            for j, b in enumerate(f.detections.boxes):
                ent = f"box[{j}]"
                if not 0.0 <= b.confidence <= 1.0:
                    out.append(Violation("confidence_range", i, ent, f"confidence={b.confidence}"))
                if not (b.length > 0 and b.width > 0):
                    out.append(Violation("positive_dims", i, ent))
            lane = f.detections.lane
            if lane is not None and not _polyline_ok(lane):
                out.append(Violation("lane_polyline", i, "lane", f"{len(lane)} point(s)"))

    if scenario.colliding_ids is not None:
        for cid in scenario.colliding_ids:
            if cid not in seen_ids:
                out.append(Violation("colliding_ids_exist", entity=cid))
    return out


def frames(scenario: Scenario) -> Iterator[Frame]:
    """Yield frames in timestamp order (stable for equal stamps)."""
    yield from sorted(scenario.frames, key=lambda f: f.t)
