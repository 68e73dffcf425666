"""Metric parameters and sensor-model configuration.

Both are frozen dataclasses that read from / write to the plain mappings used
in scenario documents. Document keys carry their unit as a suffix.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, fields
from importlib import resources
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ParseError


def _number(value, locus, source=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {type(value).__name__}", source, locus)
    value = float(value)
    if not math.isfinite(value):
        raise ParseError("non-finite number", source, locus)
    return value


@dataclass(frozen=True)
class MetricParams:
    power_mean_p: float = 5.0
    iou_threshold_vehicle: float = 0.7
    iou_threshold_vru: float = 0.5
    detection_distance: float = 50.0
    bonus_factor: float = 1.1
    k_sigmoid: float = 3.0
    t_falloff: float = 2.5
    d_falloff: float = 4.5
    brake_decel: float = 5.0
    lane_match_threshold: float = 0.5
    vru_default_age: float = 30.0

    # field name -> document key
    KEYS = {
        "power_mean_p": "power_mean_p",
        "iou_threshold_vehicle": "iou_threshold_vehicle",
        "iou_threshold_vru": "iou_threshold_vru",
        "detection_distance": "detection_distance_m",
        "bonus_factor": "bonus_factor",
        "k_sigmoid": "k_sigmoid_per_s",
        "t_falloff": "t_falloff_s",
        "d_falloff": "d_falloff_m",
        "brake_decel": "brake_decel_mps2",
        "lane_match_threshold": "lane_match_threshold_m",
        "vru_default_age": "vru_default_age_years",
    }

    @classmethod
    def from_mapping(cls, doc: Mapping[str, Any] | None, source=None, locus="params") -> "MetricParams":
        if doc is None:
            return cls()
        if not isinstance(doc, Mapping):
            raise ParseError("expected an object", source, locus)
        inverse = {v: k for k, v in cls.KEYS.items()}
        unknown = sorted(set(doc) - set(inverse))
        if unknown:
            raise ParseError(f"unknown key(s) {unknown}", source, locus)
        kwargs = {inverse[k]: _number(v, f"{locus}.{k}", source) for k, v in doc.items()}
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        return {doc_key: getattr(self, name) for name, doc_key in self.KEYS.items()}

    def problems(self) -> list[str]:
        out = []
        if self.power_mean_p < 1.0:
            out.append("power_mean_p must be >= 1")
        for name in ("iou_threshold_vehicle", "iou_threshold_vru"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                out.append(f"{name} must lie in (0, 1]")
        for name in ("detection_distance", "k_sigmoid", "t_falloff", "d_falloff",
                     "brake_decel", "lane_match_threshold"):
            if getattr(self, name) <= 0.0:
                out.append(f"{name} must be > 0")
        if self.bonus_factor <= 0.0:
            out.append("bonus_factor must be > 0")
        if not 0.0 <= self.vru_default_age <= 120.0:
            out.append("vru_default_age must lie in [0, 120]")
        return out


@dataclass(frozen=True)
class SensorConfig:
    seed: int
    max_lane_distance: float
    lane_noise_sigma: float
    detect_prob_curve: tuple[tuple[float, float], ...]
    bbox_size_jitter_sigma: float
    heading_jitter_sigma: float
    force_miss_ids: tuple[str, ...] = ()
    ghost_rate: float = 0.0

    KEYS = {
        "seed": "seed",
        "max_lane_distance": "max_lane_distance_m",
        "lane_noise_sigma": "lane_noise_sigma_m",
        "detect_prob_curve": "detect_prob_curve",
        "bbox_size_jitter_sigma": "bbox_size_jitter_sigma",
        "heading_jitter_sigma": "heading_jitter_sigma_rad",
        "force_miss_ids": "force_miss_ids",
        "ghost_rate": "ghost_rate_per_frame",
    }

    @classmethod
    def default(cls) -> "SensorConfig":
        return cls.from_mapping({}, base=None)

    @classmethod
    def from_mapping(cls, doc: Mapping[str, Any] | None, source=None, locus="sensor",
                     base: "SensorConfig | None" = None) -> "SensorConfig":
        """Overlay ``doc`` on ``base`` (the packaged defaults when omitted)."""
        if base is None:
            merged = dict(_packaged_sensor_defaults())
        else:
            merged = base.to_mapping()
        if doc is not None:
            if not isinstance(doc, Mapping):
                raise ParseError("expected an object", source, locus)
            merged.update(doc)
        inverse = {v: k for k, v in cls.KEYS.items()}
        unknown = sorted(set(merged) - set(inverse))
        if unknown:
            raise ParseError(f"unknown key(s) {unknown}", source, locus)

        kw: dict[str, Any] = {}
        for key, value in merged.items():
            name = inverse[key]
            where = f"{locus}.{key}"
            if name == "seed":
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ParseError("seed must be an integer", source, where)
                kw[name] = int(value)
            elif name == "detect_prob_curve":
                if not isinstance(value, (list, tuple)):
                    raise ParseError("expected a list of [edge_m, probability]", source, where)
                curve = []
                for i, row in enumerate(value):
                    if not isinstance(row, (list, tuple)) or len(row) != 2:
                        raise ParseError("expected [edge_m, probability]", source, f"{where}[{i}]")
                    curve.append((_number(row[0], f"{where}[{i}][0]", source),
                                  _number(row[1], f"{where}[{i}][1]", source)))
                kw[name] = tuple(curve)
            elif name == "force_miss_ids":
                if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
                    raise ParseError("expected a list of object ids", source, where)
                kw[name] = tuple(value)
            else:
                kw[name] = _number(value, where, source)
        missing = [f.name for f in fields(cls) if f.name not in kw and f.name not in ("force_miss_ids", "ghost_rate")]
        if missing:
            raise ParseError(f"missing key(s) {missing}", source, locus)
        return cls(**kw)

    def to_mapping(self) -> dict:
        out = {}
        for name, key in self.KEYS.items():
            v = getattr(self, name)
            if name == "detect_prob_curve":
                v = [list(row) for row in v]
            elif name == "force_miss_ids":
                v = list(v)
            out[key] = v
        return out

    def problems(self) -> list[str]:
        out = []
        edges = [e for e, _ in self.detect_prob_curve]
        if any(b <= a for a, b in zip(edges, edges[1:])) or any(e <= 0 for e in edges):
            out.append("detect_prob_curve edges must be positive and strictly increasing")
        if any(not 0.0 <= p <= 1.0 for _, p in self.detect_prob_curve):
            out.append("detect_prob_curve probabilities must lie in [0, 1]")
        for name in ("lane_noise_sigma", "bbox_size_jitter_sigma", "heading_jitter_sigma", "ghost_rate"):
            if getattr(self, name) < 0.0:
                out.append(f"{name} must be >= 0")
        if self.max_lane_distance <= 0.0:
            out.append("max_lane_distance must be > 0")
        if not 0 <= self.seed < 2**64:
            out.append("seed must be a 64-bit unsigned integer")
        return out


def _packaged_sensor_defaults() -> dict:
    text = resources.files("epsm.data").joinpath("sensor_default.toml").read_text(encoding="utf-8")
    doc = tomllib.loads(text)
    return doc["sensor"]
