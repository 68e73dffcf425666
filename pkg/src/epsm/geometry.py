"""Planar geometry: oriented boxes and polylines."""
from __future__ import annotations

import math

import numpy as np

from . import kernels

RESAMPLE_STEP = 0.5


def wrap_angle(a: float) -> float:
    """Wrap to [-pi, pi)."""
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def box_polygon(position, heading, length, width) -> np.ndarray:
    """Counter-clockwise corners of an oriented rectangle."""
    c, s = math.cos(heading), math.sin(heading)
    hl, hw = 0.5 * length, 0.5 * width
    local = np.array([[hl, -hw], [hl, hw], [-hl, hw], [-hl, -hw]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.asarray(position, dtype=np.float64)


def footprint(obj) -> np.ndarray:
    return box_polygon(obj.position, obj.heading, obj.length, obj.width)


def iou(a, b) -> float:
    """Footprint IoU of two oriented boxes (anything with position/heading/length/width)."""
    inter = kernels.convex_intersection_area(footprint(a), footprint(b))
    union = a.length * a.width + b.length * b.width - inter
    if union <= 0.0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def as_points(polyline) -> np.ndarray:
    return np.asarray(polyline, dtype=np.float64).reshape(-1, 2)


def cumulative_length(pts: np.ndarray) -> np.ndarray:
    seg = np.hypot(*np.diff(pts, axis=0).T)
    return np.concatenate(([0.0], np.cumsum(seg)))


def interpolate(pts: np.ndarray, stations: np.ndarray) -> np.ndarray:
    cum = cumulative_length(pts)
    stations = np.clip(stations, 0.0, cum[-1])
    x = np.interp(stations, cum, pts[:, 0])
    y = np.interp(stations, cum, pts[:, 1])
    return np.column_stack((x, y))


def tangents(pts: np.ndarray, stations: np.ndarray) -> np.ndarray:
    """Unit travel direction of the segment containing each station."""
    cum = cumulative_length(pts)
    k = np.clip(np.searchsorted(cum, stations, side="right") - 1, 0, len(pts) - 2)
    d = pts[k + 1] - pts[k]
    return d / np.hypot(d[:, 0], d[:, 1])[:, None]


def resample(polyline, step: float = RESAMPLE_STEP, start: float = 0.0, stop: float | None = None) -> np.ndarray:
    """Points every ``step`` metres of arc length in [start, stop], endpoint included."""
    pts = as_points(polyline)
    total = cumulative_length(pts)[-1]
    stop = total if stop is None else min(stop, total)
    start = max(start, 0.0)
    if stop < start:
        return np.empty((0, 2))
    n = int(math.floor((stop - start) / step + 1e-9))
    stations = start + step * np.arange(n + 1)
    if stop - stations[-1] > 1e-9:
        stations = np.append(stations, stop)
    return interpolate(pts, stations)


def project(points, polyline):
    """``(distance, signed_offset, station)`` of points against a polyline."""
    return kernels.project_to_polyline(points, polyline)


def distance_to_polyline(points, polyline) -> np.ndarray:
    return project(points, polyline)[0]
