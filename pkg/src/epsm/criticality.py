"""Per-object criticality from constant-velocity encounter geometry.

Objects are disks (radius = half the footprint diagonal) moving at their
current velocity. From the relative motion we get the time to contact (TTC)
and the time/separation of the closest encounter (TTCE / d_TTCE), which are
squashed through logistic falloffs and combined by ``max``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .params import MetricParams
from .scenario import ObjectState

_DEFAULT = MetricParams()


@dataclass(frozen=True)
class EncounterResult:
    ttc: Optional[float]
    ttce: float
    d_ttce: float
    # separation is currently shrinking; False for diverging or co-moving pairs
    closing: bool = True


def encounter(ego: ObjectState, obj: ObjectState) -> EncounterResult:
    return encounters(ego, [obj])[0]


def encounters(ego: ObjectState, objs) -> list[EncounterResult]:
    """Vectorised :func:`encounter` of ``ego`` against many objects."""
    if not objs:
        return []
    dp = np.array([o.position for o in objs], dtype=np.float64) - np.asarray(ego.position)
    dv = np.array([o.velocity for o in objs], dtype=np.float64) - np.asarray(ego.velocity)
    r = np.array([ego.radius + o.radius for o in objs])
    ttc, ttce, d, closing = kernels.encounter_batch(dp, dv, r)
    return [
        EncounterResult(None if math.isnan(ttc[i]) else float(ttc[i]), float(ttce[i]),
                        float(d[i]), bool(closing[i]))
        for i in range(len(objs))
    ]


def _falloff(x: float, midpoint: float, k: float) -> float:
    """1 / (1 + exp(k (x - midpoint))) without overflow."""
    z = k * (x - midpoint)
    if z >= 0.0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


def criticality_from_ttc(ttc: Optional[float], params: MetricParams = _DEFAULT) -> float:
    if ttc is None:
        return 0.0
    return _falloff(ttc, params.t_falloff, params.k_sigmoid)


def criticality_from_ttce(ttce: float, d_ttce: float, params: MetricParams = _DEFAULT,
                          closing: bool = True) -> float:
    """Larger of the time and distance falloffs at the closest encounter.

    The time term only applies to an encounter that still lies ahead
    (``closing``); for diverging or co-moving pairs the closest encounter is
    "now" and only the present clearance matters.
    """
    dist = _falloff(d_ttce, params.d_falloff, params.k_sigmoid)
    if not closing:
        return dist
    return max(_falloff(ttce, params.t_falloff, params.k_sigmoid), dist)


def _encounter_score(enc: EncounterResult, params: MetricParams) -> float:
    return max(criticality_from_ttc(enc.ttc, params),
               criticality_from_ttce(enc.ttce, enc.d_ttce, params, enc.closing))


def is_behind(ego: ObjectState, obj: ObjectState) -> bool:
    dx = obj.position[0] - ego.position[0]
    dy = obj.position[1] - ego.position[1]
    return dx * math.cos(ego.heading) + dy * math.sin(ego.heading) < 0.0


def rear_criticality(ego: ObjectState, obj: ObjectState, params: MetricParams = _DEFAULT,
                     enc: Optional[EncounterResult] = None) -> float:
    """Criticality of a vehicle behind the ego, rated from its own perspective."""
    if not is_behind(ego, obj):
        return 0.0
    if enc is None:
        enc = encounter(obj, ego)
    return _encounter_score(enc, params)


def vru_zone_radius(vru: ObjectState) -> float:
    # zone diameter is eight times the VRU speed
    return 4.0 * vru.speed


def vru_criticality(ego: ObjectState, vru: ObjectState, params: MetricParams = _DEFAULT,
                    enc: Optional[EncounterResult] = None) -> float:
    d = math.hypot(vru.position[0] - ego.position[0], vru.position[1] - ego.position[1])
    if d < vru_zone_radius(vru):
        return 1.0
    if enc is None:
        enc = encounter(ego, vru)
    return criticality_from_ttce(enc.ttce, enc.d_ttce, params, enc.closing)


def object_criticality(ego: ObjectState, obj: ObjectState, params: MetricParams = _DEFAULT,
                       enc: Optional[EncounterResult] = None) -> float:
    """Final criticality C_o in [0, 1]."""
    if enc is None:
        enc = encounter(ego, obj)
    if obj.category.is_vru:
        return vru_criticality(ego, obj, params, enc)
    c_ttc = criticality_from_ttc(enc.ttc, params)
    c_ttce = criticality_from_ttce(enc.ttce, enc.d_ttce, params, enc.closing)
    # encounter() is symmetric, so the rear view reuses the same result
    c_rear = rear_criticality(ego, obj, params, enc)
    return max(c_ttc, c_ttce, c_rear)
