"""Collision severity I in [0, 1] from injury-outcome regressions.

VRUs use a pedestrian fatality / killed-or-seriously-injured regression over
vehicle speed and pedestrian age. Vehicles use three logistic models (fatal,
MAIS 3+, MAIS 2+) over relative speed and impact direction whose
coefficients come from a TOML file. In both cases the most severe outcome
with probability >= 0.5 selects a severity band and the probability is
mapped linearly into it.

All speeds enter the regressions in km/h.
"""
from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DomainError, ModelError
from .params import MetricParams
from .scenario import ObjectState

MPS_TO_KMH = 3.6

# upper edge of the half-open serious-injury bands
_BELOW_08 = math.nextafter(0.8, 0.0)


class ImpactDirection(str, enum.Enum):
    FRONT = "front"
    SIDE = "side"
    REAR = "rear"


def to_kmh(v_mps: float) -> float:
    return v_mps * MPS_TO_KMH


def _logistic(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def pedestrian_fatality_prob(v_kmh: float, age: float) -> float:
    return _logistic(-8.0941 + 0.0012 * v_kmh * v_kmh + 0.0525 * age)


def pedestrian_ksi_prob(v_kmh: float, age: float) -> float:
    return _logistic(-2.9893 + 0.0013 * v_kmh * v_kmh + 0.0286 * age)


def linear_map(p: float, p_min: float, p_max: float, i_min: float, i_max: float) -> float:
    if not p_min < p_max or not i_min <= i_max:
        raise DomainError(f"bad interval: p in [{p_min}, {p_max}], I in [{i_min}, {i_max}]")
    if not p_min <= p <= p_max:
        raise DomainError(f"p={p} outside [{p_min}, {p_max}]")
    return i_min + (p - p_min) * (i_max - i_min) / (p_max - p_min)


def vru_severity(ego_speed: float, age: float) -> float:
    """Severity of hitting a VRU at ``ego_speed`` (m/s)."""
    v = to_kmh(ego_speed)
    p_k = pedestrian_fatality_prob(v, age)
    if p_k >= 0.5:
        return linear_map(p_k, 0.5, 1.0, 0.8, 1.0)
    p_ksi = pedestrian_ksi_prob(v, age)
    if p_ksi >= 0.5:
        return min(linear_map(p_ksi, 0.5, 1.0, 0.4, 0.8), _BELOW_08)
    return linear_map(p_ksi, 0.0, 0.5, 0.0, 0.4)


_TERMS = {"1", "V", "V2", "front", "side", "rear"}
_MODEL_NAMES = ("fatal", "mais3", "mais2")


@dataclass(frozen=True)
class VehicleSeverityModel:
    fatal: tuple[tuple[str, float], ...]
    mais3: tuple[tuple[str, float], ...]
    mais2: tuple[tuple[str, float], ...]
    version: str = ""

    @classmethod
    def from_mapping(cls, doc: Mapping, source=None) -> "VehicleSeverityModel":
        where = f"{source}: " if source else ""
        models = doc.get("models") if isinstance(doc, Mapping) else None
        if not isinstance(models, Mapping):
            raise ModelError(f"{where}missing [models] table")
        kw = {}
        for name in _MODEL_NAMES:
            m = models.get(name)
            if not isinstance(m, Mapping) or not isinstance(m.get("terms"), list):
                raise ModelError(f"{where}model '{name}' missing or has no 'terms' list")
            terms = []
            for row in m["terms"]:
                if (not isinstance(row, list) or len(row) != 2 or row[0] not in _TERMS
                        or isinstance(row[1], bool) or not isinstance(row[1], (int, float))):
                    raise ModelError(f"{where}model '{name}': bad term {row!r}")
                terms.append((row[0], float(row[1])))
            kw[name] = tuple(terms)
        version = str(doc.get("meta", {}).get("version", ""))
        return cls(version=version, **kw)

    def probability(self, name: str, v_kmh: float, direction: ImpactDirection) -> float:
        z = 0.0
        for term, coef in getattr(self, name):
            if term == "1":
                x = 1.0
            elif term == "V":
                x = v_kmh
            elif term == "V2":
                x = v_kmh * v_kmh
            else:
                x = 1.0 if term == direction.value else 0.0
            z += coef * x
        return _logistic(z)


def load_vehicle_model(path: Optional[Path] = None) -> VehicleSeverityModel:
    """Load coefficients from ``path``, or the packaged defaults."""
    try:
        if path is None:
            text = resources.files("epsm.data").joinpath("severity_models.toml").read_text("utf-8")
            source = "severity_models.toml"
        else:
            text = Path(path).read_text(encoding="utf-8")
            source = str(path)
        doc = tomllib.loads(text)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ModelError(f"cannot read severity model: {exc}") from None
    return VehicleSeverityModel.from_mapping(doc, source)


def vehicle_severity(rel_speed: float, direction: ImpactDirection,
                     model: VehicleSeverityModel) -> float:
    v = to_kmh(rel_speed)
    p = model.probability("fatal", v, direction)
    if p >= 0.5:
        return linear_map(p, 0.5, 1.0, 0.8, 1.0)
    p = model.probability("mais3", v, direction)
    if p >= 0.5:
        return min(linear_map(p, 0.5, 1.0, 0.2, 0.8), _BELOW_08)
    p = model.probability("mais2", v, direction)
    if p >= 0.5:
        return linear_map(p, 0.5, 1.0, 0.0, 0.2)
    return 0.0


def impact_direction(ego: ObjectState, obj: ObjectState) -> ImpactDirection:
    """Bucket the bearing of ``obj`` in the ego frame into front/side/rear."""
    dx = obj.position[0] - ego.position[0]
    dy = obj.position[1] - ego.position[1]
    c, s = math.cos(ego.heading), math.sin(ego.heading)
    bearing = abs(math.degrees(math.atan2(-s * dx + c * dy, c * dx + s * dy)))
    if bearing <= 45.0:
        return ImpactDirection.FRONT
    if bearing >= 135.0:
        return ImpactDirection.REAR
    return ImpactDirection.SIDE


def severity(ego: ObjectState, obj: ObjectState, model: VehicleSeverityModel,
             params: MetricParams = MetricParams()) -> float:
    if obj.category.is_vru:
        age = obj.age if obj.age is not None else params.vru_default_age
        return vru_severity(ego.speed, age)
    rel = math.hypot(obj.velocity[0] - ego.velocity[0], obj.velocity[1] - ego.velocity[1])
    return vehicle_severity(rel, impact_direction(ego, obj), model)
