"""Fuse S_obj and S_lane into the final score S_F and its five-level label."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional


class TreeCase(str, enum.Enum):
    A1 = "A1"      # lane safe, missed object in an adjacent lane -> bonus
    A2 = "A2"      # lane safe, nothing missed nearby -> unchanged
    B1_1 = "B1_1"  # lane unsafe, missed object inside detected lane, on sidewalk -> penalty
    B1_2 = "B1_2"  # lane unsafe, missed object inside detected lane, on road -> penalty
    B2 = "B2"      # lane unsafe, detected lane clear -> bonus


class SafetyLabel(str, enum.Enum):
    INSUFFICIENT = "insufficient"
    VERY_BAD = "very bad"
    BAD = "bad"
    GOOD = "good"
    VERY_GOOD = "very good"


class MissLocation(str, enum.Enum):
    ROAD = "road"
    SIDEWALK = "sidewalk"


@dataclass(frozen=True)
class Adjustment:
    kind: str  # "none" | "bonus" | "penalty"
    factor: float = 1.0
    ttc_min: Optional[float] = None


@dataclass(frozen=True)
class SafetyBreakdown:
    s_obj: float
    s_lane: float
    s_p: float
    tree_case: TreeCase
    adjustment: Adjustment
    s_f: float
    label: SafetyLabel


def power_mean_fuse(s_obj: float, s_lane: float, p: float) -> float:
    deficit = (((1.0 - s_obj) ** p + (1.0 - s_lane) ** p) / 2.0) ** (1.0 / p)
    # the exact value lies in [min, arithmetic mean]; clamp away rounding
    return min(max(1.0 - deficit, min(s_obj, s_lane)), 0.5 * (s_obj + s_lane))


def classify_tree_case(lateral_safe: bool, missed_adjacent: bool,
                       missed_in_lane: Iterable[MissLocation]) -> TreeCase:
    """Pick the interdependence case.

    ``missed_in_lane`` lists where each missed object inside the detected
    lane sits; a single one on the road makes the case B1_2.
    """
    if lateral_safe:
        return TreeCase.A1 if missed_adjacent else TreeCase.A2
    where = list(missed_in_lane)
    if not where:
        return TreeCase.B2
    if all(w == MissLocation.SIDEWALK for w in where):
        return TreeCase.B1_1
    return TreeCase.B1_2


def apply_bonus(s_p: float, f_b: float) -> float:
    if f_b > 1.0:
        s = s_p + (f_b - 1.0) * (1.0 - s_p)
    elif f_b < 1.0:
        s = s_p - (1.0 - f_b) * s_p
    else:
        s = s_p
    return min(max(s, 0.0), 1.0)


# (upper TTC edge in s, factor at lower edge, factor at upper edge)
PENALTY_BANDS = (
    (2.0, 0.6, 0.8),
    (4.0, 0.8, 0.9),
    (8.0, 0.9, 1.0),
)


def penalty_factor(ttc_min: Optional[float]) -> float:
    if ttc_min is None:
        return 1.0
    lo = 0.0
    for hi, f_lo, f_hi in PENALTY_BANDS:
        if ttc_min <= hi:
            return f_lo + (f_hi - f_lo) * (max(ttc_min, 0.0) - lo) / (hi - lo)
        lo = hi
    return 1.0


def apply_penalty(s_p: float, ttc_min: Optional[float]) -> float:
    return min(max(penalty_factor(ttc_min) * s_p, 0.0), 1.0)


def classify_label(s_f: float) -> SafetyLabel:
    if s_f <= 0.2:
        return SafetyLabel.INSUFFICIENT
    if s_f <= 0.4:
        return SafetyLabel.VERY_BAD
    if s_f <= 0.6:
        return SafetyLabel.BAD
    if s_f <= 0.8:
        return SafetyLabel.GOOD
    return SafetyLabel.VERY_GOOD


def final_safety(s_obj: float, s_lane: float, case: TreeCase, p: float, f_b: float,
                 ttc_min: Optional[float] = None) -> SafetyBreakdown:
    """Power-mean fusion followed by the case-dependent adjustment.

    ``ttc_min`` is the smallest predicted TTC among missed objects inside the
    detected lane (None when none of them is on a collision course).
    """
    s_p = power_mean_fuse(s_obj, s_lane, p)
    if case in (TreeCase.A1, TreeCase.B2):
        adj = Adjustment("bonus", f_b)
        s_f = apply_bonus(s_p, f_b)
    elif case in (TreeCase.B1_1, TreeCase.B1_2):
        f_p = penalty_factor(ttc_min)
        adj = Adjustment("penalty", f_p, ttc_min)
        s_f = apply_penalty(s_p, ttc_min)
    else:
        adj = Adjustment("none")
        s_f = s_p
    if math.isnan(s_f):
        raise ValueError("safety score is NaN")
    return SafetyBreakdown(s_obj, s_lane, s_p, case, adj, s_f, classify_label(s_f))
