"""Per-frame CSV rows, aggregate statistics and plot-data series.

Rows are formatted once, with six-decimal fixed point, and every aggregate is
computed from the formatted values. Anyone holding the CSV can then rebuild
the aggregate table exactly.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from . import __version__
from .errors import SchemaMismatch
from .params import MetricParams
from .pipeline import FrameResult, ScenarioResult

FRAME_COLUMNS = (
    "scenario_id", "frame", "t_s", "n_gt", "tp", "fp", "fn",
    "obj_precision", "obj_recall", "obj_f1", "moda_cum", "modp",
    "lane_precision", "lane_recall", "lane_f1", "lane_accuracy",
    "d_lat_mean_m", "s_long", "s_lat", "s_sem", "lateral_safe",
    "s_obj", "s_lane", "s_p", "tree_case", "adjustment", "s_f", "label",
)

METRIC_GROUPS = (
    ("Object Detection", ("obj_precision", "obj_recall", "obj_f1", "moda_cum", "modp")),
    ("Lane Detection", ("lane_precision", "lane_recall", "lane_f1", "lane_accuracy", "d_lat_mean_m")),
    ("EPSM", ("s_obj", "s_lane", "s_p", "s_f")),
)
METRICS = tuple(m for _, ms in METRIC_GROUPS for m in ms)


def fmt(x: Optional[float]) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def frame_row(r: FrameResult, moda_cum: float) -> dict[str, str]:
    s = r.safety
    adj = s.adjustment.kind if s.adjustment.kind == "none" else f"{s.adjustment.kind}:{s.adjustment.factor:.6f}"
    return {
        "scenario_id": r.scenario_id,
        "frame": str(r.index),
        "t_s": fmt(r.t),
        "n_gt": str(r.n_gt),
        "tp": str(r.matches.tp),
        "fp": str(len(r.matches.fp_indices)),
        "fn": str(len(r.matches.fn_ids)),
        "obj_precision": fmt(r.obj_scores.precision),
        "obj_recall": fmt(r.obj_scores.recall),
        "obj_f1": fmt(r.obj_scores.f1),
        "moda_cum": fmt(moda_cum),
        "modp": fmt(r.modp.value),
        "lane_precision": fmt(r.lane_scores.precision),
        "lane_recall": fmt(r.lane_scores.recall),
        "lane_f1": fmt(r.lane_scores.f1),
        "lane_accuracy": fmt(r.lane_scores.accuracy),
        "d_lat_mean_m": fmt(r.lane.d_lat_mean),
        "s_long": fmt(r.lane.s_long),
        "s_lat": fmt(r.lane.s_lat),
        "s_sem": fmt(r.lane.s_sem),
        "lateral_safe": "1" if r.lane.lateral_safe else "0",
        "s_obj": fmt(s.s_obj),
        "s_lane": fmt(s.s_lane),
        "s_p": fmt(s.s_p),
        "tree_case": s.tree_case.value,
        "adjustment": adj,
        "s_f": fmt(s.s_f),
        "label": s.label.value,
    }


def scenario_rows(res: ScenarioResult) -> list[dict[str, str]]:
    return [frame_row(f, m) for f, m in zip(res.frames, res.moda_cumulative)]


def rows_to_csv(rows: Iterable[Mapping[str, str]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FRAME_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def read_frame_csv(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = tuple(reader.fieldnames or ())
        if header != FRAME_COLUMNS:
            missing = [c for c in FRAME_COLUMNS if c not in header]
            extra = [c for c in header if c not in FRAME_COLUMNS]
            raise SchemaMismatch(f"{path}: column schema differs (missing {missing}, unexpected {extra})")
        return list(reader)


# ----------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class Stats:
    mean: float
    std: float
    min: float
    max: float
    n: int


def describe(values: Iterable[float]) -> Stats:
    """Mean, population standard deviation, min and max of the finite values."""
    xs = [float(v) for v in values if not math.isnan(float(v))]
    if not xs:
        return Stats(math.nan, math.nan, math.nan, math.nan, 0)
    n = len(xs)
    mu = math.fsum(xs) / n
    var = math.fsum((x - mu) ** 2 for x in xs) / n
    # fsum keeps mu inside [min, max] except for a final rounding; clamp that
    lo, hi = min(xs), max(xs)
    return Stats(min(max(mu, lo), hi), math.sqrt(var), lo, hi, n)


def aggregate(rows: Sequence[Mapping[str, str]], metrics: Sequence[str] = METRICS) -> dict[str, Stats]:
    return {m: describe(float(r[m]) for r in rows) for m in metrics}


def scenario_scores(rows: Sequence[Mapping[str, str]]) -> dict[str, float]:
    """Worst-case (minimum) S_F per scenario, in order of first appearance."""
    out: dict[str, float] = {}
    for r in rows:
        v = float(r["s_f"])
        sid = r["scenario_id"]
        out[sid] = min(out.get(sid, v), v)
    return out


def format_table(agg: Mapping[str, Stats], scenario_agg: Optional[Stats] = None) -> str:
    head = f"{'metric':<16}{'mu':>11}{'sigma':>11}{'min':>11}{'max':>11}{'n':>7}"
    lines = ["frame-level statistics (sigma = population standard deviation)", head]
    for group, metrics in METRIC_GROUPS:
        lines.append(f"[{group}]")
        for m in metrics:
            s = agg[m]
            lines.append(f"{m:<16}{fmt(s.mean):>11}{fmt(s.std):>11}{fmt(s.min):>11}{fmt(s.max):>11}{s.n:>7}")
    if scenario_agg is not None:
        s = scenario_agg
        lines.append("[Scenario level: minimum S_F per scenario]")
        lines.append(f"{'min_s_f':<16}{fmt(s.mean):>11}{fmt(s.std):>11}{fmt(s.min):>11}{fmt(s.max):>11}{s.n:>7}")
    return "\n".join(lines) + "\n"


def _json_num(x: float):
    return None if math.isnan(x) else float(fmt(x))


def _stats_doc(s: Stats) -> dict:
    return {"mean": _json_num(s.mean), "std": _json_num(s.std), "min": _json_num(s.min),
            "max": _json_num(s.max), "n": s.n}


def params_hash(params: MetricParams) -> str:
    blob = json.dumps(params.to_mapping(), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def scenario_summary(res: ScenarioResult) -> dict:
    return {
        "min_s_f": _json_num(float(fmt(res.min_s_f))),
        "moda": _json_num(res.moda),
        "ap_allpoint": {k: _json_num(v) for k, v in sorted(res.ap_allpoint.items())},
        "ap_11point": {k: _json_num(v) for k, v in sorted(res.ap_11point.items())},
    }


def summary_doc(rows: Sequence[Mapping[str, str]], scenarios: Mapping[str, dict] = {},
                seed: Optional[int] = None, params: Optional[MetricParams] = None,
                errors: Sequence[Mapping[str, str]] = ()) -> dict:
    """Aggregate summary as a JSON-ready mapping, free of timestamps and paths."""
    per_scen = scenario_scores(rows)
    doc = {
        "run_meta": {
            "seed": seed,
            "params_hash": params_hash(params) if params is not None else None,
            "version": __version__,
            "std_convention": "population",
        },
        "frames": len(rows),
        "frame_aggregate": {m: _stats_doc(s) for m, s in aggregate(rows).items()},
        "scenario_aggregate": {"min_s_f": _stats_doc(describe(per_scen.values()))},
        "scenarios": dict(scenarios),
    }
    if errors:
        doc["errors"] = [dict(e) for e in errors]
    return doc


def dumps_summary(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_series(rows: Sequence[Mapping[str, str]], out_dir) -> list[Path]:
    """One CSV per metric holding (scenario_id, frame, t_s, value) for plotting."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for m in METRICS:
        path = out_dir / f"{m}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("scenario_id", "frame", "t_s", m))
            for r in rows:
                w.writerow((r["scenario_id"], r["frame"], r["t_s"], r[m]))
        written.append(path)
    return written
