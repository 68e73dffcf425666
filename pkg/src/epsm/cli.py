"""``epsm`` command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error (bad input files),
3 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, report
from .errors import DataError, ParseError, ValidationError
from .params import MetricParams, SensorConfig, tomllib
from .pipeline import evaluate_scenario
from .scenario import Scenario, dump_scenario, load_scenario, validate
from .sensor import simulate_scenario
from .severity import load_vehicle_model

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _load_config(path) -> dict:
    """Read a TOML or JSON config file into a mapping."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ParseError(exc.strerror or str(exc), str(path)) from None
    try:
        if path.suffix.lower() == ".json":
            doc = json.loads(data.decode("utf-8"))
        else:
            doc = tomllib.loads(data.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, str(path), f"line {exc.lineno} col {exc.colno}") from None
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(str(exc), str(path)) from None
    if not isinstance(doc, dict):
        raise ParseError("expected a table at top level", str(path))
    return doc


def _split_overrides(doc: dict, source) -> tuple[Optional[dict], Optional[dict]]:
    """Accept either ``{params: {...}, sensor: {...}}`` or a bare params table."""
    if set(doc) <= {"params", "sensor"}:
        return doc.get("params"), doc.get("sensor")
    return doc, None


def _sensor_from_file(path, base: Optional[SensorConfig]) -> SensorConfig:
    doc = _load_config(path)
    table = doc["sensor"] if set(doc) == {"sensor"} else doc
    cfg = SensorConfig.from_mapping(table, str(path), base=base)
    probs = cfg.problems()
    if probs:
        raise ParseError("; ".join(probs), str(path), "sensor")
    return cfg


def _apply_overrides(sc: Scenario, params_doc, sensor_doc, source) -> Scenario:
    if params_doc is not None:
        merged = {**sc.params.to_mapping(), **params_doc}
        sc = replace(sc, params=MetricParams.from_mapping(merged, source))
    if sensor_doc is not None:
        sc = replace(sc, sensor=SensorConfig.from_mapping(sensor_doc, source, base=sc.sensor))
    if params_doc is not None or sensor_doc is not None:
        problems = validate(sc)
        if problems:
            raise ValidationError(problems, source)
    return sc


def _evaluate_one(path: str, params_doc, sensor_doc, params_source, seed):
    """Worker: returns ("ok", rows, summary) or ("error", kind, message)."""
    try:
        sc = load_scenario(path)
        sc = _apply_overrides(sc, params_doc, sensor_doc, params_source)
        res = evaluate_scenario(sc, load_vehicle_model(), sc.params, seed=seed)
        return "ok", report.scenario_rows(res), report.scenario_summary(res), sc.params
    except DataError as exc:
        return "error", "data", str(exc), None
    except Exception:  # noqa: BLE001 - reported as internal
        return "error", "internal", traceback.format_exc(limit=5), None


# ----------------------------------------------------------------------------
# commands


def cmd_evaluate(args) -> int:
    params_doc = sensor_doc = None
    if args.params:
        params_doc, sensor_doc = _split_overrides(_load_config(args.params), args.params)
    if args.jobs < 1:
        raise _UsageError("--jobs must be >= 1")
    work = [(str(p), params_doc, sensor_doc, args.params, args.seed) for p in args.inputs]
    if args.jobs == 1 or len(work) == 1:
        outcomes = [_evaluate_one(*w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_evaluate_one, *zip(*work)))

    rows, scen, errors = [], {}, []
    params_seen = None
    status = EXIT_OK
    for (path, *_), out in zip(work, outcomes):
        if out[0] == "ok":
            _, r, summary, params = out
            rows.extend(r)
            if r:
                scen[r[0]["scenario_id"]] = summary
            params_seen = params_seen or params
            continue
        _, kind, msg, _ = out
        print(f"epsm: {msg}" if kind == "data" else f"epsm: internal error in {path}:\n{msg}", file=sys.stderr)
        errors.append({"source": path, "kind": kind, "message": msg.strip().splitlines()[-1]})
        status = max(status, EXIT_DATA if kind == "data" else EXIT_INTERNAL)
        if not args.keep_going:
            return status

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "frames.csv").write_text(report.rows_to_csv(rows), encoding="utf-8")
    doc = report.summary_doc(rows, scen, args.seed, params_seen, errors)
    (out_dir / "summary.json").write_text(report.dumps_summary(doc), encoding="utf-8")
    table = report.format_table(report.aggregate(rows),
                                report.describe(report.scenario_scores(rows).values()))
    (out_dir / "table.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return status


def cmd_simulate(args) -> int:
    sc = load_scenario(args.input)
    if not args.overwrite and any(f.detections is not None for f in sc.frames):
        print(f"epsm: {args.input} already contains detections (use --overwrite)", file=sys.stderr)
        return EXIT_DATA
    cfg = _sensor_from_file(args.sensor, sc.sensor) if args.sensor else None
    out = simulate_scenario(sc, cfg, seed=args.seed, overwrite=True)
    dump_scenario(out, args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    rows = []
    for p in args.csvs:
        try:
            rows.extend(report.read_frame_csv(p))
        except OSError as exc:
            raise ParseError(exc.strerror or str(exc), str(p)) from None
    table = report.format_table(report.aggregate(rows),
                                report.describe(report.scenario_scores(rows).values()))
    sys.stdout.write(table)
    if args.plots:
        report.write_series(rows, args.plots)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="epsm", description="Safety-oriented evaluation of perception output.")
    p.add_argument("--version", action="version", version=f"epsm {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("evaluate", help="score scenarios and write per-frame and aggregate reports")
    e.add_argument("inputs", nargs="+", metavar="FILE")
    e.add_argument("--params", help="TOML/JSON with a params and/or sensor table")
    e.add_argument("--seed", type=int, help="sensor seed for frames without detections")
    e.add_argument("--out", default="epsm-out", help="output directory (default: %(default)s)")
    e.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")
    e.add_argument("--keep-going", action="store_true", help="record failing scenarios and continue")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("simulate", help="fill in detections with the statistical sensor model")
    s.add_argument("input", metavar="FILE")
    s.add_argument("--sensor", help="sensor config (TOML/JSON); defaults to the scenario's own")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--overwrite", action="store_true", help="replace existing detections")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="aggregate per-frame CSVs")
    r.add_argument("csvs", nargs="+", metavar="CSV")
    r.add_argument("--plots", metavar="DIR", help="write one time-series CSV per metric")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"epsm: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return 130
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
