import json
from dataclasses import replace

import pytest

from epsm.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from epsm.report import read_frame_csv
from epsm.scenario import dump_scenario, load_scenario
from epsm.synth import perfect_scenario


@pytest.fixture(scope="module")
def corpus(scenario_dir):
    return [str(scenario_dir / f"{n}.json") for n in ("crossing", "perfect", "urban")]


def run(*argv):
    return main([str(a) for a in argv])


def outputs(d):
    return {n: (d / n).read_bytes() for n in ("frames.csv", "summary.json", "table.txt")}


def test_evaluate_is_deterministic(corpus, tmp_path, capsys):
    assert run("evaluate", *corpus, "--seed", 42, "--out", tmp_path / "a") == EXIT_OK
    assert run("evaluate", *corpus, "--seed", 42, "--out", tmp_path / "b") == EXIT_OK
    assert run("evaluate", *corpus, "--seed", 42, "--out", tmp_path / "c", "--jobs", 2) == EXIT_OK
    a = outputs(tmp_path / "a")
    assert a == outputs(tmp_path / "b") == outputs(tmp_path / "c")
    assert "[EPSM]" in capsys.readouterr().out
    meta = json.loads(a["summary.json"])["run_meta"]
    assert meta["seed"] == 42 and meta["std_convention"] == "population"


def test_perfect_scenario_report(scenario_dir, tmp_path):
    assert run("evaluate", scenario_dir / "perfect.json", "--out", tmp_path) == EXIT_OK
    rows = read_frame_csv(tmp_path / "frames.csv")
    assert rows and all(r["s_f"] == "1.000000" and r["label"] == "very good" for r in rows)


def test_usage_errors(capsys):
    assert run() == EXIT_USAGE
    assert run("evaluate") == EXIT_USAGE
    assert run("frobnicate") == EXIT_USAGE
    assert run("evaluate", "x.json", "--jobs", 0) == EXIT_USAGE


def test_data_errors_and_keep_going(scenario_dir, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"id": "x",\n  "frames": [}')
    assert run("evaluate", bad, "--out", tmp_path / "o") == EXIT_DATA
    assert "line 2" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()
    code = run("evaluate", bad, scenario_dir / "perfect.json", "--out", tmp_path / "k", "--keep-going")
    assert code == EXIT_DATA
    doc = json.loads((tmp_path / "k" / "summary.json").read_text())
    assert doc["errors"][0]["source"] == str(bad) and "perfect" in doc["scenarios"]
    assert run("evaluate", tmp_path / "missing.json", "--out", tmp_path / "m") == EXIT_DATA


def test_params_override(scenario_dir, tmp_path):
    cfg = tmp_path / "p.toml"
    cfg.write_text("[params]\npower_mean_p = 1.0\n")
    assert run("evaluate", scenario_dir / "crossing.json", "--params", cfg, "--out", tmp_path / "o") == EXIT_OK
    for r in read_frame_csv(tmp_path / "o" / "frames.csv"):
        # p = 1 is the arithmetic mean
        mean = (float(r["s_obj"]) + float(r["s_lane"])) / 2
        assert float(r["s_p"]) == pytest.approx(mean, abs=2e-6)
    cfg.write_text("[params]\npower_mean_p = 0.5\n")
    assert run("evaluate", scenario_dir / "crossing.json", "--params", cfg, "--out", tmp_path / "x") == EXIT_DATA


def ground_truth_only(tmp_path):
    sc = perfect_scenario()
    sc = replace(sc, frames=tuple(replace(f, detections=None) for f in sc.frames))
    p = tmp_path / "gt.json"
    dump_scenario(sc, p)
    return p


def test_simulate_round_trip(tmp_path):
    src = ground_truth_only(tmp_path)
    exact = tmp_path / "exact.toml"
    exact.write_text("[sensor]\nlane_noise_sigma_m = 0.0\nbbox_size_jitter_sigma = 0.0\n"
                     "heading_jitter_sigma_rad = 0.0\ndetect_prob_curve = [[1000.0, 1.0]]\n")
    assert run("simulate", src, "--sensor", exact, "--seed", 1, "--out", tmp_path / "s.json") == EXIT_OK
    sim = load_scenario(tmp_path / "s.json")
    for f in sim.frames:
        assert [b.position for b in f.detections.boxes] == [o.position for o in sorted(f.objects, key=lambda o: o.id)]
    assert run("evaluate", tmp_path / "s.json", "--out", tmp_path / "o") == EXIT_OK


def test_simulate_seeds(tmp_path):
    src = ground_truth_only(tmp_path)
    for name, seed in (("a1", 1), ("a2", 1), ("b", 2)):
        assert run("simulate", src, "--seed", seed, "--out", tmp_path / f"{name}.json") == EXIT_OK
    a1, a2, b = ((tmp_path / f"{n}.json").read_bytes() for n in ("a1", "a2", "b"))
    assert a1 == a2 and a1 != b
    load_scenario(tmp_path / "b.json")
    # refuses to clobber detections unless asked
    assert run("simulate", tmp_path / "b.json", "--out", tmp_path / "c.json") == EXIT_DATA
    assert run("simulate", tmp_path / "b.json", "--out", tmp_path / "c.json", "--overwrite") == EXIT_OK


def test_report_command(scenario_dir, tmp_path, capsys):
    run("evaluate", scenario_dir / "crossing.json", scenario_dir / "perfect.json", "--out", tmp_path)
    capsys.readouterr()
    csv_path = tmp_path / "frames.csv"
    assert run("report", csv_path, "--plots", tmp_path / "plots") == EXIT_OK
    assert capsys.readouterr().out == (tmp_path / "table.txt").read_text()
    series = (tmp_path / "plots" / "s_obj.csv").read_text().splitlines()
    assert series[0] == "scenario_id,frame,t_s,s_obj" and len(series) == len(read_frame_csv(csv_path)) + 1
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert run("report", bad) == EXIT_DATA
