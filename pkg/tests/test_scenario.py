import json
from dataclasses import replace
from importlib import resources

import pytest
from hypothesis import given, strategies as st

from epsm import synth
from epsm.errors import ParseError, ValidationError
from epsm.params import MetricParams
from epsm.scenario import (ObjectClass, Scenario, dumps_scenario, frames, load_scenario,
                           loads_scenario, parse_scenario, scenario_to_doc, validate)

MINIMAL = {
    "id": "minimal",
    "map": {
        "speed_limit_mps": 13.9,
        "ego_lane": {"centerline_m": [[0, 0], [100, 0]], "width_m": 3.5},
        "adjacent": [],
    },
    "frames": [{
        "t_s": 0.0,
        "ego": {"id": "ego", "class": "Car", "position_m": [0, 0], "heading_rad": 0.0,
                "velocity_mps": [10, 0], "length_m": 4.5, "width_m": 1.9},
        "objects": [],
    }],
}


def bundled(name):
    return resources.files("epsm.data").joinpath("scenarios", name)


def doc_with(**frame_changes):
    d = json.loads(json.dumps(MINIMAL))
    d["frames"][0].update(frame_changes)
    return d


def ped(id="p1", age=30):
    return {"id": id, "class": "Pedestrian", "position_m": [5, 3], "heading_rad": 0.0,
            "velocity_mps": [0, 0], "length_m": 0.6, "width_m": 0.6, "age_years": age}


def test_minimal_document_loads():
    sc = parse_scenario(MINIMAL)
    assert len(sc.frames) == 1
    assert sc.params == MetricParams()
    assert sc.frames[0].detections is None


def test_duplicate_object_id_rejected():
    with pytest.raises(ValidationError) as exc:
        parse_scenario(doc_with(objects=[ped("p1"), ped("p1")]))
    assert any(v.rule == "unique_id" for v in exc.value.violations)


def test_bundled_crossing_has_28_frames():
    with resources.as_file(bundled("crossing.json")) as p:
        sc = load_scenario(p)
    assert len(sc.frames) == 28
    assert sc.colliding_ids == ("ego", "car_cross")
    ts = [f.t for f in frames(sc)]
    assert ts == sorted(ts) and len(ts) == 28


def test_validate_clean_scenario_is_empty():
    assert validate(parse_scenario(MINIMAL)) == []


def test_decreasing_time_flagged():
    sc = synth.perfect_scenario(3)
    fs = list(sc.frames)
    fs[2] = replace(fs[2], t=0.05)
    rules = {v.rule for v in validate(replace(sc, frames=tuple(fs)))}
    assert "monotone_time" in rules


def test_age_out_of_range_flagged():
    sc = parse_scenario(doc_with(objects=[ped(age=200)]), check=False)
    viol = validate(sc)
    assert [v.rule for v in viol] == ["age_range"]
    assert viol[0].frame == 0 and viol[0].entity == "p1"


def test_frames_iteration():
    assert list(frames(replace(parse_scenario(MINIMAL), frames=()))) == []
    two = synth.perfect_scenario(2)
    a, b = list(frames(two))
    assert a.t < b.t


def test_unknown_key_reports_locus():
    d = doc_with()
    d["frames"][0]["ego"]["colour"] = "red"
    with pytest.raises(ParseError) as exc:
        parse_scenario(d, source="x.json")
    assert "frames[0].ego" in str(exc.value)
    assert exc.value.source == "x.json"


def test_bad_class_rejected():
    d = doc_with(objects=[dict(ped(), **{"class": "Horse"})])
    with pytest.raises(ParseError):
        parse_scenario(d)


def test_json_syntax_error_has_line_and_column():
    with pytest.raises(ParseError) as exc:
        loads_scenario('{"id": "a",\n  "map": }', "f.json")
    assert exc.value.locus.startswith("line 2")


def test_nan_literal_rejected():
    text = json.dumps(MINIMAL).replace('"heading_rad": 0.0', '"heading_rad": NaN', 1)
    with pytest.raises(ParseError):
        loads_scenario(text)


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_scenario(tmp_path / "nope.json")


def test_default_pedestrian_age_left_absent():
    p = ped()
    del p["age_years"]
    sc = parse_scenario(doc_with(objects=[p]))
    assert sc.frames[0].objects[0].age is None


@pytest.mark.parametrize("make", [synth.crossing_scenario, synth.perfect_scenario,
                                  lambda: synth.random_corpus(1)[0]])
def test_round_trip(make):
    sc = make()
    again = loads_scenario(dumps_scenario(sc))
    assert scenario_to_doc(again) == scenario_to_doc(sc)
    assert again == sc


@given(st.binary(max_size=200))
def test_arbitrary_bytes_never_crash(blob):
    try:
        loads_scenario(blob)
    except (ParseError, ValidationError):
        pass


@given(st.recursive(st.none() | st.booleans() | st.floats(allow_nan=False) | st.text(max_size=5),
                    lambda c: st.lists(c, max_size=3) | st.dictionaries(st.text(max_size=6), c, max_size=3),
                    max_leaves=12))
def test_arbitrary_json_values_never_crash(doc):
    try:
        parse_scenario(doc)
    except (ParseError, ValidationError):
        pass


def test_mutated_minimal_documents_never_crash():
    keys = [("t_s", -1.0), ("t_s", "x"), ("objects", {}), ("ego", None), ("detections", {"boxes": 3})]
    for k, v in keys:
        try:
            parse_scenario(doc_with(**{k: v}))
        except (ParseError, ValidationError):
            continue


def test_object_class_vru_flag():
    assert ObjectClass.PEDESTRIAN.is_vru and ObjectClass.CYCLIST.is_vru
    assert not ObjectClass.MOTORCYCLE.is_vru
