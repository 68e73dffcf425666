"""Numba and numpy backends must agree; both are checked against shapely."""
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st
from shapely.geometry import Polygon

from epsm import geometry, kernels
from epsm.kernels import _numba, _numpy

finite = st.floats(-50, 50, allow_nan=False)


def random_encounters(n, seed):
    rng = np.random.default_rng(seed)
    dp = rng.uniform(-60, 60, (n, 2))
    dv = rng.uniform(-20, 20, (n, 2))
    dv[::7] = 0.0
    r = rng.uniform(0.0, 5.0, n)
    return dp, dv, r


def test_encounter_backends_agree():
    dp, dv, r = random_encounters(2000, 1)
    a = _numba.encounter_batch(dp, dv, r)
    b = _numpy.encounter_batch(dp, dv, r)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-12, equal_nan=True)


def test_projection_backends_agree():
    rng = np.random.default_rng(2)
    poly = np.cumsum(rng.uniform(0.2, 3.0, (40, 2)), axis=0)
    pts = rng.uniform(-5, 80, (500, 2))
    for x, y in zip(_numba.project_to_polyline(pts, poly), _numpy.project_to_polyline(pts, poly)):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(_numba.nearest_distance(pts, poly), _numpy.nearest_distance(pts, poly),
                               rtol=1e-12, atol=1e-12)


def boxes():
    return st.tuples(finite, finite, st.floats(-math.pi, math.pi - 1e-9),
                     st.floats(0.2, 10), st.floats(0.2, 5))


@given(boxes(), boxes())
def test_clip_area_matches_shapely(a, b):
    pa = geometry.box_polygon((a[0], a[1]), a[2], a[3], a[4])
    pb = geometry.box_polygon((b[0], b[1]), b[2], b[3], b[4])
    want = Polygon(pa).intersection(Polygon(pb)).area
    for impl in (_numba, _numpy):
        got = impl.convex_intersection_area(np.ascontiguousarray(pa), np.ascontiguousarray(pb))
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, EPSM_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from epsm import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["EPSM_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", "from epsm import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"


def test_crossing_scores_identical_across_backends(tmp_path):
    code = (
        "from epsm import synth, pipeline, severity, report;"
        "r = pipeline.evaluate_scenario(synth.crossing_scenario(), severity.load_vehicle_model());"
        "print(report.rows_to_csv(report.scenario_rows(r)))"
    )
    outs = []
    for flag in ("1", "0"):
        env = dict(os.environ, EPSM_DISABLE_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout)
    assert outs[0] == outs[1]


def test_wrappers_accept_lists():
    ttc, ttce, d, closing = kernels.encounter_batch([[30.0, 0.0]], [[-10.0, 0.0]], [2.0])
    assert ttc[0] == pytest.approx(2.8)
    assert closing[0]
