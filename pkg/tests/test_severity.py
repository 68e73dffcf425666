import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from epsm.errors import DomainError, ModelError
from epsm.severity import (ImpactDirection, VehicleSeverityModel, impact_direction, linear_map,
                           load_vehicle_model, pedestrian_fatality_prob, pedestrian_ksi_prob,
                           severity, vehicle_severity, vru_severity)
from epsm.synth import make_object

from oracles import mp_fatality, mp_ksi

# Reference values evaluated at 50 significant digits (see oracles.py).
P_K_0_0 = 3.052421113022259e-4
P_K_50_30 = 0.02877363640550031
P_KSI_0_0 = 0.04791161100876325
P_KSI_40_50 = 0.6273114351512885
I_0_0 = 0.0383292888070106


def test_frozen_values_agree_with_oracle():
    for got, want in [(P_K_0_0, mp_fatality(0, 0)), (P_K_50_30, mp_fatality(50, 30)),
                      (P_KSI_0_0, mp_ksi(0, 0)), (P_KSI_40_50, mp_ksi(40, 50))]:
        assert got == pytest.approx(float(want), rel=1e-15)


def test_fatality_examples():
    assert pedestrian_fatality_prob(0, 0) == pytest.approx(P_K_0_0, rel=1e-12)
    assert pedestrian_fatality_prob(50, 30) == pytest.approx(P_K_50_30, rel=1e-12)
    assert pedestrian_fatality_prob(60, 30) > pedestrian_fatality_prob(50, 30)


def test_ksi_examples():
    assert pedestrian_ksi_prob(0, 0) == pytest.approx(P_KSI_0_0, rel=1e-12)
    assert pedestrian_ksi_prob(40, 50) == pytest.approx(P_KSI_40_50, rel=1e-12)


def test_ksi_dominates_fatality_on_sweep():
    v, a = np.meshgrid(np.linspace(0, 200, 201), np.linspace(0, 120, 121))
    for vi, ai in zip(v.ravel(), a.ravel()):
        assert pedestrian_ksi_prob(vi, ai) >= pedestrian_fatality_prob(vi, ai)


@given(st.floats(0, 200), st.floats(0, 120))
def test_regressions_match_high_precision(v, a):
    assert pedestrian_fatality_prob(v, a) == pytest.approx(float(mp_fatality(v, a)), rel=1e-12)
    assert pedestrian_ksi_prob(v, a) == pytest.approx(float(mp_ksi(v, a)), rel=1e-12)


def test_linear_map():
    assert linear_map(0.5, 0.5, 1.0, 0.8, 1.0) == 0.8
    assert linear_map(0.75, 0.5, 1.0, 0.8, 1.0) == pytest.approx(0.9)
    assert linear_map(1.0, 0.5, 1.0, 0.8, 1.0) == 1.0
    with pytest.raises(DomainError):
        linear_map(0.4, 0.5, 1.0, 0.8, 1.0)
    with pytest.raises(DomainError):
        linear_map(0.5, 1.0, 0.5, 0.0, 1.0)


def test_vru_severity_at_rest():
    assert vru_severity(0.0, 0.0) == pytest.approx(I_0_0, rel=1e-12)
    assert I_0_0 == pytest.approx(float(mp_ksi(0, 0) * mpmath.mpf("0.8")), rel=1e-15)


def test_vru_fatal_band_lower_edge():
    # speed at which the fatality logit is zero for a 60-year-old
    v = math.sqrt((8.0941 - 0.0525 * 60) / 0.0012) / 3.6
    assert vru_severity(v, 60) == pytest.approx(0.8, abs=1e-12)


def test_vru_serious_band_is_half_open():
    # KSI-driven band never reaches 0.8; the fatal band owns that value
    for v in np.linspace(0, 40, 401):
        for age in (0, 30, 80, 120):
            i = vru_severity(v, age)
            if pedestrian_fatality_prob(v * 3.6, age) < 0.5:
                assert i < 0.8


@pytest.mark.parametrize("age", [0, 20, 50, 90, 120])
def test_vru_severity_monotone_in_speed(age):
    vals = [vru_severity(v, age) for v in np.linspace(0, 60, 2001)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert all(0.0 <= x <= 1.0 for x in vals)


def test_band_membership_matches_trigger():
    for v in np.linspace(0, 40, 81):
        i = vru_severity(v, 40)
        pk = pedestrian_fatality_prob(v * 3.6, 40)
        pksi = pedestrian_ksi_prob(v * 3.6, 40)
        if pk >= 0.5:
            assert 0.8 <= i <= 1.0
        elif pksi >= 0.5:
            assert 0.4 <= i < 0.8
        else:
            assert 0.0 <= i < 0.4


def test_vehicle_zero_speed(model):
    for d in ImpactDirection:
        assert vehicle_severity(0.0, d, model) == 0.0


def test_vehicle_fatal_edge():
    m = VehicleSeverityModel(fatal=(("1", 0.0),), mais3=(("1", -10.0),), mais2=(("1", -10.0),))
    assert vehicle_severity(0.0, ImpactDirection.FRONT, m) == 0.8


@pytest.mark.parametrize("direction", list(ImpactDirection))
def test_vehicle_monotone_in_speed(model, direction):
    vals = [vehicle_severity(v, direction, model) for v in np.linspace(0, 80, 4001)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert all(0.0 <= x <= 1.0 for x in vals)
    assert vals[-1] > 0.8


def test_vehicle_probabilities_monotone(model):
    for name in ("fatal", "mais3", "mais2"):
        for d in ImpactDirection:
            ps = [model.probability(name, v, d) for v in np.linspace(0, 300, 301)]
            assert all(b >= a for a, b in zip(ps, ps[1:]))


def test_bad_model_files(tmp_path):
    p = tmp_path / "m.toml"
    p.write_text("[models.fatal]\nterms = [[\"W\", 1.0]]\n")
    with pytest.raises(ModelError):
        load_vehicle_model(p)
    with pytest.raises(ModelError):
        load_vehicle_model(tmp_path / "missing.toml")
    p.write_text("not = [toml")
    with pytest.raises(ModelError):
        load_vehicle_model(p)


def test_packaged_model_has_version(model):
    assert model.version


def test_dispatch(model, params):
    ego = make_object("ego", "Car", 0, 0, 0, 0)
    ped = make_object("p", "Pedestrian", 5, 0, age=70.0)
    assert severity(ego, ped, model, params) == vru_severity(0.0, 70.0)
    anon = make_object("p", "Pedestrian", 5, 0)
    assert severity(ego, anon, model, params) == vru_severity(0.0, params.vru_default_age)
    cyc = make_object("c", "Cyclist", 5, 0, 3, 0)
    assert severity(ego, cyc, model, params) == vru_severity(0.0, params.vru_default_age)


def test_impact_directions():
    ego = make_object("ego", "Car", 0, 0, 10, 0)
    assert impact_direction(ego, make_object("o", "Car", 20, 1, -10, 0)) == ImpactDirection.FRONT
    assert impact_direction(ego, make_object("o", "Car", 0, 8, 0, -5)) == ImpactDirection.SIDE
    assert impact_direction(ego, make_object("o", "Car", -15, 0, 12, 0)) == ImpactDirection.REAR
    # boundaries: 45 degrees is front, 135 is rear
    assert impact_direction(ego, make_object("o", "Car", 10, 10)) == ImpactDirection.FRONT
    assert impact_direction(ego, make_object("o", "Car", -10, 10)) == ImpactDirection.REAR


def test_vehicle_severity_uses_relative_speed(model):
    ego = make_object("ego", "Car", 0, 0, 20, 0)
    same = make_object("o", "Car", -10, 0, 20, 0)
    assert severity(ego, same, model) == 0.0
