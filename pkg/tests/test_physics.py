from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from qent.errors import DomainError
from qent.physics import (
    CONSTANTS,
    InitialWavepacket,
    ScenarioParams,
    ValidatedScenario,
    dump_scenario,
    load_scenario,
    thermal_occupation,
    validate,
)


def test_constants_positive():
    assert CONSTANTS.hbar > 0 and CONSTANTS.c > 0 and CONSTANTS.k_B > 0
    with pytest.raises(AttributeError):
        CONSTANTS.hbar = 1.0


def test_reference_scenario_is_valid(fig2):
    v = validate(fig2)
    assert isinstance(v, ValidatedScenario)
    assert v.omega_12 == pytest.approx((2 + 0.01) * 10)


def test_negative_gamma_is_named():
    with pytest.raises(DomainError) as ei:
        validate(ScenarioParams(gamma=-1.0))
    assert ei.value.fields == ("gamma",)


def test_every_violation_is_listed():
    with pytest.raises(DomainError) as ei:
        validate(ScenarioParams(gamma=-1.0, eta=0.0, epsilon=2.0, omega=-1.0, bath_T=-3.0))
    assert set(ei.value.fields) == {"gamma", "eta", "epsilon", "omega", "bath_T"}


def test_eta_from_si_anchors():
    # hbar*delta_p/m = 1 m/s, omega_1c = 1e14 rad/s, gamma = 1e7 /s
    m = 7.6e-26
    p = ScenarioParams(gamma=1e7, delta_p=m / CONSTANTS.hbar, mass=m, omega_1c=1e14)
    eta = validate(p).eta
    assert eta == pytest.approx(1e14 * 1.0 / (1e7 * CONSTANTS.c), rel=1e-12)
    assert eta == pytest.approx(0.0333, rel=2e-3)


def test_inconsistent_eta_rejected():
    m = 7.6e-26
    p = ScenarioParams(gamma=1e7, delta_p=m / CONSTANTS.hbar, mass=m, omega_1c=1e14, eta=0.05)
    with pytest.raises(DomainError) as ei:
        validate(p)
    assert "eta" in ei.value.fields


def test_splitting_consistency():
    assert validate(ScenarioParams(delta_big=9.99, omega_12=20.0)).delta_rel == pytest.approx(20 / 9.99 - 2)
    with pytest.raises(DomainError) as ei:
        validate(ScenarioParams(delta_big=10.0, delta_rel=0.01, omega_12=20.0))
    assert "omega_12" in ei.value.fields


def test_k_a_derived():
    assert validate(ScenarioParams(omega_a=5e14)).k_a == pytest.approx(5e14 / CONSTANTS.c)


@given(
    st.floats(0.1, 100), st.floats(-20, 20), st.floats(1e-4, 0.5), st.floats(1e-5, 1e-1)
)
def test_validate_idempotent(om, d, dr, eta):
    v = validate(ScenarioParams(omega=om, delta_big=d, delta_rel=dr, eta=eta))
    assert validate(v) == v
    assert validate(ScenarioParams(**v.to_dict())) == v


def test_thermal_zero_temperature():
    assert thermal_occupation(0.0, 5e14) == 0.0


def test_thermal_unit_occupation():
    T = 300.0
    omega = CONSTANTS.k_B * T * math.log(2) / CONSTANTS.hbar
    assert thermal_occupation(T, omega) == pytest.approx(1.0, rel=1e-12)


def test_thermal_sodium_bath():
    D = thermal_occupation(150.0, 5e14)
    x = CONSTANTS.hbar * 5e14 / (CONSTANTS.k_B * 150.0)
    assert D == pytest.approx(1 / math.expm1(x), rel=1e-12)
    assert 8.5e-12 < D < 9.0e-12


def test_thermal_rejects_bad_frequency():
    with pytest.raises(DomainError):
        thermal_occupation(300.0, 0.0)


@given(st.floats(1.0, 1e4), st.floats(1.0, 1e4), st.floats(1e12, 1e15))
def test_thermal_monotone_in_temperature(t1, t2, omega):
    lo, hi = sorted((t1, t2))
    if hi - lo < 1e-6 * hi:
        return
    d_lo, d_hi = thermal_occupation(lo, omega), thermal_occupation(hi, omega)
    if d_hi > 1e-300:
        assert d_hi > d_lo


@given(st.floats(1.0, 1e4), st.floats(1e12, 1e15), st.floats(1.01, 10.0))
def test_thermal_decreasing_in_frequency(T, omega, factor):
    a, b = thermal_occupation(T, omega), thermal_occupation(T, omega * factor)
    if a > 1e-300:
        assert b < a


@given(st.floats(20.5, 600.0))
def test_thermal_boltzmann_tail(x):
    T = 300.0
    omega = x * CONSTANTS.k_B * T / CONSTANTS.hbar
    assert thermal_occupation(T, omega) == pytest.approx(math.exp(-x), rel=1e-6)


def test_wavepacket_normalized_and_variance():
    g = InitialWavepacket(delta_p=0.7, center=0.3)
    norm, _ = integrate.quad(lambda q: g.amplitude(q) ** 2, -np.inf, np.inf)
    m2, _ = integrate.quad(lambda q: (q - 0.3) ** 2 * g.amplitude(q) ** 2, -np.inf, np.inf)
    assert norm == pytest.approx(1.0, abs=1e-12)
    assert m2 == pytest.approx(g.variance, rel=1e-10)
    with pytest.raises(DomainError):
        InitialWavepacket(delta_p=0.0)


def test_scenario_file_roundtrip(tmp_path, fig2):
    f = tmp_path / "s.txt"
    text = dump_scenario(fig2.replace(omega=2.0)).replace("omega = 2.0", "omega = 2.0  # trailing")
    f.write_text("# comment line\n" + text, encoding="utf-8")
    p = load_scenario(f)
    assert p.omega == 2.0 and p.delta_big == 10.0 and p.eta == 1e-3


def test_scenario_file_duplicate_key(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("omega = 1\nomega = 2\n", encoding="utf-8")
    with pytest.raises(DomainError):
        load_scenario(f)


def test_scenario_file_unknown_key(tmp_path):
    f = tmp_path / "s.txt"
    f.write_text("omega = 1\nbogus = 3\n", encoding="utf-8")
    with pytest.raises(DomainError) as ei:
        load_scenario(f)
    assert ei.value.fields == ("bogus",)
