from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.linalg import expm

from qent.errors import DomainError, InfiniteTimescale, NotSaturatedWarning, StepTooLarge
from qent.dynamics import (
    accumulate_emission,
    default_dt,
    filon_moments,
    local_error,
    propagate_internal,
    rk4_matrix,
    spectral_solution,
)
from qent.physics import ScenarioParams
from qent.spectrum import spectrum_for

ETA = 1e-3
# broad central pole so that runs to saturation stay short
FAST = ScenarioParams(omega=1.0, delta_big=2.0, delta_rel=0.5, eta=ETA)


@pytest.fixture(scope="module")
def fast_spec():
    return spectrum_for(FAST)


@pytest.fixture(scope="module")
def fast_record(fast_spec):
    return accumulate_emission(fast_spec, ETA, n_record=10)


def emission_closed_form(spec, s, t):
    """E(s, t) = -i/sqrt(2 pi) sum_j c_j (exp((is - lam_j) t) - 1)/(is - lam_j)."""
    c, lam = spec.emission_weights, spec.lambdas
    z = 1j * s[:, None] - lam[None, :]
    return (-1j / math.sqrt(2 * math.pi)) * np.sum(c * np.expm1(z * t) / z, axis=1)


def emitted_mass_closed_form(spec, t):
    c, lam = spec.emission_weights, spec.lambdas
    tot = 0j
    for j in range(3):
        for k in range(3):
            z = lam[j] + np.conj(lam[k])
            tot += c[j] * np.conj(c[k]) * -np.expm1(-z * t) / z
    return tot.real


# internal amplitudes


def test_rk4_matrix_against_expm(fig2_spectrum):
    m = fig2_spectrum.matrix.entries
    for h in (0.01, 0.005):
        err = np.linalg.norm(rk4_matrix(m, h) - expm(-h * m), 2)
        assert err < (h * np.linalg.norm(m, 2)) ** 5 / 60
    assert local_error(m, 0.01) < 1e-7


def test_default_step(fig2_spectrum):
    h = default_dt(fig2_spectrum.matrix)
    assert h == pytest.approx(0.1 / max(np.max(np.abs(fig2_spectrum.lambdas)), 10.0, 1.0))
    assert local_error(fig2_spectrum.matrix.entries, h) <= 1e-8


def test_trajectory_matches_spectral_solution(fig2_spectrum):
    tr = propagate_internal(fig2_spectrum.matrix, 5.0, n_record=50)
    ref = spectral_solution(fig2_spectrum, tr.times)
    rel = np.max(np.linalg.norm(tr.states - ref, axis=1)) / np.max(np.linalg.norm(ref, axis=1))
    assert rel < 1e-6


def test_initial_state():
    tr = propagate_internal(spectrum_for(FAST).matrix, 0.0)
    np.testing.assert_array_equal(tr.states, [[0, 0, 1]])


def test_no_coupling_keeps_ground_state():
    spec = spectrum_for(ScenarioParams(omega=0.0, delta_big=2.0, delta_rel=0.5))
    tr = propagate_internal(spec.matrix, 3.0, n_record=5)
    np.testing.assert_allclose(tr.b, 1.0, atol=1e-15)
    np.testing.assert_allclose(tr.a1, 0.0, atol=1e-15)
    rec = accumulate_emission(spec, ETA, t_max=3.0, n_record=5)
    assert np.all(rec.s_amps == 0)
    assert np.all(rec.mass_emitted == 0)
    assert np.all(np.isnan(rec.l2_error))


def test_norm_decays(fast_spec):
    tr = propagate_internal(fast_spec.matrix, 50.0, n_record=50)
    assert np.all(np.diff(tr.mass) <= 1e-12)


def test_step_too_large(fig2_spectrum):
    with pytest.raises(StepTooLarge):
        propagate_internal(fig2_spectrum.matrix, 1.0, dt=0.05)


def test_bad_times(fig2_spectrum):
    with pytest.raises(DomainError):
        propagate_internal(fig2_spectrum.matrix, -1.0)
    with pytest.raises(DomainError):
        propagate_internal(fig2_spectrum.matrix, 1.0, dt=0.0)


def test_dark_state_has_no_default_horizon(fig2):
    spec = spectrum_for(fig2.replace(delta_rel=0.0))
    with pytest.raises(InfiniteTimescale):
        accumulate_emission(spec, ETA)


# Filon weights


@given(st.floats(-200, 200))
def test_filon_moments_against_quad(z):
    mu = filon_moments(np.array([z]))[:, 0]
    for k in range(4):
        re = integrate.quad(lambda x: x**k * math.cos(z * x), 0, 1, limit=400, epsabs=1e-14)[0]
        im = integrate.quad(lambda x: x**k * math.sin(z * x), 0, 1, limit=400, epsabs=1e-14)[0]
        assert abs(mu[k] - (re + 1j * im)) < 1e-12


def test_filon_moments_continuous_at_switch():
    z = np.array([1.0 - 1e-12, 1.0 + 1e-12, -1.0 + 1e-12, -1.0 - 1e-12])
    mu = filon_moments(z)
    np.testing.assert_allclose(mu[:, 0], mu[:, 1], atol=1e-12)
    np.testing.assert_allclose(mu[:, 2], mu[:, 3], atol=1e-12)


# emission


@pytest.mark.filterwarnings("ignore::qent.errors.NotSaturatedWarning")
def test_emission_matches_closed_form_at_finite_time(fast_spec):
    t = 40.0
    rec = accumulate_emission(fast_spec, ETA, t_max=t, n_record=4)
    ref = emission_closed_form(fast_spec, rec.s_axis, t)
    err = math.sqrt(np.sum(rec.s_weights * np.abs(rec.s_amps - ref) ** 2))
    norm = math.sqrt(np.sum(rec.s_weights * np.abs(ref) ** 2))
    # global RK4 error: per-step bound 1e-8 accumulated over ~4e4 steps
    assert err / norm < 1e-5
    assert rec.mass_emitted[-1] == pytest.approx(emitted_mass_closed_form(fast_spec, t), rel=1e-5)


def test_emission_converges_to_steady_state(fast_record):
    assert fast_record.l2_error[-1] < 1e-2
    assert fast_record.l2_error[-1] < fast_record.l2_error[1]


def test_probability_budget(fast_record):
    assert np.max(np.abs(fast_record.budget_error)) <= 1e-4


def test_emitted_mass_equals_grid_mass(fast_record):
    grid_mass = np.sum(
        fast_record.s_weights * np.abs(fast_record.s_amps) ** 2
    ) * np.sum(np.abs(fast_record.envelope) ** 2 * np.gradient(fast_record.u_axis))
    assert grid_mass == pytest.approx(fast_record.mass_emitted[-1], rel=1e-3)


def test_history_shape(fast_record):
    h = fast_record.history()
    assert h.shape == (fast_record.times.size, 4)
    assert h[0, 0] == 0 and h[0, 1] == 1 and h[0, 2] == 0


def test_zero_time_record(fast_spec):
    rec = accumulate_emission(fast_spec, ETA, t_max=0.0)
    np.testing.assert_array_equal(rec.history()[:, :3], [[0.0, 1.0, 0.0]])


@pytest.mark.filterwarnings("ignore::qent.errors.NotSaturatedWarning")
def test_linear_in_initial_state(fast_spec):
    a = accumulate_emission(fast_spec, ETA, t_max=20.0, n_record=2)
    b = accumulate_emission(fast_spec, ETA, t_max=20.0, n_record=2, v0=(0, 0, 2))
    np.testing.assert_allclose(b.s_amps, 2 * a.s_amps, rtol=1e-13, atol=1e-300)


def test_not_saturated_warning(fast_spec):
    with pytest.warns(NotSaturatedWarning):
        accumulate_emission(fast_spec, ETA, t_max=0.5 / abs(fast_spec.lambda1.real), n_record=4)


def test_saturated_run_is_quiet(fast_spec):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        accumulate_emission(fast_spec, ETA, n_record=4)


def test_steady_state_independent_of_step(fast_spec, fast_record):
    half = accumulate_emission(fast_spec, ETA, dt=fast_record.dt / 2, n_record=4)
    d = math.sqrt(np.sum(half.s_weights * np.abs(half.s_amps - fast_record.s_amps) ** 2))
    n = math.sqrt(np.sum(half.s_weights * np.abs(half.s_amps) ** 2))
    # the default step carries ~1e-6 global error, the half step 1/32 of it
    assert d / n < 1e-5
