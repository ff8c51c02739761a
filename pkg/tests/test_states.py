import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from obslab.rng import Xorshift64Star
from obslab.spectral_model import ObservationSpec, build_dirichlet_interval
from obslab.states import (SchrodingerState, WaveState, energy, evaluate_schrodinger, evaluate_wave,
                           random_schrodinger_state, random_wave_state, schrodinger_norm, state_from_json,
                           state_to_json, wave_from_initial, wave_initial_from_halfwave, wave_trace)

MODEL = build_dirichlet_interval(math.pi, 16, ObservationSpec.identity())
LAM = MODEL.lambdas


def e(i, n=16):
    v = np.zeros(n, complex)
    v[i] = 1.0
    return v


def test_from_initial_position_only():
    s = wave_from_initial(e(0), np.zeros(16), MODEL)
    assert s.uplus[0] == 0.5 and s.uminus[0] == 0.5
    assert np.all(s.uplus[1:] == 0) and np.all(s.uminus[1:] == 0)


def test_from_initial_velocity_only():
    s = wave_from_initial(np.zeros(16), e(0), MODEL)
    assert s.uplus[0] == pytest.approx(-0.5j) and s.uminus[0] == pytest.approx(0.5j)


def test_initial_from_halfwave_direct_formula():
    u0, u1 = wave_initial_from_halfwave(WaveState(0.5 * e(0), 0.5 * e(0), LAM))
    assert np.allclose(u0, e(0)) and np.allclose(u1, 0)
    lam = np.array([4.0])
    u0, u1 = wave_initial_from_halfwave(WaveState([1.0], [0.0], lam))
    assert u0[0] == 1 and u1[0] == pytest.approx(2j)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**63))
def test_round_trip(seed):
    g = Xorshift64Star(seed)
    u0, u1 = g.complex_symmetric(16), g.complex_symmetric(16) * 10
    v0, v1 = wave_initial_from_halfwave(wave_from_initial(u0, u1, MODEL))
    assert np.abs(v0 - u0).max() <= 1e-13 and np.abs(v1 - u1).max() <= 1e-13 * 10
    s = random_wave_state(MODEL, seed)
    t = wave_from_initial(*wave_initial_from_halfwave(s), MODEL)
    assert np.abs(t.stacked - s.stacked).max() <= 1e-13


def test_length_mismatch():
    with pytest.raises(ValueError):
        wave_from_initial(np.zeros(3), np.zeros(16), MODEL)
    with pytest.raises(ValueError):
        WaveState(np.zeros(3), np.zeros(4), np.ones(3))


def test_evaluate_at_zero_and_phase():
    s = random_wave_state(MODEL, 1)
    u, ut = evaluate_wave(s, 0.0)
    u0, u1 = wave_initial_from_halfwave(s)
    assert np.allclose(u, u0) and np.allclose(ut, u1)
    one = WaveState([1.0], [0.0], [1.0])
    assert evaluate_wave(one, math.pi)[0][0] == pytest.approx(-1.0, abs=1e-15)


def test_velocity_matches_finite_difference():
    s = random_wave_state(MODEL, 2)
    h = 1e-6
    fd = (evaluate_wave(s, 0.3 + h)[0] - evaluate_wave(s, 0.3 - h)[0]) / (2 * h)
    assert np.abs(fd - evaluate_wave(s, 0.3)[1]).max() <= 1e-6


def test_energy_examples():
    one = WaveState(e(0, 1), np.zeros(1), [1.0])
    assert energy(one, 0) == 1.0
    assert energy(WaveState([1.0], [0.0], [4.0]), 1) == 4.0


def _energy_from_solution(u, ut, lam, s):
    # E_s from position/velocity: (1/2) sum lam^s |u|^2 + lam^(s-1) |u_t|^2
    return 0.5 * np.sum(lam ** s * np.abs(u) ** 2 + lam ** (s - 1) * np.abs(ut) ** 2)


@pytest.mark.parametrize("s", [-1.0, 0.0, 0.5, 1.0, 2.0])
def test_conservation_at_random_times(s):
    st_ = random_wave_state(MODEL, 5)
    E = energy(st_, s)
    g = Xorshift64Star(9)
    for t in 50 * g.symmetric(20):
        u, ut = evaluate_wave(st_, t)
        assert _energy_from_solution(u, ut, LAM, s) == pytest.approx(E, rel=1e-12)


@pytest.mark.parametrize("s", [0.0, 1.0])
def test_energy_time_average_quadrature(s):
    st_ = random_wave_state(MODEL, 6)
    t1, t2 = 0.37, 2.9

    def dens(t):
        u, ut = evaluate_wave(st_, t)
        return _energy_from_solution(u, ut, LAM, s)

    avg = integrate.quad(dens, t1, t2, limit=200, epsrel=1e-12)[0] / (t2 - t1)
    assert avg == pytest.approx(energy(st_, s), rel=1e-8)


def test_half_wave_property_and_conjugation():
    s = random_wave_state(MODEL, 3)
    one_sided = WaveState(s.uplus, np.zeros(16), LAM)
    for t in (0.0, 0.7, -3.1):
        u, ut = evaluate_wave(one_sided, t)
        assert np.allclose(ut, 1j * np.sqrt(LAM) * u, atol=1e-13)
    c = one_sided.conj()
    assert np.all(c.uplus == 0) and np.allclose(c.uminus, s.uplus.conj())
    # conjugate state evaluates to the conjugate solution
    assert np.allclose(evaluate_wave(c, 1.3)[0], evaluate_wave(one_sided, 1.3)[0].conj())


def test_linearity():
    a, b = random_wave_state(MODEL, 1), random_wave_state(MODEL, 2)
    t = 0.9
    lhs = evaluate_wave(a.scaled(2.0) + b, t)[0]
    rhs = 2.0 * evaluate_wave(a, t)[0] + evaluate_wave(b, t)[0]
    assert np.abs(lhs - rhs).max() <= 1e-14


def test_schrodinger_norm_and_evolution():
    assert schrodinger_norm(SchrodingerState(e(0), LAM), 3.0) == 1.0
    assert schrodinger_norm(SchrodingerState(e(1), LAM), 0.5) == pytest.approx(2.0)
    s = random_schrodinger_state(MODEL, 4)
    assert np.array_equal(evaluate_schrodinger(s, 0.0), s.u0)
    one = SchrodingerState([0.7 + 0.1j], [1.0])
    assert evaluate_schrodinger(one, math.pi)[0] == pytest.approx(-(0.7 + 0.1j))
    g = Xorshift64Star(1)
    for t in 100 * g.symmetric(20):
        v = SchrodingerState(evaluate_schrodinger(s, t), LAM)
        for p in (0.0, 0.5, 1.0):
            assert schrodinger_norm(v, p) == pytest.approx(schrodinger_norm(s, p), rel=1e-13)


def test_trace_matches_pointwise():
    s = random_wave_state(MODEL, 8)
    t = np.array([0.0, 0.5, 2.0])
    tr = wave_trace(s, t)
    for i, ti in enumerate(t):
        assert np.allclose(tr[i], evaluate_wave(s, ti)[0])


def test_random_state_level_scaling():
    a = random_wave_state(MODEL, 11)
    b = random_wave_state(MODEL, 11, level=1.0)
    assert np.allclose(b.uplus, a.uplus / np.sqrt(LAM))
    assert energy(b, 1.0) == pytest.approx(energy(a, 0.0))


def test_json_round_trip():
    s = random_wave_state(MODEL, 12)
    r = state_from_json(state_to_json(s))
    assert np.array_equal(r.uplus, s.uplus) and np.array_equal(r.uminus, s.uminus)
    q = random_schrodinger_state(MODEL, 12)
    assert np.array_equal(state_from_json(state_to_json(q)).u0, q.u0)
