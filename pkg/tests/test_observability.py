import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, linalg

from obslab.dyadic import DyadicScheme, band_indices
from obslab.errors import ConfigurationError
from obslab.rng import Xorshift64Star
from obslab.spectral_model import ObservationSpec, build_dense, build_dirichlet_interval, obs_factor
from obslab.states import (SchrodingerState, WaveState, evaluate_schrodinger, evaluate_wave)
from obslab.observability import (Gramian, admissibility_constant, band_constant, band_subspace,
                                  energy_weights, gramian, invisible_defect, l1_constant_estimate,
                                  obs_constant, schrodinger_gramian, theorem_experiment,
                                  time_phase_integral, wave_gramian, wave_subspace)

PI = math.pi


def interval(n, a=0.3, b=0.8, m0=0.0):
    return build_dirichlet_interval(PI, n, ObservationSpec.interior(a, b, m0=m0))


def ident(n):
    return build_dirichlet_interval(PI, n, ObservationSpec.identity())


def test_time_phase_integral_examples():
    assert time_phase_integral(0.0, 3.0) == 3.0
    assert abs(time_phase_integral(2 * PI, 1.0)) <= 1e-15
    assert time_phase_integral(PI, 1.0) == pytest.approx(2j / PI, abs=1e-15)


@pytest.mark.parametrize("w", [-7.3, -1e-3, 1e-9, 1e-7, 0.4, 11.0])
def test_time_phase_integral_quadrature(w):
    T = 1.7
    re = integrate.quad(lambda t: math.cos(w * t), 0, T, epsabs=1e-14)[0]
    im = integrate.quad(lambda t: math.sin(w * t), 0, T, epsabs=1e-14)[0]
    assert time_phase_integral(w, T) == pytest.approx(complex(re, im), abs=1e-13)


def test_time_phase_integral_series_switch_is_continuous():
    T = 2.0
    a = time_phase_integral(np.array([0.5e-8 - 1e-15, 0.5e-8 + 1e-15]), T)
    assert abs(a[0] - a[1]) <= 1e-14


def test_wave_gramian_single_mode():
    m = build_dirichlet_interval(PI, 1, ObservationSpec.interior(0, PI / 2))
    G = wave_gramian(m, PI).matrix
    # omega = 1: the cross term integrates exp(2it) over a full period
    np.testing.assert_allclose(G, 0.5 * PI * np.eye(2), atol=1e-15)


def test_identity_gramians_exact():
    np.testing.assert_allclose(wave_gramian(ident(6), 2 * PI).matrix, 2 * PI * np.eye(12), atol=1e-14)
    np.testing.assert_allclose(schrodinger_gramian(ident(6), 0.7).matrix, 0.7 * np.eye(6), atol=1e-15)


def test_schrodinger_two_modes():
    m = interval(2)
    T = 0.9
    G = schrodinger_gramian(m, T).matrix
    M = m.obs_pairing
    assert G[0, 0] == pytest.approx(T * M[0, 0])
    assert G[0, 1] == pytest.approx(time_phase_integral(3.0, T) * M[0, 1], rel=1e-14)


def _obs_norm_sq(R, coeffs):
    y = R @ coeffs
    return float(np.real(np.vdot(y, y)))


@pytest.mark.parametrize("kind", ["wave", "schrodinger"])
def test_gramian_quadratic_form_against_quadrature(kind):
    m = interval(5)
    R = obs_factor(m)
    T = 2.3
    G = gramian(m, T, kind)
    g = Xorshift64Star(21)
    for _ in range(3):
        if kind == "wave":
            u = WaveState(g.complex_symmetric(5), g.complex_symmetric(5), m.lambdas)
            f = lambda t: _obs_norm_sq(R, evaluate_wave(u, t)[0])
            x = u.stacked
        else:
            u = SchrodingerState(g.complex_symmetric(5), m.lambdas)
            f = lambda t: _obs_norm_sq(R, evaluate_schrodinger(u, t))
            x = u.u0
        ref = integrate.quad(f, 0, T, limit=400, epsabs=1e-13, epsrel=1e-13)[0]
        assert G.quadratic(x) == pytest.approx(ref, rel=1e-10)


def test_obs_constant_scaled_identity():
    m = ident(3)
    G = Gramian(2 * np.eye(3), 1.0, "schrodinger")
    r = obs_constant(G, m, 0.0)
    assert r.c == pytest.approx(2.0) and r.C_obs == pytest.approx(0.5) and r.dim == 3


@pytest.mark.parametrize("kind,e", [("wave", 0.0), ("wave", 1.0), ("schrodinger", 0.0), ("schrodinger", 0.5)])
def test_obs_constant_generalized_eigen_oracle(kind, e):
    m = interval(32)
    G = gramian(m, 2 * PI, kind)
    r = obs_constant(G, m, e)
    ref = linalg.eigh(G.matrix, np.diag(energy_weights(m, e, kind)), eigvals_only=True)[0]
    assert r.c == pytest.approx(ref, rel=1e-6)
    x = r.minimizer
    w = energy_weights(m, e, kind)
    assert np.sum(w * np.abs(x) ** 2) == pytest.approx(1.0, rel=1e-10)
    assert G.quadratic(x) == pytest.approx(r.c, rel=1e-6, abs=1e-14)


def test_energy_weights():
    m = ident(3)
    assert energy_weights(m, 1, "wave").tolist() == [1, 4, 9, 1, 4, 9]
    assert energy_weights(m, 1, "schrodinger").tolist() == [1, 16, 81]
    assert wave_subspace(3, [0, 2], "-").tolist() == [3, 5]
    with pytest.raises(ValueError):
        wave_subspace(3, [0], "0")


def test_band_constant_single_mode():
    m = interval(3)
    s = DyadicScheme()
    # pick a band holding exactly one mode
    for k in range(1, 10):
        J = band_indices(s, m, k)
        if J.size == 1:
            break
    nu = int(J[0])
    T = 2 * PI
    r = band_constant(m, s, k, T, 1.0, "wave")
    assert r.dim == 1
    assert r.c == pytest.approx(T * m.obs_pairing[nu, nu] / m.lambdas[nu], rel=1e-12)


def test_band_constant_sign_symmetry_and_positivity():
    m = interval(64)
    s = DyadicScheme.from_params(alpha=0.5, rho=2.0, k_max=7)
    G = gramian(m, 2 * PI, "wave")
    for k in range(3, 7):
        cp = band_constant(m, s, k, 2 * PI, 0.0, "wave", G=G)
        cm = band_constant(m, s, -k, 2 * PI, 0.0, "wave", G=G)
        assert cp.c > 0 and cp.c == pytest.approx(cm.c, rel=1e-10)
        assert band_subspace(m, s, -k, "wave").min() >= 64


def test_empty_band():
    m = ident(4)
    r = band_constant(m, DyadicScheme(), 20, 1.0, 0.0, "wave")
    assert r.empty and r.c == math.inf and r.C_obs == 0.0


def test_admissibility_examples():
    G = Gramian(np.diag([1.0, 3.0]), 1.0, "schrodinger")
    assert admissibility_constant(G, ident(2), 0.0) == pytest.approx(3.0)
    assert admissibility_constant(wave_gramian(ident(5), 2 * PI), ident(5), 0.0) == pytest.approx(2 * PI)


def test_neumann_admissibility_stable_in_truncation():
    vals = []
    for n in (64, 128):
        m = build_dirichlet_interval(PI, n, ObservationSpec.neumann())
        vals.append(admissibility_constant(wave_gramian(m, 1.0), m, 1.0))
    assert abs(vals[1] - vals[0]) <= 0.05 * vals[0]


def test_invisible_defect_cases():
    assert invisible_defect(ident(4), 1.0, "schrodinger") == pytest.approx(1.0)
    B = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    m = build_dense(np.diag([1.0, 2.0, 3.0]), B)
    assert invisible_defect(m, 5.0, "schrodinger") == 0.0
    assert invisible_defect(m, 5.0, "wave") == 0.0
    assert invisible_defect(interval(16), 2 * PI, "wave") > 0


def test_constant_monotone_in_horizon():
    m = interval(24)
    cs = [obs_constant(gramian(m, T, "wave"), m, 0.0).c for T in (PI, 2 * PI, 3 * PI)]
    assert cs[0] <= cs[1] <= cs[2]


def test_restriction_and_scaling():
    m = interval(24)
    G = gramian(m, 2 * PI, "schrodinger")
    full = obs_constant(G, m, 0.0).c
    sub = obs_constant(G, m, 0.0, subspace=np.arange(5, 15)).c
    assert sub >= full
    m2 = m.with_pairing(4 * np.asarray(m.obs_pairing))
    assert obs_constant(gramian(m2, 2 * PI, "schrodinger"), m2, 0.0).c == pytest.approx(4 * full, rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 8.0), st.integers(0, 2**32))
def test_gramian_hermitian_psd(T, seed):
    m = interval(12)
    G = gramian(m, T, "wave")
    assert np.abs(G.matrix - G.matrix.conj().T).max() == 0
    x = Xorshift64Star(seed).complex_symmetric(24)
    assert G.quadratic(x) >= -1e-12 * np.linalg.norm(x) ** 2


def test_theorem_experiment_closes():
    m = interval(64, m0=0.5)
    rep = theorem_experiment(m, DyadicScheme(k_max=9), 2 * PI, 2.5 * PI, 0.0, "wave", k0=3, seeds=range(4))
    assert rep.flags == []
    assert rep.min_band_c > 0 and rep.global_.c > 0 and rep.low.c > 0
    assert rep.closes()
    assert len(rep.chain) == 4 and rep.overlap == 5


def test_theorem_experiment_schrodinger():
    m = interval(16, m0=0.5)
    rep = theorem_experiment(m, DyadicScheme(k_max=14), 1.0, 1.5, 0.0, "schrodinger", k0=2, seeds=range(3))
    assert rep.global_.c > 0 and rep.closes()


def test_theorem_experiment_flags():
    base = interval(32, m0=0.5)
    M = np.array(base.obs_pairing)
    M[9, :] = 0
    M[:, 9] = 0
    blind = base.with_pairing(M)
    rep = theorem_experiment(blind, DyadicScheme(k_max=9), 2 * PI, 2.5 * PI, 0.0, "wave", k0=3, seeds=[0])
    joined = " ".join(rep.flags)
    assert "invisible" in joined and "global constant vanishes" in joined
    assert "band constant vanishes" in joined and "unique continuation" in joined
    rep = theorem_experiment(base, DyadicScheme(k_max=9), 2 * PI, 2.5 * PI, 2.0, "wave", k0=3, seeds=[0])
    assert any("exceeds" in f for f in rep.flags)


def test_theorem_experiment_rejects_bad_input():
    m = interval(32)
    with pytest.raises(ConfigurationError) as e:
        theorem_experiment(m, DyadicScheme(k_max=3), 2.0, 1.0, 0.0, "wave")
    assert len(e.value.violations) == 2


def test_l1_identity_schrodinger():
    # unitary evolution: |u(t)| is constant, so every unit state gives exactly T
    m = ident(6)
    est = l1_constant_estimate(m, 1.0, 0.0, starts=3, n_time=257)
    assert est.value == pytest.approx(1.0, rel=1e-10)
    assert est.envelope == pytest.approx(1.0, rel=1e-12)


def test_l1_below_envelope():
    m = interval(10)
    est = l1_constant_estimate(m, 1.0, 0.0, starts=4, n_time=513, max_iter=100)
    assert 0 < est.value <= est.envelope * (1 + 1e-6)
    w = energy_weights(m, 0.0, "schrodinger")
    assert np.sum(w * np.abs(est.minimizer) ** 2) == pytest.approx(1.0, rel=1e-10)
