import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoholes.quadrature import integrate_periodic, trapezoid_rule


def test_cos3_integrates_to_zero():
    r = trapezoid_rule(16)
    # reduce the phase 3 t_k modulo 2 pi exactly so the samples carry no argument rounding
    samples = np.cos(2 * np.pi * ((3 * np.arange(16)) % 16) / 16)
    assert abs(integrate_periodic(r, samples)) <= 1e-15


def test_log_weights_integrate_log_sine_to_zero():
    # int_0^{2 pi} log(4 sin^2(t/2)) dt = 0
    r = trapezoid_rule(32)
    assert np.max(np.abs(r.log_weights @ np.ones(32))) <= 1e-13


def test_log_weights_match_known_fourier_integrals():
    # int log(4 sin^2((t - s)/2)) cos(m s) ds = -2 pi cos(m t) / m
    M = 32
    r = trapezoid_rule(M)
    for m in (1, 5, M // 2 - 1, M // 2):
        got = r.log_weights @ np.cos(m * r.nodes)
        assert np.max(np.abs(got + 2 * np.pi * np.cos(m * r.nodes) / m)) <= 1e-12


def test_exp_sin_self_convergence():
    vals = [integrate_periodic(trapezoid_rule(M), np.exp(np.sin(trapezoid_rule(M).nodes))) for M in (64, 128)]
    assert abs(vals[0] - vals[1]) <= 1e-13


@pytest.mark.parametrize("f", [lambda t: np.exp(np.sin(t)), lambda t: 1 / (2 + np.cos(t))])
def test_spectral_self_convergence(f):
    for M in (64, 128):
        a = integrate_periodic(trapezoid_rule(M), f(trapezoid_rule(M).nodes))
        b = integrate_periodic(trapezoid_rule(2 * M), f(trapezoid_rule(2 * M).nodes))
        assert abs(a - b) <= 1e-12


def test_constant_sin_sin2():
    r = trapezoid_rule(64)
    assert integrate_periodic(r, np.ones(64)) == pytest.approx(2 * np.pi, abs=1e-14)
    assert abs(integrate_periodic(r, np.sin(r.nodes))) <= 1e-15
    assert integrate_periodic(r, np.sin(r.nodes) ** 2) == pytest.approx(np.pi, abs=1e-14)


def test_rule_invariants():
    r = trapezoid_rule(24)
    assert r.weights.sum() == pytest.approx(2 * np.pi, abs=1e-14)
    R = r.log_weights
    assert np.allclose(R, R.T, atol=0)
    for i in range(24):
        assert np.allclose(np.roll(R[0], i), R[i], atol=1e-15)


@pytest.mark.parametrize("M", [7, 6, 0, -2])
def test_bad_node_counts(M):
    with pytest.raises(ValueError):
        trapezoid_rule(M)


def test_length_mismatch():
    with pytest.raises(ValueError):
        integrate_periodic(trapezoid_rule(16), np.ones(15))


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 40).map(lambda k: 2 * k), st.integers(0, 200), st.floats(-3, 3), st.floats(-3, 3))
def test_exact_for_trig_polynomials(M, m, a, b):
    m = m % M
    r = trapezoid_rule(M)
    exact = 2 * np.pi * a if m == 0 else 0.0
    got = integrate_periodic(r, a * np.cos(m * r.nodes) + b * np.sin(m * r.nodes))
    assert abs(got - exact) <= 1e-12 * (1 + abs(a) + abs(b))
