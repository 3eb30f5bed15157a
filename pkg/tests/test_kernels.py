import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from hypflux import INF, QuadratureFailure, WindowParams, h_window, hhat_window, i_fq, rmt_density, weyl_term
from hypflux.kernels import (TestFunction, i_fq_detail, i_fq_moments, i_fq_term, i_fq_termwise,
                             make_bump, make_fejer, make_test_function, r_coth)


def zero_fhat(u):
    return np.zeros_like(np.asarray(u, dtype=float))


@pytest.fixture(scope="module")
def zero_tf():
    return TestFunction(1.0, zero_fhat, "zero")


# ---------------------------------------------------------------- test functions


def test_bump_closed_form_values(bump):
    assert bump.fhat_eval(0.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert bump.fhat_eval(1.0) == 0.0 and bump.fhat_eval(-1.0) == 0.0
    assert bump.fhat_eval(0.999) == pytest.approx(math.exp(-1 / (1 - 0.999 ** 2)), rel=1e-12)
    assert math.log(bump.fhat_eval(0.999)) == pytest.approx(-500.25, abs=1e-3)


def test_bump_f_at_zero(bump):
    ref = 2 * integrate.quad(lambda u: bump.fhat_eval(u), 0, 1, epsabs=1e-14)[0]
    assert ref > 0
    assert bump.f_eval(0.0) == pytest.approx(ref, abs=1e-11)


@given(st.floats(-1.5, 1.5))
def test_fhat_even_and_supported(u):
    tf = make_bump(1.0)
    assert tf.fhat_eval(u) == tf.fhat_eval(-u)
    if abs(u) >= 1:
        assert tf.fhat_eval(u) == 0.0


@pytest.mark.parametrize("A", [0.5, 1.0, 2.0])
def test_f_eval_against_cosine_quadrature(A):
    tf = make_bump(A)
    for r in [0.0, 0.37, 3.0, 11.5, 42.0, 150.0]:
        ref = 2 * integrate.quad(lambda u: tf.fhat_eval(u), 0, A, weight="cos", wvar=r,
                                 epsabs=1e-14, limit=400)[0]
        assert abs(tf.f_eval(r) - ref) < 10 * tf.quadrature_tol


def test_f_eval_even_and_matches_grid_source(bump, rng):
    r = rng.uniform(0, bump.tail_radius, 2000)
    assert np.array_equal(bump.f_eval(r), bump.f_eval(-r))
    assert np.max(np.abs(bump.f_eval(r) - bump.f_direct(r))) < bump.quadrature_tol


def test_f_vanishes_past_tail(bump):
    assert bump.f_eval(bump.tail_radius + 1) == 0.0
    assert abs(bump.f_direct(bump.tail_radius + 1)[0]) < bump.quadrature_tol


def test_fejer_closed_form_matches_quadrature():
    tf = make_fejer(1.5)
    r = np.array([0.0, 1e-5, 0.3, 2.0, 17.0, 60.0])
    assert np.allclose(tf.f_eval(r), tf.f_direct(r), atol=1e-10)
    assert tf.f_eval(0.0) == pytest.approx(1.5)


def test_family_switch():
    assert make_test_function("bump", 1.0).family_tag == "bump"
    assert make_test_function("fejer", 1.0).family_tag == "fejer"
    with pytest.raises(ValueError):
        make_test_function("gauss", 1.0)


# ---------------------------------------------------------------- window


def test_window_guard():
    with pytest.raises(ValueError):
        WindowParams(1.5, 1.0)
    with pytest.raises(ValueError):
        WindowParams(3.0, 0.0)


def test_hhat_examples(bump):
    u = np.linspace(-0.99, 0.99, 41)
    w = WindowParams.unchecked(1.0, 0.0)
    assert np.allclose(hhat_window(bump, w, u), 2 * bump.fhat(u), rtol=0, atol=0)
    w = WindowParams(3.0, 2.0)
    assert np.all(hhat_window(bump, w, np.array([3.0, 3.5, -3.0, 10.0])) == 0)


@pytest.mark.parametrize("u", [0.1, 1.0, 2.5])
def test_hhat_is_fourier_transform_of_h(bump, u):
    w = WindowParams(2.0, 3.0)
    R = w.tau + bump.tail_radius / w.L
    # h is even, so its transform is (1/pi) integral_0^R h(r) cos(u r) dr
    val = integrate.quad(lambda r: h_window(bump, w, r), 0, R, weight="cos", wvar=u,
                         epsabs=1e-13, limit=2000)[0] / math.pi
    assert abs(val - hhat_window(bump, w, u)) < 1e-8


def test_h_examples(bump):
    w = WindowParams(4.0, 1.3)
    assert h_window(bump, w, 0.0) == pytest.approx(2 * bump.f_eval(w.L * w.tau), abs=1e-15)
    assert h_window(bump, w, w.tau) == pytest.approx(bump.f_eval(0) + bump.f_eval(2 * w.L * w.tau),
                                                     abs=1e-15)


@given(st.floats(0, 50))
def test_h_even(r):
    tf = make_bump(1.0)
    w = WindowParams(3.0, 2.2)
    assert abs(h_window(tf, w, r) - h_window(tf, w, -r)) < 1e-12


# ---------------------------------------------------------------- Weyl term


def test_weyl_genus_one_is_zero(bump):
    assert weyl_term(bump, WindowParams(4, 2), 1) == 0.0


def test_dirac_density_limit():
    assert float(r_coth(0.0)) == pytest.approx(1 / math.pi, abs=1e-15)
    assert float(r_coth(1e-7)) == pytest.approx(1 / math.pi, abs=1e-12)
    assert float(r_coth(0.3)) == pytest.approx(0.3 / math.tanh(0.3 * math.pi), rel=1e-14)


def _weyl_oracle(tf, w, genus, rho):
    # composite Gauss-Legendre straight from the fhat integral, no spline
    R = w.tau + tf.tail_radius / w.L
    x, wt = np.polynomial.legendre.leggauss(24)
    edges = np.linspace(-R, R, int(8 * R * w.L) + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    r = ((hi - lo) / 2 * x + (hi + lo) / 2).ravel()
    wr = ((hi - lo) / 2 * wt).ravel()
    h = tf.f_direct(w.L * (r - w.tau)) + tf.f_direct(w.L * (r + w.tau))
    return (genus - 1) * float(wr @ (h * rho(r)))


def test_weyl_laplace_against_oracle(bump):
    w = WindowParams(4.0, 10.0)
    val = weyl_term(bump, w, 2, "laplace")
    ref = _weyl_oracle(bump, w, 2, lambda r: r * np.tanh(np.pi * r))
    assert val == pytest.approx(ref, rel=1e-8)
    assert val == pytest.approx(11.5572132765, rel=1e-9)


def test_weyl_dirac_against_oracle(bump):
    w = WindowParams(3.0, 0.4)
    val = weyl_term(bump, w, 3, "dirac")
    assert val == pytest.approx(_weyl_oracle(bump, w, 3, r_coth), rel=1e-8)


def test_weyl_refuses_slow_decay():
    with pytest.raises(QuadratureFailure):
        weyl_term(make_fejer(1.0), WindowParams(3, 2), 2)


# ---------------------------------------------------------------- I_fq


def test_ifq_trivial_cases(bump, zero_tf):
    w = WindowParams(6.0, 5.0)
    assert i_fq(bump, w, INF) == 0.0
    assert i_fq(zero_tf, w, 3) == 0.0


def test_ifq_dual_quadrature_example(bump):
    w = WindowParams(6.0, 5.0)
    a = i_fq(bump, w, 2)
    b = i_fq_termwise(bump, w, 2, tol=bump.quadrature_tol / 2)
    assert a == pytest.approx(b, rel=1e-7)


@pytest.mark.parametrize("q", [1, 2, 3, 4])
@pytest.mark.parametrize("L", [2.0, 6.0, 12.0])
@pytest.mark.parametrize("tau", [1.0, 5.0, 10.0])
def test_ifq_grid(bump, q, L, tau):
    w = WindowParams(L, tau)
    res = i_fq_detail(bump, w, q)
    ref = i_fq_termwise(bump, w, q, tol=bump.quadrature_tol / 2)
    assert abs(res.value - ref) <= 1e-7 * abs(ref) + 1e-13


@pytest.mark.parametrize("q", [1, 2, 3])
def test_ifq_odd_regrouping(bump, q):
    # I(q) - I(2q) keeps only the odd-n terms of the defining series
    w = WindowParams(6.0, 5.0)
    head = sum(i_fq_term(bump, w, n * q, 256) for n in range(1, 64, 2))
    c = w.L / (2 * q)
    tail = 0.0
    for k, M in enumerate(i_fq_moments(bump, w), start=1):
        s = 2 * k + 1
        odd_zeta = 2.0 ** -s * special.zeta(s, 32.5)   # sum over odd n >= 65 of n^-s
        tail += 2.0 ** (2 * k - 1) / math.factorial(2 * k) * c ** (2 * k) * odd_zeta * M
    regrouped = head + 4.0 / q * tail
    assert i_fq(bump, w, q) - i_fq(bump, w, 2 * q) == pytest.approx(regrouped, abs=1e-9)


def test_ifq_deterministic(bump):
    w = WindowParams(6.0, 1.0)
    assert i_fq(bump, w, 3) == i_fq(bump, w, 3)


# ---------------------------------------------------------------- RMT densities


def test_rmt_ratios(bump):
    gue = rmt_density(bump, "gue")
    assert rmt_density(bump, "goe") == pytest.approx(2 * gue, rel=1e-12)
    assert rmt_density(bump, "gse") == pytest.approx(gue / 2, rel=1e-12)


def test_rmt_zero(zero_tf):
    assert rmt_density(zero_tf, "goe") == 0.0


def test_rmt_riemann_oracle(bump):
    n = 1_000_000
    x = (np.arange(n) + 0.5) / n * 2 - 1
    riemann = float(np.sum(np.abs(x) * bump.fhat(x) ** 2) * (2 / n))
    assert rmt_density(bump, "gue") == pytest.approx(riemann, abs=1e-8)
    assert rmt_density(bump, "gue") == pytest.approx(0.037534261820490446, rel=1e-10)


def test_rmt_unknown_kind(bump):
    with pytest.raises(ValueError):
        rmt_density(bump, "cue")
