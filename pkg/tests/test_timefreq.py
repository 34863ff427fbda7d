import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddid.identify import gram_matrix
from ddid.measures import DiscreteMeasure, lp_norm, relative_separation
from ddid.timefreq import (GaborExpansion, GridTooSmall, SampledSignal, TFGrid, analyze, apply_measure,
                           gaussian_ambiguity, inner, l2_norm, mp_norm, shifted_measure_difference, stft,
                           synthesize, tf_shift, weight_extract, wiener_amalgam_norm)
from oracles import quad_ambiguity

PHI = GaborExpansion.gaussian()


def random_gabor(rng, n=5, spread=1.5):
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    z = rng.uniform(-spread, spread, n) + 1j * rng.uniform(-spread, spread, n)
    return GaborExpansion(c, z)


cplx = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def test_shift_by_zero_is_identity():
    x = random_gabor(np.random.default_rng(0))
    y = tf_shift(x, 0)
    assert np.allclose(y.coeffs, x.coeffs) and np.array_equal(y.locs, x.locs)
    s = PHI.sample()
    assert np.array_equal(tf_shift(s, 0).samples, s.samples)


@given(cplx, cplx)
def test_commutation_relation_pointwise(lam, mu):
    t = np.linspace(-6, 6, 101)
    lhs = tf_shift(tf_shift(PHI, mu), lam)(t)
    rhs = np.exp(-2j * np.pi * lam.real * mu.imag) * tf_shift(PHI, lam + mu)(t)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_shift_matches_closed_form_on_samples():
    s = PHI.sample()
    for lam in (0.37 + 1.2j, -1.5 - 0.4j):
        shifted = tf_shift(s, lam)
        exact = tf_shift(PHI, lam)(s.t)
        assert np.abs(shifted.samples - exact).max() < 1e-9
        assert l2_norm(shifted) == pytest.approx(l2_norm(s), abs=1e-10)


def test_sampled_shift_refuses_to_lose_energy():
    with pytest.raises(GridTooSmall):
        tf_shift(PHI.sample(), 7.5)


def test_stft_examples():
    g = TFGrid.square(3, 0.5)
    v = stft(PHI, g)
    k = np.argmin(np.abs(g.nodes))
    assert v.values.ravel()[k] == pytest.approx(1)
    assert np.all(stft(GaborExpansion(), g).values == 0)
    assert np.all(stft(SampledSignal(-1, 0.01, np.zeros(201)), g).values == 0)


def test_stft_gabor_vs_sampled():
    g = TFGrid.square(2, 0.1)
    assert g.shape == (41, 41)
    a = stft(PHI, g).values
    b = stft(PHI.sample(-8, 1e-3), g).values
    assert np.abs(a - b).max() < 1e-6


def test_ambiguity_against_quadrature():
    assert gaussian_ambiguity(0, 0) == pytest.approx(1)
    q = quad_ambiguity(1.0, 0.0)
    assert abs(gaussian_ambiguity(1.0, 0.0)) == pytest.approx(abs(q), abs=1e-9)
    assert abs(gaussian_ambiguity(-1.0, 0.0)) == pytest.approx(abs(q), abs=1e-9)
    rng = np.random.default_rng(1)
    for tau, nu in rng.uniform(-2, 2, (5, 2)):
        v = gaussian_ambiguity(tau, nu)
        assert abs(v) == pytest.approx(abs(gaussian_ambiguity(nu, tau)), abs=1e-14)
        assert abs(v - quad_ambiguity(tau, nu)) < 1e-9


def test_mp_norms_of_gaussian():
    assert mp_norm(PHI, 2) == pytest.approx(1, abs=1e-4)
    x = random_gabor(np.random.default_rng(2), 3)
    c = 2 - 1.5j
    assert mp_norm(x * c, 2) == pytest.approx(abs(c) * mp_norm(x, 2), rel=1e-12)
    # M^1: Richardson-style self-convergence under grid refinement
    n = [mp_norm(PHI, 1, TFGrid.square(7, h)) for h in (0.2, 0.1, 0.05)]
    assert abs(n[2] - n[1]) < 1e-3 and abs(n[1] - n[0]) < 1e-3
    assert n[2] == pytest.approx(2.0, rel=1e-3)


def test_mp_norm_grid_guard():
    with pytest.raises(GridTooSmall):
        mp_norm(PHI, 2, TFGrid.square(1, 0.1))


def test_synthesize_examples():
    y = synthesize([0], [1], PHI)
    t = np.linspace(-3, 3, 31)
    assert np.allclose(y(t), PHI(t))
    rng = np.random.default_rng(3)
    z = rng.uniform(-3, 3, 5) + 1j * rng.uniform(-3, 3, 5)
    a = rng.normal(size=5) + 1j * rng.normal(size=5)
    G = gram_matrix(z).entries
    assert l2_norm(synthesize(z, a, PHI)) ** 2 == pytest.approx((a.conj() @ G @ a).real, rel=1e-8)


def test_synthesis_bound_single_constant():
    rng = np.random.default_rng(4)
    phi_m1 = mp_norm(PHI, 1)
    ratios = []
    for _ in range(100):
        n = rng.integers(1, 8)
        z = rng.uniform(-3, 3, n) + 1j * rng.uniform(-3, 3, n)
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        ratios.append(l2_norm(synthesize(z, a, PHI)) / (relative_separation(z) * lp_norm(a, 2) * phi_m1))
    # one constant covers every trial
    assert max(ratios) <= 1.0


@given(st.lists(st.tuples(cplx, cplx, cplx), min_size=1, max_size=6))
def test_synthesis_is_linear(rows):
    z = np.array([r[0] for r in rows]) + np.arange(len(rows)) * 10
    a = np.array([r[1] for r in rows])
    b = np.array([r[2] for r in rows])
    t = np.linspace(-5, 60, 200)
    lhs = synthesize(z, a + b, PHI)(t)
    rhs = synthesize(z, a, PHI)(t) + synthesize(z, b, PHI)(t)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_adjoint_identity():
    rng = np.random.default_rng(5)
    for _ in range(5):
        z = rng.uniform(-2, 2, 4) + 1j * rng.uniform(-2, 2, 4)
        a = rng.normal(size=4) + 1j * rng.normal(size=4)
        y = random_gabor(rng, 3)
        lhs = inner(synthesize(z, a, PHI), y)
        rhs = np.sum(a * np.conj(analyze(y, z, PHI)))
        assert abs(lhs - rhs) < 1e-6
        # STFT-domain pairing agrees with the closed form
        grid = TFGrid.square(8, 0.1)
        assert np.abs(analyze(y, z, PHI, grid) - analyze(y, z, PHI)).max() < 1e-6


def test_adjoint_identity_sampled():
    rng = np.random.default_rng(6)
    z = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    y = random_gabor(rng, 2, 1.0).sample(-8, 1e-2)
    x = PHI.sample(-8, 1e-2)
    lhs = inner(synthesize(z, a, x), y)
    rhs = np.sum(a * np.conj(analyze(y, z, x, TFGrid.square(9, 0.1))))
    assert abs(lhs - rhs) < 1e-6


def test_analyze_examples():
    assert analyze(PHI, [0], PHI)[0] == pytest.approx(1)
    assert np.all(analyze(GaborExpansion(), [0, 1j], PHI) == 0)


def test_weight_extract_examples():
    assert abs(weight_extract(PHI, 0) - 1) < 1e-3
    mu = DiscreteMeasure([0, 4], [1.5 - 0.5j, -0.7 + 1j])
    y = apply_measure(mu, PHI)
    for z, w in zip(mu.locations, mu.weights):
        assert abs(weight_extract(y, z) - w) < 1e-3
    mu = DiscreteMeasure([1 + 2j, -1 - 2j], [0.8j, 1.1])
    y = apply_measure(mu, PHI)
    for z, w in zip(mu.locations, mu.weights):
        assert abs(weight_extract(y, z) - w) < 1e-3
    assert weight_extract(GaborExpansion(), 0) == 0
    with pytest.raises(ValueError):
        weight_extract(PHI, 0, (0.1, 0.2))


def test_convolution_bound_single_constant():
    rng = np.random.default_rng(7)
    grid = TFGrid.square(8, 0.1)
    nodes = grid.nodes

    def f(z):
        return np.where(np.abs(z) <= 2.5, np.exp(-np.pi * np.abs(z) ** 2), 0.0)

    fw = wiener_amalgam_norm(f(nodes), grid)
    ratios = []
    for _ in range(40):
        n = rng.integers(1, 8)
        z = rng.uniform(-4, 4, n) + 1j * rng.uniform(-4, 4, n)
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        g = sum(ai * f(nodes - zi) for ai, zi in zip(a, z))
        ratios.append(math.sqrt(np.sum(np.abs(g) ** 2 * grid.weights)) / (fw * lp_norm(a, 2)))
    assert max(ratios) <= 3 * np.median(ratios)


def test_shifted_measure_difference_is_exact():
    z = np.array([0, 2 + 1j])
    a = np.array([1, -1j])
    d = shifted_measure_difference(z, a, [0.1j, 0.2])
    t = np.linspace(-4, 6, 50)
    ref = synthesize(z, a, PHI)(t) - sum(
        ai * tf_shift(tf_shift(PHI, e), zi)(t) for ai, zi, e in zip(a, z, [0.1j, 0.2]))
    assert np.allclose(d(t), ref, atol=1e-12)


def test_gabor_sample_grid():
    s = PHI.sample()
    assert s.t[0] == -8 and s.t[-1] == pytest.approx(8)
    assert l2_norm(s) == pytest.approx(1, abs=1e-10)
