import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddid.identify import (gram_matrix, identifiability_constants, lattice_truncation, random_separated_measure,
                           riesz_bounds, riesz_ladder)
from ddid.measures import DiscreteMeasure, separation
from ddid.timefreq import GaborExpansion, gaussian_ambiguity
from oracles import quad_ambiguity

PHI = GaborExpansion.gaussian()


def test_gram_diagonal_and_hermitian():
    rng = np.random.default_rng(0)
    z = rng.uniform(-3, 3, 8) + 1j * rng.uniform(-3, 3, 8)
    G = gram_matrix(z).entries
    assert np.allclose(np.diag(G), 1, atol=1e-14)
    assert np.abs(G - G.conj().T).max() <= 1e-12


def test_gram_entries_match_ambiguity_oracle():
    z = np.array([0, 0.7 + 0.2j, -0.4 + 1.1j])
    G = gram_matrix(z).entries
    for i in range(3):
        for j in range(3):
            d = z[i] - z[j]
            assert abs(G[i, j]) == pytest.approx(abs(gaussian_ambiguity(d.real, d.imag)), abs=1e-14)
            assert abs(G[i, j]) == pytest.approx(abs(quad_ambiguity(d.real, d.imag)), abs=1e-9)


def test_gram_sampled_window_agrees():
    z = np.array([0, 0.7 + 0.2j, -0.4 + 1.1j])
    a = gram_matrix(z).entries
    b = gram_matrix(z, PHI.sample(-8, 1e-3)).entries
    assert np.abs(a - b).max() < 1e-8


def test_gram_with_composite_window():
    x = GaborExpansion([1, 0.5j], [0, 0.3 + 0.2j])
    z = np.array([0, 1 + 1j, -0.5])
    a = gram_matrix(z, x).entries
    b = gram_matrix(z, x.sample(-8, 1e-3)).entries
    assert np.abs(a - b).max() < 1e-8


def test_riesz_bounds_singleton():
    b = riesz_bounds([0.3 - 2j])
    assert (b.lower, b.upper) == pytest.approx((1, 1))


def test_riesz_ladders():
    low1 = [b.lower for b in riesz_ladder(1.0)]
    low12 = [b.lower for b in riesz_ladder(1.2)]
    assert all(a > b for a, b in zip(low1, low1[1:]))
    assert low1[-1] < 0.25 * low1[0]
    assert low12[-1] > 0.5 * low12[0]


def test_lattice_truncation_size():
    assert len(lattice_truncation(1.0, 5)) == 25


@given(st.integers(0, 10 ** 6))
def test_riesz_bounds_bracket_rayleigh_quotients(seed):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-2, 2, 5) + 1j * rng.uniform(-2, 2, 5)
    if separation(z) < 1e-3:
        return
    b = riesz_bounds(z)
    G = gram_matrix(z).entries
    a = rng.normal(size=5) + 1j * rng.normal(size=5)
    q = (a.conj() @ G @ a).real / np.vdot(a, a).real
    assert b.lower - 1e-12 <= q <= b.upper + 1e-12


def test_constants_on_random_family():
    rng = np.random.default_rng(1)
    pairs = []
    for _ in range(50):
        n1, n2 = rng.integers(1, 6, 2)
        pairs.append((random_separated_measure(rng, n1, 2.0, 4), random_separated_measure(rng, n2, 2.0, 4)))
    c = identifiability_constants(pairs)
    assert 0 < c.C1 <= c.C2
    assert 0 <= c.argmin < 50 and c.trials == 50


def test_constants_single_shift_ladder():
    ratios = []
    for k in range(4, 11):
        eps = 2.0 ** -k
        c = identifiability_constants([(DiscreteMeasure([0], [1]), DiscreteMeasure([1j * eps], [1]))])
        ratios.append(c.C1)
    # C1-ratio = ||H mu - H mu_eps|| / (eps * sqrt 2) tends to sqrt(pi / 2)
    assert abs(ratios[-1] - np.sqrt(np.pi / 2)) < 1e-3
    assert all(abs(a - b) < 0.02 * b for a, b in zip(ratios, ratios[1:]))


def test_constants_p_other_than_two():
    rng = np.random.default_rng(2)
    pairs = [(random_separated_measure(rng, 2, 2.0, 3), random_separated_measure(rng, 2, 2.0, 3))
             for _ in range(3)]
    c = identifiability_constants(pairs, p=1.0)
    assert 0 < c.C1 <= c.C2


def test_constants_reject_identical_measures():
    mu = DiscreteMeasure([0], [1])
    with pytest.raises(ValueError):
        identifiability_constants([(mu, mu)])
