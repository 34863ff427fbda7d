import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddid.measures import (INF, DiscreteMeasure, Point, SupportSet, lp_norm, mutual_separation,
                           relative_separation, separation, translate)
from oracles import brute_relative_separation, brute_separation

coord = st.floats(-20, 20, allow_nan=False)
point_lists = st.lists(st.tuples(coord, coord), min_size=2, max_size=25, unique=True)


def test_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        Point(math.nan, 0.0)


def test_support_set_rejects_duplicates():
    with pytest.raises(ValueError):
        SupportSet([1 + 1j, 1 + 1j])


def test_separation_examples():
    assert separation([0, 3, 4j]) == 3
    assert separation([0]) == INF


def test_separation_matches_pairwise_oracle():
    rng = np.random.default_rng(0)
    z = rng.uniform(0, 10, 50) + 1j * rng.uniform(0, 10, 50)
    assert separation(z) == pytest.approx(brute_separation(z), rel=1e-15)


def test_relative_separation_examples():
    assert relative_separation([0]) == 1
    assert relative_separation([0, 2]) == 2
    assert relative_separation([]) == 0


def test_relative_separation_matches_candidate_oracle():
    rng = np.random.default_rng(1)
    for _ in range(5):
        z = rng.uniform(0, 4, 40) + 1j * rng.uniform(0, 4, 40)
        assert relative_separation(z) == brute_relative_separation(z)


def test_mutual_separation_examples():
    eps = 0.01
    assert mutual_separation([0], [1j * eps]) == pytest.approx(eps)
    assert mutual_separation([0, 1], [1, 5]) == 1
    assert mutual_separation([0], [0]) == INF


def test_lp_norm_examples():
    eps = 0.1
    mu = DiscreteMeasure([0], [1]) - DiscreteMeasure([1j * eps], [1])
    assert lp_norm(mu, 2) == pytest.approx(math.sqrt(2))
    assert lp_norm(DiscreteMeasure(), 2) == 0
    rng = np.random.default_rng(2)
    w = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert lp_norm(DiscreteMeasure([0, 1, 2], w), 1) == pytest.approx(sum(abs(v) for v in w))
    assert lp_norm(w, math.inf) == pytest.approx(max(abs(w)))
    with pytest.raises(ValueError):
        lp_norm(w, 0.5)


def test_translate_examples():
    assert translate([0, 1], (0, 0)) == SupportSet([0, 1])
    assert translate([0], Point(2, 3)) == SupportSet([2 + 3j])


def test_measure_arithmetic_merges_atoms():
    a = DiscreteMeasure([0, 1], [1, 2])
    b = DiscreteMeasure([1, 2], [2, 5])
    d = a - b
    assert len(d) == 2
    assert dict(zip(d.locations.tolist(), d.weights.tolist())) == {0j: 1, 2 + 0j: -5}
    assert (a * 2).weights.tolist() == [2, 4]


@given(point_lists, coord, coord)
def test_separation_translation_invariant(pts, a, b):
    z = np.array([complex(x, y) for x, y in pts])
    assert separation(translate(z, (a, b))) == pytest.approx(separation(z), rel=1e-9, abs=1e-9)


@given(point_lists)
def test_separation_agrees_with_oracle(pts):
    z = np.array([complex(x, y) for x, y in pts])
    assert separation(z) == pytest.approx(brute_separation(z), rel=1e-15)


@given(st.lists(st.tuples(st.floats(0, 3), st.floats(0, 3)), min_size=1, max_size=15, unique=True))
def test_relative_separation_agrees_with_oracle(pts):
    z = np.array([complex(x, y) for x, y in pts])
    assert relative_separation(z) == brute_relative_separation(z)


@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False), max_size=10),
       st.floats(1, 6))
def test_lp_norm_monotone_in_p(w, p):
    # ||w||_q <= ||w||_p for q >= p
    assert lp_norm(w, p + 1) <= lp_norm(w, p) * (1 + 1e-12) + 1e-300
