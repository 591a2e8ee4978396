import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from excised.calibration import mgf_so_even
from excised.ensembles import EigenangleSample, EnsembleId, sample_eigenangles
from excised.spectral import (charpoly_at_one, empirical_density, excise,
                              first_scaled_eigenangle, format_number, ks_distance,
                              nearest_neighbor_spacings, normalize_mean_one, scaled_eigenangles)
from oracles import ks_brute

PI = math.pi


def _s(kind, n, angles):
    return EigenangleSample(EnsembleId(kind, n), angles)


def test_charpoly_examples():
    assert charpoly_at_one(_s("SO_even", 1, [PI])) == pytest.approx(4.0, abs=1e-14)
    assert charpoly_at_one(_s("SO_even", 2, [PI / 2, PI])) == pytest.approx(8.0, abs=1e-14)
    assert charpoly_at_one(_s("U", 1, [PI])) == pytest.approx(2.0, abs=1e-15)
    assert charpoly_at_one(_s("SO_odd", 1, [0.0])) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, PI), min_size=4, max_size=4))
def test_charpoly_matches_determinant(angles):
    angles = sorted(angles)
    # det(I - A) for the block-diagonal rotation matrix with these angles
    blocks = []
    for t in angles:
        blocks.append(np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]]))
    A = np.zeros((8, 8))
    for i, b in enumerate(blocks):
        A[2 * i:2 * i + 2, 2 * i:2 * i + 2] = b
    with np.errstate(divide="ignore"):  # singular when an angle is 0
        det = np.linalg.det(np.eye(8) - A)
    got = charpoly_at_one(_s("SO_even", 4, angles))
    assert got == pytest.approx(det, rel=1e-9, abs=1e-12)
    assert got >= 0


def test_charpoly_batch_matches_single():
    b = sample_eigenangles(EnsembleId("USp", 3), 50, seed=1)
    vals = charpoly_at_one(b)
    assert np.allclose(vals, [charpoly_at_one(s) for s in b])


def test_first_scaled_examples():
    assert first_scaled_eigenangle(_s("SO_even", 4, [PI / 4, 1, 2, 3])) == pytest.approx(1.0)
    assert first_scaled_eigenangle(_s("SO_odd", 1, [2 * PI / 3])) == pytest.approx(1.0)
    u = _s("U", 8, [PI / 4] + [1.0 + 0.1 * k for k in range(7)])
    assert first_scaled_eigenangle(u) == pytest.approx(1.0)


def test_scaled_eigenangles_batch():
    b = sample_eigenangles(EnsembleId("SO_even", 5), 10, seed=2)
    assert np.allclose(scaled_eigenangles(b), b.angles * 5 / PI)
    assert np.allclose(first_scaled_eigenangle(b), b.angles[:, 0] * 5 / PI)


def test_excise_identity_and_empty():
    b = sample_eigenangles(EnsembleId("SO_even", 4), 500, seed=3)
    assert excise(b, 0.0) == b
    assert len(excise(b, math.inf)) == 0
    as_list = list(b)
    assert len(excise(as_list, 0.0)) == 500
    with pytest.raises(ValueError):
        excise(b, -1.0)


def test_excise_percentile():
    b = sample_eigenangles(EnsembleId("SO_even", 8), 100_000, seed=4)
    lam = charpoly_at_one(b)
    t = np.percentile(lam, 20)
    frac = len(excise(b, t)) / len(b)
    assert abs(frac - 0.8) <= 0.005


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 5), st.floats(0, 5))
def test_excise_monotone(t1, t2):
    lo, hi = sorted((t1, t2))
    b = sample_eigenangles(EnsembleId("SO_even", 3), 400, seed=5)
    keep_hi = set(map(tuple, excise(b, hi).angles))
    keep_lo = set(map(tuple, excise(b, lo).angles))
    assert keep_hi <= keep_lo


def test_excision_pushes_first_eigenvalue_out():
    b = sample_eigenangles(EnsembleId("SO_even", 8), 100_000, seed=6)
    lam = charpoly_at_one(b)
    first = first_scaled_eigenangle(b)
    kept = first[lam >= np.percentile(lam, 30)]
    grid = np.linspace(0, 3, 301)
    F_all = np.searchsorted(np.sort(first), grid, side="right") / first.size
    F_exc = np.searchsorted(np.sort(kept), grid, side="right") / kept.size
    assert np.all(F_exc <= F_all + 0.01)


def test_normalize_mean_one():
    assert np.allclose(normalize_mean_one([2, 4]), [2 / 3, 4 / 3])
    assert np.allclose(normalize_mean_one([1, 1, 1]), [1, 1, 1])
    with pytest.raises(ValueError):
        normalize_mean_one([])
    with pytest.raises(ValueError):
        normalize_mean_one([-1, 0.5])
    b = sample_eigenangles(EnsembleId("SO_even", 10), 1000, seed=7)
    assert abs(normalize_mean_one(first_scaled_eigenangle(b)).mean() - 1) < 1e-12


def test_empirical_density_examples():
    rng = np.random.default_rng(0)
    h = empirical_density(rng.random(1_000_000), 10, (0, 1))
    assert np.all(np.abs(h.density - 1) < 0.02)
    assert abs(np.sum(h.density * h.widths) - 1) < 1e-12
    h = empirical_density([0.3], 1, (0, 2))
    assert h.density[0] == pytest.approx(0.5)
    h = empirical_density([], 5, (0, 1))
    assert h.sample_count == 0 and np.all(h.density == 0)
    h = empirical_density([-1, 0.5, 3], 2, (0, 1))
    assert (h.below, h.above, h.sample_count) == (1, 1, 3)
    with pytest.raises(ValueError):
        empirical_density([1], 3, (1, 1))


def test_histogram_csv():
    h = empirical_density([0.1, 0.2, 0.7], 2, (0, 1))
    text = h.to_csv().splitlines()
    assert text[0] == "bin_lo,bin_hi,density"
    assert text[1] == "0,0.5,1.33333333333"
    assert len(text) == 3


def test_format_number_twelve_digits():
    assert format_number(1 / 3) == "0.333333333333"
    assert format_number(2.0) == "2"
    assert format_number(1e-20) == "1e-20"


def test_spacings():
    assert list(nearest_neighbor_spacings([0, 1, 3])) == [1, 2]
    assert list(nearest_neighbor_spacings([5])) == []
    with pytest.raises(ValueError):
        nearest_neighbor_spacings([1, 0])


def test_unitary_spacings_mean_one():
    b = sample_eigenangles(EnsembleId("U", 64), 3000, seed=8)
    x = scaled_eigenangles(b)
    sp = nearest_neighbor_spacings(x)
    # all 64 gaps including wrap-around sum to 64; by rotation invariance the
    # wrap-around gap averages 1, so the 63 interior gaps also average 1
    assert abs(sp.mean() - 1) < 0.01


def test_ks_distance_examples():
    a = [0.1, 0.4, 0.5]
    assert ks_distance(a, a) == 0
    assert ks_distance([0, 1], [5, 6]) == 1
    with pytest.raises(ValueError):
        ks_distance([], [1])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=30),
       st.lists(st.integers(0, 20), min_size=1, max_size=30))
def test_ks_distance_matches_brute_force_with_ties(a, b):
    assert ks_distance(a, b) == pytest.approx(ks_brute(a, b), abs=1e-12)


def test_ks_distance_matches_scipy():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=3000), rng.normal(0.05, 1, size=2000)
    assert ks_distance(a, b) == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_charpoly_mean_matches_mgf(n):
    b = sample_eigenangles(EnsembleId("SO_even", n), 100_000, seed=40 + n)
    lam = charpoly_at_one(b)
    se = lam.std() / math.sqrt(lam.size)
    assert abs(lam.mean() - mgf_so_even(n, 1.0)) <= 3 * se
