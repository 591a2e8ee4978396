import math
from pathlib import Path

import numpy as np
import pytest

import excised
from excised.arithmetic import FamilySpec, bundled_newform, family_discriminants
from excised.calibration import zero_density_R
from excised.compare import (ZeroDataError, ZeroDataset, ZeroRecord,
                             compare_report, default_ensemble, empirical_pair_correlation,
                             infer_case, l2_distance, load_pairings, load_zero_dataset,
                             scale_zeros)
from excised.ensembles import EnsembleId, sample_eigenangles
from excised.kernels import pair_correlation_unitary
from excised.spectral import (charpoly_at_one, empirical_density, excise, first_scaled_eigenangle,
                              ks_distance, scaled_eigenangles)

F11 = bundled_newform("11.2.a.a")
F3 = bundled_newform("3.7.b.a")
SAMPLE = Path(excised.__file__).with_name("data") / "sample_zeros_11.2.a.a_even.csv"


def _write(tmp_path, text, name="z.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# -- loader --------------------------------------------------------------------

def test_load_minimal(tmp_path):
    ds = load_zero_dataset(_write(tmp_path, "d,gamma1\n5,1.2345\n"))
    assert len(ds) == 1 and ds.records[0] == ZeroRecord(5, (1.2345,), False)


def test_load_metadata_extra_ordinates_and_flags(tmp_path):
    text = ("# newform: 11.2.a.a\n# source: hand\n\n"
            "d,gamma1,gamma2,vanishing\n5,0.5,1.5,0\n8,0,0.9,1\n13,0.7,,no\n")
    ds = load_zero_dataset(_write(tmp_path, text))
    assert ds.newform_label == "11.2.a.a" and ds.source == "hand"
    assert ds.vanishing_count == 1 and list(ds.discriminants) == [5, 8, 13]
    assert ds.records[2].gammas == (0.7,)


@pytest.mark.parametrize("body,msg", [
    ("d,gamma1\n7,0\n", "line 2"),                      # zero without flag (7 is not fundamental either)
    ("d,gamma1\n5,0\n", "positive"),
    ("d,gamma1\n5,1\n5,2\n", "duplicate"),
    ("d,gamma1\n9,1\n", "fundamental"),
    ("d,gamma1\n1,1\n", "fundamental"),
    ("d,gamma1\n5,abc\n", "not a number"),
    ("d,gamma1\n5,1,2\n", "fields"),
    ("x,gamma1\n5,1\n", "header"),
    ("d,gamma1,vanishing\n5,1,maybe\n", "flag"),
    ("d,gamma1,vanishing\n5,1,1\n", "gamma1 = 0"),
    ("d,gamma1,gamma2\n5,2,1\n", "ascending"),
    ("# only a comment\n", "no header"),
])
def test_load_errors(tmp_path, body, msg):
    with pytest.raises(ZeroDataError, match=msg):
        load_zero_dataset(_write(tmp_path, body))


def test_row_error_cites_line(tmp_path):
    with pytest.raises(ZeroDataError, match="line 4"):
        load_zero_dataset(_write(tmp_path, "# c\nd,gamma1\n5,1\n12,-1\n"))


def test_bundled_sample_round_trip(tmp_path):
    ds = load_zero_dataset(SAMPLE)
    assert len(ds) == 200 and ds.newform_label == "11.2.a.a"
    out = tmp_path / "again.csv"
    ds.save(out)
    again = load_zero_dataset(out)
    assert again.records == ds.records and again.source == ds.source
    assert out.read_text() == SAMPLE.read_text()


def test_dataset_validation():
    with pytest.raises(ZeroDataError):
        ZeroDataset("x", [ZeroRecord(5, (1.0,)), ZeroRecord(5, (2.0,))])
    with pytest.raises(ZeroDataError):
        ZeroDataset("x", [ZeroRecord(5, (0.0,))])


# -- scaling -------------------------------------------------------------------

def test_scale_zeros_examples():
    X = 1e4
    R = zero_density_R("principal_even", 11, X)
    ds = ZeroDataset("x", [ZeroRecord(5, (math.pi / R,)), ZeroRecord(8, (0.0,), True)])
    out = scale_zeros(ds, "principal_even", 11, X)
    assert out.size == 1 and out[0] == pytest.approx(1.0, abs=1e-15)
    ds = ZeroDataset("x", [ZeroRecord(5, (0.0,), True), ZeroRecord(8, (0.0,), True)])
    assert scale_zeros(ds, "principal_even", 11, X).size == 0 and ds.vanishing_count == 2


def test_scale_zeros_inverts_synthesis():
    X = 1e5
    R = zero_density_R("principal_even", 11, X)
    x = first_scaled_eigenangle(sample_eigenangles(EnsembleId("SO_even", 8), 500, seed=1))
    ds = ZeroDataset("x", [ZeroRecord(1000 + i, (g,)) for i, g in enumerate(x * math.pi / R)])
    assert np.max(np.abs(scale_zeros(ds, "principal_even", 11, X) - x)) <= 1e-12


# -- distances -------------------------------------------------------------------

def test_ks_examples():
    a = np.array([0.3, 0.1, 0.9])
    assert ks_distance(a, a) == 0
    assert ks_distance([1, 2], [3, 4]) == 1


def test_ks_null_same_law():
    e = EnsembleId("SO_even", 8)
    a = first_scaled_eigenangle(sample_eigenangles(e, 100_000, seed=10))
    b = first_scaled_eigenangle(sample_eigenangles(e, 100_000, seed=11))
    assert ks_distance(a, b) <= 0.012


def test_l2_shared_bins_and_range():
    h1 = empirical_density([0.1, 0.2], 4, (0, 1))
    h2 = empirical_density([0.8, 0.9], 4, (0, 1))
    assert l2_distance(h1, h1) == 0
    assert l2_distance(h1, h2) == pytest.approx(math.sqrt(2))
    assert 0 <= l2_distance(h1, h2) <= 2
    with pytest.raises(ValueError):
        l2_distance(h1, empirical_density([0.1], 5, (0, 1)))


# -- pairings ----------------------------------------------------------------------

def test_default_ensembles():
    assert default_ensemble("11.2.a.a", "principal_even") == EnsembleId("SO_even", 10)
    assert default_ensemble("3.7.b.a", "self_cm") == EnsembleId("USp", 10)
    assert default_ensemble("13.2.e.a", "generic") == EnsembleId("U", 16)
    assert default_ensemble("unknown", "principal_odd") == EnsembleId("SO_odd", 10)
    assert all(p.ensemble.half_size > 0 for p in load_pairings())


def test_pairings_overridable(tmp_path):
    p = _write(tmp_path, "label,case,group,half_size\n11.2.a.a,principal_even,so-even,7\n")
    assert default_ensemble("11.2.a.a", "principal_even", load_pairings(p)) == EnsembleId("SO_even", 7)
    with pytest.raises(KeyError):
        default_ensemble("11.2.a.a", "self_cm", load_pairings(p))


def test_infer_case():
    even = family_discriminants(FamilySpec(F11, "principal_even", 500))
    odd = family_discriminants(FamilySpec(F11, "principal_odd", 500))
    assert infer_case(F11, even).value == "principal_even"
    assert infer_case(F11, odd).value == "principal_odd"
    with pytest.raises(ValueError):
        infer_case(F11, [int(even[0]), int(odd[0])])
    assert infer_case(F3, [5]).value == "self_cm"


# -- reports -------------------------------------------------------------------

def test_report_on_bundled_sample(tmp_path):
    ds = load_zero_dataset(SAMPLE)
    r = compare_report(ds, F11, mc_count=20_000, seed=3, X=2000, excision="calibrate")
    assert r.ensemble == EnsembleId("SO_even", 10) and r.case.value == "principal_even"
    assert 0 <= r.ks <= 1 and 0 <= r.l2 <= 2
    assert np.array_equal(r.data_histogram.bin_edges, r.model_histogram.bin_edges)
    assert r.data_histogram.density.size == 60 and r.data_histogram.bin_edges[-1] == 4
    assert r.threshold_used is not None and r.counts["model_kept"] <= 20_000
    path = r.write(tmp_path)
    assert path.exists() and (tmp_path / "compare_data_hist.csv").exists()
    again = compare_report(ds, F11, mc_count=20_000, seed=3, X=2000, excision="calibrate")
    assert again.to_dict() == r.to_dict()


def test_report_self_test_excised_so20():
    e = EnsembleId("SO_even", 10)
    b = sample_eigenangles(e, 40_000, seed=500)
    lam = charpoly_at_one(b)
    t_star = float(np.quantile(lam, 0.25))
    x = first_scaled_eigenangle(excise(b, t_star))[:10_000]
    ds = ZeroDataset("11.2.a.a", [ZeroRecord(10_000 + i, (g,)) for i, g in enumerate(x)])
    r = compare_report(ds, F11, e, mc_count=100_000, seed=1, excision="calibrate",
                       case="principal_even")
    assert r.ks <= 0.02


def test_report_pairing_mismatch_warns_but_runs():
    ds = load_zero_dataset(SAMPLE)
    with pytest.warns(UserWarning, match="pair with"):
        r = compare_report(ds, F11, EnsembleId("U", 10), mc_count=2000, seed=0)
    assert r.warnings


def test_report_errors():
    ds = load_zero_dataset(SAMPLE)
    with pytest.raises(ValueError):
        compare_report(ds, F11, mc_count=1000, excision="sometimes")
    with pytest.raises(ValueError):
        compare_report(ds, F11, mc_count=1000, case="self_cm")
    empty = ZeroDataset("x", [ZeroRecord(5, (0.0,), True)])
    with pytest.raises(ValueError):
        compare_report(empty, F11, mc_count=1000, case="principal_even")


# -- pair correlation ---------------------------------------------------------------

def test_pair_correlation_two_zeros():
    R = 3.0
    h = empirical_pair_correlation([0.0, math.pi / R], R, 3, (-1.5, 1.5))
    # one ordered pair each at -1 and +1, per unit length per zero
    assert list(h.counts) == [1, 0, 1]
    assert h.density[2] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        empirical_pair_correlation([1.0], R, 10, (0, 1))
    with pytest.raises(ValueError):
        empirical_pair_correlation([2.0, 1.0], R, 10, (0, 1))


def test_pair_correlation_poisson_flat():
    rng = np.random.default_rng(0)
    n, spectra = 200, 200
    pts = np.sort(rng.uniform(0, n, size=(spectra, n)), axis=1)
    # unit density, unit scaling (R = pi); wrap on the circle of length n
    h = empirical_pair_correlation(pts, math.pi, 10, (0, 2), period=n)
    width = 0.2
    se = np.sqrt(h.density / (spectra * n * width))
    assert np.all(np.abs(h.density - 1) <= 4 * se)


def test_pair_correlation_unitary_matches_closed_form():
    N = 64
    x = scaled_eigenangles(sample_eigenangles(EnsembleId("U", N), 10_000, seed=64))
    h = empirical_pair_correlation(x, math.pi, 40, (0, 4), period=N)
    centres = 0.5 * (h.bin_edges[1:] + h.bin_edges[:-1])
    fine = [np.mean(pair_correlation_unitary(N, np.linspace(lo, hi, 51)))
            for lo, hi in zip(h.bin_edges[:-1], h.bin_edges[1:])]
    assert np.max(np.abs(h.density - np.array(fine))) <= 0.03, centres
