"""CSV ingestion, splitting, standardization, windows, and the synthetic
generator."""

import numpy as np
import pytest

from tailcast import (SeriesDataset, generate_synthetic, load_csv,
                      split_and_standardize, write_csv)
from tailcast.errors import ConfigurationError, IngestionError


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------

def test_load_csv_basic(tmp_path):
    path = write(tmp_path, "y,a,b\n1.5,2,3\n0,4,5\n")
    ds = load_csv(path, "y", ["a", "b"])
    assert np.array_equal(ds.target, [1.5, 0.0])
    assert np.array_equal(ds.predictors, [[2, 3], [4, 5]])
    assert ds.predictor_names == ["a", "b"]


def test_load_csv_missing_column(tmp_path):
    path = write(tmp_path, "y,a\n1,2\n")
    with pytest.raises(IngestionError, match="'b'"):
        load_csv(path, "y", ["a", "b"])


def test_load_csv_bad_cell_names_location(tmp_path):
    path = write(tmp_path, "y,a\n1,2\n3,oops\n")
    with pytest.raises(IngestionError, match="row 3.*'a'.*'oops'"):
        load_csv(path, "y", ["a"])


def test_load_csv_missing_value(tmp_path):
    path = write(tmp_path, "y,a\n1,\n")
    with pytest.raises(IngestionError, match="row 2.*missing"):
        load_csv(path, "y", ["a"])


def test_load_csv_non_finite(tmp_path):
    path = write(tmp_path, "y,a\n1,inf\n")
    with pytest.raises(IngestionError, match="non-finite"):
        load_csv(path, "y", ["a"])


def test_load_csv_empty(tmp_path):
    path = write(tmp_path, "")
    with pytest.raises(IngestionError):
        load_csv(path, "y", ["a"])
    path = write(tmp_path, "y,a\n", name="header_only.csv")
    with pytest.raises(IngestionError, match="no data rows"):
        load_csv(path, "y", ["a"])


def test_csv_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    ds = SeriesDataset(target=rng.random(20) * 7,
                       predictors=rng.normal(size=(20, 3)),
                       predictor_names=["p1", "p2", "p3"])
    path = str(tmp_path / "round.csv")
    write_csv(path, ds)
    back = load_csv(path, "y", ds.predictor_names)
    assert np.array_equal(back.target, ds.target)
    assert np.array_equal(back.predictors, ds.predictors)


# ---------------------------------------------------------------------------
# split, standardize, window
# ---------------------------------------------------------------------------

def series(n=100, k=3, seed=1):
    rng = np.random.default_rng(seed)
    return SeriesDataset(target=rng.random(n),
                         predictors=rng.normal(loc=5.0, scale=2.0, size=(n, k)),
                         predictor_names=[f"p{i}" for i in range(k)])


def test_split_sizes_and_chronology():
    ds = series(100)
    T = 4
    tr, va, te = split_and_standardize(ds, window=T)
    assert len(tr.targets) == 70 - T
    assert len(va.targets) == 20 - T
    assert len(te.targets) == 10 - T
    # targets are the raw next values, in order
    assert np.array_equal(tr.targets, ds.target[T:70])
    assert np.array_equal(te.targets, ds.target[90 + T:])


def test_standardization_fitted_on_train_only():
    ds = series(200)
    tr, va, te = split_and_standardize(ds, window=5)
    assert np.allclose(tr.feature_mean, ds.predictors[:140].mean(axis=0))
    assert np.allclose(tr.feature_std, ds.predictors[:140].std(axis=0))
    flat = tr.windows.reshape(-1, 3)
    assert np.max(np.abs(flat.mean(axis=0))) < 0.2
    # both splits reuse the train statistics
    assert np.array_equal(va.feature_mean, tr.feature_mean)
    assert np.array_equal(te.feature_std, tr.feature_std)


def test_no_leakage_from_later_splits():
    ds = series(100)
    tr1, _, _ = split_and_standardize(ds, window=4)
    ds.predictors[90:] += 1000.0
    ds.target[90:] = 0.123
    tr2, _, _ = split_and_standardize(ds, window=4)
    assert np.array_equal(tr1.windows, tr2.windows)
    assert np.array_equal(tr1.targets, tr2.targets)


def test_window_alignment():
    ds = series(40, k=1)
    tr, _, _ = split_and_standardize(ds, window=3)
    # window i covers predictor rows i..i+2 and predicts target[i+3]
    expect = (ds.predictors[2, 0] - tr.feature_mean[0]) / tr.feature_std[0]
    assert abs(tr.windows[0, 2, 0] - expect) < 1e-12
    assert tr.targets[0] == ds.target[3]


def test_split_offset_rotates():
    ds = series(100)
    plain = split_and_standardize(ds, window=4, split_offset=0)
    rolled = split_and_standardize(ds, window=4, split_offset=30)
    assert rolled[0].targets[0] == ds.target[30 + 4]
    assert not np.array_equal(plain[0].targets, rolled[0].targets)


def test_split_validation():
    ds = series(30)
    with pytest.raises(ConfigurationError):
        split_and_standardize(ds, window=4, ratios=(0.5, 0.5, 0.5))
    with pytest.raises(ConfigurationError):
        split_and_standardize(ds, window=25)  # test part too small


def test_zero_variance_predictor_warns():
    ds = series(100)
    ds.predictors[:, 1] = 3.0
    with pytest.warns(UserWarning, match="zero variance"):
        tr, _, _ = split_and_standardize(ds, window=4)
    assert tr.feature_std[1] == 1.0


# ---------------------------------------------------------------------------
# synthetic generator
# ---------------------------------------------------------------------------

def test_synthetic_perfect_predictors_at_zero_noise(theta_star):
    ds = generate_synthetic(theta_star, 500, n_predictors=4, noise_scale=0.0,
                            seed=9)
    for j in range(4):
        assert np.array_equal(ds.predictors[:-1, j], ds.target[1:])


def test_synthetic_zero_fraction_and_determinism(theta_star):
    a = generate_synthetic(theta_star, 20_000, seed=11)
    b = generate_synthetic(theta_star, 20_000, seed=11)
    assert np.array_equal(a.target, b.target)
    assert np.array_equal(a.predictors, b.predictors)
    assert abs(np.mean(a.target == 0) - theta_star.p0) < 0.02


def test_synthetic_predictors_correlate_with_next_target(theta_star):
    sd0 = theta_star.gp.scale0
    ds = generate_synthetic(theta_star, 100_000, n_predictors=11,
                            noise_scale=0.2 * sd0, seed=12)
    for j in [0, 10]:
        r = np.corrcoef(ds.predictors[:-1, j], ds.target[1:])[0, 1]
        assert r > 0.9


def test_synthetic_noise_grows_with_column(theta_star):
    ds = generate_synthetic(theta_star, 50_000, n_predictors=10,
                            noise_scale=1.0, seed=13)
    first = np.std(ds.predictors[:-1, 0] - ds.target[1:])
    last = np.std(ds.predictors[:-1, 9] - ds.target[1:])
    assert first < last


def test_synthetic_validation(theta_star):
    with pytest.raises(ConfigurationError):
        generate_synthetic(theta_star, 100, n_predictors=0)
