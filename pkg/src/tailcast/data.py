"""CSV ingestion, chronological splitting, standardization, sliding-window
construction, and a synthetic dataset generator for desk-scale runs."""

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, IngestionError
from .mixture import MixtureParams, mixture_quantile


@dataclass
class SeriesDataset:
    target: np.ndarray       # (N,)
    predictors: np.ndarray   # (N, n)
    predictor_names: list
    timestamps: list | None = None

    def __post_init__(self):
        if len(self.target) != len(self.predictors):
            raise IngestionError("target and predictor row counts differ")


@dataclass
class WindowedDataset:
    windows: np.ndarray      # (num_windows, T, n), standardized
    targets: np.ndarray      # (num_windows,), raw units
    feature_mean: np.ndarray
    feature_std: np.ndarray


def load_csv(path, target_column, predictor_columns, timestamp_column=None):
    """Read a headered CSV; every referenced cell must parse as a finite
    number.  Errors name the offending row and column."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestionError(f"{path}: empty file or missing header")
        needed = [target_column] + list(predictor_columns)
        for col in needed:
            if col not in reader.fieldnames:
                raise IngestionError(f"{path}: missing column {col!r}")
        if timestamp_column is not None and timestamp_column not in reader.fieldnames:
            raise IngestionError(f"{path}: missing column {timestamp_column!r}")

        targets, rows, stamps = [], [], []
        for lineno, record in enumerate(reader, start=2):
            values = []
            for col in needed:
                cell = record.get(col)
                if cell is None or cell.strip() == "":
                    raise IngestionError(f"{path}: row {lineno}, column {col!r}: missing value")
                try:
                    v = float(cell)
                except ValueError:
                    raise IngestionError(
                        f"{path}: row {lineno}, column {col!r}: not numeric: {cell!r}") from None
                if not np.isfinite(v):
                    raise IngestionError(f"{path}: row {lineno}, column {col!r}: non-finite value")
                values.append(v)
            targets.append(values[0])
            rows.append(values[1:])
            if timestamp_column is not None:
                stamps.append(record[timestamp_column])

    if not rows:
        raise IngestionError(f"{path}: no data rows")
    return SeriesDataset(target=np.asarray(targets),
                         predictors=np.asarray(rows),
                         predictor_names=list(predictor_columns),
                         timestamps=stamps if timestamp_column else None)


def write_csv(path, ds: SeriesDataset, target_column="y"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([target_column] + ds.predictor_names)
        for i in range(len(ds.target)):
            writer.writerow([repr(float(ds.target[i]))]
                            + [repr(float(v)) for v in ds.predictors[i]])


def _make_windows(target, predictors, T, mean, std):
    n_rows = len(target)
    count = n_rows - T
    if count <= 0:
        raise ConfigurationError(f"split of {n_rows} rows cannot hold a window of length {T}")
    X = np.stack([(predictors[i:i + T] - mean) / std for i in range(count)])
    y = target[T:T + count].copy()
    return WindowedDataset(windows=X, targets=y, feature_mean=mean, feature_std=std)


def split_and_standardize(ds: SeriesDataset, window, ratios=(0.7, 0.2, 0.1),
                          split_offset=0):
    """Chronological train/validation/test split with per-feature
    standardization fitted on the training predictors only.

    `split_offset` cyclically rotates the rows before splitting, which
    randomizes which contiguous block lands in each part without
    shuffling within a part.
    """
    ratios = tuple(float(r) for r in ratios)
    if any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigurationError(f"split ratios must be nonnegative and sum to 1: {ratios}")

    target, predictors = ds.target, ds.predictors
    if split_offset:
        k = int(split_offset) % len(target)
        target = np.roll(target, -k)
        predictors = np.roll(predictors, -k, axis=0)

    N = len(target)
    n_train = int(round(N * ratios[0]))
    n_val = int(round(N * ratios[1]))
    parts = [(0, n_train), (n_train, n_train + n_val), (n_train + n_val, N)]
    for lo, hi in parts:
        if hi - lo <= window:
            raise ConfigurationError(
                f"split with {hi - lo} rows cannot hold a window of length {window}")

    train_pred = predictors[:n_train]
    mean = train_pred.mean(axis=0)
    std = train_pred.std(axis=0)
    degenerate = std < 1e-12
    if np.any(degenerate):
        warnings.warn(f"{int(degenerate.sum())} predictor(s) have zero variance; "
                      "standardizing with std=1")
        std = np.where(degenerate, 1.0, std)

    return tuple(_make_windows(target[lo:hi], predictors[lo:hi], window, mean, std)
                 for lo, hi in parts)


def generate_synthetic(theta: MixtureParams, n_rows, n_predictors=11,
                       noise_scale=1.0, seed=0) -> SeriesDataset:
    """Synthetic dataset with a learnable signal: targets drawn i.i.d.
    from the mixture, and each predictor column j at row t a noisy
    "forecast" of the next target, with noise growing in j."""
    if n_predictors < 1:
        raise ConfigurationError("need at least one predictor column")
    rng = np.random.default_rng(seed)
    draws = mixture_quantile(rng.random(n_rows + 1), theta)
    target = draws[:n_rows]
    next_target = draws[1:]
    predictors = np.empty((n_rows, n_predictors))
    for j in range(1, n_predictors + 1):
        sd = noise_scale * (1.0 + j / n_predictors)
        predictors[:, j - 1] = next_target + rng.normal(0.0, sd, size=n_rows) \
            if noise_scale > 0 else next_target
    names = [f"pred_{j}" for j in range(1, n_predictors + 1)]
    return SeriesDataset(target=target, predictors=predictors,
                         predictor_names=names)
