"""Forecasting heavy-tailed, zero-inflated time series with an extreme
value mixture model and an LSTM-attention quantile network."""

from .distributions import (GpInvariantParams, GpThresholdParams,
                            LogNormalParams, convert_to_invariant, erf,
                            erf_inv, gp_cdf_invariant, gp_cdf_threshold,
                            gp_fit_mle, gp_quantile_invariant, lognormal_cdf,
                            zeta_at)
from .threshold import ScanConfig, ScanResult, scan_thresholds
from .mixture import (MixtureParams, fit_mixture, mixture_cdf,
                      mixture_density, mixture_quantile, sample_mixture)
from .data import (SeriesDataset, WindowedDataset, generate_synthetic,
                   load_csv, split_and_standardize, write_csv)
from .model import ForecastModel
from .training import (MetricsReport, TrainConfig, combined_loss, evaluate,
                       predict, quantile_loss, quantile_transform, train)

__all__ = [
    "GpInvariantParams", "GpThresholdParams", "LogNormalParams",
    "convert_to_invariant", "erf", "erf_inv", "gp_cdf_invariant",
    "gp_cdf_threshold", "gp_fit_mle", "gp_quantile_invariant",
    "lognormal_cdf", "zeta_at",
    "ScanConfig", "ScanResult", "scan_thresholds",
    "MixtureParams", "fit_mixture", "mixture_cdf", "mixture_density",
    "mixture_quantile", "sample_mixture",
    "SeriesDataset", "WindowedDataset", "generate_synthetic", "load_csv",
    "split_and_standardize", "write_csv",
    "ForecastModel",
    "MetricsReport", "TrainConfig", "combined_loss", "evaluate", "predict",
    "quantile_loss", "quantile_transform", "train",
]

__version__ = "0.1.0"
