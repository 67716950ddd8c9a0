"""Command-line surface.

Subcommands: scan, fit-mixture, simulate, train, predict, evaluate,
gradcheck.  Every run echoes its fully resolved configuration so it can be
reproduced from the log alone.  Exit codes: 0 success, 1 usage error,
2 data error, 3 numerical/convergence error.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import autodiff as ad
from .data import generate_synthetic, load_csv, split_and_standardize, write_csv
from .errors import (ConfigurationError, ConvergenceError, DivergenceError,
                     DomainError, IngestionError, InconsistentComponentsError,
                     InsufficientDataError, ParameterError, ShapeError)
from .mixture import MixtureParams, fit_mixture, mixture_cdf
from .model import ForecastModel
from .threshold import ScanConfig, ScanResult, scan_thresholds
from .training import (TrainConfig, batch_objective, evaluate, predict,
                       train, training_log_csv)

_DATA_ERRORS = (IngestionError, InsufficientDataError, ConfigurationError,
                InconsistentComponentsError)
_NUMERIC_ERRORS = (ConvergenceError, DivergenceError, DomainError,
                   ParameterError, ShapeError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _echo_config(name, args):
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print(f"[{name}] resolved config: {json.dumps(resolved, sort_keys=True)}")


def _load_series(path, target_col):
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise IngestionError(f"{path}: empty file")
    if target_col not in header:
        raise IngestionError(f"{path}: missing column {target_col!r}")
    predictors = [c for c in header if c != target_col]
    return load_csv(path, target_col, predictors)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_scan(args):
    _echo_config("scan", args)
    ds = _load_series(args.input, args.target_col)
    cfg = ScanConfig(grid_count=args.grid, stability_window=args.window,
                     dispersion_tol=args.tol)
    result = scan_thresholds(ds.target, cfg)
    if not result.stable:
        print("warning: no stable window found; reporting the least-dispersed one",
              file=sys.stderr)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=2)
    if args.table_out:
        with open(args.table_out, "w", encoding="utf-8") as fh:
            fh.write(result.table())
    print(f"u_star={result.u_star!r} shape={result.params.shape!r} "
          f"scale0={result.params.scale0!r} zeta0={result.params.zeta0!r} "
          f"stable={result.stable}")


def _diagnostic_tables(data, theta, cdf_path, survival_path, grid_points=512):
    positive = np.sort(data[data > 0])
    if len(positive) == 0:
        return
    idx = np.unique(np.linspace(0, len(positive) - 1, grid_points).astype(int))
    ys = positive[idx]
    n = len(data)
    # empirical CDF over all observations (zeros included)
    ecdf = np.searchsorted(np.sort(data), ys, side="right") / n
    model = mixture_cdf(ys, theta)
    with open(cdf_path, "w", encoding="utf-8") as fh:
        fh.write("y\tempirical_cdf\tmodel_cdf\n")
        for y, e, m in zip(ys, ecdf, model):
            fh.write(f"{y!r}\t{e!r}\t{m!r}\n")
    with open(survival_path, "w", encoding="utf-8") as fh:
        fh.write("y\tlog_empirical_survival\tlog_model_survival\n")
        for y, e, m in zip(ys, ecdf, model):
            if e < 1.0 and m < 1.0:
                fh.write(f"{y!r}\t{np.log(1.0 - e)!r}\t{np.log(1.0 - m)!r}\n")


def _cmd_fit_mixture(args):
    _echo_config("fit-mixture", args)
    ds = _load_series(args.input, args.target_col)
    if args.scan:
        with open(args.scan, encoding="utf-8") as fh:
            scan = ScanResult.from_dict(json.load(fh))
    else:
        scan = scan_thresholds(ds.target)
    theta = fit_mixture(ds.target, scan)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(theta.to_json())
    base = args.out.rsplit(".json", 1)[0]
    cdf_out = args.cdf_out or f"{base}.cdf.tsv"
    survival_out = args.survival_out or f"{base}.survival.tsv"
    _diagnostic_tables(ds.target, theta, cdf_out, survival_out)
    print(f"p0={theta.p0!r} p1={theta.p1!r} mu={theta.lognormal.mu!r} "
          f"s={theta.lognormal.sigma!r} shape={theta.gp.shape!r} "
          f"scale0={theta.gp.scale0!r} zeta0={theta.gp.zeta0!r} "
          f"u_star={theta.u_star!r}")


def _cmd_simulate(args):
    _echo_config("simulate", args)
    with open(args.model, encoding="utf-8") as fh:
        theta = MixtureParams.from_json(fh.read())
    ds = generate_synthetic(theta, args.n, n_predictors=args.predictors,
                            noise_scale=args.noise, seed=args.seed)
    write_csv(args.out, ds)
    print(f"wrote {args.n} rows x {args.predictors} predictors to {args.out}")


def _cmd_train(args):
    _echo_config("train", args)
    with open(args.mixture, encoding="utf-8") as fh:
        theta = MixtureParams.from_json(fh.read())
    ds = _load_series(args.data, args.target_col)
    ratios = tuple(float(r) for r in args.ratios.split(","))
    train_ds, val_ds, _ = split_and_standardize(ds, args.window, ratios,
                                                split_offset=args.split_offset)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch,
                      learning_rate=args.lr, seed=args.seed)
    model, log = train(train_ds, val_ds, theta, cfg,
                       hidden=args.hidden, heads=args.heads,
                       tau=args.tau, loss_weight=args.w)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(model.to_json())
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(training_log_csv(log))
    best = min(row["val_loss"] for row in log)
    print(f"best validation loss {best!r}; model written to {args.out}")


def _cmd_predict(args):
    _echo_config("predict", args)
    with open(args.model, encoding="utf-8") as fh:
        model = ForecastModel.from_json(fh.read())
    with open(args.mixture, encoding="utf-8") as fh:
        theta = MixtureParams.from_json(fh.read())
    ds = _load_series(args.data, args.target_col)
    if model.feature_mean is None:
        raise ConfigurationError("model carries no standardization statistics")
    T = model.window
    count = len(ds.target) - T
    if count <= 0:
        raise ConfigurationError(f"need more than {T} rows to build a window")
    X = np.stack([(ds.predictors[i:i + T] - model.feature_mean) / model.feature_std
                  for i in range(count)])
    y_true = ds.target[T:T + count]
    q_hat, y_hat = predict(model, theta, X)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y_true", "q_hat", "y_hat"])
        for yt, qh, yh in zip(y_true, q_hat, y_hat):
            writer.writerow([repr(float(yt)), repr(float(qh)), repr(float(yh))])
    print(f"wrote {count} predictions to {args.out}")


def _cmd_evaluate(args):
    _echo_config("evaluate", args)
    y_true, y_hat = [], []
    with open(args.preds, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"y_true", "y_hat"} <= set(reader.fieldnames):
            raise IngestionError(f"{args.preds}: need columns y_true and y_hat")
        for lineno, row in enumerate(reader, start=2):
            try:
                y_true.append(float(row["y_true"]))
                y_hat.append(float(row["y_hat"]))
            except (TypeError, ValueError):
                raise IngestionError(f"{args.preds}: row {lineno}: not numeric") from None
    report = evaluate(np.array(y_hat), np.array(y_true),
                      split_quantile=args.split_quantile)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    print(report.to_json())


def _cmd_gradcheck(args):
    _echo_config("gradcheck", args)
    rng = np.random.default_rng(args.seed)
    model = ForecastModel.init(n_features=2, window=3, hidden=4, heads=2,
                               seed=args.seed)
    windows = rng.normal(size=(2, 3, 2))
    q_targets = rng.uniform(0.1, 0.9, size=2)

    def loss_fn():
        loss, _, _ = batch_objective(model, windows, q_targets)
        return loss

    report = ad.gradient_check(model.parameters(), loss_fn, tolerance=args.tol)
    for entry in report["params"]:
        status = "ok" if entry["passed"] else "FAIL"
        print(f"{status}  {entry['name']}  max_rel_error={entry['max_rel_error']:.3e}")
    if not report["passed"]:
        print("gradient check FAILED", file=sys.stderr)
        sys.exit(3)
    print("gradient check passed")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="tailcast",
                     description="EVT mixture modeling and quantile forecasting "
                                 "for zero-inflated heavy-tailed series")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("scan", help="threshold stability scan")
    p.add_argument("--input", required=True)
    p.add_argument("--target-col", default="y")
    p.add_argument("--grid", type=int, default=60)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--tol", type=float, default=0.20)
    p.add_argument("--out", required=True)
    p.add_argument("--table-out", default=None)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("fit-mixture", help="fit the zero/log-normal/GP mixture")
    p.add_argument("--input", required=True)
    p.add_argument("--target-col", default="y")
    p.add_argument("--scan", default=None, help="reuse an existing scan JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--cdf-out", default=None)
    p.add_argument("--survival-out", default=None)
    p.set_defaults(func=_cmd_fit_mixture)

    p = sub.add_parser("simulate", help="draw a synthetic dataset from a fitted mixture")
    p.add_argument("--model", required=True, help="mixture JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--predictors", type=int, default=11)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="train the forecasting network")
    p.add_argument("--data", required=True)
    p.add_argument("--target-col", default="y")
    p.add_argument("--mixture", required=True)
    p.add_argument("--window", type=int, default=7)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--w", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", default="0.7,0.2,0.1")
    p.add_argument("--split-offset", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="predict quantiles and values")
    p.add_argument("--model", required=True)
    p.add_argument("--mixture", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--target-col", default="y")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="region-split RMSE metrics")
    p.add_argument("--preds", required=True)
    p.add_argument("--split-quantile", type=float, default=0.6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("gradcheck", help="finite-difference check of the full objective")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        sys.exit(2)
    except _NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        sys.exit(3)
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    main()
