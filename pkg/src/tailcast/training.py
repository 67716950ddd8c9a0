"""Training and inference: quantile-space targets, combined objective,
adaptive-moment optimizer loop with best-validation checkpointing, and
region-split evaluation metrics."""

import json
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import WindowedDataset
from .errors import ConfigurationError, DivergenceError, DomainError
from .mixture import MixtureParams, mixture_cdf, mixture_quantile
from .model import ForecastModel


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class MetricsReport:
    total_rmse: float
    extreme_rmse: float | None
    moderate_rmse: float | None
    zero_rmse: float | None
    counts: dict
    split_threshold: float
    split_quantile: float

    def to_dict(self):
        return {
            "total_rmse": self.total_rmse,
            "extreme_rmse": self.extreme_rmse,
            "moderate_rmse": self.moderate_rmse,
            "zero_rmse": self.zero_rmse,
            "counts": self.counts,
            "split_threshold": self.split_threshold,
            "split_quantile": self.split_quantile,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def quantile_transform(y, theta: MixtureParams):
    """Map raw targets to their model quantiles q = CDF(y)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("targets must be >= 0")
    return mixture_cdf(y, theta)


def quantile_loss(q, q_hat, tau):
    """Pinball loss; the batch version averages over samples."""
    q = np.asarray(q, dtype=float)
    q_hat = np.asarray(q_hat, dtype=float)
    e = q - q_hat
    return float(np.mean(np.maximum(tau * e, (tau - 1.0) * e)))


def combined_loss(recon, quant, w):
    """Weighted trade-off between reconstruction and quantile loss."""
    if not 0 <= w <= 1:
        raise ConfigurationError(f"w must lie in [0, 1], got {w}")
    return w * recon + (1.0 - w) * quant


def batch_objective(model: ForecastModel, windows, q_targets,
                    teacher_forcing=True):
    """Build the differentiable combined objective for one batch.

    Returns (loss, recon, quant) tensors; `windows` is (B, T, n) and
    `q_targets` (B,) in quantile space.
    """
    from .lstm import _as_step_tensors, reconstruction_loss

    steps = _as_step_tensors(windows)
    enc = model.encode(steps)
    outputs = model.reconstruct(enc, steps, teacher_forcing=teacher_forcing)
    recon = reconstruction_loss(steps, outputs)

    q_hat = model.forecast(enc)                      # (B, 1)
    q = Tensor(np.asarray(q_targets, dtype=float).reshape(-1, 1))
    quant = ad.pinball(q_hat, q, model.tau)

    w = model.loss_weight
    loss = ad.scale(recon, w) + ad.scale(quant, 1.0 - w)
    return loss, recon, quant


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------

class Adam:
    """Adaptive-moment stochastic gradient updates."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params  # list of (name, Tensor)
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(t.value) for _, t in params]
        self.v = [np.zeros_like(t.value) for _, t in params]
        self.t = 0

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, (_, p) in enumerate(self.params):
            g = p.grad if p.grad is not None else np.zeros_like(p.value)
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g * g
            m_hat = self.m[i] / (1 - b1 ** self.t)
            v_hat = self.v[i] / (1 - b2 ** self.t)
            p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------

def _epoch_eval(model, windows, q_targets, batch_size):
    """Average combined/recon/quantile loss over a dataset (no updates)."""
    totals = np.zeros(3)
    count = 0
    for lo in range(0, len(q_targets), batch_size):
        hi = min(lo + batch_size, len(q_targets))
        loss, recon, quant = batch_objective(model, windows[lo:hi], q_targets[lo:hi])
        b = hi - lo
        totals += b * np.array([float(loss.value), float(recon.value), float(quant.value)])
        count += b
    return totals / count


def train(train_ds: WindowedDataset, val_ds: WindowedDataset,
          theta: MixtureParams, cfg: TrainConfig,
          model: ForecastModel | None = None,
          n_features=None, window=None, hidden=64, heads=4,
          tau=0.5, loss_weight=0.5):
    """Minimize the combined objective; keep the weights with the lowest
    validation combined loss.  Returns (model, log) where log is a list of
    per-epoch dicts."""
    if len(train_ds.targets) == 0 or len(val_ds.targets) == 0:
        raise ConfigurationError("empty train or validation split")

    if model is None:
        n_features = n_features or train_ds.windows.shape[2]
        window = window or train_ds.windows.shape[1]
        model = ForecastModel.init(n_features, window, hidden, heads,
                                   seed=cfg.seed, tau=tau, loss_weight=loss_weight)
    model.feature_mean = train_ds.feature_mean.copy()
    model.feature_std = train_ds.feature_std.copy()

    q_train = quantile_transform(train_ds.targets, theta)
    q_val = quantile_transform(val_ds.targets, theta)

    params = model.parameters()
    opt = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    rng = np.random.default_rng(cfg.seed)

    log = []
    best_val = np.inf
    best_state = model.state()
    n_train = len(q_train)

    for epoch in range(cfg.epochs):
        order = rng.permutation(n_train)
        epoch_loss = 0.0
        for batch_idx, lo in enumerate(range(0, n_train, cfg.batch_size)):
            idx = order[lo:lo + cfg.batch_size]
            loss, _, _ = batch_objective(model, train_ds.windows[idx], q_train[idx])
            if not np.isfinite(loss.value):
                raise DivergenceError(
                    f"non-finite loss in epoch {epoch}, batch {batch_idx}",
                    batch_index=batch_idx)
            ad.backward(loss)
            opt.step()
            epoch_loss += float(loss.value) * len(idx)
        train_loss = epoch_loss / n_train

        val_loss, val_recon, val_quant = _epoch_eval(
            model, val_ds.windows, q_val, cfg.batch_size)
        log.append({"epoch": epoch, "train_loss": train_loss,
                    "val_loss": float(val_loss), "recon": float(val_recon),
                    "quantile": float(val_quant)})
        if val_loss < best_val:
            best_val = float(val_loss)
            best_state = model.state()

    model.load_state(best_state)
    return model, log


def training_log_csv(log):
    lines = ["epoch,train_loss,val_loss,recon,quantile"]
    for row in log:
        lines.append(f"{row['epoch']},{row['train_loss']!r},{row['val_loss']!r},"
                     f"{row['recon']!r},{row['quantile']!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# inference and metrics
# ---------------------------------------------------------------------------

def predict(model: ForecastModel, theta: MixtureParams, windows,
            batch_size=256):
    """Predicted quantiles and back-transformed values for a window batch."""
    windows = np.asarray(windows, dtype=float)
    q_hat = np.empty(len(windows))
    for lo in range(0, len(windows), batch_size):
        hi = min(lo + batch_size, len(windows))
        q_hat[lo:hi] = model.predict_quantiles(windows[lo:hi])
    y_hat = mixture_quantile(q_hat, theta)
    return q_hat, np.atleast_1d(y_hat)


def evaluate(y_hat, y_true, split_quantile=0.6) -> MetricsReport:
    """Region-split RMSE: zero / moderate / extreme by the empirical
    split quantile of the test targets."""
    y_hat = np.asarray(y_hat, dtype=float)
    y_true = np.asarray(y_true, dtype=float)
    if y_hat.shape != y_true.shape:
        raise ConfigurationError("prediction and target lengths differ")
    if np.any(y_true < 0):
        raise DomainError("targets must be >= 0")

    thr = float(np.quantile(y_true, split_quantile))
    zero = y_true == 0
    extreme = y_true > thr
    moderate = ~zero & ~extreme

    def rmse(mask):
        if not np.any(mask):
            return None
        d = y_hat[mask] - y_true[mask]
        return float(np.sqrt(np.mean(d * d)))

    return MetricsReport(
        total_rmse=rmse(np.ones_like(zero)),
        extreme_rmse=rmse(extreme),
        moderate_rmse=rmse(moderate),
        zero_rmse=rmse(zero),
        counts={"zero": int(zero.sum()), "moderate": int(moderate.sum()),
                "extreme": int(extreme.sum())},
        split_threshold=thr,
        split_quantile=split_quantile,
    )
