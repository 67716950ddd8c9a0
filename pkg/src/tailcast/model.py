"""Full forecasting model: LSTM autoencoder plus attention quantile head,
with versioned JSON serialization of all weights and hyperparameters."""

import json
from dataclasses import dataclass

import numpy as np

from .attention import ForecasterParams, forecaster_forward
from .autodiff import Tensor
from .errors import ParameterError, ShapeError
from .lstm import LstmParams, decode_reconstruct, encode

FORMAT_VERSION = 1


@dataclass
class ForecastModel:
    encoder: LstmParams
    decoder: LstmParams
    proj_w: Tensor          # decoder readout (m, n)
    proj_b: Tensor          # (1, n)
    forecaster: ForecasterParams
    n_features: int
    window: int
    hidden: int
    heads: int
    tau: float = 0.5
    loss_weight: float = 0.5
    feature_mean: np.ndarray | None = None
    feature_std: np.ndarray | None = None

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ParameterError(f"tau must lie in (0, 1), got {self.tau}")
        if not 0 <= self.loss_weight <= 1:
            raise ParameterError(f"loss weight must lie in [0, 1], got {self.loss_weight}")

    @classmethod
    def init(cls, n_features, window, hidden, heads, seed,
             tau=0.5, loss_weight=0.5):
        rng = np.random.default_rng(seed)
        m = hidden
        bound = 1.0 / np.sqrt(m)
        return cls(
            encoder=LstmParams.init(n_features, m, rng),
            decoder=LstmParams.init(n_features, m, rng),
            proj_w=Tensor(rng.uniform(-bound, bound, size=(m, n_features))),
            proj_b=Tensor(np.zeros((1, n_features))),
            forecaster=ForecasterParams.init(m, heads, rng),
            n_features=n_features, window=window, hidden=m, heads=heads,
            tau=tau, loss_weight=loss_weight,
        )

    # -- evaluation ---------------------------------------------------------

    def encode(self, windows):
        self._check(windows)
        return encode(windows, self.encoder)

    def reconstruct(self, enc, windows, teacher_forcing=True):
        return decode_reconstruct(enc, windows, self.decoder,
                                  self.proj_w, self.proj_b,
                                  teacher_forcing=teacher_forcing)

    def forecast(self, enc):
        return forecaster_forward(enc, self.forecaster)

    def predict_quantiles(self, windows):
        """Forward pass without the decoder; returns a (B,) array."""
        enc = self.encode(windows)
        return self.forecast(enc).value[:, 0].copy()

    def _check(self, windows):
        arr = np.asarray(windows, dtype=float) if not isinstance(windows, list) else None
        if arr is not None and arr.ndim == 3 and (
                arr.shape[1] != self.window or arr.shape[2] != self.n_features):
            raise ShapeError(
                f"window batch {arr.shape} does not match model "
                f"(T={self.window}, n={self.n_features})")

    # -- parameters ---------------------------------------------------------

    def parameters(self):
        out = self.encoder.parameters("encoder")
        out += self.decoder.parameters("decoder")
        out += [("proj_w", self.proj_w), ("proj_b", self.proj_b)]
        out += self.forecaster.parameters()
        return out

    def state(self):
        return {name: t.value.copy() for name, t in self.parameters()}

    def load_state(self, state):
        for name, t in self.parameters():
            if name not in state:
                raise ParameterError(f"missing weight array {name!r}")
            arr = np.asarray(state[name], dtype=float)
            if arr.shape != t.value.shape:
                raise ShapeError(
                    f"weight {name!r} has shape {arr.shape}, expected {t.value.shape}")
            t.value[...] = arr

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        doc = {
            "format_version": FORMAT_VERSION,
            "hyperparameters": {
                "n_features": self.n_features,
                "window": self.window,
                "hidden": self.hidden,
                "heads": self.heads,
                "tau": self.tau,
                "loss_weight": self.loss_weight,
            },
            "standardization": None,
            "weights": {name: t.value.tolist() for name, t in self.parameters()},
        }
        if self.feature_mean is not None:
            doc["standardization"] = {"mean": self.feature_mean.tolist(),
                                      "std": self.feature_std.tolist()}
        return doc

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc):
        if doc.get("format_version") != FORMAT_VERSION:
            raise ParameterError(
                f"unsupported model format_version {doc.get('format_version')}")
        h = doc["hyperparameters"]
        model = cls.init(h["n_features"], h["window"], h["hidden"], h["heads"],
                         seed=0, tau=h["tau"], loss_weight=h["loss_weight"])
        model.load_state(doc["weights"])
        std = doc.get("standardization")
        if std is not None:
            model.feature_mean = np.asarray(std["mean"], dtype=float)
            model.feature_std = np.asarray(std["std"], dtype=float)
        return model

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))
