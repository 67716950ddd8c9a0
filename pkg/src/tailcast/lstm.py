"""LSTM encoder and reversed-order reconstruction decoder.

The encoder maps a window of predictor vectors to hidden states h_1..h_T;
the decoder, initialized from the encoder's final state, reconstructs the
window in reverse order through a learned affine readout.
"""

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ShapeError


@dataclass
class LstmParams:
    """Packed gate weights; column blocks are (input, forget, cell, output)."""

    w_x: Tensor   # (n, 4m)
    w_h: Tensor   # (m, 4m)
    bias: Tensor  # (1, 4m)
    input_size: int
    hidden_size: int

    @classmethod
    def init(cls, input_size, hidden_size, rng):
        m = hidden_size
        bound = 1.0 / np.sqrt(m)
        w_x = rng.uniform(-bound, bound, size=(input_size, 4 * m))
        w_h = rng.uniform(-bound, bound, size=(m, 4 * m))
        bias = np.zeros((1, 4 * m))
        bias[0, m:2 * m] = 1.0  # forget gate opens at the start of training
        return cls(Tensor(w_x), Tensor(w_h), Tensor(bias), input_size, m)

    def parameters(self, prefix):
        return [(f"{prefix}.w_x", self.w_x),
                (f"{prefix}.w_h", self.w_h),
                (f"{prefix}.bias", self.bias)]


@dataclass
class EncodedWindow:
    hidden: list       # T tensors of shape (B, m); row t is the state after x_t
    final_h: Tensor    # (B, m)
    final_c: Tensor    # (B, m)


def lstm_cell(x_t, h_prev, c_prev, p: LstmParams):
    """One step of the standard gated recurrence."""
    if x_t.shape[-1] != p.input_size or h_prev.shape[-1] != p.hidden_size:
        raise ShapeError(
            f"cell inputs {x_t.shape}/{h_prev.shape} do not match "
            f"(n={p.input_size}, m={p.hidden_size})")
    m = p.hidden_size
    gates = (x_t @ p.w_x) + (h_prev @ p.w_h) + p.bias
    i = ad.sigmoid(ad.slice_cols(gates, 0, m))
    f = ad.sigmoid(ad.slice_cols(gates, m, 2 * m))
    g = ad.tanh(ad.slice_cols(gates, 2 * m, 3 * m))
    o = ad.sigmoid(ad.slice_cols(gates, 3 * m, 4 * m))
    c_t = (f * c_prev) + (i * g)
    h_t = o * ad.tanh(c_t)
    return h_t, c_t


def encode(window, p: LstmParams) -> EncodedWindow:
    """Run the encoder over a (B, T, n) array (or list of (B, n) tensors)."""
    steps = _as_step_tensors(window)
    batch = steps[0].shape[0]
    h = Tensor(np.zeros((batch, p.hidden_size)))
    c = Tensor(np.zeros((batch, p.hidden_size)))
    hidden = []
    for x_t in steps:
        h, c = lstm_cell(x_t, h, c, p)
        hidden.append(h)
    return EncodedWindow(hidden=hidden, final_h=h, final_c=c)


def decode_reconstruct(enc: EncodedWindow, window, p_dec: LstmParams,
                       proj_w: Tensor, proj_b: Tensor, teacher_forcing=True):
    """Reconstruct the window in reverse order (x_T first).

    With teacher forcing the decoder consumes the previous reconstruction
    target; without, its own previous output.  The first input is a zero
    vector either way.
    """
    steps = _as_step_tensors(window)
    T = len(steps)
    batch = steps[0].shape[0]
    n = p_dec.input_size

    h, c = enc.final_h, enc.final_c
    x_in = Tensor(np.zeros((batch, n)))
    outputs = []
    for k in range(T):
        h, c = lstm_cell(x_in, h, c, p_dec)
        y = (h @ proj_w) + proj_b
        outputs.append(y)
        if k + 1 < T:
            x_in = steps[T - 1 - k] if teacher_forcing else y
    return outputs  # reconstructions of x_T, x_{T-1}, ..., x_1


def reconstruction_loss(window, outputs):
    """Batch mean of squared window-reconstruction norms."""
    steps = _as_step_tensors(window)
    T = len(steps)
    if len(outputs) != T:
        raise ShapeError(f"expected {T} reconstruction steps, got {len(outputs)}")
    batch = steps[0].shape[0]
    total = None
    for k, out in enumerate(outputs):
        target = steps[T - 1 - k]
        if out.shape != target.shape:
            raise ShapeError(f"reconstruction shape {out.shape} vs {target.shape}")
        diff = out - target
        sq = ad.sum_all(diff * diff)
        total = sq if total is None else total + sq
    return ad.scale(total, 1.0 / batch)


def _as_step_tensors(window):
    """Accept a (B, T, n) ndarray, a list of (B, n) tensors, or a (T, n)
    single window, and return a list of per-timestep (B, n) tensors."""
    if isinstance(window, (list, tuple)):
        return list(window)
    arr = np.asarray(window, dtype=float)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3:
        raise ShapeError(f"window must be (B, T, n), got {arr.shape}")
    return [Tensor(arr[:, t, :]) for t in range(arr.shape[1])]
