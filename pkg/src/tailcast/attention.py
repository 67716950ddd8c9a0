"""Residual attention forecaster.

Multi-head scaled dot-product attention with the final hidden state as
query and all hidden states as keys/values, followed by two Add & Norm +
feedforward stages and a sigmoid head mapping to a quantile in (0, 1).
"""

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigurationError, ShapeError
from .lstm import EncodedWindow


@dataclass
class AttentionParams:
    """Per-head query/key/value projections plus the output mix matrix."""

    w_q: list   # d tensors (m, m/d)
    w_k: list
    w_v: list
    w_o: Tensor  # (m, m)
    heads: int

    @classmethod
    def init(cls, hidden_size, heads, rng):
        if hidden_size % heads != 0:
            raise ConfigurationError(
                f"head count {heads} must divide hidden size {hidden_size}")
        dk = hidden_size // heads
        bound = 1.0 / np.sqrt(hidden_size)

        def mk():
            return Tensor(rng.uniform(-bound, bound, size=(hidden_size, dk)))

        return cls(w_q=[mk() for _ in range(heads)],
                   w_k=[mk() for _ in range(heads)],
                   w_v=[mk() for _ in range(heads)],
                   w_o=Tensor(rng.uniform(-bound, bound,
                                          size=(hidden_size, hidden_size))),
                   heads=heads)

    def parameters(self, prefix):
        out = []
        for i in range(self.heads):
            out += [(f"{prefix}.head{i}.w_q", self.w_q[i]),
                    (f"{prefix}.head{i}.w_k", self.w_k[i]),
                    (f"{prefix}.head{i}.w_v", self.w_v[i])]
        out.append((f"{prefix}.w_o", self.w_o))
        return out


@dataclass
class StageParams:
    """One Add & Norm + feedforward stage (hidden width 4m)."""

    w1: Tensor   # (m, 4m)
    b1: Tensor   # (1, 4m)
    w2: Tensor   # (4m, m)
    b2: Tensor   # (1, m)
    ln_gain: Tensor  # (1, m)
    ln_bias: Tensor  # (1, m)

    @classmethod
    def init(cls, hidden_size, rng):
        m = hidden_size
        bound = 1.0 / np.sqrt(m)
        return cls(
            w1=Tensor(rng.uniform(-bound, bound, size=(m, 4 * m))),
            b1=Tensor(np.zeros((1, 4 * m))),
            w2=Tensor(rng.uniform(-bound / 2, bound / 2, size=(4 * m, m))),
            b2=Tensor(np.zeros((1, m))),
            ln_gain=Tensor(np.ones((1, m))),
            ln_bias=Tensor(np.zeros((1, m))),
        )

    def parameters(self, prefix):
        return [(f"{prefix}.w1", self.w1), (f"{prefix}.b1", self.b1),
                (f"{prefix}.w2", self.w2), (f"{prefix}.b2", self.b2),
                (f"{prefix}.ln_gain", self.ln_gain),
                (f"{prefix}.ln_bias", self.ln_bias)]


@dataclass
class ForecasterParams:
    attention: AttentionParams
    attn_ln_gain: Tensor
    attn_ln_bias: Tensor
    stages: list          # two StageParams
    head_w: Tensor        # (m, 1)
    head_b: Tensor        # (1, 1)

    @classmethod
    def init(cls, hidden_size, heads, rng):
        m = hidden_size
        bound = 1.0 / np.sqrt(m)
        return cls(
            attention=AttentionParams.init(m, heads, rng),
            attn_ln_gain=Tensor(np.ones((1, m))),
            attn_ln_bias=Tensor(np.zeros((1, m))),
            stages=[StageParams.init(m, rng) for _ in range(2)],
            head_w=Tensor(rng.uniform(-bound, bound, size=(m, 1))),
            head_b=Tensor(np.zeros((1, 1))),
        )

    def parameters(self, prefix="forecaster"):
        out = self.attention.parameters(f"{prefix}.attention")
        out += [(f"{prefix}.attn_ln_gain", self.attn_ln_gain),
                (f"{prefix}.attn_ln_bias", self.attn_ln_bias)]
        for s, stage in enumerate(self.stages):
            out += stage.parameters(f"{prefix}.stage{s}")
        out += [(f"{prefix}.head_w", self.head_w),
                (f"{prefix}.head_b", self.head_b)]
        return out


def multi_head_attention(h_final, hidden, p: AttentionParams,
                         return_weights=False):
    """Attend over the T hidden states with the final state as query.

    `h_final` is (B, m); `hidden` is a list of T tensors (B, m).  Scores
    are scaled by sqrt(m/d); each head's output is the attention-weighted
    sum of its projected values, heads are concatenated and mixed by w_o.
    """
    m = h_final.shape[-1]
    dk = m // p.heads
    inv_sqrt_dk = 1.0 / np.sqrt(dk)
    T = len(hidden)

    head_outs = []
    all_weights = []
    for i in range(p.heads):
        q = h_final @ p.w_q[i]                       # (B, dk)
        keys = [h_t @ p.w_k[i] for h_t in hidden]    # T x (B, dk)
        vals = [h_t @ p.w_v[i] for h_t in hidden]
        scores = ad.concat([ad.scale(ad.row_sum(q * k), inv_sqrt_dk)
                            for k in keys], axis=-1)  # (B, T)
        weights = ad.softmax_rows(scores)
        out = None
        for t in range(T):
            w_t = ad.slice_cols(weights, t, t + 1)   # (B, 1)
            contrib = w_t * vals[t]
            out = contrib if out is None else out + contrib
        head_outs.append(out)
        all_weights.append(weights)

    mixed = ad.concat(head_outs, axis=-1) @ p.w_o
    if return_weights:
        return mixed, all_weights
    return mixed


def forecaster_forward(enc: EncodedWindow, p: ForecasterParams):
    """Predict the next value's quantile from an encoded window."""
    h_final = enc.final_h
    attended = multi_head_attention(h_final, enc.hidden, p.attention)
    z = ad.layer_norm_rows(h_final + attended)
    z = (z * p.attn_ln_gain) + p.attn_ln_bias
    for stage in p.stages:
        ff = ad.relu((z @ stage.w1) + stage.b1) @ stage.w2
        ff = ff + stage.b2
        z = ad.layer_norm_rows(z + ff)
        z = (z * stage.ln_gain) + stage.ln_bias
    logit = (z @ p.head_w) + p.head_b
    return ad.sigmoid(logit)  # (B, 1), strictly inside (0, 1)
