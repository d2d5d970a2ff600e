"""Layer primitives: GRU cell, valid convolution, max pooling, dense softmax.

Forward functions return caches that the matching backward functions
consume. Convolutions use the index form out[i,j] = f(sum_{m,n} w[m,n] *
in[i+m, j+n] + b), i.e. valid cross-correlation followed by ReLU.
Feature maps are channels-last: (batch, rows, cols, channels).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigError, DimensionError


@dataclass
class GruParams:
    """Gate weights; input weights are (input_dim, hidden), recurrent
    weights (hidden, hidden), biases (hidden,)."""

    w_xr: np.ndarray
    w_hr: np.ndarray
    w_xz: np.ndarray
    w_hz: np.ndarray
    w_xh: np.ndarray
    w_hh: np.ndarray
    b_r: np.ndarray
    b_z: np.ndarray
    b_h: np.ndarray

    @property
    def hidden(self) -> int:
        return self.w_hr.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_xr.shape[0]


@dataclass
class ConvLayer:
    kernels: np.ndarray  # (n_kernels, kh, kw, in_channels)
    bias: np.ndarray     # (n_kernels,)


@dataclass
class DenseLayer:
    weights: np.ndarray  # (features, classes)
    bias: np.ndarray     # (classes,)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def gru_step(x_t: np.ndarray, h_prev: np.ndarray, p: GruParams):
    """Batched cell update; x_t (B, D), h_prev (B, H). Returns (h, cache)."""
    r = _sigmoid(x_t @ p.w_xr + h_prev @ p.w_hr + p.b_r)
    z = _sigmoid(x_t @ p.w_xz + h_prev @ p.w_hz + p.b_z)
    rh = r * h_prev
    cand = np.tanh(x_t @ p.w_xh + rh @ p.w_hh + p.b_h)
    h = z * h_prev + (1.0 - z) * cand
    return h, (x_t, h_prev, r, z, cand, rh)


def gru_cell(x_t: np.ndarray, h_prev: np.ndarray, p: GruParams) -> np.ndarray:
    """Single-vector cell update (reset gate, update gate, candidate mix)."""
    x_t = np.asarray(x_t, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    if x_t.shape != (p.input_dim,) or h_prev.shape != (p.hidden,):
        raise DimensionError("gru_cell input shapes do not match the parameters")
    h, _ = gru_step(x_t[None, :], h_prev[None, :], p)
    return h[0]


def gru_forward(x: np.ndarray, p: GruParams):
    """Run the cell over a batch of windows; x (B, L, D) -> (B, L, H)."""
    b, length, d = x.shape
    if d != p.input_dim:
        raise DimensionError(f"window feature width {d} != GRU input_dim {p.input_dim}")
    h = np.zeros((b, p.hidden))
    seq = np.empty((b, length, p.hidden))
    caches = []
    for t in range(length):
        h, cache = gru_step(x[:, t], h, p)
        seq[:, t] = h
        caches.append(cache)
    return seq, caches


def gru_sequence(window: np.ndarray, p: GruParams) -> np.ndarray:
    """Stacked hidden states for one window (L, D) -> (L, H); h0 = 0."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2:
        raise DimensionError("gru_sequence expects a 2-D window")
    seq, _ = gru_forward(window[None, :, :], p)
    return seq[0]


def gru_backward(dseq: np.ndarray, caches, p: GruParams) -> dict[str, np.ndarray]:
    """Backprop through time given the gradient of every stacked hidden state."""
    grads = {
        "w_xr": np.zeros_like(p.w_xr), "w_hr": np.zeros_like(p.w_hr),
        "w_xz": np.zeros_like(p.w_xz), "w_hz": np.zeros_like(p.w_hz),
        "w_xh": np.zeros_like(p.w_xh), "w_hh": np.zeros_like(p.w_hh),
        "b_r": np.zeros_like(p.b_r), "b_z": np.zeros_like(p.b_z),
        "b_h": np.zeros_like(p.b_h),
    }
    dh_next = np.zeros_like(dseq[:, 0])
    for t in range(dseq.shape[1] - 1, -1, -1):
        x_t, h_prev, r, z, cand, rh = caches[t]
        dh = dseq[:, t] + dh_next

        dz = dh * (h_prev - cand)
        dcand = dh * (1.0 - z)
        dh_prev = dh * z

        dpre_c = dcand * (1.0 - cand * cand)
        grads["w_xh"] += x_t.T @ dpre_c
        grads["w_hh"] += rh.T @ dpre_c
        grads["b_h"] += dpre_c.sum(axis=0)
        drh = dpre_c @ p.w_hh.T
        dr = drh * h_prev
        dh_prev = dh_prev + drh * r

        dpre_z = dz * z * (1.0 - z)
        grads["w_xz"] += x_t.T @ dpre_z
        grads["w_hz"] += h_prev.T @ dpre_z
        grads["b_z"] += dpre_z.sum(axis=0)
        dh_prev = dh_prev + dpre_z @ p.w_hz.T

        dpre_r = dr * r * (1.0 - r)
        grads["w_xr"] += x_t.T @ dpre_r
        grads["w_hr"] += h_prev.T @ dpre_r
        grads["b_r"] += dpre_r.sum(axis=0)
        dh_prev = dh_prev + dpre_r @ p.w_hr.T

        dh_next = dh_prev
    return grads


def conv_forward(x: np.ndarray, layer: ConvLayer):
    """Valid cross-correlation plus ReLU; x (B, h, w, cin) -> (B, oh, ow, k)."""
    kernels, bias = layer.kernels, layer.bias
    _, kh, kw, cin = kernels.shape
    if x.ndim != 4 or x.shape[3] != cin:
        raise DimensionError(f"conv input {x.shape} does not match kernels {kernels.shape}")
    if x.shape[1] < kh or x.shape[2] < kw:
        raise DimensionError(f"conv input {x.shape[1:3]} smaller than kernel ({kh}, {kw})")
    patches = sliding_window_view(x, (kh, kw), axis=(1, 2))  # (B, oh, ow, cin, kh, kw)
    pre = np.einsum("bijcmn,omnc->bijo", patches, kernels, optimize=True) + bias
    return np.maximum(pre, 0.0), (x, patches, pre)


def conv_backward(dout: np.ndarray, cache, layer: ConvLayer):
    """Returns (dx, dkernels, dbias)."""
    x, patches, pre = cache
    kernels = layer.kernels
    _, kh, kw, _ = kernels.shape
    dpre = dout * (pre > 0.0)
    dbias = dpre.sum(axis=(0, 1, 2))
    dkernels = np.einsum("bijo,bijcmn->omnc", dpre, patches, optimize=True)
    pad = ((0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1), (0, 0))
    dpre_pad = np.pad(dpre, pad)
    windows = sliding_window_view(dpre_pad, (kh, kw), axis=(1, 2))  # (B, h, w, o, kh, kw)
    flipped = kernels[:, ::-1, ::-1, :]
    dx = np.einsum("bpqomn,omnc->bpqc", windows, flipped, optimize=True)
    return dx, dkernels, dbias


def pool_forward(x: np.ndarray, window: int = 2):
    """Non-overlapping max pooling; odd trailing rows/cols are padded with -inf."""
    if x.ndim != 4:
        raise DimensionError("pool input must be (batch, rows, cols, channels)")
    b, h, w, ch = x.shape
    pad_h = (-h) % window
    pad_w = (-w) % window
    padded = np.pad(x, ((0, 0), (0, pad_h), (0, pad_w), (0, 0)),
                    constant_values=-np.inf)
    oh, ow = padded.shape[1] // window, padded.shape[2] // window
    tiles = (padded.reshape(b, oh, window, ow, window, ch)
             .transpose(0, 1, 3, 2, 4, 5)
             .reshape(b, oh, ow, window * window, ch))
    idx = np.argmax(tiles, axis=3)
    out = np.take_along_axis(tiles, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]
    return out, (x.shape, window, idx)


def pool_backward(dout: np.ndarray, cache) -> np.ndarray:
    (b, h, w, ch), window, idx = cache
    oh, ow = dout.shape[1], dout.shape[2]
    dtiles = np.zeros((b, oh, ow, window * window, ch))
    np.put_along_axis(dtiles, idx[:, :, :, None, :], dout[:, :, :, None, :], axis=3)
    dpadded = (dtiles.reshape(b, oh, ow, window, window, ch)
               .transpose(0, 1, 3, 2, 4, 5)
               .reshape(b, oh * window, ow * window, ch))
    return dpadded[:, :h, :w, :]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def dense_softmax(features: np.ndarray, dense: DenseLayer) -> np.ndarray:
    """Class probabilities for one feature vector."""
    features = np.asarray(features, dtype=float)
    if features.shape != (dense.weights.shape[0],):
        raise DimensionError(
            f"feature vector {features.shape} does not match dense layer "
            f"{dense.weights.shape}"
        )
    return softmax(features @ dense.weights + dense.bias)


def dropout_forward(x: np.ndarray, rate: float, rng: np.random.Generator):
    """Inverted dropout: kept units are scaled by 1 / (1 - rate)."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError("dropout rate must lie in [0, 1)")
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask
