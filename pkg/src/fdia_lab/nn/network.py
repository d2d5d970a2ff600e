"""The full classifier: GRU encoder feeding a conv/pool/conv/pool/dense head.

One window of measurements (window_len x input_dim) passes through the
GRU; the stacked hidden states form a single-channel 2-D map for the CNN.
Two convolution+pooling rounds, a flatten, inverted dropout (training
only) and a dense softmax head produce the two class probabilities
(index 1 = attack). ``gradients`` backpropagates the mean cross-entropy
loss to every parameter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data_pipeline import Standardizer
from ..errors import ConfigError, DataError, DimensionError
from ..io_utils import read_json, write_json
from .layers import (ConvLayer, DenseLayer, GruParams, conv_backward, conv_forward,
                     dropout_forward, gru_backward, gru_forward, pool_backward,
                     pool_forward, softmax)

CHECKPOINT_FORMAT = "gru-cnn-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int
    window_len: int = 16
    hidden: int = 100
    conv1_kernels: int = 8
    conv1_size: int = 3
    conv2_kernels: int = 16
    conv2_size: int = 3
    pool: int = 2
    dropout: float = 0.5

    def __post_init__(self):
        if self.input_dim < 1 or self.window_len < 1 or self.hidden < 1:
            raise ConfigError("network dimensions must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout rate must lie in [0, 1)")
        self.feature_count()  # validates that the shape chain is feasible

    def map_shapes(self) -> list[tuple[int, int]]:
        """Spatial shape after each stage: gru map, conv1, pool1, conv2, pool2."""
        def conv(shape, size):
            h, w = shape
            if h < size or w < size:
                raise ConfigError(
                    f"feature map {shape} is smaller than a {size}x{size} kernel"
                )
            return h - size + 1, w - size + 1

        def pool(shape):
            h, w = shape
            return -(-h // self.pool), -(-w // self.pool)

        shapes = [(self.window_len, self.hidden)]
        shapes.append(conv(shapes[-1], self.conv1_size))
        shapes.append(pool(shapes[-1]))
        shapes.append(conv(shapes[-1], self.conv2_size))
        shapes.append(pool(shapes[-1]))
        return shapes

    def feature_count(self) -> int:
        h, w = self.map_shapes()[-1]
        return h * w * self.conv2_kernels


@dataclass
class Network:
    config: NetworkConfig
    gru: GruParams
    conv1: ConvLayer
    conv2: ConvLayer
    dense: DenseLayer


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    r = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-r, r, size=shape)


def init_network(cfg: NetworkConfig, seed: int = 0) -> Network:
    """Uniform Glorot weights, zero biases; deterministic per seed."""
    rng = np.random.default_rng(seed)
    d, hd = cfg.input_dim, cfg.hidden
    gru = GruParams(
        w_xr=_glorot(rng, (d, hd), d, hd), w_hr=_glorot(rng, (hd, hd), hd, hd),
        w_xz=_glorot(rng, (d, hd), d, hd), w_hz=_glorot(rng, (hd, hd), hd, hd),
        w_xh=_glorot(rng, (d, hd), d, hd), w_hh=_glorot(rng, (hd, hd), hd, hd),
        b_r=np.zeros(hd), b_z=np.zeros(hd), b_h=np.zeros(hd),
    )

    def conv_layer(count, size, cin):
        fan_in = size * size * cin
        fan_out = size * size * count
        return ConvLayer(
            kernels=_glorot(rng, (count, size, size, cin), fan_in, fan_out),
            bias=np.zeros(count),
        )

    conv1 = conv_layer(cfg.conv1_kernels, cfg.conv1_size, 1)
    conv2 = conv_layer(cfg.conv2_kernels, cfg.conv2_size, cfg.conv1_kernels)
    features = cfg.feature_count()
    dense = DenseLayer(weights=_glorot(rng, (features, 2), features, 2),
                       bias=np.zeros(2))
    return Network(config=cfg, gru=gru, conv1=conv1, conv2=conv2, dense=dense)


def parameters(net: Network) -> dict[str, np.ndarray]:
    """Live references to every trainable array, in a stable order."""
    p = net.gru
    return {
        "gru.w_xr": p.w_xr, "gru.w_hr": p.w_hr,
        "gru.w_xz": p.w_xz, "gru.w_hz": p.w_hz,
        "gru.w_xh": p.w_xh, "gru.w_hh": p.w_hh,
        "gru.b_r": p.b_r, "gru.b_z": p.b_z, "gru.b_h": p.b_h,
        "conv1.kernels": net.conv1.kernels, "conv1.bias": net.conv1.bias,
        "conv2.kernels": net.conv2.kernels, "conv2.bias": net.conv2.bias,
        "dense.weights": net.dense.weights, "dense.bias": net.dense.bias,
    }


def forward(net: Network, windows: np.ndarray, rng: np.random.Generator | None = None):
    """Class probabilities for a batch of windows (B, L, D).

    Passing an ``rng`` selects training mode (dropout active when the
    configured rate is positive); without one inference is deterministic
    and dropout-free.
    """
    windows = np.asarray(windows, dtype=float)
    if windows.ndim != 3:
        raise DimensionError("forward expects a batch of windows (B, L, D)")
    cfg = net.config
    if windows.shape[1] != cfg.window_len or windows.shape[2] != cfg.input_dim:
        raise DimensionError(
            f"window batch {windows.shape[1:]} does not match configured "
            f"({cfg.window_len}, {cfg.input_dim})"
        )
    seq, gru_caches = gru_forward(windows, net.gru)
    fmap = seq[:, :, :, None]
    c1, c1_cache = conv_forward(fmap, net.conv1)
    p1, p1_cache = pool_forward(c1, cfg.pool)
    c2, c2_cache = conv_forward(p1, net.conv2)
    p2, p2_cache = pool_forward(c2, cfg.pool)
    flat = p2.reshape(len(windows), -1)
    mask = None
    if rng is not None and cfg.dropout > 0.0:
        dropped, mask = dropout_forward(flat, cfg.dropout, rng)
    else:
        dropped = flat
    logits = dropped @ net.dense.weights + net.dense.bias
    probs = softmax(logits)
    cache = (gru_caches, c1_cache, p1_cache, c2_cache, p2_cache,
             p2.shape, dropped, mask)
    return probs, cache


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of the true classes."""
    labels = np.asarray(labels, dtype=int)
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, 1e-300))))


def gradients(net: Network, windows: np.ndarray, labels: np.ndarray,
              rng: np.random.Generator | None = None):
    """Mean cross-entropy loss and its gradient for every parameter."""
    windows = np.asarray(windows, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(windows) == 0:
        raise DataError("gradient evaluation needs a non-empty batch")
    probs, cache = forward(net, windows, rng)
    (gru_caches, c1_cache, p1_cache, c2_cache, p2_cache,
     p2_shape, dropped, mask) = cache
    loss = cross_entropy(probs, labels)

    batch = len(windows)
    dlogits = probs.copy()
    dlogits[np.arange(batch), labels] -= 1.0
    dlogits /= batch

    grads = {
        "dense.weights": dropped.T @ dlogits,
        "dense.bias": dlogits.sum(axis=0),
    }
    dflat = dlogits @ net.dense.weights.T
    if mask is not None:
        dflat = dflat * mask
    dp2 = dflat.reshape(p2_shape)
    dc2 = pool_backward(dp2, p2_cache)
    dp1, grads["conv2.kernels"], grads["conv2.bias"] = conv_backward(dc2, c2_cache, net.conv2)
    dc1 = pool_backward(dp1, p1_cache)
    dmap, grads["conv1.kernels"], grads["conv1.bias"] = conv_backward(dc1, c1_cache, net.conv1)
    dseq = dmap[:, :, :, 0]
    for name, g in gru_backward(dseq, gru_caches, net.gru).items():
        grads[f"gru.{name}"] = g
    return loss, grads


def predict_proba(net: Network, windows: np.ndarray) -> np.ndarray:
    probs, _ = forward(net, windows)
    return probs


def predict(net: Network, window: np.ndarray) -> bool:
    """Attack verdict for one window; ties go to the benign class."""
    probs = predict_proba(net, np.asarray(window, dtype=float)[None, :, :])[0]
    return bool(probs[1] > probs[0])


def save_checkpoint(net: Network, path, standardizer: Standardizer | None = None) -> None:
    cfg = net.config
    obj = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": {
            "input_dim": cfg.input_dim, "window_len": cfg.window_len,
            "hidden": cfg.hidden,
            "conv1_kernels": cfg.conv1_kernels, "conv1_size": cfg.conv1_size,
            "conv2_kernels": cfg.conv2_kernels, "conv2_size": cfg.conv2_size,
            "pool": cfg.pool, "dropout": cfg.dropout,
        },
        "params": {name: arr.tolist() for name, arr in parameters(net).items()},
        "standardizer": None if standardizer is None else {
            "means": standardizer.means.tolist(),
            "stds": standardizer.stds.tolist(),
        },
    }
    write_json(path, obj)


def load_checkpoint(path) -> tuple[Network, Standardizer | None]:
    obj = read_json(path)
    if obj.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"not a checkpoint file: {path}")
    if obj.get("version") != CHECKPOINT_VERSION:
        raise DataError(f"unsupported checkpoint version {obj.get('version')}")
    cfg = NetworkConfig(**obj["config"])
    net = init_network(cfg, seed=0)
    params = parameters(net)
    for name, value in obj["params"].items():
        if name not in params:
            raise DataError(f"unknown parameter '{name}' in checkpoint")
        arr = np.asarray(value, dtype=float)
        if arr.shape != params[name].shape:
            raise DataError(
                f"checkpoint parameter '{name}' has shape {arr.shape}, "
                f"expected {params[name].shape}"
            )
        params[name][...] = arr
    std = None
    if obj.get("standardizer") is not None:
        std = Standardizer(means=np.asarray(obj["standardizer"]["means"], dtype=float),
                           stds=np.asarray(obj["standardizer"]["stds"], dtype=float))
    return net, std
