"""Adam optimization and the mini-batch training loop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DataError
from ..io_utils import write_csv
from .network import Network, NetworkConfig, forward, cross_entropy, gradients, \
    init_network, parameters


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 10
    batch: int = 32
    seed: int = 0
    window_len: int = 16

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError("learning rate must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ConfigError("Adam betas must lie strictly in (0, 1)")
        if self.epochs < 0 or self.batch < 1:
            raise ConfigError("epochs must be >= 0 and batch size >= 1")


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, cfg: TrainConfig) -> AdamState:
    """One bias-corrected Adam update, applied to the arrays in place."""
    state.step += 1
    t = state.step
    for name, p in params.items():
        g = grads[name]
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        m_hat = m / (1.0 - cfg.beta1 ** t)
        v_hat = v / (1.0 - cfg.beta2 ** t)
        p -= cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return state


def train(windows: np.ndarray, labels: np.ndarray, net_cfg: NetworkConfig,
          cfg: TrainConfig, val_windows: np.ndarray | None = None,
          val_labels: np.ndarray | None = None,
          initial: Network | None = None) -> tuple[Network, list[tuple[int, float, float]]]:
    """Mini-batch Adam over the given epochs with seeded shuffling.

    Returns the trained network and per-epoch (epoch, train_loss,
    val_loss) rows; val_loss is NaN when no validation set is given.
    With epochs = 0 the freshly initialized network is returned untouched.
    """
    windows = np.asarray(windows, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(windows) == 0:
        raise DataError("training needs a non-empty dataset")
    if len(windows) != len(labels):
        raise DataError("window and label counts differ")

    seq = np.random.SeedSequence(cfg.seed)
    init_seed, shuffle_seed, dropout_seed = [int(s.generate_state(1)[0])
                                             for s in seq.spawn(3)]
    net = initial if initial is not None else init_network(net_cfg, seed=init_seed)
    params = parameters(net)
    adam = AdamState()
    shuffle_rng = np.random.default_rng(shuffle_seed)
    dropout_rng = np.random.default_rng(dropout_seed)

    history: list[tuple[int, float, float]] = []
    n = len(windows)
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        losses = []
        for start in range(0, n, cfg.batch):
            batch_idx = order[start:start + cfg.batch]
            loss, grads = gradients(net, windows[batch_idx], labels[batch_idx],
                                    rng=dropout_rng)
            adam_step(params, grads, adam, cfg)
            losses.append(loss)
        train_loss = float(np.mean(losses))
        if val_windows is not None and len(val_windows):
            val_probs, _ = forward(net, val_windows)
            val_loss = cross_entropy(val_probs, val_labels)
        else:
            val_loss = float("nan")
        history.append((epoch, train_loss, val_loss))
    return net, history


def write_history_csv(history, path) -> None:
    write_csv(path, ["epoch", "train_loss", "val_loss"], history)
