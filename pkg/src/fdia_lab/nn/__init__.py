"""From-scratch GRU-CNN hybrid classifier with backprop and Adam training."""

from .layers import (ConvLayer, DenseLayer, GruParams, conv_forward, dense_softmax,
                     gru_cell, gru_sequence, pool_forward)
from .network import (Network, NetworkConfig, cross_entropy, forward, gradients,
                      init_network, load_checkpoint, parameters, predict,
                      predict_proba, save_checkpoint)
from .training import AdamState, TrainConfig, adam_step, train, write_history_csv

__all__ = [
    "AdamState", "ConvLayer", "DenseLayer", "GruParams", "Network",
    "NetworkConfig", "TrainConfig", "adam_step", "conv_forward",
    "cross_entropy", "dense_softmax", "forward", "gradients", "gru_cell",
    "gru_sequence", "init_network", "load_checkpoint", "parameters",
    "pool_forward", "predict", "predict_proba", "save_checkpoint", "train",
    "write_history_csv",
]
