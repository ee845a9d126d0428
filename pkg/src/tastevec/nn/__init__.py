"""From-scratch neural layers, BPTT, Adam, and model serialization."""

from .adam import AdamOptimizer, adam_update
from .layers import LEAKINESS, DenseLayer, GRULayer, LSTMLayer, sigmoid
from .network import Network, dense_forward, gru_step, lstm_step
from .serialize import load_network, save_network

__all__ = [
    "LEAKINESS",
    "AdamOptimizer",
    "DenseLayer",
    "GRULayer",
    "LSTMLayer",
    "Network",
    "adam_update",
    "dense_forward",
    "gru_step",
    "lstm_step",
    "load_network",
    "save_network",
    "sigmoid",
]
