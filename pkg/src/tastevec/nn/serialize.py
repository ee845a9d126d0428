"""Versioned binary model files.

Layout: magic ``TSEQ1`` line, one ``arch=`` line describing the layers, any
number of ``key=value`` metadata lines, a blank line, then all parameters as
little-endian 32-bit floats, row-major, in declaration order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import DataError
from .layers import DenseLayer, GRULayer, LSTMLayer
from .network import Network

MAGIC = b"TSEQ1\n"


def _describe_layer(layer) -> str:
    if isinstance(layer, GRULayer):
        return f"gru:{layer.in_dim}:{layer.hid_dim}"
    if isinstance(layer, LSTMLayer):
        return f"lstm:{layer.in_dim}:{layer.hid_dim}"
    if isinstance(layer, DenseLayer):
        return f"dense:{layer.in_dim}:{layer.out_dim}:{layer.activation}"
    raise TypeError(f"cannot serialize layer {type(layer).__name__}")


def _layer_from_descriptor(desc: str):
    kind, *rest = desc.split(":")
    if kind == "gru":
        return GRULayer(int(rest[0]), int(rest[1]))
    if kind == "lstm":
        return LSTMLayer(int(rest[0]), int(rest[1]))
    if kind == "dense":
        return DenseLayer(int(rest[0]), int(rest[1]), activation=rest[2])
    raise DataError(f"unknown layer descriptor {desc!r}")


def save_network(network: Network, path: str | Path, extra: dict[str, str] | None = None) -> None:
    arch = ",".join(_describe_layer(layer) for layer in network.layers)
    num_recurrent = len(network.recurrent)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(f"arch={arch}\n".encode("ascii"))
        fh.write(f"recurrent={num_recurrent}\n".encode("ascii"))
        for key, value in (extra or {}).items():
            if "\n" in f"{key}{value}" or "=" in key:
                raise ValueError(f"invalid metadata entry {key!r}")
            fh.write(f"{key}={value}\n".encode("ascii"))
        fh.write(b"\n")
        for _, arr in network.parameters():
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_network(path: str | Path) -> tuple[Network, dict[str, str]]:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise DataError(f"{path}: not a TSEQ1 model file")
        meta: dict[str, str] = {}
        while True:
            line = fh.readline()
            if not line:
                raise DataError(f"{path}: truncated header")
            line = line.rstrip(b"\n")
            if not line:
                break
            key, _, value = line.decode("ascii").partition("=")
            meta[key] = value
        if "arch" not in meta or "recurrent" not in meta:
            raise DataError(f"{path}: missing architecture header")
        layers = [_layer_from_descriptor(d) for d in meta.pop("arch").split(",")]
        num_recurrent = int(meta.pop("recurrent"))
        network = Network(layers[:num_recurrent], layers[num_recurrent:])
        blob = fh.read()
    values = np.frombuffer(blob, dtype="<f4")
    if values.size != network.num_params:
        raise DataError(
            f"{path}: expected {network.num_params} parameter values, got {values.size}"
        )
    pos = 0
    for _, arr in network.parameters():
        chunk = values[pos : pos + arr.size]
        arr[...] = chunk.reshape(arr.shape).astype(np.float64)
        pos += arr.size
    return network, meta
