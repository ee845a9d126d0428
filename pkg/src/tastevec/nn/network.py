"""Stacked recurrent network with a dense head on the final hidden state."""

from __future__ import annotations

import numpy as np

from .layers import DenseLayer, GRULayer, LSTMLayer, Layer


def dense_forward(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    """Apply a dense layer to a single vector or a batch of rows."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return layer.forward(x[None, :])[0]
    return layer.forward(x)


def gru_step(layer: GRULayer, x_t: np.ndarray, h_prev: np.ndarray) -> np.ndarray:
    return layer.step(np.asarray(x_t, dtype=np.float64), np.asarray(h_prev, dtype=np.float64))


def lstm_step(
    layer: LSTMLayer, x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    return layer.step(
        np.asarray(x_t, dtype=np.float64),
        (np.asarray(h_prev, dtype=np.float64), np.asarray(c_prev, dtype=np.float64)),
    )


class Network:
    """Recurrent layers consume the whole sequence; dense layers consume the
    last step's hidden state of the top recurrent layer."""

    def __init__(self, recurrent: list[Layer], head: list[DenseLayer]):
        if not recurrent or not head:
            raise ValueError("network needs at least one recurrent and one dense layer")
        self.recurrent = recurrent
        self.head = head
        self._forward_shape = None

    @classmethod
    def taste_architecture(
        cls,
        input_dim: int = 40,
        hidden_size: int = 50,
        num_recurrent: int = 2,
        dense_size: int | None = None,
        output_dim: int = 40,
        cell: str = "gru",
        rng: np.random.Generator | None = None,
    ) -> "Network":
        """GRU(hidden) x num_recurrent -> Dense(4*hidden, leaky ReLU) -> Dense(out)."""
        if dense_size is None:
            dense_size = 4 * hidden_size
        layer_cls = {"gru": GRULayer, "lstm": LSTMLayer}[cell]
        recurrent: list[Layer] = []
        dim = input_dim
        for _ in range(num_recurrent):
            recurrent.append(layer_cls(dim, hidden_size, rng=rng))
            dim = hidden_size
        head = [
            DenseLayer(hidden_size, dense_size, activation="leaky_relu", rng=rng),
            DenseLayer(dense_size, output_dim, activation="linear", rng=rng),
        ]
        return cls(recurrent, head)

    @property
    def layers(self) -> list[Layer]:
        return [*self.recurrent, *self.head]

    @property
    def input_dim(self) -> int:
        return self.recurrent[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.head[-1].out_dim

    def forward_sequence(self, xs: np.ndarray) -> np.ndarray:
        """Run inputs (T, B, D) -> (B, out); a (T, D) sequence maps to (out,)."""
        xs = np.asarray(xs, dtype=np.float64)
        single = xs.ndim == 2
        if single:
            xs = xs[:, None, :]
        if xs.ndim != 3:
            raise ValueError(f"expected (T, B, D) inputs, got shape {xs.shape}")
        if xs.shape[0] == 0:
            raise ValueError("input sequence must be non-empty")
        hs = xs
        for layer in self.recurrent:
            hs = layer.forward_sequence(hs)
        out = hs[-1]
        for layer in self.head:
            out = layer.forward(out)
        self._forward_shape = (xs.shape[0], xs.shape[1], single)
        return out[0] if single else out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Backpropagate from the output; returns gradients w.r.t. inputs."""
        if self._forward_shape is None:
            raise RuntimeError("backward called before forward_sequence")
        T, B, single = self._forward_shape
        grad = np.asarray(grad_out, dtype=np.float64)
        if single:
            grad = grad[None, :]
        for layer in reversed(self.head):
            grad = layer.backward(grad)
        # Only the final step of the top recurrent layer feeds the head.
        grad_hs = np.zeros((T, B, self.recurrent[-1].hid_dim))
        grad_hs[-1] = grad
        for layer in reversed(self.recurrent):
            grad_hs = layer.backward_sequence(grad_hs)
        return grad_hs[:, 0, :] if single else grad_hs

    def init_state(self, batch: int = 1) -> list:
        return [layer.init_state(batch) for layer in self.recurrent]

    def step(self, x: np.ndarray, states: list) -> tuple[np.ndarray, list]:
        """Advance one input through the recurrent stack; returns (output, states)."""
        x = np.asarray(x, dtype=np.float64)
        new_states = []
        h = x
        for layer, state in zip(self.recurrent, states):
            if isinstance(layer, LSTMLayer):
                h, c = layer.step(h, state)
                new_states.append((h, c))
            else:
                h = layer.step(h, state)
                new_states.append(h)
        out = h
        for layer in self.head:
            out = dense_forward(layer, out)
        return out, new_states

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for idx, layer in enumerate(self.layers):
            for name, arr in layer.params():
                out.append((f"{idx}.{name}", arr))
        return out

    def gradients(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for idx, layer in enumerate(self.layers):
            for name, arr in layer.grads():
                out.append((f"{idx}.{name}", arr))
        return out

    def zero_grads(self) -> None:
        for layer in self.layers:
            layer.zero_grads()

    @property
    def num_params(self) -> int:
        return sum(layer.num_params for layer in self.layers)
