"""From-scratch neural layers: dense, GRU, and peephole LSTM.

Conventions: batch-major row vectors, so a single step input is (B, D_in)
and a sequence is (T, B, D_in). Forward passes record the activations they
need; calling backward without a prior forward is a state error. Backward
passes accumulate parameter gradients (summed over batch and time) into
``layer.grad[name]`` and return the gradient w.r.t. their inputs.

GRU step:
    r = sigmoid(U_r x + W_r h' + b_r)
    u = sigmoid(U_u x + W_u h' + b_u)
    g = tanh(U_g x + r * (W_g h') + b_g)
    h = (1 - u) * h' + u * g

Peephole LSTM step (all three gates peek at the previous cell state):
    i = sigmoid(U_i x + W_i h' + w_i * c' + b_i)
    f = sigmoid(U_f x + W_f h' + w_f * c' + b_f)
    c = f * c' + i * tanh(U_c x + W_c h' + b_c)
    o = sigmoid(U_o x + W_o h' + w_o * c' + b_o)
    h = o * tanh(c)
"""

from __future__ import annotations

import numpy as np

LEAKINESS = 0.01


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


def _glorot(rng: np.random.Generator | None, shape: tuple[int, int]) -> np.ndarray:
    if rng is None:
        return np.zeros(shape)
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Common parameter bookkeeping."""

    _param_names: tuple[str, ...] = ()

    def params(self) -> list[tuple[str, np.ndarray]]:
        return [(name, getattr(self, name)) for name in self._param_names]

    def grads(self) -> list[tuple[str, np.ndarray]]:
        return [(name, self.grad[name]) for name in self._param_names]

    def zero_grads(self) -> None:
        self.grad = {name: np.zeros_like(getattr(self, name)) for name in self._param_names}

    @property
    def num_params(self) -> int:
        return sum(p.size for _, p in self.params())


class DenseLayer(Layer):
    _param_names = ("W", "b")

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        activation: str = "linear",
        rng: np.random.Generator | None = None,
    ):
        if activation not in ("linear", "leaky_relu"):
            raise ValueError(f"unknown activation {activation!r}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.activation = activation
        self.W = _glorot(rng, (out_dim, in_dim))
        self.b = np.zeros(out_dim)
        self.zero_grads()
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(f"expected input (B, {self.in_dim}), got {x.shape}")
        pre = x @ self.W.T + self.b
        out = pre if self.activation == "linear" else np.where(pre > 0, pre, LEAKINESS * pre)
        self._cache = (x, pre)
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        x, pre = self._cache
        if self.activation == "linear":
            dpre = grad_out
        else:
            dpre = grad_out * np.where(pre > 0, 1.0, LEAKINESS)
        self.grad["W"] += dpre.T @ x
        self.grad["b"] += dpre.sum(axis=0)
        return dpre @ self.W


class GRULayer(Layer):
    _param_names = ("U_r", "U_u", "U_g", "W_r", "W_u", "W_g", "b_r", "b_u", "b_g")

    def __init__(self, in_dim: int, hid_dim: int, rng: np.random.Generator | None = None):
        self.in_dim = in_dim
        self.hid_dim = hid_dim
        for gate in ("r", "u", "g"):
            setattr(self, f"U_{gate}", _glorot(rng, (hid_dim, in_dim)))
            setattr(self, f"W_{gate}", _glorot(rng, (hid_dim, hid_dim)))
            setattr(self, f"b_{gate}", np.zeros(hid_dim))
        self.zero_grads()
        self._cache = None

    def init_state(self, batch: int) -> np.ndarray:
        return np.zeros((batch, self.hid_dim))

    def step(self, x: np.ndarray, h_prev: np.ndarray) -> np.ndarray:
        """One recurrence step without recording activations."""
        single = x.ndim == 1
        if single:
            x, h_prev = x[None, :], h_prev[None, :]
        if x.shape[1] != self.in_dim or h_prev.shape[1] != self.hid_dim:
            raise ValueError(
                f"expected shapes (B, {self.in_dim}) and (B, {self.hid_dim}), "
                f"got {x.shape} and {h_prev.shape}"
            )
        r = sigmoid(x @ self.U_r.T + h_prev @ self.W_r.T + self.b_r)
        u = sigmoid(x @ self.U_u.T + h_prev @ self.W_u.T + self.b_u)
        g = np.tanh(x @ self.U_g.T + r * (h_prev @ self.W_g.T) + self.b_g)
        h = (1.0 - u) * h_prev + u * g
        return h[0] if single else h

    def forward_sequence(self, xs: np.ndarray, h0: np.ndarray | None = None) -> np.ndarray:
        T, B, D = xs.shape
        if D != self.in_dim:
            raise ValueError(f"expected input dim {self.in_dim}, got {D}")
        h = np.zeros((B, self.hid_dim)) if h0 is None else h0
        hs = np.empty((T, B, self.hid_dim))
        R = np.empty_like(hs)
        U = np.empty_like(hs)
        G = np.empty_like(hs)
        WgH = np.empty_like(hs)
        Hprev = np.empty_like(hs)
        for t in range(T):
            x = xs[t]
            Hprev[t] = h
            r = sigmoid(x @ self.U_r.T + h @ self.W_r.T + self.b_r)
            u = sigmoid(x @ self.U_u.T + h @ self.W_u.T + self.b_u)
            wgh = h @ self.W_g.T
            g = np.tanh(x @ self.U_g.T + r * wgh + self.b_g)
            h = (1.0 - u) * h + u * g
            R[t], U[t], G[t], WgH[t], hs[t] = r, u, g, wgh, h
        self._cache = (xs, Hprev, R, U, G, WgH)
        return hs

    def backward_sequence(self, grad_hs: np.ndarray) -> np.ndarray:
        """BPTT given upstream gradients for every step's hidden output."""
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        xs, Hprev, R, U, G, WgH = self._cache
        T, B, _ = xs.shape
        grad_xs = np.empty_like(xs)
        dh = np.zeros((B, self.hid_dim))
        for t in range(T - 1, -1, -1):
            dh = dh + grad_hs[t]
            x, h_prev = xs[t], Hprev[t]
            r, u, g, wgh = R[t], U[t], G[t], WgH[t]

            du = dh * (g - h_prev)
            dg = dh * u
            dh_prev = dh * (1.0 - u)

            dg_pre = dg * (1.0 - g * g)
            dr = dg_pre * wgh
            dwgh = dg_pre * r
            du_pre = du * u * (1.0 - u)
            dr_pre = dr * r * (1.0 - r)

            self.grad["U_g"] += dg_pre.T @ x
            self.grad["W_g"] += dwgh.T @ h_prev
            self.grad["b_g"] += dg_pre.sum(axis=0)
            self.grad["U_u"] += du_pre.T @ x
            self.grad["W_u"] += du_pre.T @ h_prev
            self.grad["b_u"] += du_pre.sum(axis=0)
            self.grad["U_r"] += dr_pre.T @ x
            self.grad["W_r"] += dr_pre.T @ h_prev
            self.grad["b_r"] += dr_pre.sum(axis=0)

            grad_xs[t] = dg_pre @ self.U_g + du_pre @ self.U_u + dr_pre @ self.U_r
            dh = dh_prev + dwgh @ self.W_g + du_pre @ self.W_u + dr_pre @ self.W_r
        return grad_xs


class LSTMLayer(Layer):
    _param_names = (
        "U_i", "U_f", "U_c", "U_o",
        "W_i", "W_f", "W_c", "W_o",
        "w_i", "w_f", "w_o",
        "b_i", "b_f", "b_c", "b_o",
    )

    def __init__(self, in_dim: int, hid_dim: int, rng: np.random.Generator | None = None):
        self.in_dim = in_dim
        self.hid_dim = hid_dim
        for gate in ("i", "f", "c", "o"):
            setattr(self, f"U_{gate}", _glorot(rng, (hid_dim, in_dim)))
            setattr(self, f"W_{gate}", _glorot(rng, (hid_dim, hid_dim)))
            setattr(self, f"b_{gate}", np.zeros(hid_dim))
        for gate in ("i", "f", "o"):
            setattr(self, f"w_{gate}", np.zeros(hid_dim))  # peephole weights
        self.zero_grads()
        self._cache = None

    def init_state(self, batch: int) -> tuple[np.ndarray, np.ndarray]:
        return np.zeros((batch, self.hid_dim)), np.zeros((batch, self.hid_dim))

    def step(
        self, x: np.ndarray, state: tuple[np.ndarray, np.ndarray]
    ) -> tuple[np.ndarray, np.ndarray]:
        h_prev, c_prev = state
        single = x.ndim == 1
        if single:
            x, h_prev, c_prev = x[None, :], h_prev[None, :], c_prev[None, :]
        if x.shape[1] != self.in_dim:
            raise ValueError(f"expected input dim {self.in_dim}, got {x.shape[1]}")
        i = sigmoid(x @ self.U_i.T + h_prev @ self.W_i.T + self.w_i * c_prev + self.b_i)
        f = sigmoid(x @ self.U_f.T + h_prev @ self.W_f.T + self.w_f * c_prev + self.b_f)
        a = np.tanh(x @ self.U_c.T + h_prev @ self.W_c.T + self.b_c)
        c = f * c_prev + i * a
        o = sigmoid(x @ self.U_o.T + h_prev @ self.W_o.T + self.w_o * c_prev + self.b_o)
        h = o * np.tanh(c)
        if single:
            return h[0], c[0]
        return h, c

    def forward_sequence(
        self,
        xs: np.ndarray,
        state: tuple[np.ndarray, np.ndarray] | None = None,
    ) -> np.ndarray:
        T, B, D = xs.shape
        if D != self.in_dim:
            raise ValueError(f"expected input dim {self.in_dim}, got {D}")
        h, c = self.init_state(B) if state is None else state
        hs = np.empty((T, B, self.hid_dim))
        I = np.empty_like(hs)
        F = np.empty_like(hs)
        A = np.empty_like(hs)
        O = np.empty_like(hs)
        C = np.empty_like(hs)
        Cprev = np.empty_like(hs)
        Hprev = np.empty_like(hs)
        for t in range(T):
            x = xs[t]
            Hprev[t], Cprev[t] = h, c
            i = sigmoid(x @ self.U_i.T + h @ self.W_i.T + self.w_i * c + self.b_i)
            f = sigmoid(x @ self.U_f.T + h @ self.W_f.T + self.w_f * c + self.b_f)
            a = np.tanh(x @ self.U_c.T + h @ self.W_c.T + self.b_c)
            c_new = f * c + i * a
            o = sigmoid(x @ self.U_o.T + h @ self.W_o.T + self.w_o * c + self.b_o)
            h = o * np.tanh(c_new)
            c = c_new
            I[t], F[t], A[t], O[t], C[t], hs[t] = i, f, a, o, c_new, h
        self._cache = (xs, Hprev, Cprev, I, F, A, O, C)
        return hs

    def backward_sequence(self, grad_hs: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        xs, Hprev, Cprev, I, F, A, O, C = self._cache
        T, B, _ = xs.shape
        grad_xs = np.empty_like(xs)
        dh = np.zeros((B, self.hid_dim))
        dc = np.zeros((B, self.hid_dim))
        for t in range(T - 1, -1, -1):
            dh = dh + grad_hs[t]
            x, h_prev, c_prev = xs[t], Hprev[t], Cprev[t]
            i, f, a, o, c = I[t], F[t], A[t], O[t], C[t]
            tanh_c = np.tanh(c)

            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c * tanh_c)

            do_pre = do * o * (1.0 - o)
            df = dc * c_prev
            di = dc * a
            da = dc * i
            da_pre = da * (1.0 - a * a)
            df_pre = df * f * (1.0 - f)
            di_pre = di * i * (1.0 - i)

            for name, dpre in (("i", di_pre), ("f", df_pre), ("c", da_pre), ("o", do_pre)):
                self.grad[f"U_{name}"] += dpre.T @ x
                self.grad[f"W_{name}"] += dpre.T @ h_prev
                self.grad[f"b_{name}"] += dpre.sum(axis=0)
            self.grad["w_i"] += (di_pre * c_prev).sum(axis=0)
            self.grad["w_f"] += (df_pre * c_prev).sum(axis=0)
            self.grad["w_o"] += (do_pre * c_prev).sum(axis=0)

            grad_xs[t] = (
                di_pre @ self.U_i + df_pre @ self.U_f + da_pre @ self.U_c + do_pre @ self.U_o
            )
            dh = (
                di_pre @ self.W_i + df_pre @ self.W_f + da_pre @ self.W_c + do_pre @ self.W_o
            )
            dc = dc * f + di_pre * self.w_i + df_pre * self.w_f + do_pre * self.w_o
        return grad_xs
