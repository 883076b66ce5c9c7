"""From-scratch NumPy layers with forward/backward passes.

Every layer keeps its parameters and gradients in dicts keyed by short
names; models prefix those names to build a flat parameter space for
the optimizer and the gradient checker. Batches are (B, T, D) for
sequence layers and (B, D) after flattening.
"""

import numpy as np

from ..errors import DimensionMismatch


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def uniform_init(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Layer:
    def __init__(self):
        self.params = {}
        self.grads = {}

    def zero_grad(self):
        for k, p in self.params.items():
            self.grads[k] = np.zeros_like(p)


class Dense(Layer):
    def __init__(self, rng, d_in, d_out, relu=False):
        super().__init__()
        self.relu = relu
        self.params = {
            "W": uniform_init(rng, (d_in, d_out), d_in),
            "b": uniform_init(rng, (d_out,), d_in),
        }
        self.zero_grad()

    def forward(self, x, train=False, rng=None):
        if x.shape[-1] != self.params["W"].shape[0]:
            raise DimensionMismatch(
                f"dense expected {self.params['W'].shape[0]} inputs, got {x.shape[-1]}")
        z = x @ self.params["W"] + self.params["b"]
        out = np.maximum(z, 0.0) if self.relu else z
        self._cache = (x, z)
        return out

    def backward(self, dout):
        x, z = self._cache
        if self.relu:
            dout = dout * (z > 0)
        self.grads["W"] += x.T @ dout
        self.grads["b"] += dout.sum(axis=0)
        return dout @ self.params["W"].T


class Conv1D(Layer):
    """Valid (no padding) 1D convolution over the time axis."""

    def __init__(self, rng, d_in, filters, kernel_size, relu=True):
        super().__init__()
        self.kernel_size = kernel_size
        self.relu = relu
        fan_in = d_in * kernel_size
        self.params = {
            "W": uniform_init(rng, (kernel_size, d_in, filters), fan_in),
            "b": uniform_init(rng, (filters,), fan_in),
        }
        self.zero_grad()

    def forward(self, x, train=False, rng=None):
        k = self.kernel_size
        t = x.shape[1]
        if t < k:
            raise DimensionMismatch(f"sequence length {t} shorter than kernel {k}")
        length = t - k + 1
        z = np.zeros(x.shape[:1] + (length, self.params["b"].shape[0]))
        for j in range(k):
            z += x[:, j:j + length, :] @ self.params["W"][j]
        z += self.params["b"]
        out = np.maximum(z, 0.0) if self.relu else z
        self._cache = (x, z, length)
        return out

    def backward(self, dout):
        x, z, length = self._cache
        if self.relu:
            dout = dout * (z > 0)
        dx = np.zeros_like(x)
        for j in range(self.kernel_size):
            xs = x[:, j:j + length, :]
            self.grads["W"][j] += np.einsum("btd,btc->dc", xs, dout)
            dx[:, j:j + length, :] += dout @ self.params["W"][j].T
        self.grads["b"] += dout.sum(axis=(0, 1))
        return dx


class MaxPool1D(Layer):
    """Non-overlapping max pooling over time; trailing remainder dropped."""

    def __init__(self, pool_size):
        super().__init__()
        self.pool_size = pool_size

    def forward(self, x, train=False, rng=None):
        p = self.pool_size
        b, t, c = x.shape
        length = t // p
        xr = x[:, :length * p, :].reshape(b, length, p, c)
        arg = xr.argmax(axis=2)
        out = np.take_along_axis(xr, arg[:, :, None, :], axis=2)[:, :, 0, :]
        self._cache = (x.shape, arg)
        return out

    def backward(self, dout):
        shape, arg = self._cache
        b, t, c = shape
        p = self.pool_size
        length = t // p
        dxr = np.zeros((b, length, p, c))
        np.put_along_axis(dxr, arg[:, :, None, :], dout[:, :, None, :], axis=2)
        dx = np.zeros(shape)
        dx[:, :length * p, :] = dxr.reshape(b, length * p, c)
        return dx


class Dropout(Layer):
    """Inverted dropout: identity at inference, mask/(1-p) in training."""

    def __init__(self, rate):
        super().__init__()
        self.rate = rate

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask


class Flatten(Layer):
    def forward(self, x, train=False, rng=None):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class LSTM(Layer):
    """Single LSTM layer; gate blocks in W/b order: input, forget,
    output, candidate. Returns the full sequence or only the last
    hidden state."""

    def __init__(self, rng, d_in, units, return_sequences):
        super().__init__()
        self.units = units
        self.return_sequences = return_sequences
        h = units
        self.params = {
            "Wx": uniform_init(rng, (d_in, 4 * h), d_in),
            "Wh": uniform_init(rng, (h, 4 * h), h),
            "b": uniform_init(rng, (4 * h,), d_in),
        }
        self.zero_grad()

    def _gates(self, x_t, h_prev):
        z = x_t @ self.params["Wx"] + h_prev @ self.params["Wh"] + self.params["b"]
        hh = self.units
        i = _sigmoid(z[:, :hh])
        f = _sigmoid(z[:, hh:2 * hh])
        o = _sigmoid(z[:, 2 * hh:3 * hh])
        g = np.tanh(z[:, 3 * hh:])
        return i, f, o, g

    def step(self, x_t, h_prev, c_prev):
        i, f, o, g = self._gates(x_t, h_prev)
        c = f * c_prev + i * g
        h = o * np.tanh(c)
        return h, c

    def forward(self, x, train=False, rng=None):
        b, t, _ = x.shape
        h = np.zeros((b, self.units))
        c = np.zeros((b, self.units))
        steps = []
        hs = np.empty((b, t, self.units))
        for step in range(t):
            x_t = x[:, step, :]
            i, f, o, g = self._gates(x_t, h)
            c_new = f * c + i * g
            tc = np.tanh(c_new)
            h_new = o * tc
            steps.append((x_t, h, c, i, f, o, g, tc))
            h, c = h_new, c_new
            hs[:, step, :] = h
        self._cache = (x.shape, steps)
        return hs if self.return_sequences else h

    def backward(self, dout):
        shape, steps = self._cache
        b, t, _ = shape
        hh = self.units
        dx = np.zeros(shape)
        dh_next = np.zeros((b, hh))
        dc_next = np.zeros((b, hh))
        if not self.return_sequences:
            dh_next = dh_next + dout
        for step in reversed(range(t)):
            x_t, h_prev, c_prev, i, f, o, g, tc = steps[step]
            dh = dh_next + (dout[:, step, :] if self.return_sequences else 0.0)
            do = dh * tc
            dc = dh * o * (1.0 - tc * tc) + dc_next
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dc_next = dc * f
            dz = np.concatenate([
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                do * o * (1.0 - o),
                dg * (1.0 - g * g),
            ], axis=1)
            self.grads["Wx"] += x_t.T @ dz
            self.grads["Wh"] += h_prev.T @ dz
            self.grads["b"] += dz.sum(axis=0)
            dx[:, step, :] = dz @ self.params["Wx"].T
            dh_next = dz @ self.params["Wh"].T
        return dx
