"""LSTM and CNN forecasters assembled from the NumPy layers."""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch
from .layers import LSTM, Conv1D, Dense, Dropout, Flatten, MaxPool1D


@dataclass
class LstmConfig:
    horizon: int
    n_features: int
    layer1_units: int = 150
    layer2_units: int = 75
    dropout_rate: float = 0.1
    seed: int = 0
    epochs: int = 50
    batch_size: int = 256
    learning_rate: float = 1e-3

    def __post_init__(self):
        if self.layer1_units < 1 or self.layer2_units < 1:
            raise ValueError("LSTM units must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")


@dataclass
class CnnConfig:
    horizon: int
    n_features: int
    window: int
    filters: int = 64
    kernel_size: int = 3
    pool_size: int = 2
    dropout_rate: float = 0.1
    dense_units: int = 30
    seed: int = 0
    epochs: int = 50
    batch_size: int = 256
    learning_rate: float = 1e-3

    def __post_init__(self):
        if self.kernel_size > self.window:
            raise ValueError("kernel size cannot exceed the window length")
        if self.pool_size < 1:
            raise ValueError("pool size must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")


class SequentialForecaster:
    """Stack of layers mapping (B, m, F) windows to (B, n) forecasts."""

    def __init__(self, config, layers):
        self.config = config
        self.layers = layers

    # --- flat parameter space -------------------------------------------
    def params(self):
        return {f"{i}.{k}": p
                for i, layer in enumerate(self.layers)
                for k, p in layer.params.items()}

    def grads(self):
        return {f"{i}.{k}": g
                for i, layer in enumerate(self.layers)
                for k, g in layer.grads.items()}

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()

    def set_params(self, flat):
        for name, value in flat.items():
            i, k = name.split(".", 1)
            self.layers[int(i)].params[k][...] = value

    def snapshot(self):
        return {k: p.copy() for k, p in self.params().items()}

    # --- passes -----------------------------------------------------------
    def forward(self, x, train=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 3 or x.shape[2] != self.config.n_features:
            raise DimensionMismatch(
                f"expected (B, m, {self.config.n_features}) input, got {x.shape}")
        for layer in self.layers:
            x = layer.forward(x, train=train, rng=rng)
        return x

    def backward(self, dout):
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def predict(self, x, batch_size=1024):
        x = np.asarray(x, dtype=np.float64)
        chunks = [self.forward(x[i:i + batch_size])
                  for i in range(0, len(x), batch_size)]
        return np.concatenate(chunks) if chunks else np.empty((0, self.config.horizon))


def build_lstm(config):
    """150-unit LSTM -> dropout -> 75-unit LSTM (last state) -> dropout
    -> dense(horizon)."""
    rng = np.random.default_rng(config.seed)
    c = config
    layers = [
        LSTM(rng, c.n_features, c.layer1_units, return_sequences=True),
        Dropout(c.dropout_rate),
        LSTM(rng, c.layer1_units, c.layer2_units, return_sequences=False),
        Dropout(c.dropout_rate),
        Dense(rng, c.layer2_units, c.horizon),
    ]
    model = SequentialForecaster(c, layers)
    model.kind = "lstm"
    return model


def build_cnn(config):
    """conv1d(filters, k, ReLU) -> maxpool -> dropout -> flatten ->
    dense(dense_units, ReLU) -> dropout -> dense(horizon)."""
    rng = np.random.default_rng(config.seed)
    c = config
    conv_len = c.window - c.kernel_size + 1
    pooled = conv_len // c.pool_size
    if pooled < 1:
        raise ValueError("window too short for the conv/pool configuration")
    layers = [
        Conv1D(rng, c.n_features, c.filters, c.kernel_size, relu=True),
        MaxPool1D(c.pool_size),
        Dropout(c.dropout_rate),
        Flatten(),
        Dense(rng, pooled * c.filters, c.dense_units, relu=True),
        Dropout(c.dropout_rate),
        Dense(rng, c.dense_units, c.horizon),
    ]
    model = SequentialForecaster(c, layers)
    model.kind = "cnn"
    return model
