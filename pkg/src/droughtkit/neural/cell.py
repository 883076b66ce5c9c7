"""Standalone LSTM cell with explicit per-gate parameters.

The LSTM layer keeps its gate weights packed in one matrix for speed;
this module gives the unpacked, per-gate view of the same arithmetic,
used directly in tests and wherever a single recurrence step is needed.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch
from .layers import _sigmoid


@dataclass
class GateParams:
    w_x: np.ndarray  # (D, H)
    w_h: np.ndarray  # (H, H)
    b: np.ndarray    # (H,)


@dataclass
class LstmCellParams:
    input_gate: GateParams
    forget_gate: GateParams
    output_gate: GateParams
    candidate: GateParams

    @classmethod
    def zeros(cls, d_in, units):
        def gate():
            return GateParams(np.zeros((d_in, units)), np.zeros((units, units)),
                              np.zeros(units))
        return cls(gate(), gate(), gate(), gate())

    @classmethod
    def from_packed(cls, w_x, w_h, b):
        """Split an (D, 4H) packed parameterization (i, f, o, g blocks)."""
        h = w_h.shape[0]
        gates = []
        for k in range(4):
            sl = slice(k * h, (k + 1) * h)
            gates.append(GateParams(w_x[:, sl], w_h[:, sl], b[sl]))
        return cls(*gates)


def lstm_cell(x_t, h_prev, c_prev, params):
    """One LSTM step: returns (h_t, c_t).

    i, f, o = sigmoid of their gate affines, g = tanh of the candidate
    affine, c_t = f*c_prev + i*g, h_t = o*tanh(c_t).
    """
    x_t = np.asarray(x_t, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    c_prev = np.asarray(c_prev, dtype=float)
    if x_t.shape[-1] != params.input_gate.w_x.shape[0]:
        raise DimensionMismatch(
            f"input size {x_t.shape[-1]} vs weights "
            f"{params.input_gate.w_x.shape[0]}")
    if h_prev.shape != c_prev.shape:
        raise DimensionMismatch("h_prev and c_prev shapes differ")

    def affine(gate):
        return x_t @ gate.w_x + h_prev @ gate.w_h + gate.b

    i = _sigmoid(affine(params.input_gate))
    f = _sigmoid(affine(params.forget_gate))
    o = _sigmoid(affine(params.output_gate))
    g = np.tanh(affine(params.candidate))
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    return h_t, c_t
