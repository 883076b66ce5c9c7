"""Flat binary parameter checkpoints plus a text manifest.

Layout of the .bin file:
  uint32  number of parameter arrays
  per array: uint32 name length, utf-8 name, uint32 ndim, uint32 dims...
  then every array's float64 data, C order, in header order.
The .txt manifest echoes the model config, seed, best epoch, and best
validation MAE.
"""

import struct
from dataclasses import asdict

import numpy as np


def save_checkpoint(model, path, history=None):
    params = model.params()
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(params)))
        for name, p in params.items():
            raw = name.encode()
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", p.ndim))
            fh.write(struct.pack(f"<{p.ndim}I", *p.shape))
        for p in params.values():
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())

    with open(str(path) + ".manifest", "w") as fh:
        fh.write(f"model={model.kind}\n")
        for key, val in asdict(model.config).items():
            fh.write(f"{key}={val!r}\n")
        if history is not None:
            fh.write(f"best_epoch={history.best_epoch}\n")
            fh.write(f"best_val_mae={history.best_val_mae!r}\n")


def load_checkpoint(model, path):
    """Load a checkpoint written for the same architecture into model."""
    with open(path, "rb") as fh:
        (count,) = struct.unpack("<I", fh.read(4))
        shapes = []
        for _ in range(count):
            (nlen,) = struct.unpack("<I", fh.read(4))
            name = fh.read(nlen).decode()
            (ndim,) = struct.unpack("<I", fh.read(4))
            dims = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
            shapes.append((name, dims))
        flat = {}
        for name, dims in shapes:
            size = int(np.prod(dims)) if dims else 1
            data = np.frombuffer(fh.read(8 * size), dtype="<f8")
            flat[name] = data.reshape(dims)
    model.set_params(flat)
    return model
