"""Versioned binary checkpoints for networks and normalizers.

Layout (all little-endian):

    magic  b"NNCP"
    u32    format version (1)
    u32    entry count
    entry:
      u16  name length, then utf-8 name
      u8   kind: 0 = network, 1 = normalizer
      network:    u8 output activation (0 identity, 1 tanh),
                  u32 layer-size count, u32 sizes...,
                  then per layer the weight matrix (row-major float64)
                  followed by the bias vector
      normalizer: u32 dim, f64 clip, f64 count,
                  f64 mean[dim], f64 m2[dim]
"""

from __future__ import annotations

import struct

import numpy as np

from .mlp import Mlp
from .normalizer import Normalizer

_MAGIC = b"NNCP"
_VERSION = 1
_ACT = {"identity": 0, "tanh": 1}
_ACT_INV = {v: k for k, v in _ACT.items()}


def save_checkpoint(path, entries: dict) -> None:
    """entries maps names to Mlp or Normalizer values."""
    blobs = [_MAGIC, struct.pack("<II", _VERSION, len(entries))]
    for name, value in entries.items():
        raw = name.encode("utf-8")
        blobs.append(struct.pack("<H", len(raw)))
        blobs.append(raw)
        if isinstance(value, Mlp):
            blobs.append(struct.pack("<BB", 0, _ACT[value.output_activation]))
            blobs.append(struct.pack("<I", len(value.sizes)))
            blobs.append(struct.pack(f"<{len(value.sizes)}I", *value.sizes))
            for w, b in zip(value.weights, value.biases):
                blobs.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
                blobs.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
        elif isinstance(value, Normalizer):
            blobs.append(struct.pack("<BI", 1, value.dim))
            blobs.append(struct.pack("<dd", value.clip, value.count))
            blobs.append(np.ascontiguousarray(value.mean, dtype="<f8").tobytes())
            blobs.append(np.ascontiguousarray(value.m2, dtype="<f8").tobytes())
        else:
            raise TypeError(f"cannot checkpoint {type(value).__name__}")
    with open(path, "wb") as fh:
        fh.write(b"".join(blobs))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        out = struct.unpack_from("<" + fmt, self.data, self.pos)
        self.pos += struct.calcsize("<" + fmt)
        return out

    def array(self, n: int) -> np.ndarray:
        out = np.frombuffer(self.data, dtype="<f8", count=n, offset=self.pos)
        self.pos += 8 * n
        return out.astype(float)


def load_checkpoint(path) -> dict:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ValueError("not a checkpoint file (bad magic)")
    r = _Reader(data)
    r.pos = 4
    version, n_entries = r.take("II")
    if version != _VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    out = {}
    for _ in range(n_entries):
        (name_len,) = r.take("H")
        name = data[r.pos:r.pos + name_len].decode("utf-8")
        r.pos += name_len
        (kind,) = r.take("B")
        if kind == 0:
            (act,) = r.take("B")
            (n_sizes,) = r.take("I")
            sizes = list(r.take(f"{n_sizes}I"))
            net = Mlp(sizes=sizes, output_activation=_ACT_INV[act])
            for n_in, n_out in zip(sizes[:-1], sizes[1:]):
                net.weights.append(r.array(n_in * n_out).reshape(n_in, n_out))
                net.biases.append(r.array(n_out))
            out[name] = net
        elif kind == 1:
            (dim,) = r.take("I")
            clip, count = r.take("dd")
            norm = Normalizer(dim=dim, clip=clip, count=count,
                              mean=r.array(dim), m2=r.array(dim))
            out[name] = norm
        else:
            raise ValueError(f"unknown checkpoint entry kind {kind}")
    return out
