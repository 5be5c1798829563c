"""On-disk formats: the tensor container and the instance sidecar.

Container layout (little-endian): 4-byte magic ``OTSN``, version byte,
uint32 order, uint32 dim, then dim**order float64 values in the canonical
flat layout. The sidecar is a JSON document describing the planted truth,
the noise specification, and the seed of an instance.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .synth import GroundTruth, Instance, NoiseSpec
from .tensor import SymmetricTensor

MAGIC = b"OTSN"
VERSION = 1
_HEADER = struct.Struct("<4sBII")


def write_tensor(path: str | Path, t: SymmetricTensor) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, t.order, t.dim))
        fh.write(t.data.astype("<f8").tobytes())


def read_tensor(path: str | Path) -> SymmetricTensor:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, order, dim = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a tensor container (bad magic)")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported container version {version}")
        payload = fh.read()
    expected = dim**order * 8
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return SymmetricTensor(order=order, dim=dim, data=data)


def write_instance_sidecar(path: str | Path, inst: Instance, spec: NoiseSpec) -> None:
    doc = {
        "seed": inst.seed,
        "order": inst.tensor.order,
        "dim": inst.tensor.dim,
        "r": inst.truth.r,
        "noise": {"model": spec.model, "sigma": spec.sigma, "df": spec.df},
        "weights": inst.truth.weights.tolist(),
        "factors": inst.truth.factors.tolist(),
        "noise_frob": inst.noise_frob,
        "noise_spectral_lb": inst.noise_spectral_lb,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_instance_sidecar(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    doc["truth"] = GroundTruth(
        factors=np.asarray(doc["factors"], dtype=np.float64),
        weights=np.asarray(doc["weights"], dtype=np.float64),
    )
    return doc
