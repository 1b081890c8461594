"""Self-describing JSON container for states, vectors, certificates, traces and reports.

Complex numbers are stored as ``[re, im]`` pairs, matrices row-major as nested
lists.  Floats are written with Python's shortest round-trip ``repr``, so a
parse followed by a re-serialization reproduces the file byte for byte.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .margstates import StateElement

FORMAT_VERSION = "1"
KINDS = ("state", "vector", "certificate", "report", "trace")


class FileFormatError(ValueError):
    pass


def encode_complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def encode_vector(v) -> list:
    return [encode_complex(z) for z in np.asarray(v).reshape(-1)]


def encode_matrix(a) -> list:
    a = np.asarray(a)
    return [[encode_complex(z) for z in row] for row in a]


def decode_vector(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FileFormatError("vector data must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def decode_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise FileFormatError("matrix data must be a square nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=_default, allow_nan=True) + "\n"


@dataclass
class StateFile:
    n: int
    kind: str
    data: object
    metadata: dict = field(default_factory=dict)
    format_version: str = FORMAT_VERSION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FileFormatError(f"unknown kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"format_version": self.format_version, "n": self.n, "kind": self.kind,
                "data": self.data, "metadata": self.metadata}

    def dumps(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "StateFile":
        missing = {"format_version", "n", "kind", "data"} - set(d)
        if missing:
            raise FileFormatError(f"missing fields: {sorted(missing)}")
        if d["format_version"] != FORMAT_VERSION:
            raise FileFormatError(f"unsupported format_version {d['format_version']!r}")
        return cls(n=int(d["n"]), kind=d["kind"], data=d["data"],
                   metadata=d.get("metadata", {}), format_version=d["format_version"])

    @classmethod
    def loads(cls, text: str) -> "StateFile":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"invalid JSON: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "StateFile":
        return cls.loads(Path(path).read_text())

    # typed accessors

    def state(self) -> StateElement:
        if self.kind != "state":
            raise FileFormatError(f"expected a state file, got kind {self.kind!r}")
        h = decode_matrix(self.data)
        try:
            return StateElement(self.n, h, self.metadata.get("rank_tol", 1e-9))
        except ValueError as exc:
            raise FileFormatError(f"invalid state: {exc}") from exc

    def vector(self) -> np.ndarray:
        if self.kind != "vector":
            raise FileFormatError(f"expected a vector file, got kind {self.kind!r}")
        v = decode_vector(self.data)
        if v.size != self.n * self.n:
            raise FileFormatError(f"vector length {v.size} does not match n={self.n}")
        return v


def state_file(state: StateElement, **metadata) -> StateFile:
    return StateFile(state.n, "state", encode_matrix(state.h), dict(metadata))


def vector_file(xi, **metadata) -> StateFile:
    xi = np.asarray(xi).reshape(-1)
    n = int(round(np.sqrt(xi.size)))
    return StateFile(n, "vector", encode_vector(xi), dict(metadata))


def certificate_file(cert, state: StateElement, **metadata) -> StateFile:
    data = cert.to_dict()
    data["state"] = encode_matrix(state.h)
    return StateFile(state.n, "certificate", data, dict(metadata))
