"""Binary containers for trained parameters.

Layout (little-endian): 4-byte magic, u32 version, u32-length config text
blob, u32-length metadata blob (key=value lines), u32 record count, then per
record: u16 name length, name bytes, u8 ndim, u32 dims, raw float32 data.
Network weights use magic "SWSH", mixture models "SWGM".
"""

import struct
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .model import Model, ModelConfig, format_config, parse_config
from .tensor import Tensor

MODEL_MAGIC = b"SWSH"
GMM_MAGIC = b"SWGM"
_VERSION = 1


def _pack_blob(text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _pack_records(arrays: dict[str, np.ndarray]) -> bytes:
    chunks = [struct.pack("<I", len(arrays))]
    for name, arr in arrays.items():
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)) + encoded)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, raw: bytes, label: str):
        self.raw = raw
        self.offset = 0
        self.label = label

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.raw):
            raise FileFormatError(f"{self.label}: truncated file")
        piece = self.raw[self.offset:self.offset + n]
        self.offset += n
        return piece

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def blob(self) -> str:
        return self.take(self.u32()).decode("utf-8")

    def records(self) -> dict[str, np.ndarray]:
        out = {}
        for _ in range(self.u32()):
            (name_len,) = struct.unpack("<H", self.take(2))
            name = self.take(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", self.take(1))
            shape = struct.unpack(f"<{ndim}I", self.take(4 * ndim))
            size = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(self.take(4 * size), dtype="<f4")
            out[name] = data.astype(np.float64).reshape(shape)
        return out


def serialize_container(magic: bytes, config_text: str, metadata: dict[str, str],
                        arrays: dict[str, np.ndarray]) -> bytes:
    meta_text = "".join(f"{k}={v}\n" for k, v in sorted(metadata.items()))
    return (magic + struct.pack("<I", _VERSION) + _pack_blob(config_text)
            + _pack_blob(meta_text) + _pack_records(arrays))


def deserialize_container(raw: bytes, magic: bytes, label: str):
    if len(raw) < 8 or raw[:4] != magic:
        raise FileFormatError(f"{label}: bad magic (expected {magic.decode()})")
    reader = _Reader(raw, label)
    reader.take(4)
    version = reader.u32()
    if version != _VERSION:
        raise FileFormatError(f"{label}: unsupported version {version}")
    config_text = reader.blob()
    metadata = {}
    for line in reader.blob().splitlines():
        key, _, value = line.partition("=")
        metadata[key] = value
    arrays = reader.records()
    if reader.offset != len(raw):
        raise FileFormatError(f"{label}: {len(raw) - reader.offset} trailing bytes")
    return config_text, metadata, arrays


def serialize_model(m: Model) -> bytes:
    return serialize_container(MODEL_MAGIC, format_config(m.config), m.metadata,
                               m.param_arrays())


def save_model(m: Model, path) -> None:
    Path(path).write_bytes(serialize_model(m))


def load_model(path) -> Model:
    raw = Path(path).read_bytes()
    config_text, metadata, arrays = deserialize_container(raw, MODEL_MAGIC, str(path))
    config: ModelConfig = parse_config(config_text)
    params = {name: Tensor(arr, requires_grad=True) for name, arr in arrays.items()}
    return Model(config=config, params=params, metadata=metadata)
