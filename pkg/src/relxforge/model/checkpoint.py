"""Binary checkpoint format.

Layout, all integers little-endian:

    magic    4 bytes, "RLXF"
    version  u32
    cfg_len  u32, then cfg_len bytes of canonical JSON (sorted keys,
             compact separators, UTF-8)
    count    u32 number of tensors, sorted by name
    entry    u16 name length + name bytes, u8 ndim, u32 per dim,
             then the float32 payload in C order
    crc      u64, CRC-64/XZ over every preceding byte

Weights round-trip bit for bit; the trailing checksum catches any
truncation or corruption. A version bump means the layout changed.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .config import ModelConfig
from .encoder import EncoderModel

MAGIC = b"RLXF"
VERSION = 1


class BadMagic(ValueError):
    pass


class VersionMismatch(ValueError):
    pass


class ChecksumFail(ValueError):
    pass


_CRC_POLY = 0xC96C5795D7870F42  # reflected CRC-64/XZ polynomial
_MASK = 0xFFFFFFFFFFFFFFFF
_tables = None


def _build_tables():
    base = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ (_CRC_POLY if crc & 1 else 0)
        base.append(crc)
    tables = [base]
    for k in range(1, 8):
        prev = tables[k - 1]
        tables.append([(prev[i] >> 8) ^ base[prev[i] & 0xFF] for i in range(256)])
    return tables


def crc64(data: bytes) -> int:
    """CRC-64/XZ, eight bytes per table round."""
    global _tables
    if _tables is None:
        _tables = _build_tables()
    t0, t1, t2, t3, t4, t5, t6, t7 = _tables
    crc = _MASK
    n = len(data)
    head = n - (n % 8)
    for i in range(0, head, 8):
        crc ^= int.from_bytes(data[i : i + 8], "little")
        crc = (
            t7[crc & 0xFF]
            ^ t6[(crc >> 8) & 0xFF]
            ^ t5[(crc >> 16) & 0xFF]
            ^ t4[(crc >> 24) & 0xFF]
            ^ t3[(crc >> 32) & 0xFF]
            ^ t2[(crc >> 40) & 0xFF]
            ^ t1[(crc >> 48) & 0xFF]
            ^ t0[(crc >> 56) & 0xFF]
        )
    for b in data[head:]:
        crc = (crc >> 8) ^ t0[(crc ^ b) & 0xFF]
    return crc ^ _MASK


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_checkpoint(path, config: dict, tensors: dict) -> None:
    parts = [MAGIC, struct.pack("<I", VERSION)]
    blob = _canonical_json(config)
    parts.append(struct.pack("<I", len(blob)))
    parts.append(blob)
    parts.append(struct.pack("<I", len(tensors)))
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f4")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b"")
        parts.append(arr.tobytes())
    body = b"".join(parts)
    Path(path).write_bytes(body + struct.pack("<Q", crc64(body)))


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.at = 0

    def take(self, n: int) -> bytes:
        if self.at + n > len(self.data):
            raise ChecksumFail("checkpoint truncated")
        out = self.data[self.at : self.at + n]
        self.at += n
        return out

    def u(self, fmt: str) -> int:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))[0]


def _check_header(cur: _Cursor):
    if cur.take(4) != MAGIC:
        raise BadMagic("not a checkpoint file")
    version = cur.u("<I")
    if version != VERSION:
        raise VersionMismatch(f"checkpoint version {version}, reader supports {VERSION}")


def read_checkpoint(path) -> tuple:
    """Return (config dict, {name: float32 array}) after verifying the CRC."""
    data = Path(path).read_bytes()
    if len(data) < 16:
        raise BadMagic("not a checkpoint file") if data[:4] != MAGIC else ChecksumFail(
            "checkpoint truncated"
        )
    body, stored = data[:-8], struct.unpack("<Q", data[-8:])[0]
    cur = _Cursor(body)
    _check_header(cur)
    if crc64(body) != stored:
        raise ChecksumFail("checksum does not match file contents")
    config = json.loads(cur.take(cur.u("<I")).decode("utf-8"))
    tensors = {}
    for _ in range(cur.u("<I")):
        name = cur.take(cur.u("<H")).decode("utf-8")
        ndim = cur.u("<B")
        shape = tuple(struct.unpack(f"<{ndim}I", cur.take(4 * ndim))) if ndim else ()
        count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        tensors[name] = np.frombuffer(cur.take(4 * count), dtype="<f4").reshape(shape).copy()
    return config, tensors


def read_config(path) -> dict:
    """Header-only inspection; skips the payload checksum."""
    cur = _Cursor(Path(path).read_bytes())
    _check_header(cur)
    return json.loads(cur.take(cur.u("<I")).decode("utf-8"))


EXTRA_PREFIX = "extra."


def save_model(model: EncoderModel, path, meta: dict | None = None, extra_tensors: dict | None = None):
    """Model weights plus optional training state under one checksum."""
    config = {"model": model.config.to_json_dict(), "meta": meta or {}}
    tensors = {name: p.data for name, p in model.named_parameters().items()}
    for key, arr in (extra_tensors or {}).items():
        tensors[EXTRA_PREFIX + key] = np.asarray(arr)
    write_checkpoint(path, config, tensors)


def load_model(path, dtype=np.float32) -> tuple:
    """Rebuild (model, meta, extra tensors) from a checkpoint file."""
    config, tensors = read_checkpoint(path)
    model = EncoderModel(ModelConfig.from_json_dict(config["model"]), dtype=dtype)
    weights = {k: v for k, v in tensors.items() if not k.startswith(EXTRA_PREFIX)}
    extras = {k[len(EXTRA_PREFIX) :]: v for k, v in tensors.items() if k.startswith(EXTRA_PREFIX)}
    model.load_state(weights)
    return model, config.get("meta", {}), extras
