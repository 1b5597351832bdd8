"""
Binary checkpoint container.

Layout (all integers unsigned 64-bit little-endian unless noted):

    b"GUMMP"                      magic
    u32 format version
    u64 header length, header     canonical JSON: config, vocab, epoch, rng state,
                                  history, a sample of training passages for negatives
    u64 tensor count
    per tensor: u64 name length, UTF-8 name, u64 rank, rank x u64 extents,
                values as float64 little-endian in C order
    8-byte blake2b digest of everything above
"""
import hashlib
import json
import os
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from loguru import logger

from config.errors import ConfigError, IntegrityError, VersionError
from config.schema import canonical_json

MAGIC = b"GUMMP"
FORMAT_VERSION = 1
DIGEST_SIZE = 8


@dataclass
class Checkpoint:
    config: Dict[str, Any]
    vocab: List[str]
    tensors: Dict[str, np.ndarray]
    epoch: int = 0
    rng_state: int = 0
    adam_step: int = 0
    history: List[float] = field(default_factory=list)
    negative_pool: Dict[str, list] = field(default_factory=dict)
    version: int = FORMAT_VERSION

    def header(self) -> Dict[str, Any]:
        return {
            "config": self.config,
            "vocab": self.vocab,
            "epoch": self.epoch,
            "rng_state": self.rng_state,
            "adam_step": self.adam_step,
            "history": self.history,
            "negative_pool": self.negative_pool,
        }

    def params(self) -> Dict[str, np.ndarray]:
        return {n: a for n, a in self.tensors.items() if not n.startswith("adam.")}


def _digest(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=DIGEST_SIZE).digest()


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    parts = [MAGIC, struct.pack("<I", ckpt.version)]
    header = canonical_json(ckpt.header()).encode("utf-8")
    parts += [struct.pack("<Q", len(header)), header, struct.pack("<Q", len(ckpt.tensors))]
    for name in sorted(ckpt.tensors):
        arr = np.asarray(ckpt.tensors[name], dtype="<f8").copy(order="C")
        raw_name = name.encode("utf-8")
        parts.append(struct.pack("<Q", len(raw_name)))
        parts.append(raw_name)
        parts.append(struct.pack("<Q", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        parts.append(arr.tobytes(order="C"))
    payload = b"".join(parts)
    return payload + _digest(payload)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise IntegrityError("checkpoint is truncated")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def decode_checkpoint(blob: bytes) -> Checkpoint:
    if len(blob) < len(MAGIC) + 4 + DIGEST_SIZE:
        raise IntegrityError("checkpoint is truncated")
    if blob[:len(MAGIC)] != MAGIC:
        raise IntegrityError("not a checkpoint file (bad magic)")
    payload, digest = blob[:-DIGEST_SIZE], blob[-DIGEST_SIZE:]
    if _digest(payload) != digest:
        raise IntegrityError("checkpoint checksum mismatch (file corrupt or truncated)")

    reader = _Reader(payload)
    reader.take(len(MAGIC))
    version = struct.unpack("<I", reader.take(4))[0]
    if version != FORMAT_VERSION:
        raise VersionError(f"checkpoint format version {version}, this build reads {FORMAT_VERSION}")
    header = json.loads(reader.take(reader.u64()).decode("utf-8"))
    tensors: Dict[str, np.ndarray] = {}
    for _ in range(reader.u64()):
        name = reader.take(reader.u64()).decode("utf-8")
        rank = reader.u64()
        shape = struct.unpack(f"<{rank}Q", reader.take(8 * rank))
        count = int(np.prod(shape)) if rank else 1
        values = np.frombuffer(reader.take(8 * count), dtype="<f8")
        tensors[name] = values.astype(np.float64).reshape(shape)
    if reader.pos != len(payload):
        raise IntegrityError("trailing bytes after the last tensor record")

    return Checkpoint(
        config=header["config"],
        vocab=header["vocab"],
        tensors=tensors,
        epoch=header["epoch"],
        rng_state=header["rng_state"],
        adam_step=header["adam_step"],
        history=header.get("history", []),
        negative_pool=header.get("negative_pool", {}),
        version=version,
    )


def save_checkpoint(path: str, ckpt: Checkpoint) -> None:
    blob = encode_checkpoint(ckpt)
    with open(path, "wb") as f:
        f.write(blob)
    logger.info(f"Saved checkpoint to {path} (epoch {ckpt.epoch}, {len(ckpt.tensors)} tensors)")


def load_checkpoint(path: str) -> Checkpoint:
    if not os.path.isfile(path):
        raise ConfigError(f"checkpoint not found: {path}")
    with open(path, "rb") as f:
        blob = f.read()
    ckpt = decode_checkpoint(blob)
    logger.info(f"Loaded checkpoint {path} (epoch {ckpt.epoch})")
    return ckpt
