"""Byte packing and the binary shard file format.

Layout (little-endian)::

    b"CMSR" | version u8 | n k d rho m node_index u16 | stripe_count u32
    | original_byte_length u64 | payload | crc32(payload) u32

The payload stores ``stripe_count * ell`` symbols of one node, stripe after
stripe, each symbol in ``ceil(m / 8)`` bytes.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import ShardFormatError
from .gf import GF2m

MAGIC = b"CMSR"
VERSION = 1
_HEADER = struct.Struct("<4sB6HIQ")
_CRC = struct.Struct("<I")


def bytes_to_symbols(data: bytes, m: int) -> np.ndarray:
    """Split a byte string into ``m``-bit symbols (bit stream read LSB first, zero padded)."""
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    pad = (-bits.size) % m
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    weights = (1 << np.arange(m, dtype=np.uint32))
    return (bits.reshape(-1, m).astype(np.uint32) @ weights).astype(np.uint32)


def symbols_to_bytes(symbols, m: int, length: int) -> bytes:
    """Inverse of :func:`bytes_to_symbols`, truncated to ``length`` bytes."""
    sym = np.asarray(symbols, dtype=np.uint32).reshape(-1)
    bits = ((sym[:, None] >> np.arange(m, dtype=np.uint32)) & 1).astype(np.uint8).reshape(-1)
    out = np.packbits(bits, bitorder="little").tobytes()
    if len(out) < length:
        raise ValueError(f"only {len(out)} bytes available, {length} requested")
    return out[:length]


@dataclass
class ShardFile:
    n: int
    k: int
    d: int
    rho: int
    m: int
    node_index: int
    stripe_count: int
    original_byte_length: int
    payload: bytes

    @property
    def crc(self) -> int:
        return zlib.crc32(self.payload) & 0xFFFFFFFF

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, self.n, self.k, self.d, self.rho, self.m,
                            self.node_index, self.stripe_count, self.original_byte_length)
        return head + self.payload + _CRC.pack(self.crc)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ShardFile":
        if len(blob) < _HEADER.size + _CRC.size:
            raise ShardFormatError("shard file truncated")
        magic, version, n, k, d, rho, m, idx, stripes, length = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise ShardFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise ShardFormatError(f"unsupported shard version {version}")
        payload = blob[_HEADER.size:-_CRC.size]
        (crc,) = _CRC.unpack(blob[-_CRC.size:])
        shard = cls(n, k, d, rho, m, idx, stripes, length, payload)
        if shard.crc != crc:
            raise ShardFormatError(f"CRC mismatch in shard for node {idx}")
        return shard

    def symbols(self, gf: GF2m, ell: int) -> np.ndarray:
        """Payload as a ``(stripe_count, ell)`` symbol array."""
        if len(self.payload) != self.stripe_count * ell * gf.symbol_bytes:
            raise ShardFormatError("payload size does not match header")
        return gf.from_bytes(self.payload).reshape(self.stripe_count, ell)


def write_shard(path, shard: ShardFile) -> None:
    with open(path, "wb") as fh:
        fh.write(shard.to_bytes())


def read_shard(path) -> ShardFile:
    with open(path, "rb") as fh:
        return ShardFile.from_bytes(fh.read())


def shard_name(i: int) -> str:
    return f"node_{i}.shard"
