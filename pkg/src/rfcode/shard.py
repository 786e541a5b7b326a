"""Shard files: a self-describing header, the payload, and a payload CRC.

Layout (all integers little-endian)::

    magic "RFC1" | version u8 | field_m u8 | reduction_poly u32 | k u32
    | c_num u32 | c_den u32 | log_base u8 | master_seed u64 | column_index u64
    | symbol_size u32 | original_file_len u64 | header_crc32 u32
    payload (symbol_size bytes) | payload_crc32 u32
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from .code import CodeConfig
from .errors import ConfigInvalid, CorruptShard, HeaderMismatch
from .galois import gf

MAGIC = b"RFC1"
VERSION = 1
_BODY = struct.Struct("<4sBBIIIIBQQIQ")
_CRC = struct.Struct("<I")
HEADER_SIZE = _BODY.size + _CRC.size
LOG_BASE_CODES = {"natural": 0, "base2": 1}
_U32 = (1 << 32) - 1


@dataclass(frozen=True)
class ShardHeader:
    field_m: int
    reduction_poly: int
    k: int
    c_numerator: int
    c_denominator: int
    log_base: int
    master_seed: int
    column_index: int
    symbol_size: int
    original_file_len: int
    version: int = VERSION

    def __post_init__(self):
        if self.c_denominator == 0:
            raise ConfigInvalid("c denominator must be nonzero")
        if self.field_m not in (8, 16) or self.symbol_size % (self.field_m // 8):
            raise ConfigInvalid("symbol size must be a multiple of the field element size")
        if self.log_base not in (0, 1):
            raise ConfigInvalid(f"unknown log base code {self.log_base}")

    @classmethod
    def for_config(cls, cfg: CodeConfig, column_index: int, symbol_size: int, file_len: int):
        if cfg.c.numerator > _U32 or cfg.c.denominator > _U32:
            raise ConfigInvalid("c does not fit the header's 32-bit rational")
        return cls(cfg.field.m, cfg.field.reduction_poly, cfg.k, cfg.c.numerator,
                   cfg.c.denominator, LOG_BASE_CODES[cfg.log_base], cfg.master_seed,
                   column_index, symbol_size, file_len)

    def config(self) -> CodeConfig:
        base = {v: n for n, v in LOG_BASE_CODES.items()}[self.log_base]
        return CodeConfig(self.k, Fraction(self.c_numerator, self.c_denominator),
                          gf(self.field_m, self.reduction_poly), self.master_seed, base)

    def same_code(self, other: ShardHeader) -> bool:
        """True when both headers describe the same code and file."""
        return replace(self, column_index=0) == replace(other, column_index=0)

    def pack(self) -> bytes:
        body = _BODY.pack(MAGIC, self.version, self.field_m, self.reduction_poly, self.k,
                          self.c_numerator, self.c_denominator, self.log_base,
                          self.master_seed, self.column_index, self.symbol_size,
                          self.original_file_len)
        return body + _CRC.pack(zlib.crc32(body))

    @classmethod
    def unpack(cls, data: bytes) -> ShardHeader:
        if len(data) < HEADER_SIZE:
            raise CorruptShard("truncated header")
        body = data[: _BODY.size]
        (crc,) = _CRC.unpack_from(data, _BODY.size)
        fields = _BODY.unpack(body)
        if fields[0] != MAGIC:
            raise CorruptShard("bad magic")
        if zlib.crc32(body) != crc:
            raise CorruptShard("header checksum mismatch")
        if fields[1] != VERSION:
            raise CorruptShard(f"unsupported version {fields[1]}")
        _, version, m, poly, k, cn, cd, lb, seed, idx, size, flen = fields
        try:
            return cls(m, poly, k, cn, cd, lb, seed, idx, size, flen, version)
        except ConfigInvalid as e:
            raise CorruptShard(str(e)) from None


def shard_name(index: int) -> str:
    return f"shard_{index}.rfc"


def pack_shard(header: ShardHeader, payload: bytes) -> bytes:
    if len(payload) != header.symbol_size:
        raise ConfigInvalid("payload length does not match header symbol_size")
    return header.pack() + payload + _CRC.pack(zlib.crc32(payload))


def unpack_shard(data: bytes) -> tuple[ShardHeader, bytes]:
    header = ShardHeader.unpack(data)
    end = HEADER_SIZE + header.symbol_size
    if len(data) != end + _CRC.size:
        raise CorruptShard("shard length does not match header")
    payload = data[HEADER_SIZE:end]
    (crc,) = _CRC.unpack_from(data, end)
    if zlib.crc32(payload) != crc:
        raise CorruptShard(f"payload checksum mismatch in shard {header.column_index}")
    return header, payload


def write_shard(path: Path, header: ShardHeader, payload: bytes) -> int:
    """Write one shard; returns the payload CRC."""
    Path(path).write_bytes(pack_shard(header, payload))
    return zlib.crc32(payload)


def read_shard(path: Path) -> tuple[ShardHeader, bytes]:
    try:
        return unpack_shard(Path(path).read_bytes())
    except CorruptShard as e:
        raise CorruptShard(f"{path}: {e}") from None


def read_header(path: Path) -> ShardHeader:
    with open(path, "rb") as fh:
        return ShardHeader.unpack(fh.read(HEADER_SIZE))


def manifest_line(index: int, payload: bytes) -> str:
    return f"{shard_name(index)},{index},{len(payload)},{zlib.crc32(payload):08x}"


def parse_manifest(text: str) -> list[tuple[str, int, int, int]]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        name, idx, length, crc = line.split(",")
        out.append((name, int(idx), int(length), int(crc, 16)))
    return out


def check_consistent(headers) -> ShardHeader:
    headers = list(headers)
    if not headers:
        raise HeaderMismatch("no shards")
    ref = headers[0]
    for h in headers[1:]:
        if not ref.same_code(h):
            raise HeaderMismatch(
                f"shard {h.column_index} describes a different code than shard {ref.column_index}"
            )
    return ref
