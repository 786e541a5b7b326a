"""Encoding payloads and maximum-likelihood decoding from any symbol subset.

A payload of ``symbol_size`` bytes is read as ``symbol_size / (m/8)`` field
elements, processed position-wise; all positions share one elimination.
Decoding first peels every row whose systematic symbol is present, then
solves the residual dense system on the unresolved rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Iterable

import numpy as np

from . import _kernels
from .code import CodeConfig, generator_block
from .errors import ConfigInvalid, InconsistentSystem, MalformedSymbol
from .gflinalg import GfMatrix, reduce


@dataclass
class SourceBlock:
    """``k`` input symbols as a (k, elements_per_symbol) array of field elements."""

    symbols: np.ndarray
    field_bytes: int = 1

    @property
    def k(self) -> int:
        return self.symbols.shape[0]

    @property
    def symbol_size(self) -> int:
        return self.symbols.shape[1] * self.field_bytes

    @classmethod
    def from_bytes(cls, cfg: CodeConfig, data: bytes, symbol_size: int | None = None):
        """Split ``data`` into ``k`` zero-padded symbols."""
        eb = cfg.field.element_bytes
        if symbol_size is None:
            symbol_size = max(eb, -(-len(data) // cfg.k))
            symbol_size += (-symbol_size) % eb
        if symbol_size % eb:
            raise ConfigInvalid(f"symbol_size must be a multiple of {eb} bytes")
        if len(data) > cfg.k * symbol_size:
            raise ConfigInvalid("data does not fit in k symbols of this size")
        padded = bytes(data) + bytes(cfg.k * symbol_size - len(data))
        elems = cfg.field.from_bytes(padded).reshape(cfg.k, symbol_size // eb)
        return cls(elems, eb)

    @classmethod
    def from_symbols(cls, cfg: CodeConfig, symbols: Iterable[bytes]):
        symbols = [bytes(s) for s in symbols]
        if len(symbols) != cfg.k:
            raise ConfigInvalid(f"expected {cfg.k} symbols, got {len(symbols)}")
        if len({len(s) for s in symbols}) > 1:
            raise MalformedSymbol("source symbols differ in length")
        return cls.from_bytes(cfg, b"".join(symbols), len(symbols[0]))

    def symbol(self, i: int) -> bytes:
        return _to_bytes(self.symbols[i], self.field_bytes)

    def to_bytes(self) -> bytes:
        return _to_bytes(self.symbols.reshape(-1), self.field_bytes)

    def __eq__(self, other):
        return isinstance(other, SourceBlock) and np.array_equal(self.symbols, other.symbols)


def _to_bytes(elems, field_bytes: int) -> bytes:
    return np.asarray(elems).astype("<u2" if field_bytes == 2 else np.uint8).tobytes()


@dataclass(frozen=True)
class EncodedSymbol:
    index: int
    payload: bytes


def encode_symbol(cfg: CodeConfig, block: SourceBlock, index: int) -> EncodedSymbol:
    return encode(cfg, block, [index])[0]


def encode(cfg: CodeConfig, block: SourceBlock, indices) -> list[EncodedSymbol]:
    """Encode the given column ids; systematic ids copy the source symbol."""
    if block.k != cfg.k:
        raise ConfigInvalid(f"block has {block.k} symbols, code expects k={cfg.k}")
    idx = [int(i) for i in indices]
    gen = generator_block(cfg, idx)
    out = np.zeros((len(idx), block.symbols.shape[1]), dtype=cfg.field.dtype)
    par = [j for j, i in enumerate(idx) if i >= cfg.k]
    for j, i in enumerate(idx):
        if i < cfg.k:
            out[j] = block.symbols[i]
    if par:
        sub = np.ascontiguousarray(gen[:, par])
        acc = np.zeros((len(par), out.shape[1]), dtype=cfg.field.dtype)
        _kernels.accumulate(sub, block.symbols, acc, cfg.field.exp, cfg.field.log)
        out[par] = acc
    return [EncodedSymbol(i, _to_bytes(out[j], block.field_bytes)) for j, i in enumerate(idx)]


class Outcome(enum.Enum):
    SUCCESS = "success"
    RANK_DEFICIENT = "rank_deficient"
    NOT_ENOUGH_SYMBOLS = "not_enough_symbols"


@dataclass
class DecodeReport:
    outcome: Outcome
    symbols_used: int
    peel_count: int = 0
    elimination_dim: int = 0
    rank: int = 0
    missing_rows: tuple = ()
    block: SourceBlock | None = dc_field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.outcome is Outcome.SUCCESS

    def __str__(self):
        s = (
            f"decode {self.outcome.value}: {self.symbols_used} symbols, "
            f"{self.peel_count} peeled, residual dimension {self.elimination_dim}, rank {self.rank}"
        )
        if self.missing_rows:
            rows = ", ".join(map(str, self.missing_rows[:20]))
            more = " ..." if len(self.missing_rows) > 20 else ""
            s += f"; unresolved rows: {rows}{more}"
        return s


def assemble_matrix(cfg: CodeConfig, ids) -> GfMatrix:
    """The ``k x len(ids)`` matrix whose j-th column is column ``ids[j]`` of ``G``."""
    return GfMatrix(cfg.field, generator_block(cfg, ids))


def _solve_core(cfg, ids, gen, payloads, peel):
    """Shared decode path; ``payloads`` is (len(ids), width) or None for rank only."""
    k = cfg.k
    n = len(ids)
    if n < k:
        return DecodeReport(Outcome.NOT_ENOUGH_SYMBOLS, n)
    ids = np.asarray(ids, dtype=np.int64)
    width = 0 if payloads is None else payloads.shape[1]
    dtype = cfg.field.dtype
    known = np.zeros(k, dtype=bool)
    values = np.zeros((k, width), dtype=dtype)
    if peel:
        sys_pos = np.flatnonzero(ids < k)
        known[ids[sys_pos]] = True
        if width:
            values[ids[sys_pos]] = payloads[sys_pos]
        eq_pos = np.flatnonzero(ids >= k)
    else:
        eq_pos = np.arange(n)
    peel_count = int(known.sum())
    unresolved = np.flatnonzero(~known)
    if unresolved.size == 0:
        block = SourceBlock(values, cfg.field.element_bytes) if width else None
        return DecodeReport(Outcome.SUCCESS, n, peel_count, 0, k, (), block)
    a = np.ascontiguousarray(gen[np.ix_(unresolved, eq_pos)].T)
    b = np.zeros((len(eq_pos), width), dtype=dtype)
    if width:
        b[:] = payloads[eq_pos]
        resolved = np.flatnonzero(known)
        if resolved.size:
            contrib = np.ascontiguousarray(gen[np.ix_(resolved, eq_pos)])
            _kernels.accumulate(contrib, values[resolved], b, cfg.field.exp, cfg.field.log)
    r, pivots, _, b = reduce(cfg.field, a, b)
    dim = len(unresolved)
    if r < dim:
        missing = np.delete(unresolved, pivots)
        return DecodeReport(
            Outcome.RANK_DEFICIENT, n, peel_count, dim, peel_count + r,
            tuple(int(x) for x in missing),
        )
    block = None
    if width:
        if np.any(b[r:]):
            raise InconsistentSystem("surplus equations disagree; a payload is corrupt")
        values[unresolved[pivots]] = b[:r]
        block = SourceBlock(values, cfg.field.element_bytes)
    return DecodeReport(Outcome.SUCCESS, n, peel_count, dim, k, (), block)


def decodable(cfg: CodeConfig, ids, gen: np.ndarray | None = None, peel: bool = True) -> DecodeReport:
    """Run the decoder's elimination on column ids alone, without payloads.

    ``gen`` may be a precomputed ``k x len(ids)`` block for these ids.
    """
    ids = list(ids)
    if len(set(ids)) != len(ids):
        raise ConfigInvalid("received ids must be distinct")
    if gen is None:
        gen = generator_block(cfg, ids)
    return _solve_core(cfg, ids, gen, None, peel)


def decode(cfg: CodeConfig, received: Iterable[EncodedSymbol], peel: bool = True) -> DecodeReport:
    """Maximum-likelihood decode; ``report.block`` holds the source block on success.

    Failure to decode is reported through ``report.outcome``, not raised.
    """
    received = list(received)
    ids = [s.index for s in received]
    if len(set(ids)) != len(ids):
        raise ConfigInvalid("received ids must be distinct")
    sizes = {len(s.payload) for s in received}
    if len(sizes) > 1:
        raise MalformedSymbol(f"payload lengths differ: {sorted(sizes)}")
    eb = cfg.field.element_bytes
    size = sizes.pop() if sizes else 0
    if size % eb:
        raise MalformedSymbol(f"payload length {size} is not a multiple of {eb}")
    if len(received) < cfg.k:
        return DecodeReport(Outcome.NOT_ENOUGH_SYMBOLS, len(received))
    payloads = np.stack([cfg.field.from_bytes(s.payload) for s in received])
    if payloads.shape[1] == 0:
        raise MalformedSymbol("empty payloads")
    gen = generator_block(cfg, ids)
    return _solve_core(cfg, ids, gen, payloads, peel)
