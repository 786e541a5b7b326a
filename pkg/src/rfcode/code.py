"""Seed-driven construction of the generator matrix ``G = [I | P]``.

Column ``i < k`` is the unit vector ``e_i``.  Column ``i >= k`` is a parity:
``d(k) = ceil(c * log k)`` rows are drawn uniformly with replacement, each
draw with its own coefficient drawn uniformly from the whole field (zero
included).  Repeated rows have their coefficients summed, and rows whose
coefficient ends up zero are dropped.

Randomness for parity ``i`` comes from Philox keyed by the master seed with
``i`` as the stream id, so any column is computable on its own.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import rng
from .errors import ConfigInvalid
from .galois import FieldSpec, gf

LOG_BASES = ("natural", "base2")

# Philox lanes
_ROW_LANE = 0
_COEFF_LANE = 1


@dataclass(frozen=True)
class CodeConfig:
    """Everything needed to regenerate any column of the code.

    ``degree_override`` replaces ``ceil(c * log k)`` by a fixed degree; it is
    meant for experiments on constant-degree codes and is not part of the
    shard wire format.
    """

    k: int
    c: Fraction = Fraction(6)
    field: FieldSpec = dc_field(default_factory=gf)
    master_seed: int = 0
    log_base: str = "natural"
    degree_override: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if self.k < 1:
            raise ConfigInvalid(f"k must be >= 1, got {self.k}")
        if self.c <= 0:
            raise ConfigInvalid(f"c must be positive, got {self.c}")
        if self.log_base not in LOG_BASES:
            raise ConfigInvalid(f"log_base must be one of {LOG_BASES}")
        if not 0 <= self.master_seed < 1 << 64:
            raise ConfigInvalid("master_seed must fit in 64 bits")
        if self.degree_override is not None and self.degree_override < 1:
            raise ConfigInvalid("degree_override must be >= 1")
        if self.field.q <= self.k:
            warnings.warn(
                f"field size q={self.field.q} does not exceed k={self.k}; "
                "decoding guarantees weaken",
                stacklevel=3,
            )
        if self.degree > self.k:
            warnings.warn(f"parity degree {self.degree} exceeds k={self.k}", stacklevel=3)

    @property
    def degree(self) -> int:
        return degree(self)

    def with_seed(self, seed: int) -> CodeConfig:
        return CodeConfig(
            self.k, self.c, self.field, seed, self.log_base, self.degree_override
        )


def degree(cfg: CodeConfig) -> int:
    """``max(1, ceil(c * log k))``, computed exactly from the float log value."""
    if cfg.degree_override is not None:
        return cfg.degree_override
    lg = math.log(cfg.k) if cfg.log_base == "natural" else math.log2(cfg.k)
    return max(1, math.ceil(cfg.c * Fraction(lg)))


@dataclass(frozen=True)
class Column:
    """A sparse column of ``G``.

    ``rows``/``coeffs`` hold the realized nonzero entries sorted by row;
    ``drawn`` is the set of distinct rows that were selected, including any
    whose coefficients cancelled to zero.
    """

    index: int
    rows: tuple
    coeffs: tuple
    drawn: tuple

    @property
    def entries(self):
        return list(zip(self.rows, self.coeffs))

    def is_systematic(self, k: int) -> bool:
        return self.index < k

    def coeff(self, row: int) -> int:
        try:
            return self.coeffs[self.rows.index(row)]
        except ValueError:
            return 0

    def __len__(self):
        return len(self.rows)


def covers(col: Column, u: int) -> bool:
    return u in col.rows


def parity_draws(cfg: CodeConfig, indices) -> tuple[np.ndarray, np.ndarray]:
    """Raw (rows, coeffs) draws, each of shape (len(indices), d)."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    d = cfg.degree
    rows = rng.uniform_below(cfg.master_seed, idx, _ROW_LANE, cfg.k, d)
    coeffs = rng.uniform_bits(cfg.master_seed, idx, _COEFF_LANE, cfg.field.m, d)
    return rows, coeffs


def generator_block(cfg: CodeConfig, indices) -> np.ndarray:
    """Dense ``k x len(indices)`` block of ``G`` for the given column ids."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size and idx.min() < 0:
        raise ConfigInvalid("column index must be non-negative")
    out = np.zeros((cfg.k, len(idx)), dtype=cfg.field.dtype)
    sys_pos = np.flatnonzero(idx < cfg.k)
    out[idx[sys_pos], sys_pos] = 1
    par_pos = np.flatnonzero(idx >= cfg.k)
    if par_pos.size:
        rows, coeffs = parity_draws(cfg, idx[par_pos])
        cols = np.broadcast_to(par_pos[:, None], rows.shape)
        # XOR accumulation is addition in GF(2^m)
        np.bitwise_xor.at(out, (rows.ravel(), cols.ravel()), coeffs.ravel().astype(out.dtype))
    return out


def drawn_block(cfg: CodeConfig, indices) -> np.ndarray:
    """Boolean ``k x len(indices)`` mask of drawn (pre-cancellation) rows."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    out = np.zeros((cfg.k, len(idx)), dtype=bool)
    sys_pos = np.flatnonzero(idx < cfg.k)
    out[idx[sys_pos], sys_pos] = True
    par_pos = np.flatnonzero(idx >= cfg.k)
    if par_pos.size:
        rows, _ = parity_draws(cfg, idx[par_pos])
        out[rows, np.broadcast_to(par_pos[:, None], rows.shape)] = True
    return out


def columns(cfg: CodeConfig, indices) -> list[Column]:
    idx = [int(i) for i in indices]
    block = generator_block(cfg, idx)
    drawn = drawn_block(cfg, idx)
    out = []
    for j, i in enumerate(idx):
        nz = np.flatnonzero(block[:, j])
        out.append(
            Column(
                index=i,
                rows=tuple(int(r) for r in nz),
                coeffs=tuple(int(block[r, j]) for r in nz),
                drawn=tuple(int(r) for r in np.flatnonzero(drawn[:, j])),
            )
        )
    return out


def column(cfg: CodeConfig, index: int) -> Column:
    return columns(cfg, [index])[0]
