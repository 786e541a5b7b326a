"""Local repair and availability of systematic symbols.

A parity ``v`` covering row ``u`` gives a local group: ``u`` is recovered as
``inv(w_u) * (v - sum_{i in F} w_i u_i)`` where ``F`` (the footprint) is the
set of other rows ``v`` covers.  Only realized nonzero coefficients count.

The availability of ``u`` is the size of the largest set of covering
parities with pairwise-disjoint footprints, i.e. the independence number
of the overlap graph on those parities.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .code import CodeConfig, Column, columns
from .codec import encode, SourceBlock
from .errors import MissingFootprintSymbol, NoLocalGroup
from .galois import FieldSpec

EXACT_LIMIT = 20


@dataclass(frozen=True)
class LocalGroup:
    parity_id: int
    target: int
    footprint: frozenset
    coeff_u: int
    footprint_coeffs: tuple  # ((row, coeff), ...) sorted by row

    @property
    def size(self) -> int:
        """Number of symbols read to repair ``target`` from this group."""
        return len(self.footprint) + 1


def group_from_column(col: Column, u: int) -> LocalGroup | None:
    if u not in col.rows:
        return None
    fc = tuple((r, c) for r, c in zip(col.rows, col.coeffs) if r != u)
    return LocalGroup(col.index, u, frozenset(r for r, _ in fc), col.coeff(u), fc)


def local_groups(u: int, cols: Iterable[Column]) -> list[LocalGroup]:
    groups = (group_from_column(c, u) for c in cols)
    return [g for g in groups if g is not None]


def find_covering_parities(cfg: CodeConfig, u: int, parity_ids) -> list[LocalGroup]:
    """One local group per parity whose realized column has a nonzero entry on ``u``."""
    ids = [i for i in parity_ids if i >= cfg.k]
    return local_groups(u, columns(cfg, ids))


def repair_symbol(field: FieldSpec, group: LocalGroup, parity_payload, footprint_payloads: Mapping):
    """Recover the target symbol of ``group`` from the parity and its footprint.

    Payloads are bytes; ``footprint_payloads`` maps row -> bytes.
    """
    missing = [r for r in group.footprint if r not in footprint_payloads]
    if missing:
        raise MissingFootprintSymbol(missing)
    acc = field.from_bytes(parity_payload).copy()
    for r, c in group.footprint_coeffs:
        acc ^= field.mul_vec(c, field.from_bytes(footprint_payloads[r]))
    return field.to_bytes(field.mul_vec(field.inv(group.coeff_u), acc))


class CountingStore(Mapping):
    """Read-through view of a symbol store that records which ids were read."""

    def __init__(self, store: Mapping, available: Iterable[int] | None = None):
        self._store = store
        self._available = set(store.keys() if available is None else available)
        self.reads: list[int] = []

    def __getitem__(self, key):
        if key not in self._available:
            raise KeyError(key)
        self.reads.append(key)
        return self._store[key]

    def __contains__(self, key):
        return key in self._available

    def __iter__(self):
        return iter(self._available)

    def __len__(self):
        return len(self._available)


@dataclass
class RepairResult:
    target: int
    payload: bytes
    reads: tuple
    group: LocalGroup | None = None


def repair_parity(cfg: CodeConfig, index: int, systematic_payloads: Mapping) -> bytes:
    """Re-encode parity ``index`` from the systematic symbols it covers."""
    (col,) = columns(cfg, [index])
    missing = [r for r in col.rows if r not in systematic_payloads]
    if missing:
        raise MissingFootprintSymbol(missing)
    acc = None
    for r, c in zip(col.rows, col.coeffs):
        term = cfg.field.mul_vec(c, cfg.field.from_bytes(systematic_payloads[r]))
        acc = term if acc is None else acc ^ term
    if acc is None:
        # every coefficient cancelled: the parity is identically zero
        size = len(next(iter(systematic_payloads.values()))) if systematic_payloads else 0
        return bytes(size)
    return cfg.field.to_bytes(acc)


def repair(cfg: CodeConfig, target: int, store: Mapping, available=None) -> RepairResult:
    """Regenerate symbol ``target`` by reading as few symbols of ``store`` as possible.

    ``store`` maps column id -> payload bytes and is only read for the
    symbols actually used.  ``available`` optionally restricts which ids may
    be read (defaults to the store's keys, minus ``target``).
    """
    ids = set(store.keys() if available is None else available)
    ids.discard(target)
    counted = CountingStore(store, ids)
    k = cfg.k
    sys_ids = {i for i in ids if i < k}
    if target >= k:
        payload = repair_parity(cfg, target, _SysView(counted, sys_ids))
        return RepairResult(target, payload, tuple(counted.reads))
    parity_ids = sorted(i for i in ids if i >= k)
    groups = [
        g for g in find_covering_parities(cfg, target, parity_ids) if g.footprint <= sys_ids
    ]
    if not groups:
        raise NoLocalGroup(f"no covering parity of symbol {target} has its footprint available")
    best = min(groups, key=lambda g: (len(g.footprint), g.parity_id))
    fp = {r: counted[r] for r, _ in best.footprint_coeffs}
    payload = repair_symbol(cfg.field, best, counted[best.parity_id], fp)
    return RepairResult(target, payload, tuple(counted.reads), best)


class _SysView(Mapping):
    def __init__(self, store, rows):
        self._store, self._rows = store, rows

    def __getitem__(self, r):
        if r not in self._rows:
            raise KeyError(r)
        return self._store[r]

    def __contains__(self, r):
        return r in self._rows

    def __iter__(self):
        return iter(self._rows)

    def __len__(self):
        return len(self._rows)


# availability ------------------------------------------------------------


def overlap_graph(groups: list[LocalGroup]) -> list[int]:
    """Adjacency bitmasks of H_u: i ~ j iff the footprints of groups i and j intersect."""
    n = len(groups)
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if groups[i].footprint & groups[j].footprint:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def _greedy_mis(adj: list[int]) -> list[int]:
    """Repeatedly take a minimum-degree vertex of the remaining graph."""
    alive = (1 << len(adj)) - 1
    chosen = []
    while alive:
        best, best_deg = -1, None
        m = alive
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            deg = bin(adj[v] & alive).count("1")
            if best_deg is None or deg < best_deg:
                best, best_deg = v, deg
        chosen.append(best)
        alive &= ~(adj[best] | (1 << best))
    return chosen


def _exact_mis(adj: list[int]) -> list[int]:
    best = _greedy_mis(adj)
    best_set = sum(1 << v for v in best)
    best_size = len(best)

    def search(cand: int, chosen: int, size: int):
        nonlocal best_set, best_size
        if size + bin(cand).count("1") <= best_size:
            return
        if not cand:
            best_set, best_size = chosen, size
            return
        # branch on a max-degree vertex: include it, or drop it
        m, v, vdeg = cand, -1, -1
        while m:
            w = (m & -m).bit_length() - 1
            m &= m - 1
            d = bin(adj[w] & cand).count("1")
            if d > vdeg:
                v, vdeg = w, d
        if vdeg == 0:
            size += bin(cand).count("1")
            if size > best_size:
                best_set, best_size = chosen | cand, size
            return
        search(cand & ~adj[v] & ~(1 << v), chosen | (1 << v), size + 1)
        search(cand & ~(1 << v), chosen, size)

    search((1 << len(adj)) - 1, 0, 0)
    return [v for v in range(len(adj)) if best_set >> v & 1]


@dataclass
class Availability:
    target: int
    coverage: int
    count: int
    groups: list
    method: str  # "exact" or "greedy"


def availability_of(u: int, groups: list[LocalGroup], exact_limit: int = EXACT_LIMIT) -> Availability:
    """Pairwise-isolated groups for ``u``: exact MIS when small, greedy otherwise."""
    adj = overlap_graph(groups)
    if len(groups) <= exact_limit:
        chosen, method = _exact_mis(adj), "exact"
    else:
        chosen, method = _greedy_mis(adj), "greedy"
    return Availability(u, len(groups), len(chosen), [groups[i] for i in chosen], method)


def availability(cfg: CodeConfig, u: int, parity_ids, exact_limit: int = EXACT_LIMIT) -> Availability:
    return availability_of(u, find_covering_parities(cfg, u, parity_ids), exact_limit)


@dataclass
class AvailabilityReport:
    rows: list  # list[Availability], one per systematic symbol

    @property
    def min_availability(self) -> int:
        return min(a.count for a in self.rows)

    @property
    def mean_availability(self) -> float:
        return float(np.mean([a.count for a in self.rows]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "coverage", "availability", "method"])
        for a in self.rows:
            w.writerow([a.target, a.coverage, a.count, a.method])
        return buf.getvalue()


def availability_report(cfg: CodeConfig, parity_ids, exact_limit: int = EXACT_LIMIT) -> AvailabilityReport:
    cols = columns(cfg, [i for i in parity_ids if i >= cfg.k])
    by_row: dict[int, list[Column]] = {u: [] for u in range(cfg.k)}
    for col in cols:
        for r in col.rows:
            by_row[r].append(col)
    rows = [availability_of(u, local_groups(u, by_row[u]), exact_limit) for u in range(cfg.k)]
    return AvailabilityReport(rows)


def encode_for_repair(cfg: CodeConfig, block: SourceBlock, ids) -> dict:
    """Convenience: ``{id: payload}`` for the given column ids."""
    return {s.index: s.payload for s in encode(cfg, block, ids)}
