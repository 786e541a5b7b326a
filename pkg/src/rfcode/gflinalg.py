"""Dense linear algebra over GF(2^m) and a bipartite matching oracle.

Rank and solve share one Gauss-Jordan kernel (first-nonzero pivoting, exact
arithmetic).  :func:`max_matching` is a Hopcroft-Karp implementation used to
cross-check the rank of a realized matrix against the structure of its
support graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigInvalid, InconsistentSystem, RankDeficient
from .galois import FieldSpec


@dataclass(frozen=True)
class GfMatrix:
    """A rows x cols matrix over ``field`` stored as a 2-D integer array."""

    field: FieldSpec
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ConfigInvalid("GfMatrix data must be two-dimensional")
        if data.size and (data.min() < 0 or data.max() >= self.field.q):
            raise ConfigInvalid("matrix entry outside the field")
        object.__setattr__(self, "data", data.astype(self.field.dtype, copy=False))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> GfMatrix:
        return cls(field, np.eye(n, dtype=field.dtype))

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> GfMatrix:
        return cls(field, np.zeros((rows, cols), dtype=field.dtype))

    def matvec(self, x) -> np.ndarray:
        """``M @ x`` where ``x`` is a vector or a (cols, width) block."""
        x = np.asarray(x)
        vec = x.ndim == 1
        xb = x.reshape(len(x), -1).astype(self.field.dtype)
        out = np.zeros((self.rows, xb.shape[1]), dtype=self.field.dtype)
        _kernels.accumulate(
            np.ascontiguousarray(self.data.T), xb, out, self.field.exp, self.field.log
        )
        return out[:, 0] if vec else out

    def support(self) -> BipartiteGraph:
        """Bipartite graph with one left node per row and one right node per column."""
        adj = tuple(tuple(int(i) for i in np.flatnonzero(col)) for col in self.data.T)
        return BipartiteGraph(self.rows, adj)


def reduce(field: FieldSpec, a: np.ndarray, b: np.ndarray | None = None):
    """Run Gauss-Jordan on copies of ``a`` (and ``b``); returns (rank, pivots, a, b)."""
    a = np.array(a, dtype=field.dtype, order="C")
    if b is None:
        b = np.zeros((a.shape[0], 0), dtype=field.dtype)
    else:
        b = np.array(b, dtype=field.dtype, order="C")
    rank, pivots = _kernels.eliminate(a, b, field.exp, field.log, field.order)
    return int(rank), pivots, a, b


def rank(m: GfMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    r, _, _, _ = reduce(m.field, m.data)
    return r


def solve(m: GfMatrix, rhs) -> np.ndarray:
    """Return the unique ``x`` with ``m @ x == rhs``.

    ``rhs`` may be a vector of length ``rows`` or a (rows, width) block, in
    which case every column is solved with the same elimination.
    """
    if m.rows < m.cols:
        raise ConfigInvalid(f"need rows >= cols, got {m.rows}x{m.cols}")
    rhs = np.asarray(rhs)
    vec = rhs.ndim == 1
    rb = rhs.reshape(m.rows, -1)
    r, pivots, _, b = reduce(m.field, m.data, rb)
    if r < m.cols:
        missing = sorted(set(range(m.cols)) - set(pivots.tolist()))
        raise RankDeficient(r, missing)
    if np.any(b[r:]):
        raise InconsistentSystem("right-hand side is not in the column span")
    x = np.empty((m.cols, rb.shape[1]), dtype=m.field.dtype)
    x[pivots] = b[:r]
    return x[:, 0] if vec else x


@dataclass(frozen=True)
class BipartiteGraph:
    """Left nodes ``0..left_count-1``; ``adjacency[j]`` lists the left neighbours of right node j."""

    left_count: int
    adjacency: tuple

    def __post_init__(self):
        adj = []
        for nbrs in self.adjacency:
            nbrs = tuple(sorted({int(i) for i in nbrs}))
            if nbrs and (nbrs[0] < 0 or nbrs[-1] >= self.left_count):
                raise ConfigInvalid("adjacency index out of range")
            adj.append(nbrs)
        object.__setattr__(self, "adjacency", tuple(adj))

    @property
    def right_count(self) -> int:
        return len(self.adjacency)


def max_matching(g: BipartiteGraph) -> int:
    """Size of a maximum matching (Hopcroft-Karp)."""
    n_left = g.left_count
    left_adj = [[] for _ in range(n_left)]
    for j, nbrs in enumerate(g.adjacency):
        for i in nbrs:
            left_adj[i].append(j)
    inf = float("inf")
    match_l = [-1] * n_left
    match_r = [-1] * g.right_count
    dist = [0] * n_left

    def bfs():
        queue = deque()
        for u in range(n_left):
            if match_l[u] < 0:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = inf
        found = False
        while queue:
            u = queue.popleft()
            for v in left_adj[u]:
                w = match_r[v]
                if w < 0:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u):
        for v in left_adj[u]:
            w = match_r[v]
            if w < 0 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = inf
        return False

    size = 0
    while bfs():
        for u in range(n_left):
            if match_l[u] < 0 and dfs(u):
                size += 1
    return size
