"""Compiled inner loops for GF(2^m) elimination.

All kernels take the ``exp``/``log`` tables of a :class:`~rfcode.galois.FieldSpec`
and rely on its zero sentinel: ``exp[log[a] + log[b]] == 0`` whenever either
operand is zero.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def eliminate(a, b, exp, log, order):
    """Gauss-Jordan reduction of ``[a | b]`` in place.

    ``a`` is (rows, cols), ``b`` is (rows, width) and receives the same row
    operations.  With ``width == 0`` only rows below each pivot are reduced
    (row echelon form), which is all a rank needs.  The pivot for each
    column is the first remaining row with a nonzero entry.  Returns
    ``(rank, pivot_cols)`` where ``pivot_cols[i]`` is the column pivoted in
    row ``i`` for ``i < rank``.
    """
    rows, cols = a.shape
    width = b.shape[1]
    pivot_cols = np.empty(min(rows, cols), dtype=np.int64)
    nz = np.empty(cols, dtype=np.int64)
    rank = 0
    for j in range(cols):
        if rank == rows:
            break
        p = -1
        for i in range(rank, rows):
            if a[i, j] != 0:
                p = i
                break
        if p < 0:
            continue
        if p != rank:
            for jj in range(j, cols):
                t = a[p, jj]
                a[p, jj] = a[rank, jj]
                a[rank, jj] = t
            for w in range(width):
                t = b[p, w]
                b[p, w] = b[rank, w]
                b[rank, w] = t
        p = rank
        # normalise pivot row
        linv = order - log[a[p, j]]
        if linv != order:
            for jj in range(j, cols):
                a[p, jj] = exp[log[a[p, jj]] + linv]
            for w in range(width):
                b[p, w] = exp[log[b[p, w]] + linv]
        nnz = 0
        for jj in range(j + 1, cols):
            if a[p, jj] != 0:
                nz[nnz] = jj
                nnz += 1
        # rows above the pivot only matter when a right-hand side is carried
        first = 0 if width else p + 1
        for i in range(first, rows):
            if i == p:
                continue
            f = a[i, j]
            if f == 0:
                continue
            lf = log[f]
            a[i, j] = 0
            for t in range(nnz):
                jj = nz[t]
                a[i, jj] ^= exp[lf + log[a[p, jj]]]
            for w in range(width):
                b[i, w] ^= exp[lf + log[b[p, w]]]
        pivot_cols[rank] = j
        rank += 1
    return rank, pivot_cols[:rank]


@numba.njit(cache=True)
def accumulate(coeffs, src, dst, exp, log):
    """``dst[j] ^= sum_i coeffs[i, j] * src[i]`` for a (n_src, n_dst) coefficient matrix."""
    n_src, n_dst = coeffs.shape
    width = src.shape[1]
    for i in range(n_src):
        for j in range(n_dst):
            c = coeffs[i, j]
            if c == 0:
                continue
            lc = log[c]
            for w in range(width):
                dst[j, w] ^= exp[lc + log[src[i, w]]]
