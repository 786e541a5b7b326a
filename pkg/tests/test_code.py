import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from rfcode.code import (CodeConfig, column, columns, covers, degree, drawn_block,
                         generator_block, parity_draws)
from rfcode.errors import ConfigInvalid
from rfcode.galois import gf


@pytest.mark.parametrize("k,c,expected", [(100, 6, 28), (1, 6, 1), (1, 1000, 1), (500, 6, 38)])
def test_degree_examples(k, c, expected):
    assert degree(CodeConfig(k, c, gf(16))) == expected


def test_degree_base2_and_override():
    assert CodeConfig(100, 6, gf(8), log_base="base2").degree == math.ceil(6 * math.log2(100))
    assert CodeConfig(100, 6, gf(8), degree_override=3).degree == 3


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        CodeConfig(0)
    with pytest.raises(ConfigInvalid):
        CodeConfig(10, 0)
    with pytest.raises(ConfigInvalid):
        CodeConfig(10, log_base="e")
    with pytest.raises(ConfigInvalid):
        CodeConfig(10, master_seed=1 << 64)


def test_warnings():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        CodeConfig(300, 4, gf(8))
        CodeConfig(4, 6, gf(8))
    msgs = [str(x.message) for x in w]
    assert any("does not exceed" in m for m in msgs)
    assert any("exceeds k" in m for m in msgs)


def test_systematic_columns_are_unit_vectors():
    cfg = CodeConfig(10, 2, gf(8), 5)
    col = column(cfg, 3)
    assert col.rows == (3,) and col.coeffs == (1,) and col.is_systematic(10)
    g = generator_block(cfg, range(10))
    assert np.array_equal(g, np.eye(10, dtype=g.dtype))


def test_columns_deterministic_and_order_independent():
    cfg = CodeConfig(40, 6, gf(8), 77)
    a = generator_block(cfg, [40, 41, 99, 5])
    b = generator_block(cfg, [99, 5, 41, 40])
    assert np.array_equal(a[:, [0, 1, 2, 3]], b[:, [3, 2, 0, 1]])
    assert column(cfg, 1234) == column(cfg, 1234)
    assert column(cfg.with_seed(78), 1234) != column(cfg, 1234)


def test_parity_sparsity_and_drawn_superset():
    cfg = CodeConfig(100, 6, gf(8), 1234)
    cols = columns(cfg, range(100, 600))
    for col in cols:
        assert 1 <= len(col.drawn) <= cfg.degree
        assert len(col) <= cfg.degree
        assert set(col.rows) <= set(col.drawn)
        assert all(c != 0 for c in col.coeffs)


def test_realized_column_equals_scalar_accumulation():
    f = gf(8)
    cfg = CodeConfig(20, 4, f, 9)
    rows, coeffs = parity_draws(cfg, [20, 21, 22])
    g = generator_block(cfg, [20, 21, 22])
    for j in range(3):
        acc = {}
        for r, w in zip(rows[j], coeffs[j]):
            acc[int(r)] = f.add(acc.get(int(r), 0), int(w))
        expected = {r: w for r, w in acc.items() if w}
        got = {int(r): int(g[r, j]) for r in np.flatnonzero(g[:, j])}
        assert got == expected


def test_cancellation_case_exists_and_is_not_covering():
    # search for a parity whose drawn row did not survive
    cfg = CodeConfig(100, 6, gf(8), 1234)
    for col in columns(cfg, range(100, 2100)):
        lost = set(col.drawn) - set(col.rows)
        if lost:
            u = lost.pop()
            assert not covers(col, u) and col.coeff(u) == 0
            break
    else:
        pytest.fail("no cancelled row found")


def test_row_draws_uniform_chi_square():
    cfg = CodeConfig(50, 6, gf(8), 3)
    rows, coeffs = parity_draws(cfg, np.arange(50, 50 + 100_000))
    assert stats.chisquare(np.bincount(rows.ravel(), minlength=50)).pvalue > 1e-4
    assert stats.chisquare(np.bincount(coeffs.ravel(), minlength=256)).pvalue > 1e-4


def test_coverage_probability_per_parity():
    cfg = CodeConfig(50, 6, gf(8), 11)
    d, k, n = cfg.degree, cfg.k, 100_000
    realized = generator_block(cfg, np.arange(k, k + n)) != 0
    drawn = drawn_block(cfg, np.arange(k, k + n))
    lo, hi = d / k - d * d / k / k, d / k
    for mask in (realized, drawn):
        p = mask[0].mean()
        sigma = math.sqrt(p * (1 - p) / n)
        assert lo - 3 * sigma <= p <= hi + 3 * sigma
    # drawn coverage over all rows equals 1 - (1 - 1/k)^d
    exact = 1 - (1 - 1 / k) ** d
    assert abs(drawn.mean() - exact) < 4 * math.sqrt(exact * (1 - exact) / (n * k))


def test_fraction_c_accepted():
    cfg = CodeConfig(100, Fraction(7, 2), gf(8))
    assert cfg.degree == math.ceil(Fraction(7, 2) * Fraction(math.log(100)))
