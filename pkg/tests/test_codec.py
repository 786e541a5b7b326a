import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rfcode.code import CodeConfig, column
from rfcode.codec import (EncodedSymbol, Outcome, SourceBlock, assemble_matrix, decodable,
                          decode, encode, encode_symbol)
from rfcode.errors import ConfigInvalid, InconsistentSystem, MalformedSymbol
from rfcode.galois import gf
from rfcode.gflinalg import rank


def make_block(cfg, size, seed=0):
    rng = np.random.default_rng(seed)
    return SourceBlock.from_bytes(cfg, rng.integers(0, 256, cfg.k * size, dtype=np.uint8).tobytes(), size)


def test_systematic_symbols_copy_source():
    cfg = CodeConfig(8, 4, gf(8), 1)
    block = make_block(cfg, 16)
    for i in range(8):
        assert encode_symbol(cfg, block, i).payload == block.symbol(i)


def test_parity_matches_scalar_oracle():
    for m in (8, 16):
        f = gf(m)
        cfg = CodeConfig(4, 6, f, 42)
        block = make_block(cfg, 12, seed=m)
        for idx in (4, 5, 1000):
            col = column(cfg, idx)
            got = f.from_bytes(encode_symbol(cfg, block, idx).payload)
            for pos in range(block.symbols.shape[1]):
                acc = 0
                for r, w in col.entries:
                    acc ^= f.mul(w, int(block.symbols[r, pos]))
                assert got[pos] == acc


def test_unit_coefficient_parity_is_xor():
    f = gf(8)
    a, b = bytes(range(10)), bytes(range(100, 110))
    # a column with entries {(0,1),(1,1)} applied by hand
    assert bytes(x ^ f.mul(1, y) for x, y in zip(a, b)) == bytes(x ^ y for x, y in zip(a, b))


def test_all_systematic_decode_without_elimination():
    cfg = CodeConfig(16, 4, gf(8), 3)
    block = make_block(cfg, 8)
    rep = decode(cfg, encode(cfg, block, range(16)))
    assert rep.ok and rep.elimination_dim == 0 and rep.peel_count == 16
    assert rep.block == block


def test_not_enough_symbols():
    cfg = CodeConfig(16, 4, gf(8), 3)
    block = make_block(cfg, 8)
    rep = decode(cfg, encode(cfg, block, range(1, 16)))
    assert rep.outcome is Outcome.NOT_ENOUGH_SYMBOLS and not rep.ok


def test_malformed_and_duplicate_input():
    cfg = CodeConfig(4, 4, gf(16), 3)
    with pytest.raises(MalformedSymbol):
        decode(cfg, [EncodedSymbol(0, b"ab"), EncodedSymbol(1, b"abcd")])
    with pytest.raises(MalformedSymbol):
        decode(cfg, [EncodedSymbol(i, b"abc") for i in range(4)])
    with pytest.raises(ConfigInvalid):
        decode(cfg, [EncodedSymbol(0, b"ab")] * 4)


def test_roundtrip_parities_only_and_mixed():
    for m in (8, 16):
        cfg = CodeConfig(40, 6, gf(m), 5)
        block = make_block(cfg, 32, seed=m)
        for ids in (range(40, 90), list(range(0, 40, 2)) + list(range(100, 130))):
            rep = decode(cfg, encode(cfg, block, ids))
            assert rep.ok and rep.block == block


def test_peel_and_no_peel_agree():
    cfg = CodeConfig(30, 6, gf(8), 8)
    block = make_block(cfg, 20)
    rng = np.random.default_rng(4)
    for _ in range(10):
        ids = rng.choice(60, size=34, replace=False)
        syms = encode(cfg, block, ids)
        a, b = decode(cfg, syms), decode(cfg, syms, peel=False)
        assert a.ok == b.ok
        if a.ok:
            assert a.block == b.block == block


def test_decode_matches_rank_oracle_k6():
    k = 6
    agree = 0
    for trial in range(1000):
        cfg = CodeConfig(k, 4, gf(8), trial)
        rng = np.random.default_rng(trial)
        kp = k + int(rng.integers(0, 3))
        ids = rng.choice(3 * k, size=kp, replace=False)
        block = make_block(cfg, 4, seed=trial)
        rep = decode(cfg, encode(cfg, block, ids))
        full = rank(assemble_matrix(cfg, ids)) == k
        assert rep.ok == full
        assert decodable(cfg, ids).ok == full
        if rep.ok:
            assert rep.block == block
        agree += 1
    assert agree == 1000


def test_assemble_matrix_properties():
    cfg = CodeConfig(12, 4, gf(8), 2)
    assert np.array_equal(assemble_matrix(cfg, range(12)).data, np.eye(12, dtype=np.uint8))
    m = assemble_matrix(cfg, [13, 13, 14])
    assert np.array_equal(m.data[:, 0], m.data[:, 1])
    assert rank(m) == rank(assemble_matrix(cfg, [13, 14]))
    ids = list(range(12)) + [20, 21, 22]
    m = assemble_matrix(cfg, ids)
    for j, i in enumerate(ids):
        col = column(cfg, i)
        assert tuple(np.flatnonzero(m.data[:, j])) == col.rows


def test_corrupt_surplus_symbol_detected():
    cfg = CodeConfig(10, 6, gf(8), 4)
    block = make_block(cfg, 6)
    syms = encode(cfg, block, range(10, 30))
    bad = bytearray(syms[-1].payload)
    bad[0] ^= 0xFF
    syms[-1] = EncodedSymbol(syms[-1].index, bytes(bad))
    with pytest.raises(InconsistentSystem):
        decode(cfg, syms)


def test_rank_deficient_report_lists_missing_rows():
    cfg = CodeConfig(50, 1, gf(8), 0)  # degree 4: some rows likely uncovered
    ids = list(range(50, 100))
    rep = decodable(cfg, ids)
    if not rep.ok:
        assert rep.outcome is Outcome.RANK_DEFICIENT
        assert rep.rank < 50 and len(rep.missing_rows) == 50 - rep.rank
        assert "rank_deficient" in str(rep)


def test_source_block_padding():
    cfg = CodeConfig(4, 4, gf(16), 0)
    blk = SourceBlock.from_bytes(cfg, b"hello")
    assert blk.symbol_size == 2 and blk.to_bytes()[:5] == b"hello"
    assert blk.to_bytes()[5:] == bytes(3)


@settings(max_examples=25, deadline=None)
@given(
    k=st.integers(1, 20),
    seed=st.integers(0, 2**64 - 1),
    extra=st.integers(0, 6),
    m=st.sampled_from([8, 16]),
    data=st.data(),
)
def test_roundtrip_whenever_full_rank(k, seed, extra, m, data):
    cfg = CodeConfig(k, 4, gf(m), seed)
    block = make_block(cfg, 4, seed=seed % 1000)
    pool = data.draw(st.lists(st.integers(0, 4 * k + 10), min_size=k + extra,
                              max_size=k + extra, unique=True))
    rep = decode(cfg, encode(cfg, block, pool))
    assert rep.ok == (rank(assemble_matrix(cfg, pool)) == k)
    if rep.ok:
        assert rep.block == block
