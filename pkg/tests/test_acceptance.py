"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed in a
summary section at the end.
"""

import hashlib
import math
import time

import numpy as np
import pytest

from rfcode.cli import main
from rfcode.code import CodeConfig, Column
from rfcode.codec import SourceBlock, assemble_matrix, decode, encode
from rfcode.galois import gf
from rfcode.gflinalg import rank
from rfcode.repair import availability_of, availability_report, encode_for_repair, local_groups, repair
from rfcode.sim import (ErasureExperiment, Mode, converse_check, coverage_stats,
                        matching_rank_crosscheck, parse_grid, run_erasure_sweep)


def verdict(report, n, ok, detail):
    report(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def naive_mul(a, b):
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= 0x11D
    return r


def test_criterion_01_field_exactness(report):
    t0 = time.perf_counter()
    f = gf(8)
    e = np.arange(256)
    a, b = np.meshgrid(e, e, indexing="ij")
    ab = f.mul_vec(a, b)
    naive = np.array([[naive_mul(x, y) for y in range(256)] for x in range(256)])
    ok = np.array_equal(ab, naive)
    ok &= np.array_equal(ab, ab.T) and np.array_equal(a ^ b, b ^ a)
    ok &= np.array_equal(f.mul_vec(e, 1), e) and not f.mul_vec(e, 0).any()
    inv = np.array([f.inv(int(x)) for x in e[1:]])
    ok &= bool((f.mul_vec(e[1:], inv) == 1).all())
    for c in range(256):
        ok &= np.array_equal(f.mul_vec(ab, c), f.mul_vec(a, f.mul_vec(b, c)))
        ok &= np.array_equal(f.mul_vec(a, b ^ c), ab ^ f.mul_vec(a, c))
    dt = time.perf_counter() - t0
    verdict(report, 1, bool(ok) and dt < 5, f"table == naive on 65536 pairs, axioms hold; {dt:.2f}s")


def test_criterion_02_decode_matches_rank_oracle(report):
    t0 = time.perf_counter()
    k, n = 16, 32
    agree = successes = 0
    trials = 2000
    for t in range(trials):
        cfg = CodeConfig(k, 4, gf(8), t // 20)  # 100 instances x 20 subsets
        rng = np.random.default_rng([2, t])
        ids = rng.choice(n, size=k + int(rng.integers(0, 3)), replace=False)
        block = SourceBlock.from_bytes(cfg, rng.bytes(k * 8), 8)
        rep = decode(cfg, encode(cfg, block, ids))
        full = rank(assemble_matrix(cfg, ids)) == k
        exact = rep.block == block if rep.ok else True
        agree += rep.ok == full and exact
        successes += rep.ok
    dt = time.perf_counter() - t0
    verdict(report, 2, agree == trials and dt < 60,
            f"{agree}/{trials} agree ({successes} decoded, {trials - successes} singular); {dt:.1f}s")


@pytest.fixture(scope="module")
def crosscheck():
    # 1250 samples for each s in {0, k/2, k-1, k}
    return matching_rank_crosscheck(16, 0.0, [0, 8, 15, 16], 1250, c=4, field=gf(8), seed=1)


def test_criterion_03_no_matching_implies_singular(crosscheck, report):
    comb = crosscheck.combined()
    bad = comb.counts[(False, True)]
    per_s = {s: t.counts[(False, True)] for s, t in crosscheck.tables.items()}
    verdict(report, 3, bad == 0 and comb.total >= 5000,
            f"(no matching, full rank) = {bad} over {comb.total} samples; per s {per_s}")


def test_criterion_04_schwartz_zippel(crosscheck, report):
    comb = crosscheck.combined()
    n = comb.with_matching
    frac = comb.singular_given_matching
    bound = 16 / 256
    limit = bound + 3 * math.sqrt(bound * (1 - bound) / n)
    verdict(report, 4, n >= 2000 and frac <= limit,
            f"singular | matching = {comb.counts[(True, False)]}/{n} = {frac:.4f} <= {limit:.4f}")


def test_criterion_05_coverage(report):
    t0 = time.perf_counter()
    st = coverage_stats(CodeConfig(200, 4, gf(8)), 1.0, 50, sweep_seed=5)
    lo, hi = st.bounds
    dt = time.perf_counter() - t0
    ok = st.within_bounds(3) and (st.per_seed_min > 0).all() and dt < 60
    verdict(report, 5, bool(ok),
            f"mean |P_u| = {st.mean:.3f} (se {st.stderr:.3f}) in [{lo:.3f}, {hi:.3f}]; "
            f"min coverage per seed >= {st.per_seed_min.min()}; {dt:.1f}s")


def test_criterion_06_converse(report):
    rep = converse_check(256, 3, 0.2, 500, field=gf(8), seed=6)
    batches = list(rep.batches(50))
    ok = rep.uncovered_rate >= 0.9 and all(f >= u for u, f in batches)
    ok &= bool((rep.failed >= rep.uncovered).all())
    verdict(report, 6, ok,
            f"uncovered {rep.uncovered_rate:.3f}, failure {rep.failure_rate:.3f}, "
            f"analytic all-covered {rep.analytic_all_covered:.2e}, {len(batches)} batches ok")


def ci_increasing_ok(points):
    """No later point is significantly below an earlier one."""
    return all(not (points[j].interval[1] < points[i].interval[0])
               for i in range(len(points)) for j in range(i + 1, len(points)))


@pytest.mark.slow
def test_criterion_07_erasure_sweep(report):
    t0 = time.perf_counter()
    grid = parse_grid("0.1:0.5:0.05")
    res = {}
    for k in (100, 300):
        exp = ErasureExperiment(CodeConfig(k, 6, gf(8)), 0.5, Mode.ERASURE, 200, 100)
        res[k] = run_erasure_sweep(exp, grid, seed=7)
    dt = time.perf_counter() - t0
    mono = all(ci_increasing_ok(r.points) for r in res.values())
    order = all(
        not (p3.interval[0] > p1.interval[1])
        for p1, p3 in zip(res[100].points, res[300].points)
        if p1.grid_value <= 0.4
    )
    rates = {k: [p.failures for p in r.points] for k, r in res.items()}
    verdict(report, 7, mono and order and dt < 600,
            f"failures/20000 by P_e: k=100 {rates[100]}, k=300 {rates[300]}; {dt:.0f}s")


@pytest.mark.slow
def test_criterion_08_overhead_sweep(report):
    t0 = time.perf_counter()
    exp = ErasureExperiment(CodeConfig(100, 4, gf(8)), 0.5, Mode.OVERHEAD, 200, 100)
    res = run_erasure_sweep(exp, parse_grid("0:0.3:0.05"), seed=8)
    dt = time.perf_counter() - t0
    pts = res.points
    reversed_ok = ci_increasing_ok(list(reversed(pts)))
    strict = pts[-1].failure_rate < pts[0].failure_rate
    verdict(report, 8, reversed_ok and strict and dt < 600,
            f"failures/20000 by eps: {[p.failures for p in pts]}; {dt:.0f}s")


def test_criterion_09_repair_locality(report):
    k = 128
    cfg = CodeConfig(k, 6, gf(8), 9)
    bound = math.ceil(6 * math.log(128)) + 1
    rng = np.random.default_rng(9)
    block = SourceBlock.from_bytes(cfg, rng.bytes(k * 64), 64)
    store = encode_for_repair(cfg, block, range(2 * k))
    worst = succeeded = exact = 0
    for target in rng.integers(0, 2 * k, size=200):
        res = repair(cfg, int(target), store)
        succeeded += 1
        worst = max(worst, len(res.reads))
        exact += res.payload == store[int(target)]
    ok = succeeded == 200 and exact == 200 and worst <= bound and cfg.degree + 1 == bound
    verdict(report, 9, ok, f"{succeeded}/200 repaired exactly, max reads {worst} <= d+1 = {bound}")


def test_criterion_10_availability(report):
    floors, counts, covered = 0, [], 0
    for s in range(50):
        cfg = CodeConfig(300, 4, gf(8), 1000 + s)
        rep = availability_report(cfg, range(300, 600))
        for a in rep.rows:
            counts.append(a.count)
            covered += a.coverage >= 1
            floors += a.coverage >= 1 and a.count < 1
    hist = np.bincount(counts)
    cols = [
        Column(10, (0, 1, 2, 3), (1, 1, 1, 1), (0, 1, 2, 3)),
        Column(11, (0, 2, 3, 4), (1, 1, 1, 1), (0, 2, 3, 4)),
        Column(12, (0, 4, 5), (1, 1, 1), (0, 4, 5)),
        Column(13, (0, 8, 9), (1, 1, 1), (0, 8, 9)),
    ]
    fixture = availability_of(0, local_groups(0, cols)).count
    q = np.percentile(counts, [0, 5, 50, 95, 100]).astype(int).tolist()
    verdict(report, 10, floors == 0 and fixture >= 3,
            f"{covered} covered symbols, 0 with availability 0: {floors == 0}; "
            f"availability min/p5/median/p95/max {q}, mean {np.mean(counts):.2f}; "
            f"histogram head {hist[:8].tolist()}; fixture u_1 availability {fixture}")


@pytest.mark.slow
def test_criterion_11_cli_end_to_end(tmp_path, report):
    data = np.random.default_rng(11).bytes(1 << 20)
    src = tmp_path / "in.bin"
    src.write_bytes(data)
    want = hashlib.sha256(data).hexdigest()
    ok_runs = 0
    for run in range(100):
        out = tmp_path / f"run{run}"
        assert main(["encode", str(src), "--k", "256", "--rate", "0.5", "--field", "gf65536",
                     "--seed", f"{run:x}", "--out", str(out)]) == 0
        rng = np.random.default_rng([11, run])
        for i in rng.choice(512, size=round(0.45 * 512), replace=False):
            (out / f"shard_{i}.rfc").unlink()
        dst = tmp_path / f"out{run}.bin"
        if main(["decode", str(out), "--out", str(dst)]) == 0:
            ok_runs += hashlib.sha256(dst.read_bytes()).hexdigest() == want
        for p in out.iterdir():
            p.unlink()
    digests = []
    for rep_dir in ("g1", "g2"):
        out = tmp_path / rep_dir
        main(["encode", str(src), "--k", "256", "--rate", "0.5", "--field", "gf65536",
              "--seed", "c0ffee", "--out", str(out)])
        h = hashlib.sha256()
        for i in range(512):
            h.update((out / f"shard_{i}.rfc").read_bytes())
        digests.append(h.hexdigest())
    stable = digests[0] == digests[1]
    verdict(report, 11, ok_runs >= 95 and stable,
            f"{ok_runs}/100 runs restored the file after losing 45% of shards; "
            f"golden shard set stable: {stable}")
