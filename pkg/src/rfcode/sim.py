"""Monte-Carlo experiments on decoding failure, coverage and matchings.

Every random quantity is derived from a sweep seed through
:class:`numpy.random.SeedSequence` keyed on integer indices, never from a
shared sequential stream, so results are reproducible and independent of
evaluation order.

Within one (instance, trial) pair the grid points share their randomness:
an erasure trial draws one uniform per symbol and erases it when the uniform
is below ``P_e``; an overhead trial draws one permutation and keeps a prefix
of it.  Larger ``P_e`` therefore erases a superset, and larger overhead keeps
a superset (common random numbers).
"""

from __future__ import annotations

import csv
import enum
import io
import math
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .code import CodeConfig, drawn_block, generator_block
from .codec import decodable
from .errors import ConfigInvalid
from .galois import FieldSpec, gf
from .gflinalg import BipartiteGraph, GfMatrix, max_matching, rank

# SeedSequence domain tags
_INSTANCE = 0x1A57
_TRIAL = 0x7A1A
_COVER = 0xC0FE
_CONVERSE = 0xC0DE
_CROSS = 0xC505

Z95 = 1.959963984540054


def wilson_interval(failures: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = failures / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return lo, hi


def _seed64(*entropy) -> int:
    w = np.random.SeedSequence(list(entropy)).generate_state(2, np.uint32)
    return int(w[0]) | int(w[1]) << 32


def _rng(*entropy) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))


def instance_seed(sweep_seed: int, instance: int) -> int:
    """Master seed of code instance ``instance`` in a sweep."""
    return _seed64(_INSTANCE, sweep_seed, instance)


def parse_grid(text: str) -> list[float]:
    """``"start:stop:step"`` (inclusive) or a comma separated list."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ConfigInvalid("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def kept_count(k: int, epsilon: float) -> int:
    """``ceil((1 + epsilon) k)``, immune to float noise in ``epsilon``."""
    return math.ceil(Fraction(round((1 + epsilon) * k, 9)))


class Mode(str, enum.Enum):
    ERASURE = "erasure"  # i.i.d. erasures with probability P_e
    OVERHEAD = "overhead"  # fixed subset of ceil((1 + eps) k) symbols


@dataclass
class ErasureExperiment:
    cfg: CodeConfig  # master_seed is ignored; each instance gets its own
    rate: float = 0.5
    mode: Mode = Mode.ERASURE
    instances: int = 200
    trials_per_instance: int = 100

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if not 0 < self.rate <= 1:
            raise ConfigInvalid(f"rate must be in (0, 1], got {self.rate}")
        if self.instances < 1 or self.trials_per_instance < 1:
            raise ConfigInvalid("instances and trials must be >= 1")

    @property
    def n(self) -> int:
        return max(self.cfg.k, round(self.cfg.k / self.rate))

    def check_grid(self, grid):
        if not grid:
            raise ConfigInvalid("grid is empty")
        for g in grid:
            if self.mode is Mode.ERASURE and not 0 <= g < 1:
                raise ConfigInvalid(f"erasure probability {g} outside [0, 1)")
            if self.mode is Mode.OVERHEAD:
                if g < 0:
                    raise ConfigInvalid(f"overhead {g} is negative")
                if kept_count(self.cfg.k, g) > self.n:
                    raise ConfigInvalid(f"overhead {g} needs more than the {self.n} encoded symbols")


@dataclass
class GridPoint:
    grid_value: float
    failures: int
    trials: int

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)


@dataclass
class ExperimentResult:
    experiment: ErasureExperiment
    points: list
    sweep_seed: int
    wall_time: float = dc_field(default=0.0, compare=False)

    CSV_HEADER = ("grid_value", "k", "c", "q", "rate", "mode", "instances", "trials",
                  "failures", "rate_est", "ci_lo", "ci_hi")

    def csv_rows(self):
        e = self.experiment
        for p in self.points:
            lo, hi = p.interval
            yield [
                f"{p.grid_value:g}", e.cfg.k, str(e.cfg.c), e.cfg.field.q, f"{e.rate:g}",
                e.mode.value, e.instances, e.trials_per_instance, p.failures,
                f"{p.failure_rate:.6g}", f"{lo:.6g}", f"{hi:.6g}",
            ]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(self.CSV_HEADER)
        w.writerows(self.csv_rows())
        return buf.getvalue()


def run_erasure_sweep(exp: ErasureExperiment, grid, seed: int = 0) -> ExperimentResult:
    """Failure counts of the decoder for every grid value.

    ``grid`` holds erasure probabilities (``Mode.ERASURE``) or decoding
    overheads (``Mode.OVERHEAD``).  A trial fails when the decoder reports a
    rank deficiency or has fewer than ``k`` symbols.
    """
    grid = [float(g) for g in grid]
    exp.check_grid(grid)
    t0 = time.perf_counter()
    k, n = exp.cfg.k, exp.n
    failures = [0] * len(grid)
    all_ids = np.arange(n)
    kept = [kept_count(k, g) for g in grid] if exp.mode is Mode.OVERHEAD else None
    for inst in range(exp.instances):
        cfg = exp.cfg.with_seed(instance_seed(seed, inst))
        gen = generator_block(cfg, all_ids)
        for trial in range(exp.trials_per_instance):
            rng = _rng(_TRIAL, seed, inst, trial)
            if exp.mode is Mode.ERASURE:
                u = rng.random(n)
                subsets = (np.flatnonzero(u >= p) for p in grid)
            else:
                perm = rng.permutation(n)
                subsets = (np.sort(perm[:kp]) for kp in kept)
            for g, ids in enumerate(subsets):
                if not decodable(cfg, ids, gen[:, ids]).ok:
                    failures[g] += 1
    trials = exp.instances * exp.trials_per_instance
    points = [GridPoint(g, f, trials) for g, f in zip(grid, failures)]
    return ExperimentResult(exp, points, seed, time.perf_counter() - t0)


# coverage -----------------------------------------------------------------


def _log(cfg: CodeConfig, x: float) -> float:
    return math.log(x) if cfg.log_base == "natural" else math.log2(x)


def coverage_bounds(cfg: CodeConfig, r: float) -> tuple[float, float]:
    """``[rc log k - rc log^2 k / k, rc log k]`` in the config's log base."""
    lg = _log(cfg, cfg.k)
    c = float(cfg.c)
    return r * c * lg - r * c * lg * lg / cfg.k, r * c * lg


def coverage_counts(cfg: CodeConfig, r: float) -> np.ndarray:
    """``|P_u|`` for every row ``u`` when ``round(r k)`` parities are generated."""
    n_par = max(1, round(r * cfg.k))
    gen = generator_block(cfg, np.arange(cfg.k, cfg.k + n_par))
    return np.count_nonzero(gen, axis=1)


@dataclass
class CoverageStats:
    k: int
    r: float
    per_seed_mean: np.ndarray
    per_seed_min: np.ndarray
    bounds: tuple
    expected_draws: float  # r k (1 - (1 - 1/k)^d): mean coverage ignoring coefficient zeros

    @property
    def mean(self) -> float:
        return float(self.per_seed_mean.mean())

    @property
    def stderr(self) -> float:
        s = len(self.per_seed_mean)
        return float(self.per_seed_mean.std(ddof=1) / math.sqrt(s)) if s > 1 else 0.0

    def within_bounds(self, sigmas: float = 3.0) -> bool:
        lo, hi = self.bounds
        return lo - sigmas * self.stderr <= self.mean <= hi + sigmas * self.stderr


def coverage_stats(cfg: CodeConfig, r: float, seeds: int, sweep_seed: int = 0) -> CoverageStats:
    if r <= 0:
        raise ConfigInvalid("parity ratio r must be positive")
    means, mins = [], []
    for s in range(seeds):
        cov = coverage_counts(cfg.with_seed(_seed64(_COVER, sweep_seed, s)), r)
        means.append(cov.mean())
        mins.append(cov.min())
    n_par = max(1, round(r * cfg.k))
    expected = n_par * (1 - (1 - 1 / cfg.k) ** cfg.degree)
    return CoverageStats(cfg.k, r, np.array(means), np.array(mins),
                         coverage_bounds(cfg, r), expected)


def few_coverage_rate(cfg: CodeConfig, r: float, eps: float, seeds: int, sweep_seed: int = 0) -> float:
    """Fraction of seeds in which some ``u`` has ``|P_u| <= (1 - eps) E|P_u|``."""
    n_par = max(1, round(r * cfg.k))
    expected = n_par * (1 - (1 - 1 / cfg.k) ** cfg.degree)
    hits = 0
    for s in range(seeds):
        cov = coverage_counts(cfg.with_seed(_seed64(_COVER, sweep_seed, s)), r)
        hits += bool((cov <= (1 - eps) * expected).any())
    return hits / seeds


# converse -----------------------------------------------------------------


def all_covered_probability(k: int, balls: int) -> float:
    """Exact probability that ``balls`` uniform throws hit all ``k`` bins (inclusion-exclusion)."""
    total = Fraction(0)
    for j in range(k + 1):
        total += (-1) ** j * math.comb(k, j) * Fraction(k - j, k) ** balls
    return float(total)


@dataclass
class ConverseReport:
    k: int
    degree: int
    k_prime: int
    uncovered: np.ndarray  # per trial: some input row has no nonzero entry
    failed: np.ndarray  # per trial: decoder failed
    analytic_all_covered: float

    @property
    def uncovered_rate(self) -> float:
        return float(self.uncovered.mean())

    @property
    def failure_rate(self) -> float:
        return float(self.failed.mean())

    def batches(self, size: int):
        """``(uncovered_rate, failure_rate)`` over consecutive batches of trials."""
        for i in range(0, len(self.failed), size):
            yield float(self.uncovered[i : i + size].mean()), float(self.failed[i : i + size].mean())


def converse_check(k: int, d_const: int, epsilon: float, trials: int,
                   field: FieldSpec | None = None, seed: int = 0) -> ConverseReport:
    """Constant-degree parities only: how often is some input uncovered, and how often does decoding fail?"""
    if d_const < 1:
        raise ConfigInvalid("d_const must be >= 1")
    field = field or gf(8)
    kp = kept_count(k, epsilon)
    ids = np.arange(k, k + kp)
    unc = np.zeros(trials, dtype=bool)
    fail = np.zeros(trials, dtype=bool)
    for t in range(trials):
        cfg = CodeConfig(k, 1, field, _seed64(_CONVERSE, seed, t), degree_override=d_const)
        gen = generator_block(cfg, ids)
        unc[t] = not np.count_nonzero(gen, axis=1).all()
        fail[t] = not decodable(cfg, ids, gen).ok
    return ConverseReport(k, d_const, kp, unc, fail, all_covered_probability(k, kp * d_const))


# matching vs rank -----------------------------------------------------------


@dataclass
class Contingency:
    """Counts indexed by (perfect matching exists, full rank)."""

    counts: dict = dc_field(default_factory=lambda: {(m, f): 0 for m in (True, False) for f in (True, False)})

    def add(self, matching: bool, full_rank: bool):
        self.counts[(matching, full_rank)] += 1

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def with_matching(self) -> int:
        return self.counts[(True, True)] + self.counts[(True, False)]

    @property
    def singular_given_matching(self) -> float:
        return self.counts[(True, False)] / self.with_matching if self.with_matching else 0.0


@dataclass
class CrosscheckReport:
    k: int
    epsilon: float
    q: int
    tables: dict  # s -> Contingency

    def combined(self) -> Contingency:
        out = Contingency()
        for t in self.tables.values():
            for key, v in t.counts.items():
                out.counts[key] += v
        return out


def sample_decoding_matrix(k, s, kp, cfg: CodeConfig, rng):
    """``s`` distinct systematic columns plus ``kp - s`` parities of ``cfg``."""
    sys_rows = rng.choice(k, size=s, replace=False)
    ids = np.concatenate([sys_rows, np.arange(k, k + kp - s)]).astype(np.int64)
    return ids, generator_block(cfg, ids), drawn_block(cfg, ids)


def matching_rank_crosscheck(k: int, epsilon: float, s_values, trials: int, c=4,
                             field: FieldSpec | None = None, seed: int = 0,
                             log_base: str = "natural") -> CrosscheckReport:
    """Tabulate (perfect matching in the drawn graph?) x (realized matrix full rank?).

    The graph uses the rows drawn for each parity, before coefficient
    cancellation, exactly as the coefficients are assigned to edges.
    """
    field = field or gf(8)
    kp = kept_count(k, epsilon)
    tables = {}
    for s in s_values:
        if not 0 <= s <= min(k, kp):
            raise ConfigInvalid(f"systematic count {s} out of range")
        table = Contingency()
        for t in range(trials):
            rng = _rng(_CROSS, seed, s, t)
            cfg = CodeConfig(k, c, field, _seed64(_CROSS, seed, s, t), log_base)
            _, gen, drawn = sample_decoding_matrix(k, s, kp, cfg, rng)
            graph = BipartiteGraph(k, tuple(tuple(np.flatnonzero(col)) for col in drawn.T))
            table.add(max_matching(graph) == k, rank(GfMatrix(field, gen)) == k)
        tables[s] = table
    return CrosscheckReport(k, epsilon, field.q, tables)
