"""Command line front end: ``rfcode encode | decode | repair | simulate``.

Exit codes: 0 on success, 2 when decoding or repair is mathematically
impossible with the shards at hand, 3 on I/O, format or usage errors.
"""

from __future__ import annotations

import argparse
import sys
import warnings
import zlib
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import sim
from .code import CodeConfig
from .codec import EncodedSymbol, SourceBlock, decode, encode
from .errors import (ConfigInvalid, CorruptShard, HeaderMismatch, InconsistentSystem,
                     MissingFootprintSymbol, NoLocalGroup, RFCodeError)
from .galois import gf
from .repair import availability_report, repair
from .shard import (ShardHeader, check_consistent, manifest_line, parse_manifest,
                    read_header, read_shard, shard_name, write_shard)

EXIT_OK = 0
EXIT_UNDECODABLE = 2
EXIT_IO = 3

FIELDS = {"gf256": 8, "gf65536": 16}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        c = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if c <= 0:
        raise argparse.ArgumentTypeError("c must be positive")
    return c


def _hex_seed(text: str) -> int:
    try:
        seed = int(text, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be hexadecimal: {text!r}") from None
    if not 0 <= seed < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return seed


def _config(args, k=None) -> CodeConfig:
    return CodeConfig(k or args.k, args.c, gf(FIELDS[args.field]), args.seed, args.log_base)


def _code_args(p, c_default="6"):
    p.add_argument("--c", type=_fraction, default=Fraction(c_default),
                   help="pre-log constant of the parity degree (e.g. 6, 9/2, 4.5)")
    p.add_argument("--field", choices=sorted(FIELDS), default="gf256")
    p.add_argument("--log-base", choices=["natural", "base2"], default="natural")
    p.add_argument("--seed", type=_hex_seed, default=0, help="64-bit seed, hexadecimal")


# encode ---------------------------------------------------------------------


def cmd_encode(args) -> int:
    data = Path(args.input).read_bytes()
    out = Path(args.out)
    if args.extend:
        return _extend(args, data, out)
    if not 0 < args.rate <= 1:
        raise ConfigInvalid(f"rate must be in (0, 1], got {args.rate}")
    cfg = _config(args)
    n = max(cfg.k, round(cfg.k / args.rate))
    block = SourceBlock.from_bytes(cfg, data)
    out.mkdir(parents=True, exist_ok=True)
    lines = _emit(cfg, block, range(n), len(data), out)
    (out / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {n} shards (k={cfg.k}, d={cfg.degree}, symbol_size={block.symbol_size}) to {out}")
    return EXIT_OK


def _emit(cfg, block, indices, file_len, out):
    lines = []
    for sym in encode(cfg, block, indices):
        hdr = ShardHeader.for_config(cfg, sym.index, block.symbol_size, file_len)
        write_shard(out / shard_name(sym.index), hdr, sym.payload)
        lines.append(manifest_line(sym.index, sym.payload))
    return lines


def _extend(args, data, out):
    manifest = parse_manifest((out / "manifest.txt").read_text(encoding="utf-8"))
    if not manifest:
        raise HeaderMismatch("empty manifest")
    by_index = {idx: (name, crc) for name, idx, _, crc in manifest}
    ref = read_header(out / manifest[0][0])
    cfg = ref.config()
    if len(data) != ref.original_file_len:
        raise HeaderMismatch("input file length differs from the encoded file")
    block = SourceBlock.from_bytes(cfg, data, ref.symbol_size)
    # the input must reproduce the systematic shards already listed
    for sym in encode(cfg, block, [i for i in range(cfg.k) if i in by_index]):
        if zlib.crc32(sym.payload) != by_index[sym.index][1]:
            raise HeaderMismatch(f"input does not match systematic shard {sym.index}")
    start = max(by_index) + 1
    new = range(start, start + args.extend)
    lines = _emit(cfg, block, new, len(data), out)
    with open(out / "manifest.txt", "a", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote shards {start}..{start + args.extend - 1} to {out}")
    return EXIT_OK


# decode ---------------------------------------------------------------------


def _shard_paths(items) -> list[Path]:
    paths = []
    for item in items:
        p = Path(item)
        paths.extend(sorted(p.glob("*.rfc")) if p.is_dir() else [p])
    return paths


def cmd_decode(args) -> int:
    shards = {}
    for path in _shard_paths(args.shards):
        try:
            hdr, payload = read_shard(path)
        except CorruptShard as e:
            if not args.skip_corrupt:
                raise
            print(f"skipping {e}", file=sys.stderr)
            continue
        shards[hdr.column_index] = (hdr, payload)
    ref = check_consistent(h for h, _ in shards.values())
    cfg = ref.config()
    received = [EncodedSymbol(i, p) for i, (_, p) in sorted(shards.items())]
    report = decode(cfg, received)
    if not report.ok:
        print(report, file=sys.stderr)
        return EXIT_UNDECODABLE
    Path(args.out).write_bytes(report.block.to_bytes()[: ref.original_file_len])
    print(report)
    return EXIT_OK


# repair ---------------------------------------------------------------------


class ShardStore:
    """Lazy ``index -> payload`` mapping over the shards of a directory."""

    def __init__(self, paths: dict, ref: ShardHeader):
        self.paths = paths
        self.ref = ref

    def keys(self):
        return self.paths.keys()

    def __getitem__(self, index):
        hdr, payload = read_shard(self.paths[index])
        if not self.ref.same_code(hdr) or hdr.column_index != index:
            raise HeaderMismatch(f"{self.paths[index]} does not belong to this code")
        return payload


def _index_from_name(path: Path):
    stem = path.stem
    if stem.startswith("shard_") and stem[6:].isdigit():
        return int(stem[6:])
    return None


def cmd_repair(args) -> int:
    root = Path(args.dir)
    paths = {}
    for p in sorted(root.glob("*.rfc")):
        idx = _index_from_name(p)
        if idx is not None and idx != args.target:
            paths[idx] = p
    if not paths:
        raise HeaderMismatch(f"no shards in {root}")
    ref = read_header(next(iter(paths.values())))
    cfg = ref.config()
    result = repair(cfg, args.target, ShardStore(paths, ref))
    out = Path(args.out) if args.out else root / shard_name(args.target)
    hdr = replace(ref, column_index=args.target)
    write_shard(out, hdr, result.payload)
    how = f"parity {result.group.parity_id}" if result.group else "its support rows"
    print(f"repaired {shard_name(args.target)} from {how}: "
          f"read {len(result.reads)} shards (bound d+1 = {cfg.degree + 1})")
    return EXIT_OK


# simulate -------------------------------------------------------------------


def _write(args, text: str):
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _sweep(args, mode, grid_text, ks=None, header=True) -> str:
    grid = sim.parse_grid(grid_text)
    chunks = []
    for k in ks or [args.k]:
        exp = sim.ErasureExperiment(_config(args, k), args.rate, mode, args.instances, args.trials)
        res = sim.run_erasure_sweep(exp, grid, args.seed)
        chunks.append(res.to_csv(header=header and not chunks))
    return "".join(chunks)


def cmd_sim_erasure(args):
    _write(args, _sweep(args, sim.Mode.ERASURE, args.pe, _ks(args)))


def cmd_sim_overhead(args):
    _write(args, _sweep(args, sim.Mode.OVERHEAD, args.eps, _ks(args)))


def cmd_sim_figures(args):
    ks = _ks(args)
    args.c = args.c_erasure
    text = _sweep(args, sim.Mode.ERASURE, args.pe, ks)
    args.c = args.c_overhead
    text += _sweep(args, sim.Mode.OVERHEAD, args.eps, ks, header=False)
    _write(args, text)


def _ks(args):
    return [int(x) for x in str(args.k).split(",")]


def cmd_sim_coverage(args):
    cfg = _config(args)
    st = sim.coverage_stats(cfg, args.r, args.seeds, args.seed)
    lo, hi = st.bounds
    lines = ["seed,k,c,r,mean_coverage,min_coverage,bound_lo,bound_hi"]
    for s, (m, mn) in enumerate(zip(st.per_seed_mean, st.per_seed_min)):
        lines.append(f"{s},{cfg.k},{cfg.c},{args.r:g},{m:.6g},{mn},{lo:.6g},{hi:.6g}")
    _write(args, "\n".join(lines) + "\n")


def cmd_sim_availability(args):
    cfg = _config(args)
    n_par = max(1, round(args.r * cfg.k))
    report = availability_report(cfg, range(cfg.k, cfg.k + n_par))
    _write(args, report.to_csv())


def cmd_sim_crosscheck(args):
    s_values = [int(x) for x in args.s.split(",")] if args.s else [0, args.k // 2, args.k - 1, args.k]
    rep = sim.matching_rank_crosscheck(args.k, args.eps, s_values, args.trials, args.c,
                                       gf(FIELDS[args.field]), args.seed, args.log_base)
    lines = ["s,perfect_matching,full_rank,count"]
    for s, table in rep.tables.items():
        for (m, f), n in sorted(table.counts.items(), reverse=True):
            lines.append(f"{s},{int(m)},{int(f)},{n}")
    _write(args, "\n".join(lines) + "\n")


def cmd_sim_converse(args):
    rep = sim.converse_check(args.k, args.d, args.eps, args.trials, gf(FIELDS[args.field]), args.seed)
    text = ("k,d,k_prime,trials,uncovered_rate,failure_rate,analytic_all_covered\n"
            f"{rep.k},{rep.degree},{rep.k_prime},{len(rep.failed)},{rep.uncovered_rate:.6g},"
            f"{rep.failure_rate:.6g},{rep.analytic_all_covered:.6g}\n")
    _write(args, text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rfcode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="split a file into k source symbols and emit shards")
    p.add_argument("input", type=Path)
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--rate", type=float, default=0.5)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--extend", type=int, default=0, metavar="N",
                   help="append N more parity shards to an existing output directory")
    _code_args(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="rebuild the file from surviving shards")
    p.add_argument("shards", nargs="+", help="shard directory or shard files")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--skip-corrupt", action="store_true", help="ignore shards failing their CRC")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("repair", help="regenerate one missing shard from a local group")
    p.add_argument("dir", type=Path)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("simulate", help="Monte-Carlo experiments, CSV output")
    ssub = p.add_subparsers(dest="experiment", required=True)

    def sim_parser(name, func, help, c_default="6", k_default="100"):
        sp = ssub.add_parser(name, help=help)
        sp.add_argument("--k", default=k_default)
        sp.add_argument("--out", type=Path)
        _code_args(sp, c_default)
        sp.set_defaults(func=func)
        return sp

    def sweep_args(sp):
        sp.add_argument("--rate", type=float, default=0.5)
        sp.add_argument("--instances", type=int, default=200)
        sp.add_argument("--trials", type=int, default=100, help="trials per instance")

    sp = sim_parser("erasure-sweep", cmd_sim_erasure, "failure rate vs. erasure probability")
    sweep_args(sp)
    sp.add_argument("--pe", default="0.1:0.5:0.05", help="start:stop:step or a,b,c")

    sp = sim_parser("overhead-sweep", cmd_sim_overhead, "failure rate vs. decoding overhead",
                    c_default="4")
    sweep_args(sp)
    sp.add_argument("--eps", default="0:0.3:0.05")

    sp = sim_parser("figures", cmd_sim_figures, "erasure sweep (c=6) and overhead sweep (c=4) together",
                    k_default="100,300,500")
    sweep_args(sp)
    sp.add_argument("--pe", default="0.1:0.5:0.05")
    sp.add_argument("--eps", default="0:0.3:0.05")
    sp.add_argument("--c-erasure", type=_fraction, default=Fraction(6))
    sp.add_argument("--c-overhead", type=_fraction, default=Fraction(4))

    sp = sim_parser("coverage", cmd_sim_coverage, "number of parities covering each symbol",
                    c_default="4", k_default="200")
    sp.add_argument("--r", type=float, default=1.0, help="parities per source symbol")
    sp.add_argument("--seeds", type=int, default=50)

    sp = sim_parser("availability", cmd_sim_availability, "per-symbol availability report",
                    c_default="4", k_default="300")
    sp.add_argument("--r", type=float, default=1.0)

    sp = sim_parser("crosscheck", cmd_sim_crosscheck, "perfect matching vs. full rank table",
                    c_default="4", k_default="16")
    sp.add_argument("--eps", type=float, default=0.0)
    sp.add_argument("--s", help="comma separated systematic counts (default 0,k/2,k-1,k)")
    sp.add_argument("--trials", type=int, default=1000)

    sp = sim_parser("converse", cmd_sim_converse, "constant-degree coverage failure",
                    k_default="256")
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--eps", type=float, default=0.2)
    sp.add_argument("--trials", type=int, default=500)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    warnings.showwarning = _show_warning
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.experiment not in ("erasure-sweep", "overhead-sweep", "figures"):
        args.k = int(args.k)
    try:
        rc = args.func(args)
    except NoLocalGroup as e:
        print(f"repair failed: {e} (fall back to a full decode)", file=sys.stderr)
        return EXIT_UNDECODABLE
    except MissingFootprintSymbol as e:
        print(f"repair failed: {e}", file=sys.stderr)
        return EXIT_UNDECODABLE
    except (CorruptShard, HeaderMismatch, InconsistentSystem, ConfigInvalid, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except RFCodeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNDECODABLE
    return EXIT_OK if rc is None else rc


if __name__ == "__main__":
    sys.exit(main())
