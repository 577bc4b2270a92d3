"""Command-line interface: compress, decompress, stats, bench and verify."""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .codec import compress_bytes, decompress_bytes
from .core import CapacityPolicy
from .engine import STRATEGIES

BENCH_FIELDS = ["dataset", "prefix_bytes", "seconds", "turns", "rounds", "rules",
                "grammar_size", "peak_bits"]
UNARY = "unary"


def parse_size(text: str) -> int:
    """``64K`` / ``1M`` / plain integers, powers of 1024."""
    text = text.strip().upper().removesuffix("B")
    scale = {"K": 1 << 10, "M": 1 << 20, "G": 1 << 30}.get(text[-1:], 1)
    digits = text[:-1] if scale > 1 else text
    value = int(digits) * scale
    if value <= 0:
        raise argparse.ArgumentTypeError(f"prefix size must be positive: {text!r}")
    return value


def _policy(args) -> CapacityPolicy:
    return CapacityPolicy(c=args.c, f0=args.f0)


def _engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=STRATEGIES, default="smallspace")
    p.add_argument("--c", type=int, default=4, help="space parameter: tables may use (n/c) lg n bits")
    p.add_argument("--f0", type=int, default=3, help="frequency table capacity of the first round")
    p.add_argument("--audit", action="store_true", help="fail if the space ledger exceeds its budget")


def cmd_compress(args) -> int:
    data = Path(args.input).read_bytes()
    blob, run = compress_bytes(data, args.strategy, _policy(args), args.audit)
    Path(args.output).write_bytes(blob)
    print(f"{len(data)} bytes -> {len(blob)} bytes, {run.turns} rules, {run.round_count} rounds")
    return 0


def cmd_decompress(args) -> int:
    Path(args.output).write_bytes(decompress_bytes(Path(args.input).read_bytes()))
    return 0


def cmd_stats(args) -> int:
    data = Path(args.input).read_bytes()
    blob, run = compress_bytes(data, args.strategy, _policy(args), args.audit)
    g = run.grammar
    acc = run.accountant
    rows = {
        "n": len(data),
        "sigma": g.terminal_count,
        "turns": run.turns,
        "rounds": run.round_count,
        "rules": len(g.rules),
        "grammar_size": g.size,
        "final_length": len(g.final_sequence),
        "encoded_bytes": len(blob),
        "peak_bits": acc.peak_bits if acc else 0,
        "budget_bits": acc.budget_bits if acc else 0,
        "seconds": f"{run.seconds:.3f}",
    }
    width = max(len(k) for k in rows)
    for k, v in rows.items():
        print(f"{k:<{width}}  {v}")
    print("stats " + " ".join(f"{k}={v}" for k, v in rows.items()))
    return 0


def cmd_verify(args) -> int:
    data = Path(args.input).read_bytes()
    blob, run = compress_bytes(data, args.strategy, _policy(args), args.audit)
    if decompress_bytes(blob) != data:
        print("verify: restored bytes differ from the input", file=sys.stderr)
        return 1
    print(f"ok {len(data)} bytes, {run.turns} rules")
    return 0


def bench_row(dataset: str, path: str | None, prefix: int, strategy: str, c: int, f0: int) -> dict:
    if path is None:
        data = b"a" * prefix
    else:
        data = Path(path).read_bytes()[:prefix]
    started = time.perf_counter()
    _, run = compress_bytes(data, strategy, CapacityPolicy(c=c, f0=f0))
    seconds = time.perf_counter() - started
    return {
        "dataset": dataset,
        "prefix_bytes": len(data),
        "seconds": f"{seconds:.4f}",
        "turns": run.turns,
        "rounds": run.round_count,
        "rules": len(run.grammar.rules),
        "grammar_size": run.grammar.size,
        "peak_bits": run.peak_bits,
    }


def cmd_bench(args) -> int:
    datasets: list[tuple[str, str | None]] = [(Path(f).name, f) for f in args.files]
    if args.unary or not datasets:
        datasets.insert(0, (UNARY, None))
    for _, path in datasets:
        if path is not None and not Path(path).is_file():
            raise FileNotFoundError(path)
    jobs = [(name, path, p, args.strategy, args.c, args.f0) for name, path in datasets for p in args.prefixes]
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_FIELDS, lineterminator="\n")
        writer.writeheader()
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                rows = pool.map(bench_row, *zip(*jobs))
                for row in rows:
                    writer.writerow(row)
        else:
            for job in jobs:
                writer.writerow(bench_row(*job))
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smallrepair", description="Re-Pair grammar compression in small space")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="write the grammar file of INPUT")
    p.add_argument("input")
    p.add_argument("output")
    _engine_flags(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="restore the original bytes from a grammar file")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("stats", help="compress INPUT and print turns, rounds, sizes and peak space")
    p.add_argument("input")
    _engine_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("verify", help="compress, decompress and compare")
    p.add_argument("input")
    _engine_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="CSV of runtime, turns and rounds per file prefix")
    p.add_argument("files", nargs="*", help="corpus files (the unary dataset is generated)")
    p.add_argument("--prefixes", type=lambda s: [parse_size(x) for x in s.split(",")], default=[1 << 16])
    p.add_argument("--unary", action="store_true", help="include the generated unary dataset")
    p.add_argument("--strategy", choices=STRATEGIES, default="smallspace")
    p.add_argument("--c", type=int, default=4)
    p.add_argument("--f0", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1, help="run (file, prefix) jobs in parallel")
    p.add_argument("-o", "--output", help="write the CSV here instead of stdout")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"smallrepair {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
