import csv
import io
import subprocess
import sys

import pytest

from smallrepair.cli import main, parse_size


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "smallrepair", *map(str, args)],
                          capture_output=True, text=True)


@pytest.mark.parametrize("text, value", [("64K", 65536), ("1M", 1 << 20), ("100", 100), ("2kb", 2048)])
def test_parse_size(text, value):
    assert parse_size(text) == value


def test_compress_decompress_files(tmp_path):
    src = tmp_path / "in.txt"
    src.write_bytes(b"to be or not to be, that is the question; to be or not" * 4)
    assert main(["compress", str(src), str(tmp_path / "g.rp"), "--audit"]) == 0
    assert main(["decompress", str(tmp_path / "g.rp"), str(tmp_path / "out.txt")]) == 0
    assert (tmp_path / "out.txt").read_bytes() == src.read_bytes()


@pytest.mark.parametrize("strategy", ["smallspace", "naive", "bitparallel", "hybrid", "mr"])
def test_verify_every_strategy(tmp_path, strategy, capsys):
    src = tmp_path / "in.bin"
    src.write_bytes(bytes(range(7)) * 30 + b"\x00" * 50)
    assert main(["verify", str(src), "--strategy", strategy]) == 0
    assert capsys.readouterr().out.startswith("ok")


def test_empty_input_fails(tmp_path):
    empty = tmp_path / "empty"
    empty.write_bytes(b"")
    proc = run_cli("compress", empty, tmp_path / "x.rp")
    assert proc.returncode != 0
    assert "empty input" in proc.stderr


def test_missing_file_fails(tmp_path):
    proc = run_cli("verify", tmp_path / "nope")
    assert proc.returncode == 1 and proc.stderr


def test_corrupt_grammar_file_fails(tmp_path):
    bad = tmp_path / "bad.rp"
    bad.write_bytes(b"NOPE")
    proc = run_cli("decompress", bad, tmp_path / "out")
    assert proc.returncode == 1
    assert "bad magic" in proc.stderr


def test_stats_lines(tmp_path, capsys):
    src = tmp_path / "a.txt"
    src.write_bytes(b"a" * 1024)
    assert main(["stats", str(src)]) == 0
    out = capsys.readouterr().out
    machine = [line for line in out.splitlines() if line.startswith("stats ")][0]
    fields = dict(kv.split("=") for kv in machine.split()[1:])
    assert fields["turns"] == "9" and fields["rounds"] == "10"
    assert "turns" in out.splitlines()[2]


def test_bench_unary_row(capsys):
    assert main(["bench", "--prefixes", "64K"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows == [dict(rows[0], dataset="unary", prefix_bytes="65536", turns="15", rounds="16")]
    assert list(rows[0]) == ["dataset", "prefix_bytes", "seconds", "turns", "rounds", "rules",
                             "grammar_size", "peak_bits"]


def test_bench_files_parallel(tmp_path):
    f = tmp_path / "t.txt"
    f.write_bytes(b"abcabcabd" * 100)
    out = tmp_path / "bench.csv"
    assert main(["bench", str(f), "--unary", "--prefixes", "256,512", "--jobs", "2", "-o", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [(r["dataset"], r["prefix_bytes"]) for r in rows] == [
        ("unary", "256"), ("unary", "512"), ("t.txt", "256"), ("t.txt", "512")]
