"""Binary grammar files.

Layout, all integers LEB128 varints unless noted::

    "RPSS"  version:u8  n  sigma  alphabet_len  alphabet[alphabet_len]
    m  rules  final_len  final[final_len]  crc64:u64le

Version 1 stores bigram rules as two entries each; version 2 stores rules of
any length, each preceded by its length.  A rule entry ``e`` of rule ``r``
encodes the symbol ``sigma + r - 1 - e``, so recently created symbols get
small codes and a reference to an undefined symbol cannot be written.
``alphabet_len`` is 0 when terminal ids are used as-is.  The trailer is the
CRC-64/XZ of the varint encoding of the original sequence.
"""

from __future__ import annotations

import struct
from typing import Iterable

from .core import CapacityPolicy, CorruptGrammar, Grammar, expand_symbols

MAGIC = b"RPSS"
VERSION_BIGRAM = 1
VERSION_VARIABLE = 2


class FormatError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


# ---------------------------------------------------------------------------
# checksum and varints
# ---------------------------------------------------------------------------

_CRC64_POLY = 0xC96C5795D7870F42  # ECMA-182, reflected


def _crc64_table() -> list[int]:
    table = []
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ _CRC64_POLY if c & 1 else c >> 1
        table.append(c)
    return table


_TABLE = _crc64_table()


def crc64(data: bytes, crc: int = 0) -> int:
    """CRC-64/XZ; pass the previous result as ``crc`` to continue a stream."""
    crc ^= 0xFFFFFFFFFFFFFFFF
    table = _TABLE
    for byte in data:
        crc = table[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFFFFFFFFFF


def write_varint(out: bytearray, value: int) -> None:
    if value < 0:
        raise ValueError("varints are unsigned")
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def read_varint(data: bytes, pos: int) -> tuple[int, int]:
    value = shift = 0
    start = pos
    while True:
        if pos >= len(data):
            raise FormatError("truncated varint", start)
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if byte < 0x80:
            return value, pos
        shift += 7
        if shift > 63 * 2:
            raise FormatError("varint too long", start)


def sequence_checksum(values: Iterable[int]) -> int:
    buf = bytearray()
    for v in values:
        write_varint(buf, v)
    return crc64(bytes(buf))


# ---------------------------------------------------------------------------
# encode / decode
# ---------------------------------------------------------------------------


def encode(grammar: Grammar) -> bytes:
    sigma = grammar.terminal_count
    checksum, n = grammar.checksum, grammar.length
    if checksum is None or n is None:
        original = grammar.original()
        checksum = sequence_checksum(original) if checksum is None else checksum
        n = len(original)
    version = VERSION_BIGRAM if grammar.is_bigram_grammar() else VERSION_VARIABLE
    out = bytearray(MAGIC)
    out.append(version)
    write_varint(out, n)
    write_varint(out, sigma)
    alphabet = grammar.alphabet or []
    if alphabet and len(alphabet) != sigma:
        raise ValueError("alphabet size differs from terminal count")
    write_varint(out, len(alphabet))
    for a in alphabet:
        write_varint(out, a)
    write_varint(out, len(grammar.rules))
    for r, rhs in enumerate(grammar.rules):
        if version == VERSION_VARIABLE:
            write_varint(out, len(rhs))
        for s in rhs:
            if not 0 <= s < sigma + r:
                raise CorruptGrammar(f"rule {r} references symbol {s} not defined before it")
            write_varint(out, sigma + r - 1 - s)
    tau = grammar.tau
    write_varint(out, len(grammar.final_sequence))
    for s in grammar.final_sequence:
        if not 0 <= s < tau:
            raise CorruptGrammar(f"final sequence references undefined symbol {s}")
        write_varint(out, s)
    out += struct.pack("<Q", checksum)
    return bytes(out)


def decode(data: bytes) -> Grammar:
    """Parse a grammar file; the grammar's ``checksum`` holds the stored trailer."""
    if data[:4] != MAGIC:
        raise FormatError("bad magic", 0)
    if len(data) < 5:
        raise FormatError("missing version", 4)
    version = data[4]
    if version not in (VERSION_BIGRAM, VERSION_VARIABLE):
        raise FormatError(f"unknown version {version}", 4)
    pos = 5
    n, pos = read_varint(data, pos)
    sigma, pos = read_varint(data, pos)
    at = pos
    alen, pos = read_varint(data, pos)
    if alen not in (0, sigma):
        raise FormatError("alphabet size differs from terminal count", at)
    alphabet = []
    for _ in range(alen):
        a, pos = read_varint(data, pos)
        alphabet.append(a)
    m, pos = read_varint(data, pos)
    rules: list[tuple[int, ...]] = []
    for r in range(m):
        length = 2
        if version == VERSION_VARIABLE:
            at = pos
            length, pos = read_varint(data, pos)
            if length < 2:
                raise FormatError(f"rule {r} has fewer than two symbols", at)
        rhs = []
        for _ in range(length):
            at = pos
            e, pos = read_varint(data, pos)
            s = sigma + r - 1 - e
            if s < 0:
                raise FormatError(f"rule {r} references an undefined symbol", at)
            rhs.append(s)
        rules.append(tuple(rhs))
    tau = sigma + m
    flen, pos = read_varint(data, pos)
    final = []
    for _ in range(flen):
        at = pos
        s, pos = read_varint(data, pos)
        if s >= tau:
            raise FormatError(f"final sequence references undefined symbol {s}", at)
        final.append(s)
    if len(data) < pos + 8:
        raise FormatError("truncated checksum", pos)
    (checksum,) = struct.unpack_from("<Q", data, pos)
    if len(data) != pos + 8:
        raise FormatError("trailing bytes", pos + 8)
    return Grammar(sigma, rules, final, alphabet or None, checksum, n)


def decompress(grammar: Grammar) -> list[int]:
    """Expand to the original values and check length and checksum when recorded."""
    ids = expand_symbols(grammar.final_sequence, grammar.rules, grammar.terminal_count)
    values = [grammar.alphabet[s] for s in ids] if grammar.alphabet else ids
    n = grammar.length
    if n is not None and n != len(values):
        raise CorruptGrammar(f"expanded to {len(values)} symbols, expected {n}")
    if grammar.checksum is not None and sequence_checksum(values) != grammar.checksum:
        raise CorruptGrammar("checksum mismatch")
    return values


# ---------------------------------------------------------------------------
# bytes
# ---------------------------------------------------------------------------


def bytes_to_symbols(data: bytes) -> tuple[list[int], list[int]]:
    """Dense terminal ids for ``data`` plus the alphabet mapping them back."""
    alphabet = sorted(set(data))
    index = {b: i for i, b in enumerate(alphabet)}
    return [index[b] for b in data], alphabet


def compress_bytes(data: bytes, strategy: str = "smallspace", policy: CapacityPolicy | None = None,
                   audit: bool = False):
    """Compress ``data``; returns the grammar file and the engine run."""
    from .engine import run_repair

    if not data:
        raise ValueError("empty input")
    symbols, alphabet = bytes_to_symbols(data)
    run = run_repair(symbols, policy, strategy=strategy, audit=audit)
    g = run.grammar
    g.alphabet = alphabet
    g.checksum = sequence_checksum(data)
    g.length = len(data)
    return encode(g), run


def decompress_bytes(blob: bytes) -> bytes:
    values = decompress(decode(blob))
    if any(v > 255 for v in values):
        raise CorruptGrammar("grammar does not describe a byte string")
    return bytes(values)
