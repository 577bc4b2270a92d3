import struct

import pytest
from hypothesis import given, strategies as st

from conftest import enc
from smallrepair.codec import (
    FormatError,
    compress_bytes,
    crc64,
    decode,
    decompress,
    decompress_bytes,
    encode,
    read_varint,
    sequence_checksum,
    write_varint,
)
from smallrepair.core import CorruptGrammar, Grammar
from smallrepair.engine import run_repair


def test_crc64_check_value():
    assert crc64(b"123456789") == 0x995DC9BBDF1939FA
    assert crc64(b"") == 0


def test_crc64_streams():
    assert crc64(b"6789", crc64(b"12345")) == crc64(b"123456789")


@given(st.integers(0, 2 ** 70))
def test_varint_roundtrip(v):
    buf = bytearray()
    write_varint(buf, v)
    assert read_varint(bytes(buf), 0) == (v, len(buf))


def test_varint_layout():
    buf = bytearray()
    write_varint(buf, 300)
    assert bytes(buf) == b"\xac\x02"


def test_zero_rule_grammar():
    g = Grammar(3, [], enc("abc"))
    back = decode(encode(g))
    assert back.rules == [] and back.final_sequence == enc("abc")
    assert decompress(back) == enc("abc")


def test_unary_grammar_layout():
    g, _ = run_repair([0] * 8)
    blob = encode(g)
    assert blob[:5] == b"RPSS\x01"
    back = decode(blob)
    assert back.rules == [(0, 0), (1, 1)] and back.final_sequence == [2, 2]
    assert back.length == 8
    assert decompress(back) == [0] * 8
    # header: n=8, sigma=1, no alphabet, m=2; rules as offsets below the rule's own id
    assert blob[5:9] == bytes([8, 1, 0, 2])
    assert blob[9:13] == bytes([0, 0, 0, 0])


def test_expansion_example():
    g = Grammar(1, [(0, 0), (1, 1)], [2, 2])
    assert decompress(g) == [0] * 8


def test_variable_length_rules_use_version_two():
    g = Grammar(3, [(0, 1, 2)], [3, 3])
    blob = encode(g)
    assert blob[4] == 2
    assert decode(blob).rules == [(0, 1, 2)]


@given(st.binary(min_size=1, max_size=300), st.sampled_from(["smallspace", "mr", "naive"]))
def test_bytes_roundtrip(data, strategy):
    blob, _ = compress_bytes(data, strategy)
    assert decompress_bytes(blob) == data
    assert decode(blob) == decode(encode(decode(blob)))


def test_alphabet_is_dense():
    blob, run = compress_bytes(b"zzyzzy")
    assert run.grammar.terminal_count == 2
    assert decode(blob).alphabet == [ord("y"), ord("z")]


class TestRejects:
    def setup_method(self):
        self.blob, _ = compress_bytes(b"abracadabra abracadabra")

    def test_bad_magic(self):
        with pytest.raises(FormatError) as err:
            decode(b"XPSS" + self.blob[4:])
        assert err.value.offset == 0

    def test_unknown_version(self):
        with pytest.raises(FormatError) as err:
            decode(self.blob[:4] + b"\x09" + self.blob[5:])
        assert err.value.offset == 4

    @pytest.mark.parametrize("cut", [3, 5, 7, 12, -3])
    def test_truncation(self, cut):
        with pytest.raises(FormatError):
            decode(self.blob[:cut])

    def test_trailing_bytes(self):
        with pytest.raises(FormatError):
            decode(self.blob + b"\x00")

    def test_dangling_rule_reference(self):
        bad = bytearray(b"RPSS\x01")
        for v in (4, 2, 0, 1, 5, 0):  # n, sigma, no alphabet, m=1, rule entries 5 and 0
            write_varint(bad, v)
        with pytest.raises(FormatError, match="undefined"):
            decode(bytes(bad))

    def test_dangling_final_symbol(self):
        bad = bytearray(b"RPSS\x01")
        for v in (1, 2, 0, 0, 1, 7):
            write_varint(bad, v)
        bad += struct.pack("<Q", 0)
        with pytest.raises(FormatError) as err:
            decode(bytes(bad))
        assert err.value.offset == len(bad) - 9

    def test_checksum_mismatch(self):
        tampered = self.blob[:-8] + struct.pack("<Q", 1)
        with pytest.raises(CorruptGrammar, match="checksum"):
            decompress(decode(tampered))

    def test_encode_refuses_forward_reference(self):
        with pytest.raises(CorruptGrammar):
            encode(Grammar(2, [(0, 2)], [2], checksum=0, length=2))


def test_sequence_checksum_is_over_varints():
    assert sequence_checksum([300]) == crc64(b"\xac\x02")
