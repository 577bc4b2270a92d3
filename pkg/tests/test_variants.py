import pytest
from hypothesis import given, strategies as st

from conftest import enc
from oracle import expand, frequencies, max_disjoint, max_frequency
from smallrepair.core import MemoryAccountant
from smallrepair.engine import run_repair
from smallrepair.freq import bigram_frequency
from smallrepair.variants import (
    extend_to_maximal_repeat,
    heuristic_full_table,
    heuristic_majority,
    heuristic_position_table,
    heuristic_repair,
    is_maximal_repeat,
    mr_repair,
    substring_frequency,
)

texts = st.lists(st.integers(0, 4), min_size=2, max_size=90)


class TestMaximalRepeat:
    @pytest.mark.parametrize("s, b, content, f", [
        ("xabcyabcz", "bc", "abc", 2),
        ("abab", "ab", "ab", 2),
        ("aaaa", "aa", "aa", 2),
    ])
    def test_examples(self, s, b, content, f):
        rep = extend_to_maximal_repeat(enc(s), tuple(enc(b)))
        assert rep.content == tuple(enc(content))
        assert rep.freq == f
        assert rep.source_bigram == tuple(enc(b))

    def test_rejects_rare_bigram(self):
        with pytest.raises(ValueError):
            extend_to_maximal_repeat(enc("abc"), (0, 1))

    @given(texts)
    def test_extension_of_top_bigram_is_maximal(self, text):
        f = frequencies(text)
        top = max(f.values())
        if top < 2:
            return
        b = min(bg for bg, v in f.items() if v == top)
        rep = extend_to_maximal_repeat(text, b)
        assert rep.freq == top == max_disjoint(text, rep.content)
        assert is_maximal_repeat(text, rep.content)
        s = "".join(map(chr, rep.content))
        assert "".join(map(chr, b)) in s


class TestMrRepair:
    def test_single_rule(self):
        g, recs = mr_repair(enc("xabcyabcz"))
        assert g.rules == [tuple(enc("abc"))]
        assert g.final_sequence == [enc("x")[0], 26, enc("y")[0], 26, enc("z")[0]]

    def test_no_rules(self):
        g, _ = mr_repair(enc("abcdefg"))
        assert g.rules == []

    @given(texts)
    def test_rules_are_maximal_and_expansion_holds(self, text):
        run = mr_repair(text)
        g = run.grammar
        cur = list(text)
        for rule, rec in zip(g.rules, run.records):
            assert is_maximal_repeat(cur, rule)
            assert rec.freq == substring_frequency(cur, rule)
            from oracle import replace
            cur = replace(cur, rule, rec.new_symbol)
        assert expand(g.final_sequence, g.rules, g.terminal_count) == text

    @given(texts)
    def test_not_larger_than_repair(self, text):
        mr = mr_repair(text).grammar
        ref = run_repair(text, strategy="naive").grammar
        assert mr.size <= ref.size
        assert len(mr.rules) <= len(ref.rules)


class TestFullTable:
    def test_unary_matches_engine(self):
        text = [0] * 16
        run = heuristic_repair(text, 10 ** 6)
        ref = run_repair(text).grammar
        assert (run.grammar.rules, run.grammar.final_sequence) == (ref.rules, ref.final_sequence)

    def test_fig1_matches_engine(self, fig1):
        part = heuristic_full_table(fig1, 10 ** 6)
        ref = [r.freq for r in run_repair(fig1).records if r.freq >= 3]
        assert [r.freq for r in part.records] == ref

    def test_zero_budget_hands_off(self, fig1):
        part = heuristic_full_table(fig1, 0)
        assert part.handed_off and part.records == [] and part.text == fig1

    def test_stops_before_alphabet_outgrows_budget(self):
        text = [0, 1] * 200
        part = heuristic_full_table(text, 3 * 3 * 9)
        assert part.handed_off
        assert part.grammar.tau == 3

    @given(texts)
    def test_turns_take_maxima_and_expansion_matches(self, text):
        run = heuristic_repair(text, 10 ** 6)
        assert run.grammar.expand() == text
        part = heuristic_full_table(text, 10 ** 6)
        cur = list(text)
        from oracle import replace
        for r in part.records:
            assert r.freq == max_frequency(cur)
            cur = replace(cur, r.replaced, r.new_symbol)
        assert cur == part.text


class TestPositionTable:
    def test_fig1(self, fig1):
        b, f = heuristic_position_table(fig1)
        assert f == 5 and b in {(0, 1), (2, 0)}

    def test_ab(self):
        assert heuristic_position_table(enc("ab")) == ((0, 1), 1)

    def test_too_short(self):
        with pytest.raises(ValueError):
            heuristic_position_table([3])

    @given(texts)
    def test_matches_oracle(self, text):
        b, f = heuristic_position_table(text)
        assert f == max_frequency(text) == frequencies(text)[b]

    def test_charges_accountant(self):
        # the table needs about n lg n bits, beyond the small-space budget
        acc = MemoryAccountant(100, strict=False)
        heuristic_position_table(list(range(4)) * 25, accountant=acc)
        assert acc.peak_bits == 99 * 6 + 4 * 7
        assert not acc.slots


class TestMajority:
    def test_alternating(self):
        r = heuristic_majority(enc("ababababab") + [23])
        assert (r.bigram, r.freq) == ((0, 1), 5)
        # ab = 5 against ba + bX = 5: no strict majority
        assert not r.premise_holds

    def test_no_majority(self):
        r = heuristic_majority(enc("abc"))
        assert r.freq == bigram_frequency(enc("abc"), r.bigram)
        assert not r.premise_holds

    def test_unary(self):
        r = heuristic_majority([0] * 10)
        assert tuple(r) == ((0, 0), 5) and r.premise_holds

    def test_too_short(self):
        with pytest.raises(ValueError):
            heuristic_majority([1])

    @given(texts)
    def test_frequency_is_exact_and_premise_implies_maximum(self, text):
        r = heuristic_majority(text)
        assert r.freq == max_disjoint(text, r.bigram)
        if r.premise_holds:
            assert r.freq == max_frequency(text)

    @given(st.integers(0, 3), st.integers(4, 7), st.integers(3, 30), st.lists(st.integers(0, 9), max_size=4))
    def test_skewed_input_finds_dominant_bigram(self, a, b, k, noise):
        text = [a, b] * k + noise
        r = heuristic_majority(text)
        if r.premise_holds:
            assert r.bigram == (a, b)
