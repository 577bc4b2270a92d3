import math

import pytest
from hypothesis import given, strategies as st

from smallrepair.core import (
    BudgetExceeded,
    CapacityPolicy,
    CorruptGrammar,
    Grammar,
    MemoryAccountant,
    PackedText,
    cell_width,
    compact,
    expand_symbols,
    widen,
)


@pytest.mark.parametrize("tau, width", [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (256, 8), (257, 9)])
def test_cell_width(tau, width):
    assert cell_width(tau) == width


@given(st.lists(st.integers(0, 2000), max_size=300))
def test_packed_roundtrip(values):
    text = PackedText.from_symbols(values)
    assert text.tolist() == values
    assert len(text) == len(values)
    for i in range(0, len(values), 37):
        assert text[i] == values[i]


def test_cells_do_not_straddle_words():
    text = PackedText.from_symbols(range(10), width=7)
    assert text.q == 9
    assert text.words.size == 2
    assert text[9] == 9


def test_widen_keeps_sequence_and_refuses_to_narrow():
    text = PackedText.from_symbols([3, 1, 2, 3], width=2)
    wide = widen(text, 5)
    assert wide.width == 5 and wide.tolist() == [3, 1, 2, 3]
    with pytest.raises(ValueError):
        widen(wide, 3)


def test_width_too_small_rejected():
    with pytest.raises(ValueError):
        PackedText.from_symbols([8], width=3)


def test_compact_drops_dead_cells():
    text = PackedText.from_symbols([5, 6, 7, 8, 9])
    text.mark_dead([1, 3])
    out = compact(text)
    assert out.tolist() == [5, 7, 9]
    assert out.freed == 2


def test_grammar_expand_and_size():
    g = Grammar(1, [(0, 0), (1, 1)], [2, 2])
    assert g.expand() == [0] * 8
    assert g.size == 6
    assert g.tau == 3
    assert g.is_bigram_grammar()


def test_grammar_alphabet_maps_back():
    g = Grammar(2, [(0, 1)], [2, 2, 0], alphabet=[104, 105])
    assert bytes(g.original()) == b"hihih"


def test_expand_deep_chain_is_iterative():
    m = 5000
    rules = [(0, 0)] + [(i, 0) for i in range(1, m)]
    out = expand_symbols([m], rules, 1)
    assert len(out) == m + 1


@pytest.mark.parametrize("rules, seq", [
    ([(0, 2)], [2]),        # rule refers to itself
    ([(0, 5)], [1]),        # forward reference
    ([(0,)], [1]),          # too short
    ([], [3]),              # undefined symbol in the final sequence
])
def test_expand_rejects_corrupt(rules, seq):
    with pytest.raises(CorruptGrammar):
        expand_symbols(seq, rules, 2)


def test_capacity_policy_quantities():
    p = CapacityPolicy()
    delta = p.entry_bits(5, 1000)
    assert delta == math.ceil(math.log2(25 * 500))
    beta = p.beta(5, 1000, 1000)
    assert beta == min(delta / 3, 4 * delta / math.log2(1000))
    assert p.gamma(5, 1000, 1000) == pytest.approx(1 + 2 / (5 * 2 * beta))


@pytest.mark.parametrize("kw", [{"c": 0}, {"alpha": 0.5}, {"f0": 0}])
def test_capacity_policy_validation(kw):
    with pytest.raises(ValueError):
        CapacityPolicy(**kw)


def test_accountant_budget_and_peak():
    acc = MemoryAccountant(1024, c=4, tau=2)
    assert acc.budget_bits == math.floor(max(256 * 10, 1024) + 64 * 10)
    acc.charge("text", 1000)
    acc.charge("table", 500)
    acc.release("table")
    acc.add("rules", 20)
    assert acc.charged_bits == 1020
    assert acc.peak_bits == 1500
    acc.audit("fine")


def test_accountant_strict_raises_and_records():
    acc = MemoryAccountant(64, strict=True)
    acc.charge("text", 10 ** 6)
    with pytest.raises(BudgetExceeded) as err:
        acc.audit("huge")
    assert err.value.label == "huge"
    lax = MemoryAccountant(64, strict=False)
    lax.charge("text", 10 ** 6)
    lax.audit("huge")
    assert len(lax.breaches) == 1
