"""MR-Re-Pair and three heuristics that trade space assumptions for speed.

``mr_repair`` replaces a most frequent maximal repeat instead of a bigram.
``heuristic_full_table`` keeps a dense matrix of all bigram frequencies while
the alphabet is small, ``heuristic_position_table`` finds a most frequent
bigram with one counter per text position, and ``heuristic_majority`` uses a
majority vote when one bigram dominates.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Bigram, CapacityPolicy, Grammar, MemoryAccountant, PackedText, cell_width, lg
from .engine import (
    RepairRun,
    RoundInfo,
    TurnRecord,
    _as_symbols,
    _decrement_events,
    greedy_occurrences,
    neighbor_counts,
    run_repair,
)
from .freq import bigram_frequency, counted_positions

# ---------------------------------------------------------------------------
# maximal repeats
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaximalRepeat:
    content: tuple[int, ...]
    freq: int
    source_bigram: Bigram


def _match_starts(arr: np.ndarray, pattern: Sequence[int]) -> np.ndarray:
    m = len(pattern)
    if m > arr.size:
        return np.zeros(0, dtype=np.int64)
    hit = np.ones(arr.size - m + 1, dtype=bool)
    for k, s in enumerate(pattern):
        hit &= arr[k: arr.size - m + 1 + k] == s
    return np.flatnonzero(hit)


def _greedy_select(starts: np.ndarray, m: int) -> list[int]:
    chosen: list[int] = []
    nxt = -1
    for p in starts.tolist():
        if p >= nxt:
            chosen.append(p)
            nxt = p + m
    return chosen


def substring_occurrences(text, pattern: Sequence[int]) -> list[int]:
    """Start positions of the greedy leftmost non-overlapping occurrences of ``pattern``."""
    arr = np.asarray(text, dtype=np.int64)
    return _greedy_select(_match_starts(arr, pattern), len(pattern))


def substring_frequency(text, pattern: Sequence[int]) -> int:
    return len(substring_occurrences(text, pattern))


def _extension(arr: np.ndarray, content: tuple[int, ...], occ: list[int], f: int, side: str):
    m = len(content)
    if side == "left":
        cands = sorted({int(arr[p - 1]) for p in occ if p > 0})
    else:
        cands = sorted({int(arr[p + m]) for p in occ if p + m < arr.size})
    for a in cands:
        longer = (a,) + content if side == "left" else content + (a,)
        new_occ = _greedy_select(_match_starts(arr, longer), len(longer))
        if len(new_occ) == f:
            return longer, new_occ
    return None


def extend_to_maximal_repeat(text, b: Bigram) -> MaximalRepeat:
    """Grow ``b`` one symbol at a time while the frequency stays the same.

    Left extensions are tried before right ones, smaller symbols first.
    Since extending never raises the frequency, the result is maximal: every
    one-symbol extension on either side occurs strictly less often.
    """
    arr = np.asarray(text.tolist() if isinstance(text, PackedText) else text, dtype=np.int64)
    content = tuple(int(s) for s in b)
    occ = _greedy_select(_match_starts(arr, content), 2)
    f = len(occ)
    if f < 2:
        raise ValueError(f"bigram {b} occurs {f} time(s); a repeat needs at least two")
    while True:
        step = _extension(arr, content, occ, f, "left") or _extension(arr, content, occ, f, "right")
        if step is None:
            return MaximalRepeat(content, f, (int(b[0]), int(b[1])))
        content, occ = step


def is_maximal_repeat(text, content: Sequence[int]) -> bool:
    """Brute-force check: every one-symbol extension lowers the frequency."""
    arr = np.asarray(text, dtype=np.int64)
    content = tuple(content)
    f = substring_frequency(arr, content)
    if f < 2:
        return False
    for a in np.unique(arr).tolist():
        if substring_frequency(arr, (a,) + content) >= f or substring_frequency(arr, content + (a,)) >= f:
            return False
    return True


def _max_bigram(arr: np.ndarray, base: int) -> tuple[Bigram, int] | None:
    if arr.size < 2:
        return None
    codes = (arr[:-1] * base + arr[1:])[counted_positions(arr)]
    uniq, cnt = np.unique(codes, return_counts=True)
    top = int(cnt.max())
    code = int(uniq[np.flatnonzero(cnt == top)[0]])
    return (code // base, code % base), top


def mr_repair(data, policy: CapacityPolicy | None = None, audit: bool = False,
              terminal_count: int | None = None) -> RepairRun:
    """MR-Re-Pair: each turn replaces a most frequent maximal repeat.

    A most frequent bigram is chosen with the usual tie rule and extended to
    a maximal repeat of the same frequency; all of its greedy occurrences are
    replaced by one new symbol.
    """
    started = time.perf_counter()
    arr, sigma = _as_symbols(data)
    sigma = max(sigma, terminal_count or 0)
    grammar = Grammar(sigma)
    records: list[TurnRecord] = []
    acc = MemoryAccountant(arr.size, (policy or CapacityPolicy()).c, tau=sigma, strict=audit)
    run = RepairRun(grammar, records, accountant=acc)
    k = 0
    while True:
        top = _max_bigram(arr, grammar.tau + 1)
        if top is None or top[1] < 2:
            break
        rep = extend_to_maximal_repeat(arr, top[0])
        x = grammar.tau
        m = len(rep.content)
        occ = np.asarray(substring_occurrences(arr, rep.content), dtype=np.int64)
        dead = (occ[:, None] + np.arange(1, m)).ravel()
        arr[occ] = x
        arr = np.delete(arr, dead)
        grammar.rules.append(rep.content)
        records.append(TurnRecord(len(records) + 1, rep.content, rep.freq, x, k))
        run.rounds.append(RoundInfo(k, 1, rep.freq, 0.0, "full", 1))
        acc.tau = x + 1
        acc.charge("text", arr.size * cell_width(x + 1))
        # RHS symbols plus one flag bit telling bigram rules from longer ones;
        # a longer rule's length fits into the extra cells its replacement freed
        acc.add("rules", m * cell_width(x + 1) + 1)
        acc.audit(f"turn {len(records)}")
        k += 1
    grammar.final_sequence = arr.tolist()
    run.seconds = time.perf_counter() - started
    return run


# ---------------------------------------------------------------------------
# Heuristic 1: dense frequency matrix
# ---------------------------------------------------------------------------


@dataclass
class FullTableResult:
    """Partial grammar from the matrix heuristic; ``grammar.final_sequence`` is the remaining text."""

    grammar: Grammar
    records: list[TurnRecord]
    handed_off: bool
    reason: str
    matrix_bits: int = 0

    @property
    def text(self) -> list[int]:
        return self.grammar.final_sequence


def matrix_bits(tau: int, n: int) -> int:
    return tau * tau * math.ceil(lg(n))


def heuristic_full_table(text, budget_bits: int, terminal_count: int | None = None,
                         min_freq: int = 3) -> FullTableResult:
    """Run Re-Pair turns with a ``tau x tau`` matrix holding every bigram frequency.

    Each turn takes the matrix maximum, replaces it, subtracts the lost
    occurrences and adds the exact counts of bigrams with the new symbol.
    Stops when the maximum drops below ``min_freq`` or when the matrix for
    one more symbol would not fit ``budget_bits``.
    """
    arr, sigma = _as_symbols(text)
    sigma = max(sigma, terminal_count or 0)
    n = arr.size
    grammar = Grammar(sigma)
    records: list[TurnRecord] = []
    if matrix_bits(sigma, n) > budget_bits:
        grammar.final_sequence = arr.tolist()
        return FullTableResult(grammar, records, True, "alphabet over budget")
    M = np.zeros((sigma, sigma), dtype=np.int64)
    if n >= 2:
        np.add.at(M, (arr[:-1][counted_positions(arr)], arr[1:][counted_positions(arr)]), 1)
    reason = "frequencies below threshold"
    handed_off = False
    while True:
        flat = int(np.argmax(M)) if M.size else 0
        top = int(M.flat[flat]) if M.size else 0
        if top < min_freq:
            break
        tau = grammar.tau
        if matrix_bits(tau + 1, n) > budget_bits:
            reason, handed_off = "alphabet would exceed budget", True
            break
        b = divmod(flat, tau)
        occ = greedy_occurrences(arr, b)
        for p, q in _decrement_events(arr, occ, b):
            M[p, q] -= 1
        M[b] = 0
        x = tau
        arr[occ] = x
        arr = np.delete(arr, occ + 1)
        M = np.pad(M, ((0, 1), (0, 1)))
        found, _ = neighbor_counts(arr, x)
        for (p, q), c in found.items():
            M[p, q] = c
        grammar.rules.append(b)
        records.append(TurnRecord(len(records) + 1, b, top, x, 0))
    grammar.final_sequence = arr.tolist()
    return FullTableResult(grammar, records, handed_off, reason, matrix_bits(grammar.tau, n))


def heuristic_repair(data, budget_bits: int, policy: CapacityPolicy | None = None) -> RepairRun:
    """Matrix heuristic first, then the regular engine on what remains."""
    part = heuristic_full_table(data, budget_bits)
    g = part.grammar
    rest = run_repair(g.final_sequence, policy, terminal_count=g.tau) if len(g.final_sequence) > 1 else None
    grammar = Grammar(g.terminal_count, list(g.rules), list(g.final_sequence))
    records = list(part.records)
    if rest is not None:
        grammar.rules += rest.grammar.rules
        grammar.final_sequence = rest.grammar.final_sequence
        records += [TurnRecord(len(records) + r.turn, r.replaced, r.freq, r.new_symbol, r.round + 1)
                    for r in rest.records]
    return RepairRun(grammar, records, rest.rounds if rest else [], rest.low_freq_turns if rest else 0)


# ---------------------------------------------------------------------------
# Heuristic 2: per-position prefix counts
# ---------------------------------------------------------------------------


def heuristic_position_table(text, accountant: MemoryAccountant | None = None) -> tuple[Bigram, int]:
    """Most frequent bigram via one prefix count per text position.

    Entry ``j`` ends up holding the frequency of the bigram at ``j`` within
    the prefix ending at ``j + 1``.  The table is filled in one pass per
    distinct first symbol, each pass with one counter per second symbol.
    The largest entry is the frequency of a most frequent bigram.
    """
    arr = np.asarray(text.tolist() if isinstance(text, PackedText) else text, dtype=np.int64)
    n = arr.size
    if n < 2:
        raise ValueError("text has no bigram")
    tau = int(arr.max()) + 1
    counted = counted_positions(arr).tolist()
    s = arr.tolist()
    table = [0] * (n - 1)
    if accountant is not None:
        accountant.charge("position table", (n - 1) * math.ceil(lg(n / 2)))
        accountant.charge("counters", tau * math.ceil(lg(n)))
        accountant.audit("position table")
    for a in sorted(set(s[:-1])):
        bank = [0] * tau
        for j in range(n - 1):
            if s[j] == a:
                if counted[j]:
                    bank[s[j + 1]] += 1
                table[j] = bank[s[j + 1]]
    if accountant is not None:
        accountant.release("position table")
        accountant.release("counters")
    top = max(table)
    best = min((s[j], s[j + 1]) for j in range(n - 1) if table[j] == top)
    return best, top


# ---------------------------------------------------------------------------
# Heuristic 3: majority vote
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MajorityResult:
    bigram: Bigram
    freq: int
    premise_holds: bool

    def __iter__(self):
        yield self.bigram
        yield self.freq


def heuristic_majority(text) -> MajorityResult:
    """Majority vote over the stream of adjacent pairs, then an exact recount.

    When one bigram occurs more often than all others together, the vote
    returns it.  ``premise_holds`` reports whether that was the case; the
    frequency is exact for the returned bigram either way.
    """
    s = text.tolist() if hasattr(text, "tolist") else list(text)
    n = len(s)
    if n < 2:
        raise ValueError("text has no bigram")
    cand: Bigram = (s[0], s[1])
    votes = 0
    for i in range(n - 1):
        pair = (s[i], s[i + 1])
        if votes == 0:
            cand, votes = pair, 1
        elif pair == cand:
            votes += 1
        else:
            votes -= 1
    freq = bigram_frequency(s, cand)
    # total number of counted pair occurrences, from run lengths alone
    total = 0
    run = 1
    for i in range(1, n + 1):
        if i < n and s[i] == s[i - 1]:
            run += 1
            continue
        total += run // 2 + (1 if i < n else 0)
        run = 1
    return MajorityResult(cand, freq, freq > total - freq)
