"""Round/turn Re-Pair engine with a capacity-bounded frequency table.

A round starts by computing the table of the ``f_k`` most frequent bigrams;
its lowest frequency becomes the round threshold.  Each turn replaces the
table's maximum, patches the frequencies that the replacement changed and
admits bigrams with the new non-terminal that reach the threshold.  The round
ends once the table is empty.  When no bigram occurs three times any more, a
simple scan handles the remaining frequency-two bigrams.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from .core import (
    Bigram,
    CapacityPolicy,
    Grammar,
    MemoryAccountant,
    PackedText,
    cell_width,
    compact,
    widen,
)
from .freq import FrequencyTable, counted_positions, top_d_tradeoff

STRATEGIES = ("smallspace", "naive", "bitparallel", "hybrid", "mr")


@dataclass(frozen=True)
class TurnRecord:
    turn: int
    replaced: tuple[int, ...]
    freq: int
    new_symbol: int
    round: int


@dataclass
class RoundInfo:
    k: int
    capacity: int
    threshold: int
    gamma: float
    counter: str
    turns: int = 0


@dataclass
class RoundState:
    k: int
    f_k: int
    t: int
    F: FrequencyTable
    turn: int


@dataclass
class RepairRun:
    """Everything a compression run produced; unpacks as ``(grammar, records)``."""

    grammar: Grammar
    records: list[TurnRecord]
    rounds: list[RoundInfo] = field(default_factory=list)
    low_freq_turns: int = 0
    accountant: MemoryAccountant | None = None
    seconds: float = 0.0

    def __iter__(self) -> Iterator:
        yield self.grammar
        yield self.records

    @property
    def turns(self) -> int:
        return len(self.records)

    @property
    def round_count(self) -> int:
        """Frequency-table builds, plus one when the frequency-two phase made a turn."""
        return len(self.rounds) + (1 if self.low_freq_turns else 0)

    @property
    def peak_bits(self) -> int:
        return self.accountant.peak_bits if self.accountant else 0


# ---------------------------------------------------------------------------
# replacement
# ---------------------------------------------------------------------------


def _runs(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For every position, the start and end index of its run of equal symbols."""
    n = arr.size
    idx = np.arange(n)
    start = np.ones(n, dtype=bool)
    start[1:] = arr[1:] != arr[:-1]
    end = np.ones(n, dtype=bool)
    end[:-1] = start[1:]
    run_start = np.maximum.accumulate(np.where(start, idx, 0))
    run_end = np.minimum.accumulate(np.where(end, idx, n - 1)[::-1])[::-1]
    return run_start, run_end


def greedy_occurrences(arr: np.ndarray, b: Bigram) -> np.ndarray:
    left, right = b
    if arr.size < 2:
        return np.zeros(0, dtype=np.int64)
    hit = (arr[:-1] == left) & (arr[1:] == right)
    if left == right:
        hit &= counted_positions(arr)
    return np.flatnonzero(hit)


def _decrement_events(arr: np.ndarray, occ: np.ndarray, b: Bigram) -> list[Bigram]:
    """Bigrams losing one counted occurrence when ``occ`` (occurrences of ``b``) are replaced."""
    n = arr.size
    left, right = b
    run_start, run_end = _runs(arr)
    events: list[np.ndarray] = []
    if left != right:
        prev_occ = np.zeros(occ.size, dtype=bool)
        prev_occ[1:] = occ[1:] - occ[:-1] == 2
        # left side: (a, left)
        i = occ[(occ > 0) & ~prev_occ]
        a = arr[i - 1]
        keep = (a != left) | ((i - run_start[i] + 1) % 2 == 0)
        events.append(np.stack([a[keep], np.full(keep.sum(), left)], axis=1))
        # right side: (right, d)
        i = occ[occ + 2 < n]
        d = arr[i + 2]
        keep = (d != right) | ((run_end[i + 1] - i) % 2 == 0)
        events.append(np.stack([np.full(keep.sum(), right), d[keep]], axis=1))
    else:
        # one event per run boundary: the run start loses (a, b), an even run loses (b, d)
        firsts = occ[run_start[occ] == occ]
        s = firsts[firsts > 0]
        events.append(np.stack([arr[s - 1], np.full(s.size, left)], axis=1))
        e = run_end[firsts]
        even = ((e - firsts + 1) % 2 == 0) & (e + 1 < n)
        events.append(np.stack([np.full(even.sum(), left), arr[e[even] + 1]], axis=1))
    pairs = np.concatenate(events) if events else np.zeros((0, 2), dtype=np.int64)
    return [(int(p), int(q)) for p, q in pairs]


def replace_all(text: PackedText, b: Bigram, x: int) -> tuple[PackedText, int, list[Bigram]]:
    """Replace the greedy occurrences of ``b`` by ``x``.

    Returns the compacted text, the number ``h`` of replacements and the
    bigrams whose frequency dropped by one (one entry per lost occurrence).
    """
    need = cell_width(x + 1)
    if text.width < need:
        text = widen(text, need)
    arr = text.to_array()
    occ = greedy_occurrences(arr, b)
    h = int(occ.size)
    if h == 0:
        return text, 0, []
    events = _decrement_events(arr, occ, b)
    arr[occ] = x
    out = PackedText.from_symbols(arr, text.width)
    out.freed = text.freed
    out.mark_dead(occ + 1)
    return compact(out), h, events


class NeighborBuffer:
    """Sorted scratch list of the symbols next to the occurrences of a new symbol.

    Holds at most ``capacity`` symbols; the capacity is the number of
    replacements of the turn, which is exactly the space those replacements
    freed.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.chars = np.zeros(0, dtype=np.int64)

    def __len__(self) -> int:
        return int(self.chars.size)

    def fill(self, symbols: np.ndarray) -> None:
        if symbols.size > self.capacity:
            raise ValueError(f"{symbols.size} neighbours do not fit a buffer of {self.capacity}")
        self.chars = np.sort(symbols)

    def counts(self) -> list[tuple[int, int]]:
        """(symbol, multiplicity) pairs from one pass over the sorted buffer."""
        vals, cnt = np.unique(self.chars, return_counts=True)
        return list(zip(vals.tolist(), cnt.tolist()))


def neighbor_counts(arr: np.ndarray, x: int, h: int | None = None) -> tuple[dict[Bigram, int], int]:
    """Exact frequencies of every bigram containing ``x``, via two neighbour-buffer passes.

    Returns the counts and the largest number of symbols the buffer held.
    """
    pos = np.flatnonzero(arr == x)
    if pos.size == 0:
        return {}, 0
    n = arr.size
    buf = NeighborBuffer(pos.size if h is None else h)
    run_start, _ = _runs(arr)
    found: dict[Bigram, int] = {}
    # left pass: symbol before each x; inside x-runs only every second x counts
    j = pos[pos > 0]
    before = arr[j - 1]
    buf.fill(before[(before != x) | ((j - run_start[j]) % 2 == 1)])
    used = len(buf)
    for a, c in buf.counts():
        found[(a, x)] = c
    # right pass: symbol after each x, x-x pairs were handled above
    j = pos[pos + 1 < n]
    after = arr[j + 1]
    buf.fill(after[after != x])
    used = max(used, len(buf))
    for d, c in buf.counts():
        found[(x, d)] = c
    return found, used


def update_after_replace(state: RoundState, text: PackedText | np.ndarray, x: int, h: int,
                         dec_events: Iterable[Bigram], replaced: Bigram | None = None,
                         accountant: MemoryAccountant | None = None) -> RoundState:
    """Bring the table in line with the text after one turn.

    Drops the replaced bigram, applies the decrements, then inserts the
    bigrams with ``x`` that reach the threshold.  When an insertion evicts an
    entry, the threshold rises to the evicted frequency so that nothing
    outside the table can beat the table's maximum.
    """
    F = state.F
    if replaced is not None:
        F.remove(replaced)
    for bg, by in Counter(dec_events).items():
        F.decrement(bg, by)
    arr = text.to_array() if isinstance(text, PackedText) else text
    found, used = neighbor_counts(arr, x, h)
    if accountant is not None:
        accountant.charge("buffer", used * cell_width(x + 1))
        accountant.audit(f"turn {state.turn} buffer")
        accountant.release("buffer")
    for bg in sorted(found):
        f = found[bg]
        if f >= state.t:
            evicted = F.insert(bg, f)
            if evicted is not None and evicted[1] > state.t:
                state.t = evicted[1]
                F.threshold = state.t
    return state


# ---------------------------------------------------------------------------
# capacity growth
# ---------------------------------------------------------------------------


def grow_capacity(f_k: int, alpha_beta: float) -> int:
    """``f_k + ceil(max(2, (f_k - 1) / 2) / (alpha * beta))``."""
    return f_k + math.ceil(max(2.0, (f_k - 1) / 2) / alpha_beta)


def next_capacity(policy: CapacityPolicy, f_k: int, n_i: int, n: int, sigma_next: int,
                  accountant: MemoryAccountant | None = None) -> int:
    """Capacity of the next round, with ``beta`` taken from the current text.

    With an accountant, the result is capped so the table fits the remaining
    budget (never below ``f_k``).
    """
    f_next = grow_capacity(f_k, policy.alpha * policy.beta(sigma_next, n_i, n))
    if accountant is not None:
        delta = policy.entry_bits(sigma_next, n_i)
        room = accountant.remaining_bits() - 2 * cell_width(sigma_next)
        f_next = max(f_k, min(f_next, int(room // (policy.alpha * delta))))
    return f_next


# ---------------------------------------------------------------------------
# frequency-two tail
# ---------------------------------------------------------------------------


def low_freq_phase(text: PackedText, grammar: Grammar, records: list[TurnRecord] | None = None,
                   round_index: int = 0, accountant: MemoryAccountant | None = None) -> tuple[PackedText, Grammar]:
    """Replace bigrams of frequency two, scanning left to right.

    Position ``k`` only moves forward: the text before it holds no bigram
    with a second non-overlapping occurrence further right.
    """
    arr = text.to_array()
    k = 0
    while True:
        n = arr.size
        hit = None
        j = k
        while j < n - 3:
            a, c = arr[j], arr[j + 1]
            later = np.flatnonzero((arr[j + 2:-1] == a) & (arr[j + 3:] == c))
            if later.size:
                hit = (j, j + 2 + int(later[0]))
                break
            j += 1
        if hit is None:
            break
        j, j2 = hit
        x = grammar.terminal_count + len(grammar.rules)
        bg = (int(arr[j]), int(arr[j + 1]))
        grammar.rules.append(bg)
        if records is not None:
            records.append(TurnRecord(len(records) + 1, bg, 2, x, round_index))
        arr[j] = x
        arr[j2] = x
        arr = np.delete(arr, [j + 1, j2 + 1])
        k = j
        if accountant is not None:
            accountant.tau = x + 1
            accountant.charge("text", arr.size * cell_width(x + 1))
            accountant.add("rules", 2 * cell_width(x + 1))
            accountant.audit(f"low-frequency turn {len(grammar.rules)}")
    out = PackedText.from_symbols(arr, max(text.width, cell_width(grammar.tau)))
    out.freed = text.freed + (text.len - arr.size)
    return out, grammar


# ---------------------------------------------------------------------------
# main loop
# ---------------------------------------------------------------------------


def _make_table(kind: str, capacity: int, F: FrequencyTable):
    if kind == "index":
        from .broadword import FrequencyIndex
        return FrequencyIndex.from_table(F, capacity)
    F.capacity = capacity
    return F


def _as_symbols(data) -> tuple[np.ndarray, int]:
    arr = np.asarray(data if isinstance(data, np.ndarray) else list(data), dtype=np.int64)
    if arr.size == 0:
        raise ValueError("empty input")
    if arr.min() < 0:
        raise ValueError("symbols must be non-negative")
    return arr, int(arr.max()) + 1


def run_repair(data, policy: CapacityPolicy | None = None, strategy: str = "smallspace",
               audit: bool = False, terminal_count: int | None = None,
               schedule=None, on_turn: Callable[[RoundState, PackedText], None] | None = None) -> RepairRun:
    """Compute the Re-Pair grammar of ``data`` (a sequence of terminal ids).

    ``strategy`` selects the round-start counter: ``smallspace`` (block
    trade-off counter), ``bitparallel`` (packed per-position counting with a
    heap-backed table), ``hybrid`` (per-round choice between the two),
    ``naive`` (full recount every turn) or ``mr`` (MR-Re-Pair).  With
    ``audit`` the space ledger raises on any budget breach.  ``on_turn`` is
    called with the round state and the new text after every main-loop turn.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    policy = policy or CapacityPolicy()
    if strategy == "mr":
        from .variants import mr_repair
        return mr_repair(data, policy, audit=audit, terminal_count=terminal_count)
    if strategy == "naive":
        return _naive_repair(data, terminal_count)

    started = time.perf_counter()
    arr, sigma = _as_symbols(data)
    sigma = max(sigma, terminal_count or 0)
    n = arr.size
    text = PackedText.from_symbols(arr, cell_width(sigma))
    grammar = Grammar(sigma)
    records: list[TurnRecord] = []
    acc = MemoryAccountant(n, policy.c, tau=sigma, strict=audit)
    acc.charge("text", text.bits)
    run = RepairRun(grammar, records, accountant=acc)
    if n < 2:
        grammar.final_sequence = arr.tolist()
        return run

    sched = None
    if strategy == "hybrid":
        from .broadword import HybridSchedule
        sched = schedule or HybridSchedule()

    f = policy.f0
    k = 0
    while True:
        tau = grammar.tau
        cur = text.to_array()
        counter = "tradeoff"
        if strategy == "bitparallel":
            counter = "bitparallel"
        elif sched is not None:
            counter = sched.pick(k, f, cur.size, tau)
        acc.release("table")
        if counter == "bitparallel":
            from .broadword import top_d_bitparallel
            F = top_d_bitparallel(text, f, accountant=acc)
        else:
            F = top_d_tradeoff(cur, f, accountant=acc)
        acc.audit(f"round {k} counting")
        F.entries = {bg: c for bg, c in F.entries.items() if c >= 3}
        gamma = policy.gamma(tau + 1, cur.size, n)
        info = RoundInfo(k, f, min(F.entries.values(), default=0), gamma, counter)
        run.rounds.append(info)
        if not F.entries:
            break
        F.threshold = info.threshold
        table = _make_table("index" if strategy in ("bitparallel", "hybrid") else "scan", f, F)
        state = RoundState(k, f, info.threshold, table, len(records))
        delta = policy.entry_bits(tau + 1, cur.size)
        acc.charge("table", math.ceil(policy.alpha * f * delta))
        acc.audit(f"round {k} start")
        while len(state.F):
            b, freq = state.F.max_entry()
            x = grammar.tau
            acc.tau = x + 1
            text = widen(text, cell_width(x + 1))
            text, h, events = replace_all(text, b, x)
            grammar.rules.append(b)
            records.append(TurnRecord(len(records) + 1, b, freq, x, k))
            info.turns += 1
            state.turn = len(records)
            acc.charge("text", text.bits)
            acc.add("rules", 2 * cell_width(x + 1))
            update_after_replace(state, text, x, h, events, replaced=b, accountant=acc)
            acc.audit(f"turn {state.turn}")
            if on_turn is not None:
                on_turn(state, text)
        acc.release("table")
        f = next_capacity(policy, f, text.len, n, grammar.tau + 1, acc)
        k += 1

    before = len(records)
    text, grammar = low_freq_phase(text, grammar, records, round_index=k + 1, accountant=acc)
    run.low_freq_turns = len(records) - before
    acc.release("table")
    acc.audit("final")
    grammar.final_sequence = text.tolist()
    run.seconds = time.perf_counter() - started
    return run


def _naive_repair(data, terminal_count: int | None = None) -> RepairRun:
    """Reference Re-Pair: full recount and maximum pick every turn, down to frequency two."""
    started = time.perf_counter()
    arr, sigma = _as_symbols(data)
    sigma = max(sigma, terminal_count or 0)
    grammar = Grammar(sigma)
    records: list[TurnRecord] = []
    run = RepairRun(grammar, records)
    k = 0
    while arr.size >= 2:
        base = grammar.tau + 1
        codes = (arr[:-1] * base + arr[1:])[counted_positions(arr)]
        uniq, cnt = np.unique(codes, return_counts=True)
        run.rounds.append(RoundInfo(k, int(uniq.size), 2, 0.0, "full"))
        top = int(cnt.max())
        if top < 2:
            break
        code = int(uniq[np.flatnonzero(cnt == top)[0]])
        b = (code // base, code % base)
        x = grammar.tau
        occ = greedy_occurrences(arr, b)
        arr[occ] = x
        arr = np.delete(arr, occ + 1)
        grammar.rules.append(b)
        records.append(TurnRecord(len(records) + 1, b, top, x, k))
        run.rounds[-1].turns = 1
        k += 1
    grammar.final_sequence = arr.tolist()
    run.seconds = time.perf_counter() - started
    return run
