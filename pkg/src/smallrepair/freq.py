"""Non-overlapping bigram frequencies.

``bigram_frequency`` and ``all_frequencies`` are plain scans used as the
reference.  ``top_d_tradeoff`` is the block-partitioned counter that finds the
``d`` most frequent bigrams while holding only two tables of ``d`` entries.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .core import Bigram, CapacityPolicy, MemoryAccountant


def _as_list(text) -> list[int]:
    if isinstance(text, np.ndarray):
        return text.tolist()
    if hasattr(text, "tolist"):
        return text.tolist()
    return list(text)


def bigram_frequency(text: Sequence[int], b: Bigram) -> int:
    """Greedy leftmost count of non-overlapping occurrences of ``b``."""
    s = _as_list(text)
    left, right = b
    count = 0
    i = 0
    n = len(s)
    while i < n - 1:
        if s[i] == left and s[i + 1] == right:
            count += 1
            i += 2
        else:
            i += 1
    return count


def all_frequencies(text: Sequence[int]) -> dict[Bigram, int]:
    """Frequency of every bigram of ``text`` from a single left-to-right scan."""
    s = _as_list(text)
    table: dict[Bigram, int] = {}
    taken = False  # did the pair ending at i get counted as a same-symbol pair?
    for i in range(len(s) - 1):
        a, b = s[i], s[i + 1]
        if a == b:
            if taken and s[i - 1] == a:
                taken = False
                continue
            taken = True
        else:
            taken = False
        table[(a, b)] = table.get((a, b), 0) + 1
    return table


def counted_positions(arr: np.ndarray) -> np.ndarray:
    """Mask over pair positions: True where the pair at ``i`` is a counted occurrence.

    Pairs of distinct symbols are always counted; inside a run of equal
    symbols only pairs starting at even offsets from the run start are.
    """
    n = arr.size
    if n < 2:
        return np.zeros(0, dtype=bool)
    idx = np.arange(n)
    start = np.ones(n, dtype=bool)
    start[1:] = arr[1:] != arr[:-1]
    run_start = np.maximum.accumulate(np.where(start, idx, 0))
    offset = idx - run_start
    same = ~start[1:]
    return ~same | (offset[:-1] % 2 == 0)


class FrequencyTable:
    """Capacity-bounded table of ``(bigram, frequency)`` pairs.

    Maximum and minimum are found by linear scans.  Ties go to the
    lexicographically smaller bigram for the maximum and to the larger one
    for the minimum, so the eviction order is the reverse of selection order.
    """

    def __init__(self, capacity: int, threshold: int = 0, entries: dict[Bigram, int] | None = None):
        self.capacity = capacity
        self.threshold = threshold
        self.entries: dict[Bigram, int] = dict(entries or {})

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, b: Bigram) -> bool:
        return b in self.entries

    def __repr__(self) -> str:
        return f"FrequencyTable(capacity={self.capacity}, threshold={self.threshold}, entries={self.entries})"

    def get(self, b: Bigram) -> int | None:
        return self.entries.get(b)

    def items(self):
        return self.entries.items()

    def frequencies(self) -> list[int]:
        return sorted(self.entries.values(), reverse=True)

    def max_entry(self) -> tuple[Bigram, int] | None:
        best = None
        for b, f in self.entries.items():
            if best is None or f > best[1] or (f == best[1] and b < best[0]):
                best = (b, f)
        return best

    def min_entry(self) -> tuple[Bigram, int] | None:
        worst = None
        for b, f in self.entries.items():
            if worst is None or f < worst[1] or (f == worst[1] and b > worst[0]):
                worst = (b, f)
        return worst

    def remove(self, b: Bigram) -> int | None:
        return self.entries.pop(b, None)

    def decrement(self, b: Bigram, by: int = 1) -> int | None:
        """Lower the frequency of ``b``; drops it once below the threshold.

        Returns the new frequency, or None when ``b`` was absent.
        """
        f = self.entries.get(b)
        if f is None:
            return None
        f -= by
        if f < self.threshold:
            del self.entries[b]
        else:
            self.entries[b] = f
        return f

    def insert(self, b: Bigram, f: int) -> tuple[Bigram, int] | None:
        """Insert ``b`` and, if over capacity, evict the minimum entry.

        The incoming entry takes part in the eviction choice, so it is the
        one dropped when it ranks lowest.  Returns the evicted pair.
        """
        self.entries[b] = f
        if len(self.entries) <= self.capacity:
            return None
        victim = self.min_entry()
        del self.entries[victim[0]]
        return victim


def merge_tables(F: FrequencyTable, F2: FrequencyTable, d: int) -> FrequencyTable:
    """Union of two exact tables truncated to the ``d`` highest frequencies."""
    merged = dict(F.entries)
    merged.update(F2.entries)
    best = sorted(merged.items(), key=lambda kv: (-kv[1], kv[0]))[:d]
    out = FrequencyTable(d, entries=dict(best))
    out.threshold = min((f for _, f in best), default=0)
    return out


def _pair_codes(arr: np.ndarray) -> tuple[np.ndarray, int]:
    base = int(arr.max()) + 1
    return arr[:-1] * base + arr[1:], base


def top_d_tradeoff(text: Iterable[int], d: int, accountant: MemoryAccountant | None = None) -> FrequencyTable:
    """Frequencies of the ``d`` most frequent bigrams using two ``d``-entry tables.

    The text is cut into blocks of ``d`` bigram start positions (consecutive
    blocks share one text position).  For each block the distinct bigrams
    not already held are sorted into a scratch table, counted over the whole
    text by one scan with binary search, and merged into the result.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    arr = np.asarray(_as_list(text) if not isinstance(text, np.ndarray) else text, dtype=np.int64)
    n = arr.size
    if n < 2:
        return FrequencyTable(d)
    codes, base = _pair_codes(arr)
    stream = codes[counted_positions(arr)]
    if accountant is not None:
        delta = CapacityPolicy.entry_bits(base, n)
        accountant.charge("topd", 2 * d * delta)

    if d >= n:
        uniq, cnt = np.unique(stream, return_counts=True)
        order = np.lexsort((uniq, -cnt))[:d]
        table = {(int(uniq[k]) // base, int(uniq[k]) % base): int(cnt[k]) for k in order}
        return _finish(table, d, accountant)

    held = np.zeros(0, dtype=np.int64)
    table: dict[int, int] = {}
    m = codes.size
    pos = 0
    while pos < m:
        scratch = np.setdiff1d(np.unique(codes[pos: pos + d]), held, assume_unique=True)
        if scratch.size == 0:
            # jump to the next block holding a bigram not in the table
            fresh = np.flatnonzero(~np.isin(codes[pos:], held))
            if fresh.size == 0:
                break
            pos += int(fresh[0]) // d * d
            continue
        slot = np.searchsorted(scratch, stream)
        slot_c = np.minimum(slot, scratch.size - 1)
        hit = scratch[slot_c] == stream
        counts = np.bincount(slot_c[hit], minlength=scratch.size)
        for code, f in zip(scratch.tolist(), counts.tolist()):
            table[code] = f
        best = sorted(table.items(), key=lambda kv: (-kv[1], kv[0]))[:d]
        table = dict(best)
        held = np.fromiter(table.keys(), dtype=np.int64, count=len(table))
        pos += d
    pairs = {(code // base, code % base): f for code, f in table.items()}
    return _finish(pairs, d, accountant)


def _finish(table: dict[Bigram, int], d: int, accountant: MemoryAccountant | None) -> FrequencyTable:
    if accountant is not None:
        accountant.release("topd")
    out = FrequencyTable(d, entries=table)
    out.threshold = min(table.values(), default=0)
    return out
