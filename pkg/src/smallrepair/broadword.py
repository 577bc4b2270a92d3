"""Word-packed kernels: character/bigram matching inside 64-bit words.

All word-level functions accept numpy ``uint64`` arrays and operate on every
word at once; a Python int is accepted as a single word.  Cell ``i`` of a
word occupies bits ``[i*x, (i+1)*x)``, so the text reads from the least
significant cell upwards.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .core import WORD_BITS, Bigram, CapacityPolicy, MemoryAccountant, PackedText, cell_width, pack_cells, unpack_cells
from .freq import FrequencyTable, bigram_frequency

U64 = np.uint64
ALL = U64(0xFFFFFFFFFFFFFFFF)

_M1 = U64(0x5555555555555555)
_M2 = U64(0x3333333333333333)
_M4 = U64(0x0F0F0F0F0F0F0F0F)
_H01 = U64(0x0101010101010101)


@dataclass(frozen=True)
class BroadwordContext:
    """Cell geometry of a word: ``q`` cells of ``x`` bits, plus the H/L masks."""

    x: int
    word_bits: int = WORD_BITS

    def __post_init__(self):
        if not 1 <= self.x <= self.word_bits:
            raise ValueError(f"cell width {self.x} out of range")

    @property
    def q(self) -> int:
        return self.word_bits // self.x

    @property
    def L(self) -> np.uint64:
        return U64(sum(1 << (i * self.x) for i in range(self.q)))

    @property
    def H(self) -> np.uint64:
        return U64(int(self.L) << (self.x - 1))

    @property
    def full(self) -> np.uint64:
        return U64((1 << (self.q * self.x)) - 1) if self.q * self.x < 64 else ALL

    def repeat(self, c: int) -> np.uint64:
        """``c`` copied into all ``q`` cells."""
        return U64(int(self.L) * c)

    def cells_mask(self, count: int, parity: int | None = None) -> np.uint64:
        """All-ones cells for the first ``count`` cells, optionally one index parity only."""
        cell = (1 << self.x) - 1
        bits = 0
        for i in range(min(count, self.q)):
            if parity is None or i % 2 == parity:
                bits |= cell << (i * self.x)
        return U64(bits)

    @classmethod
    def for_tau(cls, tau: int) -> "BroadwordContext":
        return cls(cell_width(tau))


def _words(w) -> tuple[np.ndarray, bool]:
    if isinstance(w, np.ndarray):
        return w.astype(U64, copy=False), False
    return np.array([int(w)], dtype=U64), True


def _back(arr: np.ndarray, scalar: bool):
    return int(arr[0]) if scalar else arr


def find_char_mask(word, c: int, ctx: BroadwordContext):
    """Per cell: all ones where the cell equals ``c``, zero elsewhere.

    XOR with ``c`` repeated, then a zero-cell test.  Setting each cell's high
    bit before subtracting ``L`` keeps borrows inside their cell, so a match
    never leaks into its neighbour (the last cell included).
    """
    S, scalar = _words(word)
    with np.errstate(over="ignore"):
        X = S ^ ctx.repeat(c)
        Y = (X | ctx.H) - ctx.L
        Z = ~(Y | X) & ctx.H
        out = (Z - (Z >> U64(ctx.x - 1))) | Z
    return _back(out & ctx.full, scalar)


def popcount(word):
    """Set bits per word, SWAR style."""
    X, scalar = _words(word)
    with np.errstate(over="ignore"):
        X = X - ((X >> U64(1)) & _M1)
        X = (X & _M2) + ((X >> U64(2)) & _M2)
        X = (X + (X >> U64(4))) & _M4
        X = (X * _H01) >> U64(56)
    return _back(X.astype(np.int64), scalar)


def popcount_cells(mask, ctx: BroadwordContext) -> int:
    """Number of all-ones cells in ``mask`` (summed over an array of words)."""
    return int(np.sum(popcount(_words(mask)[0]))) // ctx.x


def msb(word):
    """0-based index of the highest set bit, -1 for zero."""
    X, scalar = _words(word)
    for s in (1, 2, 4, 8, 16, 32):
        X = X | (X >> U64(s))
    return _back(popcount(X) - 1, scalar)


def delete_prefix_run(word, nbits: int = WORD_BITS):
    """Clear the maximal run of ones at the most significant end of an ``nbits`` vector."""
    X, scalar = _words(word)
    width = ALL if nbits == 64 else U64((1 << nbits) - 1)
    inv = ~X & width
    p = msb(inv)
    keep = np.where(p < 0, U64(0), ((U64(1) << (p + 1).astype(U64)) - U64(1)))
    keep = np.where(p >= 63, ALL, keep)
    return _back(keep & X, scalar)


def delete_suffix_run(word):
    """Clear the maximal run of ones at the least significant end."""
    X, scalar = _words(word)
    with np.errstate(over="ignore"):
        out = ~((~X - U64(1)) & X) & X
    return _back(out, scalar)


# ---------------------------------------------------------------------------
# chunk geometry helpers
# ---------------------------------------------------------------------------


def _valid_counts(text: PackedText) -> np.ndarray:
    nw = text.words.size
    v = np.full(nw, text.q, dtype=np.int64)
    if nw:
        v[-1] = text.len - (nw - 1) * text.q
    return v


def _per_word(full_mask: np.uint64, last_mask: np.uint64, nw: int) -> np.ndarray:
    out = np.full(nw, full_mask, dtype=U64)
    if nw:
        out[-1] = last_mask
    return out


def _pair_masks(text: PackedText, ctx2: BroadwordContext):
    """Valid double-cell slots for the even pass and the one-cell-shifted odd pass."""
    q, v_last = text.q, int(_valid_counts(text)[-1])

    def slots(v, first):
        # slot k covers cells first+2k and first+2k+1
        bits = 0
        cell = (1 << ctx2.x) - 1
        for k in range(ctx2.q):
            if first + 2 * k + 1 < v:
                bits |= cell << (k * ctx2.x)
        return U64(bits)

    nw = text.words.size
    even = _per_word(slots(q, 0), slots(v_last, 0), nw)
    odd = _per_word(slots(q, 1), slots(v_last, 1), nw)
    return even, odd


def _run_parts(words: np.ndarray, valid: np.ndarray, b: int, ctx: BroadwordContext):
    """Run decomposition of the ``b`` cells of each word.

    Returns (M, prefix_len, suffix_bits, first_chars): prefix/suffix are the
    runs touching the low/high chunk border, ``first_chars`` marks, for runs
    strictly inside the chunk, the first symbol of every counted ``bb``.
    """
    x = ctx.x
    L = ctx.L
    M = find_char_mask(words, b, ctx) & valid
    with np.errstate(over="ignore"):
        pre_bits = M & ~(M + U64(1))
    filled = M | ~valid
    suffix_bits = filled & ~delete_prefix_run(filled) & valid
    inner = delete_suffix_run(M) & ~suffix_bits
    B = inner & ~(inner << U64(x))
    E = inner & ~(inner >> U64(x))
    trimmed = inner & ~E
    firsts = np.zeros_like(M)
    for parity in (0, 1):
        P = ctx.cells_mask(ctx.q, parity)
        with np.errstate(over="ignore"):
            X = (E & L) - (B & P & L)
        X = X & trimmed
        firsts |= X & P
    return M, popcount(pre_bits) // x, suffix_bits, firsts


def run_masks(word: int, b: int, ctx: BroadwordContext, length: int) -> dict[str, list[int]]:
    """Intermediate masks of the same-symbol pipeline on one chunk, as 0/1 per position.

    Keys: ``find`` (cells equal to ``b``), ``no_prefix`` (prefix run erased),
    ``inner`` (both border runs erased), ``starts``/``ends`` (first and last
    cell of every inner run) and ``firsts`` (first symbol of each counted pair).
    """
    valid = np.array([ctx.cells_mask(length)], dtype=U64)
    w = np.array([word], dtype=U64)
    M = find_char_mask(w, b, ctx) & valid
    filled = M | ~valid
    suffix_bits = filled & ~delete_prefix_run(filled) & valid
    no_prefix = delete_suffix_run(M)
    inner = no_prefix & ~suffix_bits
    B = inner & ~(inner << U64(ctx.x))
    E = inner & ~(inner >> U64(ctx.x))
    _, _, _, firsts = _run_parts(w, valid, b, ctx)

    def flags(m):
        cells = unpack_cells(m, length, ctx.x)
        return [int(c != 0) for c in cells]

    return {"find": flags(M), "no_prefix": flags(no_prefix), "inner": flags(inner),
            "starts": flags(B), "ends": flags(E), "firsts": flags(firsts)}


def interior_pair_count(word: int, b: int, ctx: BroadwordContext, length: int) -> int:
    """Frequency of ``bb`` in one chunk, ignoring runs that touch either border."""
    valid = np.array([ctx.cells_mask(length)], dtype=U64)
    _, _, _, firsts = _run_parts(np.array([word], dtype=U64), valid, b, ctx)
    return popcount_cells(firsts, ctx)


# ---------------------------------------------------------------------------
# bigram counting and replacement over a whole packed text
# ---------------------------------------------------------------------------


def _distinct_pair_masks(text: PackedText, b: Bigram) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Match masks for pairs starting at even and odd cells, plus pairs across word borders."""
    x, q = text.width, text.q
    left, right = b
    words = text.words
    ctx2 = BroadwordContext(2 * x)
    even_ok, odd_ok = _pair_masks(text, ctx2)
    code = left | (right << x)
    even = find_char_mask(words, code, ctx2) & even_ok
    odd = (find_char_mask(words >> U64(x), code, ctx2) & odd_ok) << U64(x)
    border = np.zeros(0, dtype=np.int64)
    if words.size > 1:
        m = (1 << x) - 1
        last = (words[:-1] >> U64((q - 1) * x)) & U64(m)
        head = words[1:] & U64(m)
        border = np.flatnonzero((last == U64(left)) & (head == U64(right)))
    return even, odd, border


def _distinct_first_positions(text: PackedText, b: Bigram) -> np.ndarray:
    x, q = text.width, text.q
    nw = text.words.size
    even, odd, border = _distinct_pair_masks(text, b)
    cells_even = unpack_cells(even, nw * q, x) != 0
    cells_odd = unpack_cells(odd, nw * q, x) != 0
    in_word = np.tile(np.arange(q) % 2, nw)
    first = (cells_even & (in_word == 0)) | (cells_odd & (in_word == 1))
    pos = np.flatnonzero(first[: text.len])
    if border.size:
        pos = np.union1d(pos, border * q + q - 1)
    return pos


def _same_symbol_scan(text: PackedText, b: int, want_positions: bool):
    x, q = text.width, text.q
    ctx = BroadwordContext(x)
    words = text.words
    v = _valid_counts(text)
    valid = _per_word(ctx.cells_mask(q), ctx.cells_mask(int(v[-1])), words.size)
    M, pre_len, suffix_bits, firsts = _run_parts(words, valid, b, ctx)
    full = (M == valid)
    suf_len = popcount(suffix_bits) // x
    inner = popcount(firsts) // x
    total = 0
    carry = 0
    start = 0
    spans: list[tuple[int, int]] = []
    for w in range(words.size):
        if full[w]:
            if carry == 0:
                start = w * q
            carry += int(v[w])
            continue
        run = carry + int(pre_len[w])
        if carry == 0:
            start = w * q
        total += run // 2
        if want_positions and run >= 2:
            spans.append((start, run))
        total += int(inner[w])
        carry = int(suf_len[w])
        start = w * q + int(v[w]) - carry
    total += carry // 2
    if want_positions and carry >= 2:
        spans.append((start, carry))
    if not want_positions:
        return total, None
    flags = unpack_cells(firsts, words.size * q, x)[: text.len] != 0
    for s, run in spans:
        flags[s: s + 2 * (run // 2): 2] = True
    return total, np.flatnonzero(flags)


class PackedCounter:
    """Frequency queries against one packed text.

    The slot masks and the one-cell-shifted copy of the words depend only
    on the text, so they are built once and shared by all queries.
    """

    def __init__(self, text: PackedText):
        self.text = text
        x, q = text.width, text.q
        self.scalar = text.len < 2 or 2 * x > WORD_BITS
        if self.scalar:
            return
        words = text.words
        self.ctx2 = BroadwordContext(2 * x)
        self.even_ok, self.odd_ok = _pair_masks(text, self.ctx2)
        self.shifted = words >> U64(x)
        m = U64((1 << x) - 1)
        self.last = (words[:-1] >> U64((q - 1) * x)) & m
        self.head = words[1:] & m

    def frequency(self, b: Bigram) -> int:
        text = self.text
        if text.len < 2:
            return 0
        if self.scalar:
            return bigram_frequency(text.to_array(), b)
        left, right = b
        if max(left, right) >> text.width:
            return 0  # a symbol wider than a cell cannot occur
        if left == right:
            return _same_symbol_scan(text, left, False)[0]
        # occurrences of a bigram of two distinct symbols never overlap
        code = left | (right << text.width)
        even = find_char_mask(text.words, code, self.ctx2) & self.even_ok
        odd = find_char_mask(self.shifted, code, self.ctx2) & self.odd_ok
        border = int(np.count_nonzero((self.last == U64(left)) & (self.head == U64(right))))
        return popcount_cells(even, self.ctx2) + popcount_cells(odd, self.ctx2) + border


def packed_bigram_frequency(text: PackedText, b: Bigram, ctx: BroadwordContext | None = None) -> int:
    """Non-overlapping frequency of ``b`` computed chunk-wise on the packed words."""
    return PackedCounter(text).frequency(b)


def occurrence_starts(text: PackedText, b: Bigram) -> np.ndarray:
    """Start positions of the greedy leftmost occurrences of ``b``."""
    if text.len < 2 or max(b) >> text.width:
        return np.zeros(0, dtype=np.int64)
    if 2 * text.width > WORD_BITS:
        from .engine import greedy_occurrences
        return greedy_occurrences(text.to_array(), b)
    if b[0] != b[1]:
        return _distinct_first_positions(text, b)
    return _same_symbol_scan(text, b[0], True)[1]


def packed_replace(text: PackedText, b: Bigram, x: int, ctx: BroadwordContext | None = None) -> tuple[PackedText, int]:
    """Replace every greedy occurrence of ``b`` by ``x``; returns the compacted text and count."""
    need = cell_width(x + 1)
    if text.width < need:
        text = text.widen(need)
    firsts = occurrence_starts(text, b)
    h = int(firsts.size)
    if h == 0:
        return text, 0
    width = text.width
    flags = np.zeros(text.words.size * text.q, dtype=np.uint64)
    flags[firsts + 1] = (1 << width) - 1
    Y = pack_cells(flags, width)
    L = BroadwordContext(width).L
    with np.errstate(over="ignore"):
        words = (text.words & ~Y) | ((Y & L) * U64(x))
    out = PackedText(words, text.len, width, text.freed)
    out.mark_dead(firsts)
    return out.compact(), h


# ---------------------------------------------------------------------------
# top-d counting and the heap-backed frequency index
# ---------------------------------------------------------------------------


def top_d_bitparallel(text, d: int, ctx: BroadwordContext | None = None,
                      accountant: MemoryAccountant | None = None) -> FrequencyTable:
    """The ``d`` most frequent bigrams, one packed frequency query per text position.

    Keeps a frequency-sorted table of at most ``d`` entries; positions whose
    bigram is already tabled are skipped.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if not isinstance(text, PackedText):
        text = PackedText.from_symbols(np.asarray(list(text) if not isinstance(text, np.ndarray) else text))
    arr = text.to_array()
    n = arr.size
    if accountant is not None and n:
        accountant.charge("topd", d * CapacityPolicy.entry_bits(int(arr.max()) + 1, n))
    ranked: list[tuple[int, Bigram]] = []  # (-freq, bigram), ascending = best first
    present: dict[Bigram, int] = {}
    counter = PackedCounter(text)
    left = arr[:-1].tolist()
    right = arr[1:].tolist()
    for a, c in zip(left, right):
        bg = (a, c)
        if bg in present:
            continue
        f = counter.frequency(bg)
        key = (-f, bg)
        if len(ranked) == d and key >= ranked[-1]:
            continue
        bisect.insort(ranked, key)
        present[bg] = f
        if len(ranked) > d:
            _, dropped = ranked.pop()
            del present[dropped]
    if accountant is not None:
        accountant.release("topd")
    out = FrequencyTable(d, entries=present)
    out.threshold = min(present.values(), default=0)
    return out


class FrequencyIndex:
    """Frequency table kept as a max-heap and a min-heap over one bigram store.

    ``store[s]`` holds the bigram of slot ``s`` and ``freq[s]`` its frequency;
    ``pos[s]`` gives the slot's index in both heaps.  Every operation is
    ``O(lg capacity)``; ``lookup`` goes through a dict keyed by bigram.
    """

    def __init__(self, capacity: int, threshold: int = 0):
        self.capacity = capacity
        self.threshold = threshold
        self.store: list[Bigram | None] = [None] * capacity
        self.freq = [0] * capacity
        self.pos = [[-1, -1] for _ in range(capacity)]
        self.maxheap: list[int] = []
        self.minheap: list[int] = []
        self.slot_of: dict[Bigram, int] = {}
        self.free = list(range(capacity - 1, -1, -1))

    @classmethod
    def from_table(cls, table: FrequencyTable, capacity: int | None = None) -> "FrequencyIndex":
        idx = cls(max(capacity or table.capacity, len(table)), table.threshold)
        for b, f in sorted(table.items()):
            idx.insert(b, f)
        return idx

    # ordering: True when slot a belongs above slot b
    def _above(self, h: int, a: int, b: int) -> bool:
        fa, fb = self.freq[a], self.freq[b]
        if h == 0:
            return fa > fb or (fa == fb and self.store[a] < self.store[b])
        return fa < fb or (fa == fb and self.store[a] > self.store[b])

    def _heap(self, h: int) -> list[int]:
        return self.maxheap if h == 0 else self.minheap

    def _swap(self, h: int, i: int, j: int) -> None:
        heap = self._heap(h)
        heap[i], heap[j] = heap[j], heap[i]
        self.pos[heap[i]][h] = i
        self.pos[heap[j]][h] = j

    def _up(self, h: int, i: int) -> None:
        heap = self._heap(h)
        while i > 0:
            parent = (i - 1) // 2
            if not self._above(h, heap[i], heap[parent]):
                break
            self._swap(h, i, parent)
            i = parent

    def _down(self, h: int, i: int) -> None:
        heap = self._heap(h)
        n = len(heap)
        while True:
            best = i
            for child in (2 * i + 1, 2 * i + 2):
                if child < n and self._above(h, heap[child], heap[best]):
                    best = child
            if best == i:
                return
            self._swap(h, i, best)
            i = best

    def _fix(self, slot: int) -> None:
        for h in (0, 1):
            i = self.pos[slot][h]
            self._up(h, i)
            self._down(h, self.pos[slot][h])

    def _delete_slot(self, slot: int) -> None:
        for h in (0, 1):
            heap = self._heap(h)
            i = self.pos[slot][h]
            last = len(heap) - 1
            if i != last:
                self._swap(h, i, last)
            heap.pop()
            if i < len(heap):
                self._up(h, i)
                self._down(h, self.pos[heap[i]][h])
        del self.slot_of[self.store[slot]]
        self.store[slot] = None
        self.pos[slot] = [-1, -1]
        self.free.append(slot)

    def __len__(self) -> int:
        return len(self.slot_of)

    def __contains__(self, b: Bigram) -> bool:
        return b in self.slot_of

    def __repr__(self) -> str:
        return f"FrequencyIndex(capacity={self.capacity}, threshold={self.threshold}, entries={self.entries})"

    @property
    def entries(self) -> dict[Bigram, int]:
        return {b: self.freq[s] for b, s in self.slot_of.items()}

    def items(self):
        return self.entries.items()

    def frequencies(self) -> list[int]:
        return sorted(self.entries.values(), reverse=True)

    def get(self, b: Bigram) -> int | None:
        s = self.slot_of.get(b)
        return None if s is None else self.freq[s]

    lookup = get

    def max_entry(self) -> tuple[Bigram, int] | None:
        if not self.maxheap:
            return None
        s = self.maxheap[0]
        return self.store[s], self.freq[s]

    def min_entry(self) -> tuple[Bigram, int] | None:
        if not self.minheap:
            return None
        s = self.minheap[0]
        return self.store[s], self.freq[s]

    def extract_max(self) -> tuple[Bigram, int] | None:
        top = self.max_entry()
        if top is not None:
            self._delete_slot(self.maxheap[0])
        return top

    def extract_min(self) -> tuple[Bigram, int] | None:
        low = self.min_entry()
        if low is not None:
            self._delete_slot(self.minheap[0])
        return low

    def remove(self, b: Bigram) -> int | None:
        s = self.slot_of.get(b)
        if s is None:
            return None
        f = self.freq[s]
        self._delete_slot(s)
        return f

    def decrement(self, b: Bigram, by: int = 1) -> int | None:
        s = self.slot_of.get(b)
        if s is None:
            return None
        self.freq[s] -= by
        f = self.freq[s]
        if f < self.threshold:
            self._delete_slot(s)
        else:
            self._fix(s)
        return f

    def insert(self, b: Bigram, f: int) -> tuple[Bigram, int] | None:
        """Insert ``b``; when the index is full the minimum (incoming included) is evicted."""
        if b in self.slot_of:
            s = self.slot_of[b]
            self.freq[s] = f
            self._fix(s)
            return None
        evicted = None
        if len(self) == self.capacity:
            low = self.min_entry()
            if low is None or (f, -b[0], -b[1]) < (low[1], -low[0][0], -low[0][1]):
                return b, f
            evicted = self.extract_min()
        s = self.free.pop()
        self.store[s] = b
        self.freq[s] = f
        self.slot_of[b] = s
        for h in (0, 1):
            heap = self._heap(h)
            heap.append(s)
            self.pos[s][h] = len(heap) - 1
            self._up(h, len(heap) - 1)
        return evicted

    def check(self) -> None:
        """Assert heap order and pointer consistency."""
        for h in (0, 1):
            heap = self._heap(h)
            for i, s in enumerate(heap):
                assert self.pos[s][h] == i
                for child in (2 * i + 1, 2 * i + 2):
                    if child < len(heap):
                        assert not self._above(h, heap[child], s)
        assert sorted(self.maxheap) == sorted(self.minheap) == sorted(self.slot_of.values())
        for b, s in self.slot_of.items():
            assert self.store[s] == b


# ---------------------------------------------------------------------------
# strategy schedule
# ---------------------------------------------------------------------------


@dataclass
class HybridSchedule:
    """Chooses the top-d counter per round from the two cost estimates.

    ``bitparallel_cost`` and ``tradeoff_cost`` scale the estimates; the
    defaults assume equal constants and ``calibrate`` measures them.
    """

    bitparallel_cost: float = 1.0
    tradeoff_cost: float = 1.0

    def estimates(self, f_k: int, n: int, tau: int) -> tuple[float, float]:
        log_tau_n = math.log(n) / math.log(tau) if tau > 1 and n > 1 else float(n)
        lglglg = max(1.0, math.log2(max(math.log2(max(math.log2(max(n, 2)), 2)), 2)))
        span = max(n - f_k, 0)
        bit = span * span * lglglg / log_tau_n
        trade = span * n * max(1.0, math.log2(max(f_k, 1))) / max(f_k, 1)
        return self.bitparallel_cost * bit, self.tradeoff_cost * trade

    def pick(self, k: int, f_k: int, n: int, tau: int) -> str:
        if cell_width(tau) * 2 > WORD_BITS or tau >= n:
            return "tradeoff"
        bit, trade = self.estimates(f_k, n, tau)
        return "bitparallel" if bit < trade else "tradeoff"

    @classmethod
    def calibrate(cls, n: int = 2048, sigma: int = 4, seed: int = 0) -> "HybridSchedule":
        """Time one query of each kernel on random text and fit the constants."""
        import time

        from .freq import top_d_tradeoff

        rng = np.random.default_rng(seed)
        arr = rng.integers(0, sigma, n)
        text = PackedText.from_symbols(arr)
        t0 = time.perf_counter()
        top_d_tradeoff(arr, 8)
        trade_s = time.perf_counter() - t0
        t0 = time.perf_counter()
        top_d_bitparallel(text, 8)
        bit_s = time.perf_counter() - t0
        base = cls()
        bit_e, trade_e = base.estimates(8, n, sigma)
        return cls(bit_s / bit_e, trade_s / trade_e)


def hybrid_pick(k: int, f_k: int, n: int, tau: int, ctx: BroadwordContext | None = None,
                schedule: HybridSchedule | None = None) -> str:
    return (schedule or HybridSchedule()).pick(k, f_k, n, tau)
