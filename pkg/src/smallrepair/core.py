"""Text, grammar and space-accounting primitives shared by every other module.

Symbols are plain non-negative ints.  Terminals occupy ``0 .. sigma-1`` and the
non-terminal created by the ``i``-th rule (0-based) gets id ``sigma + i``.
A bigram is a ``(left, right)`` tuple, so Python's tuple ordering is the
lexicographic tie-break used throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

WORD_BITS = 64

Bigram = tuple[int, int]


class BudgetExceeded(RuntimeError):
    def __init__(self, label: str, charged: int, budget: int):
        super().__init__(f"{label}: charged {charged} bits exceeds budget {budget} bits")
        self.label = label
        self.charged = charged
        self.budget = budget


class CorruptGrammar(ValueError):
    pass


def cell_width(tau: int) -> int:
    """Bits per cell for an alphabet of ``tau`` symbols, never less than one."""
    return max(1, math.ceil(math.log2(tau))) if tau > 1 else 1


def lg(x: float) -> float:
    return math.log2(x) if x > 1 else 1.0


# ---------------------------------------------------------------------------
# PackedText
# ---------------------------------------------------------------------------


class PackedText:
    """Rewriteable text stored as fixed-width cells inside 64-bit words.

    Each word holds ``q = 64 // width`` cells; cell ``j`` of a word lives in
    bits ``[j*width, (j+1)*width)``, so the first text position is the least
    significant cell.  Cells never straddle a word boundary.
    """

    def __init__(self, words: np.ndarray, length: int, width: int, freed: int = 0):
        if not 1 <= width <= WORD_BITS:
            raise ValueError(f"cell width {width} out of range")
        self.words = words
        self.len = int(length)
        self.width = int(width)
        self.freed = int(freed)
        self.dead: np.ndarray | None = None

    @property
    def q(self) -> int:
        return WORD_BITS // self.width

    @property
    def bits(self) -> int:
        """Bits occupied by the live cells."""
        return self.len * self.width

    @classmethod
    def from_symbols(cls, symbols: Iterable[int] | np.ndarray, width: int | None = None) -> "PackedText":
        arr = np.asarray(symbols if isinstance(symbols, np.ndarray) else list(symbols), dtype=np.int64)
        if arr.size and arr.min() < 0:
            raise ValueError("symbols must be non-negative")
        need = cell_width(int(arr.max()) + 1) if arr.size else 1
        if width is None:
            width = need
        elif width < need:
            raise ValueError(f"width {width} cannot hold symbol {int(arr.max())}")
        return cls(pack_cells(arr, width), arr.size, width)

    def to_array(self) -> np.ndarray:
        return unpack_cells(self.words, self.len, self.width)

    def tolist(self) -> list[int]:
        return self.to_array().tolist()

    def __len__(self) -> int:
        return self.len

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.len
        if not 0 <= i < self.len:
            raise IndexError(i)
        word, cell = divmod(i, self.q)
        return (int(self.words[word]) >> (cell * self.width)) & ((1 << self.width) - 1)

    def __repr__(self) -> str:
        return f"PackedText(len={self.len}, width={self.width}, freed={self.freed})"

    def mark_dead(self, positions) -> None:
        if self.dead is None:
            self.dead = np.zeros(self.len, dtype=bool)
        self.dead[np.asarray(positions, dtype=np.int64)] = True

    def widen(self, new_width: int) -> "PackedText":
        return widen(self, new_width)

    def compact(self) -> "PackedText":
        return compact(self)


def pack_cells(values: np.ndarray, width: int) -> np.ndarray:
    q = WORD_BITS // width
    values = np.asarray(values, dtype=np.uint64)
    nwords = -(-values.size // q)
    padded = np.zeros(nwords * q, dtype=np.uint64)
    padded[: values.size] = values
    shifts = (np.arange(q, dtype=np.uint64) * np.uint64(width))
    return np.bitwise_or.reduce(padded.reshape(nwords, q) << shifts, axis=1) if nwords else np.zeros(0, np.uint64)


def unpack_cells(words: np.ndarray, length: int, width: int) -> np.ndarray:
    if length == 0:
        return np.zeros(0, dtype=np.int64)
    q = WORD_BITS // width
    shifts = np.arange(q, dtype=np.uint64) * np.uint64(width)
    mask = np.uint64((1 << width) - 1)
    cells = (words[:, None] >> shifts) & mask
    return cells.ravel()[:length].astype(np.int64)


def widen(text: PackedText, new_width: int) -> PackedText:
    """Re-encode ``text`` with wider cells; the symbol sequence is unchanged."""
    if new_width < text.width:
        raise ValueError(f"cannot narrow cells from {text.width} to {new_width} bits")
    if new_width == text.width:
        return text
    out = PackedText(pack_cells(text.to_array(), new_width), text.len, new_width, text.freed)
    out.dead = text.dead
    return out


def compact(text: PackedText) -> PackedText:
    """Shift live cells to the left, dropping cells marked dead."""
    if text.dead is None or not text.dead.any():
        text.dead = None
        return text
    live = text.to_array()[~text.dead]
    return PackedText(pack_cells(live, text.width), live.size, text.width,
                      text.freed + int(text.dead.sum()))


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------


@dataclass
class Grammar:
    """Straight-line grammar: ``rules[i]`` is the right-hand side of id ``terminal_count + i``.

    ``alphabet`` optionally maps terminal ids back to the values of the
    original input (byte values for files).  ``checksum`` and ``length``
    describe the original input when known.
    """

    terminal_count: int
    rules: list[tuple[int, ...]] = field(default_factory=list)
    final_sequence: list[int] = field(default_factory=list)
    alphabet: list[int] | None = None
    checksum: int | None = None
    length: int | None = None

    @property
    def tau(self) -> int:
        return self.terminal_count + len(self.rules)

    @property
    def size(self) -> int:
        """Total right-hand side symbols plus the final sequence length."""
        return sum(len(r) for r in self.rules) + len(self.final_sequence)

    def is_bigram_grammar(self) -> bool:
        return all(len(r) == 2 for r in self.rules)

    def expand(self) -> list[int]:
        """Terminal-id sequence derived by the grammar."""
        return expand_symbols(self.final_sequence, self.rules, self.terminal_count)

    def original(self) -> list[int]:
        ids = self.expand()
        if self.alphabet is None:
            return ids
        return [self.alphabet[s] for s in ids]


def expand_symbols(seq: Sequence[int], rules: Sequence[Sequence[int]], sigma: int) -> list[int]:
    # Explicit stack: rule chains can be as deep as the rule count.
    for i, rhs in enumerate(rules):
        if len(rhs) < 2:
            raise CorruptGrammar(f"rule {i} has fewer than two symbols")
        for s in rhs:
            if s < 0 or s >= sigma + i:
                raise CorruptGrammar(f"rule {i} references symbol {s} not defined before it")
    tau = sigma + len(rules)
    out: list[int] = []
    append = out.append
    for top in seq:
        if top < 0 or top >= tau:
            raise CorruptGrammar(f"final sequence references undefined symbol {top}")
        if top < sigma:
            append(top)
            continue
        stack = [top]
        while stack:
            s = stack.pop()
            if s < sigma:
                append(s)
            else:
                stack.extend(reversed(rules[s - sigma]))
    return out


# ---------------------------------------------------------------------------
# Capacity policy and space accounting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapacityPolicy:
    c: int = 4
    alpha: float = 2.0
    f0: int = 3

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("c must be a positive integer")
        if self.alpha < 1:
            raise ValueError("alpha must be at least 1")
        if self.f0 < 1:
            raise ValueError("f0 must be positive")

    @staticmethod
    def entry_bits(sigma_next: int, n_i: int) -> int:
        """Bits of one frequency-table entry: two symbols plus a count up to n_i/2."""
        return max(1, math.ceil(lg(sigma_next * sigma_next * max(n_i, 2) / 2)))

    def beta(self, sigma_next: int, n_i: int, n: int) -> float:
        delta = self.entry_bits(sigma_next, n_i)
        return min(delta / cell_width(sigma_next), self.c * delta / lg(n))

    def gamma(self, sigma_next: int, n_i: int, n: int) -> float:
        return 1 + 2 / (5 * self.alpha * self.beta(sigma_next, n_i, n))


class MemoryAccountant:
    """Bit-level ledger of the structures the small-space model charges for.

    Named slots (``text``, ``table``, ``rules``, ``buffer`` ...) hold their
    current bit cost; the total is compared against
    ``max((n/c) lg n, n ceil(lg tau)) + 64 lg n`` where ``tau`` is the symbol
    count known at audit time.
    """

    SLACK_WORDS = 64

    def __init__(self, n: int, c: int = 4, tau: int = 1, strict: bool = True):
        self.n = n
        self.c = c
        self.tau = tau
        self.strict = strict
        self.slots: dict[str, int] = {}
        self.peak_bits = 0
        self.peak_label = ""
        self.breaches: list[BudgetExceeded] = []

    @property
    def budget_bits(self) -> int:
        n = max(self.n, 1)
        return math.floor(max(n / self.c * lg(n), n * cell_width(self.tau)) + self.SLACK_WORDS * lg(n))

    @property
    def charged_bits(self) -> int:
        return sum(self.slots.values())

    def charge(self, name: str, bits: int) -> None:
        self.slots[name] = int(bits)
        if self.charged_bits > self.peak_bits:
            self.peak_bits = self.charged_bits
            self.peak_label = name

    def add(self, name: str, bits: int) -> None:
        self.charge(name, self.slots.get(name, 0) + bits)

    def release(self, name: str) -> None:
        self.slots.pop(name, None)

    def remaining_bits(self) -> int:
        return self.budget_bits - self.charged_bits

    def audit(self, label: str) -> None:
        charged, budget = self.charged_bits, self.budget_bits
        if charged > budget:
            err = BudgetExceeded(label, charged, budget)
            self.breaches.append(err)
            if self.strict:
                raise err


def audit(accountant: MemoryAccountant, label: str) -> None:
    accountant.audit(label)
