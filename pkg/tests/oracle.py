"""Independent reference computations used by the tests.

``max_disjoint`` is a dynamic program over occurrence positions (maximum
number of pairwise disjoint occurrences).  ``frequencies`` lists every
pair's occurrence positions and solves interval scheduling on each list; it
is cross-checked against the dynamic program in the tests.
"""

from functools import lru_cache


def max_disjoint(text, pattern) -> int:
    text, pattern = list(text), list(pattern)
    m = len(pattern)
    n = len(text)
    best = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        best[i] = best[i + 1]
        if text[i:i + m] == pattern:
            best[i] = max(best[i], 1 + best[i + m] if i + m <= n else 1)
    return best[0]


def frequencies(text) -> dict:
    where: dict = {}
    for i in range(len(text) - 1):
        where.setdefault((text[i], text[i + 1]), []).append(i)
    out = {}
    for b, positions in where.items():
        count, free = 0, -1
        for p in positions:
            if p >= free:
                count += 1
                free = p + 2
        out[b] = count
    return out


def frequencies_dp(text) -> dict:
    pairs = {(text[i], text[i + 1]) for i in range(len(text) - 1)}
    return {b: max_disjoint(text, b) for b in pairs}


def max_frequency(text) -> int:
    f = frequencies(text)
    return max(f.values(), default=0)


def replace(text, pattern, x):
    out, i, m = [], 0, len(pattern)
    while i < len(text):
        if list(text[i:i + m]) == list(pattern):
            out.append(x)
            i += m
        else:
            out.append(text[i])
            i += 1
    return out


def expand(seq, rules, sigma):
    @lru_cache(maxsize=None)
    def go(s):
        if s < sigma:
            return (s,)
        return sum((go(t) for t in rules[s - sigma]), ())
    return [c for s in seq for c in go(s)]
