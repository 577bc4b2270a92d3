"""Turns and rounds on unary strings of length 2^j.

Every turn halves the text, so a^(2^j) needs j - 1 turns plus one round
for the final pair of frequency two.
"""

import time

from smallrepair import run_repair

print(f"{'n':>8} {'turns':>6} {'rounds':>7} {'peak bits':>10} {'budget':>9} {'seconds':>8}")
for j in range(10, 19):
    n = 1 << j
    t0 = time.perf_counter()
    run = run_repair([0] * n, audit=True)
    dt = time.perf_counter() - t0
    acc = run.accountant
    print(f"{n:>8} {run.turns:>6} {run.round_count:>7} {acc.peak_bits:>10} {acc.budget_bits:>9} {dt:>8.3f}")
