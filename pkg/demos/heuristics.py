"""The three shortcuts for finding a most frequent bigram.

The matrix heuristic runs turns while the alphabet is small, the position
table answers one query with a counter per position, and the majority vote
needs only two counters but is only trustworthy on skewed inputs.
"""

import random

from smallrepair import all_frequencies, heuristic_full_table, heuristic_majority, heuristic_position_table
from smallrepair.variants import heuristic_repair

rng = random.Random(1)
skewed = [0] * 120 + [rng.randrange(4) for _ in range(20)]
mixed = [rng.randrange(4) for _ in range(100)]

for name, text in [("skewed", skewed), ("mixed", mixed)]:
    freqs = all_frequencies(text)
    top = max(freqs.values())
    vote = heuristic_majority(text)
    print(f"{name}: most frequent bigram occurs {top} times")
    print(f"  position table -> {heuristic_position_table(text)}")
    print(f"  majority vote  -> {vote.bigram} x{vote.freq}, premise holds: {vote.premise_holds}")

text = [rng.choice([0, 0, 1, 2]) for _ in range(2000)]
for budget in (0, 2_000, 200_000):
    part = heuristic_full_table(text, budget)
    print(f"matrix budget {budget:>7} bits: {len(part.records):>3} turns, stopped: {part.reason}")
run = heuristic_repair(text, 2_000)
assert run.grammar.expand() == text
print("after hand-off to the engine:", len(run.grammar.rules), "rules in total")
