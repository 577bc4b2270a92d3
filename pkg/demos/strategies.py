"""Compare the counting strategies on one input.

All strategies produce a valid grammar; they differ in how the round-start
frequency table is computed and, for mr, in the rules themselves.
"""

import sys
import time
from pathlib import Path

from smallrepair import compress_bytes, decompress_bytes

path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parents[1] / "tests" / "data" / "records.xml"
data = path.read_bytes()[: int(sys.argv[2]) if len(sys.argv) > 2 else 4096]
print(f"{path.name}: {len(data)} bytes")
print(f"{'strategy':<12} {'rules':>6} {'rounds':>7} {'grammar':>8} {'file':>6} {'peak/budget':>12} {'seconds':>8}")
for strategy in ["smallspace", "hybrid", "bitparallel", "naive", "mr"]:
    t0 = time.perf_counter()
    blob, run = compress_bytes(data, strategy)
    dt = time.perf_counter() - t0
    assert decompress_bytes(blob) == data
    acc = run.accountant
    ratio = f"{acc.peak_bits / acc.budget_bits:.3f}" if acc else "-"
    print(f"{strategy:<12} {run.turns:>6} {run.round_count:>7} {run.grammar.size:>8} {len(blob):>6} {ratio:>12} {dt:>8.2f}")
