"""Re-Pair grammar compression with a bounded working space."""

from .broadword import (
    BroadwordContext,
    FrequencyIndex,
    HybridSchedule,
    packed_bigram_frequency,
    packed_replace,
    top_d_bitparallel,
)
from .codec import FormatError, compress_bytes, decode, decompress, decompress_bytes, encode
from .core import (
    BudgetExceeded,
    CapacityPolicy,
    CorruptGrammar,
    Grammar,
    MemoryAccountant,
    PackedText,
    cell_width,
)
from .engine import RepairRun, RoundInfo, TurnRecord, low_freq_phase, next_capacity, replace_all, run_repair
from .freq import FrequencyTable, all_frequencies, bigram_frequency, top_d_tradeoff
from .variants import (
    MaximalRepeat,
    extend_to_maximal_repeat,
    heuristic_full_table,
    heuristic_majority,
    heuristic_position_table,
    mr_repair,
)

__version__ = "0.1.0"

__all__ = [
    "all_frequencies",
    "bigram_frequency",
    "BroadwordContext",
    "BudgetExceeded",
    "CapacityPolicy",
    "cell_width",
    "compress_bytes",
    "CorruptGrammar",
    "decode",
    "decompress",
    "decompress_bytes",
    "encode",
    "extend_to_maximal_repeat",
    "FormatError",
    "FrequencyIndex",
    "FrequencyTable",
    "Grammar",
    "heuristic_full_table",
    "heuristic_majority",
    "heuristic_position_table",
    "HybridSchedule",
    "low_freq_phase",
    "MaximalRepeat",
    "MemoryAccountant",
    "mr_repair",
    "next_capacity",
    "packed_bigram_frequency",
    "packed_replace",
    "PackedText",
    "RepairRun",
    "replace_all",
    "RoundInfo",
    "run_repair",
    "top_d_bitparallel",
    "top_d_tradeoff",
    "TurnRecord",
]
