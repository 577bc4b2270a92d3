"""Step through the first turns of Re-Pair on a short string.

Prints the round-start frequency table, then the text after each turn
together with the table the engine keeps between turns.
"""

from smallrepair import run_repair, top_d_tradeoff
from smallrepair.engine import RoundState

TEXT = "cabaacabcabaacaaabcab"


def show(symbols, sigma, names):
    return "".join(names[s] if s < sigma else f"[X{s - sigma + 1}]" for s in symbols)


def main():
    names = sorted(set(TEXT))
    ids = [names.index(ch) for ch in TEXT]
    sigma = len(names)

    table = top_d_tradeoff(ids, 3)
    print("text       ", TEXT)
    print("round 0 table:", {show(b, sigma, names): f for b, f in sorted(table.items())})
    print("threshold  ", table.threshold)
    print()

    def on_turn(state: RoundState, text):
        entries = {show(b, sigma, names): f for b, f in sorted(state.F.items())}
        print(f"turn {state.turn} (round {state.k}, t={state.t})")
        print("  text ", show(text.tolist(), sigma, names))
        print("  table", entries)

    run = run_repair(ids, on_turn=on_turn)
    print()
    for r in run.records:
        rhs = show(r.replaced, sigma, names)
        print(f"X{r.new_symbol - sigma + 1} -> {rhs:<12} frequency {r.freq}")
    print("final      ", show(run.grammar.final_sequence, sigma, names))
    print("turns", run.turns, "rounds", run.round_count)
    assert run.grammar.expand() == ids


if __name__ == "__main__":
    main()
