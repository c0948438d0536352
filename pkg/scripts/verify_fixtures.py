#!/usr/bin/env python3
"""Verify the fixture chains and the estimator against known values; prints FIXTURES_OK."""
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

FIXTURES = ROOT / "fixtures"


def fail(message: str) -> None:
    print(f"FAIL: {message}", file=sys.stderr)
    sys.exit(1)


def main() -> None:
    from memwords.estimator import EstimatorParams, brute_force_discrepancy, empirical_discrepancy, estimation_index
    from memwords.markov_oracle import delta_exact, load_chain, memory_word_report
    from memwords.seqcore import Sequence, format_word

    # 1) Oracle on the variable-length chain
    report = memory_word_report(load_chain(FIXTURES / "vlmc_order2.json"))
    words = sorted(format_word(w) for w in report.minimal_words)
    if words != ["00", "1", "10"]:
        fail(f"vlmc_order2 minimal memory words {words!r} != ['00', '1', '10']")
    if report.longest_minimal_length != 2 or report.shortest_memory_length != 1:
        fail(f"vlmc_order2 lengths ({report.longest_minimal_length}, {report.shortest_memory_length}) != (2, 1)")

    # 2) Exact discrepancy of the order-1 chain
    order1 = load_chain(FIXTURES / "order1.json")
    if abs(delta_exact(order1, 0) - 7 / 15) > 1e-12:
        fail(f"order1 delta_0 {delta_exact(order1, 0)!r} != 7/15")

    # 3) Pruned estimator vs brute force on an alternating path
    params = EstimatorParams()
    seq = Sequence([t % 2 for t in range(40)])
    index = estimation_index(seq, seq.horizon, params.gamma)
    for k in range(4):
        pruned = empirical_discrepancy(index, k, params.gamma).value
        brute = brute_force_discrepancy(seq, seq.horizon, k, params.gamma)
        if pruned != brute:
            fail(f"alternating path k={k}: pruned {pruned!r} != brute force {brute!r}")

    print("FIXTURES_OK")


if __name__ == "__main__":
    main()
